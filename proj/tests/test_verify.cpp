#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include <kql/error.hpp>
#include <kql/game.hpp>
#include <kql/verify.hpp>

using namespace kql;

TEST_CASE("corpus validation") {
    Corpus c;
    CHECK_NOTHROW(c.validate());
    c.mutant = "drop-sideways";
    CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("structure generator is deterministic and starts with the fixed corpus") {
    Corpus c;
    c.count = 30;
    auto a = gen_structures(c);
    auto b = gen_structures(c);
    CHECK(a.size() == 30);
    CHECK(a == b);
    auto fixed = fixed_structures();
    REQUIRE(fixed.size() <= a.size());
    for (std::size_t i = 0; i < fixed.size(); ++i) CHECK(a[i] == fixed[i]);
    CHECK(fixed[0].size() == 1);
    CHECK(fixed[0].relation("R").size() == 0);
    c.seed = 2;
    CHECK_FALSE(gen_structures(c) == a);
}

TEST_CASE("instances are reproducible") {
    Corpus c;
    for (int i = 0; i < 10; ++i) {
        Instance x = gen_instance(c, i);
        Instance y = gen_instance(c, i);
        CHECK(x.left == y.left);
        CHECK(x.right == y.right);
        CHECK(x.k == y.k);
        CHECK(x.left.signature() == x.right.signature());
        CHECK(x.k <= c.max_k);
        CHECK_FALSE(x.registry.empty());
    }
}

TEST_CASE("separating family") {
    auto f = gen_fig1_family(1);
    CHECK(f.left.size() == 4);
    CHECK(f.right.size() == 7);
    GameArena arena(f.left, f.right, 1, {Quantifier::diamond("R")});
    auto rel = bisim(arena);
    int lv = rel.level(arena.left_space().encode(f.alpha), arena.right_space().encode(f.beta));
    CHECK(lv >= 0);
    CHECK(lv != BisimRelation::kInfinite);
}

TEST_CASE("suites pass on small corpora") {
    Corpus c;
    c.count = 12;
    for (const auto& name : suite_names()) {
        if (name == "minimal-witness") continue;
        auto r = run_suite(name, c);
        CHECK_MESSAGE(r.passed, name);
        CHECK(r.instances > 0);
        CHECK(r.to_json()["suite"] == name);
    }
    CHECK_THROWS_AS(run_suite("nope", c), ValidationError);
}

TEST_CASE("a weakened construction is caught and reproducible") {
    Corpus c;
    c.count = 40;
    c.mutant = "drop-back";
    auto r = run_suite("ef", c);
    REQUIRE_FALSE(r.passed);
    REQUIRE(r.counterexample);
    auto cex = *r.counterexample;
    std::string repro = cex["reproduce"];
    CHECK(repro.find("kql verify ef") == 0);
    CHECK(repro.find("--mutant drop-back") != std::string::npos);
    CHECK(repro.find("--only") != std::string::npos);

    Corpus one = c;
    one.only = cex["instance"].get<int>();
    auto again = run_suite("ef", one);
    CHECK_FALSE(again.passed);
    CHECK(again.instances == 1);

    auto dir = std::filesystem::temp_directory_path() / "kql_test_cex";
    std::filesystem::remove_all(dir);
    std::string cmd = dump_counterexample(cex, dir.string());
    CHECK(std::filesystem::exists(dir / "left.json"));
    CHECK(std::filesystem::exists(dir / "right.json"));
    CHECK(std::filesystem::exists(dir / "counterexample.json"));
    CHECK(cmd.find("kql bisim") == 0);
    load_structure_file((dir / "left.json").string());
    std::filesystem::remove_all(dir);
}
