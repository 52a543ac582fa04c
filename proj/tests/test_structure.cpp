#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <kql/error.hpp>
#include <kql/structure.hpp>
#include <kql/verify.hpp>

#include "fixtures.hpp"

using namespace kql;

TEST_CASE("load K1") {
    Structure s = fx::k1();
    CHECK(s.size() == 3);
    CHECK(s.signature().size() == 2);
    CHECK(s.holds("R", std::vector<Element>{0, 1}));
    CHECK(s.holds("P", std::vector<Element>{1}));
    CHECK_FALSE(s.holds("P", std::vector<Element>{0}));
}

TEST_CASE("load errors") {
    CHECK_THROWS_AS(load_structure(R"({"signature": {"R": 2}, "universe": ["a"], )"), ParseError);
    try {
        load_structure("{\n  \"signature\": {\"R\": 2},\n  oops\n}");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(load_structure(R"({"signature": {"R": 2}, "universe": ["a"], "relations": {"R": [["a","z"]]}})"),
                    ValidationError);
    CHECK_THROWS_AS(load_structure(R"({"signature": {"R": 2}, "universe": ["a"], "relations": {"R": [["a"]]}})"),
                    ValidationError);
    CHECK_THROWS_AS(load_structure(R"({"signature": {"R": 2}, "universe": [], "relations": {}})"), ValidationError);
    CHECK_THROWS_AS(load_structure(R"({"signature": {"R": 2}, "universe": ["a","a"], "relations": {}})"),
                    ValidationError);
}

TEST_CASE("equality flag") {
    Structure s = load_structure(fx::kK1, LoadOptions{true});
    CHECK(s.signature().arity("eq") == 2);
    CHECK(s.relation("eq").size() == 3);
}

TEST_CASE("apply_bijection") {
    Structure s = fx::k1();
    CHECK(apply_bijection(s, std::map<std::string, std::string>{{"a", "a"}, {"b", "b"}, {"c", "c"}}) == s);
    Structure t = apply_bijection(s, std::map<std::string, std::string>{{"a", "c"}, {"b", "b"}, {"c", "a"}});
    CHECK(t.holds("R", std::vector<Element>{t.element("c"), t.element("b")}));
    CHECK(t.holds("R", std::vector<Element>{t.element("b"), t.element("a")}));
    CHECK(t.relation("R").size() == 2);
    CHECK(t.holds("P", std::vector<Element>{t.element("b")}));
    CHECK_THROWS_AS(apply_bijection(s, std::map<std::string, std::string>{{"a", "b"}, {"b", "b"}, {"c", "c"}}),
                    ValidationError);
}

TEST_CASE("reduct") {
    Structure s = fx::k1();
    Structure r = reduct(s, Signature{{"R", 2}});
    CHECK_FALSE(r.signature().contains("P"));
    CHECK(r.relation("R") == s.relation("R"));
    CHECK(reduct(s, Signature{}).signature().empty());
    CHECK_THROWS_AS(reduct(s, Signature{{"S", 1}}), SignatureMismatch);
    CHECK_THROWS_AS(reduct(s, Signature{{"P", 2}}), SignatureMismatch);
}

TEST_CASE("are_isomorphic") {
    Structure s = fx::k1();
    auto id = are_isomorphic(s, s);
    REQUIRE(id);
    CHECK(*id == std::vector<Element>{0, 1, 2});
    Structure swapped = apply_bijection(s, std::map<std::string, std::string>{{"a", "c"}, {"b", "b"}, {"c", "a"}});
    CHECK(are_isomorphic(s, swapped));
    Structure no_p = load_structure(R"({"signature": {"R": 2, "P": 1}, "universe": ["a","b","c"],
        "relations": {"R": [["a","b"],["b","c"]], "P": []}})");
    CHECK_FALSE(are_isomorphic(s, no_p));
}

TEST_CASE("property: permutation and renaming preserve isomorphism, reduct commutes") {
    std::mt19937_64 rng(5);
    Signature sig{{"P", 1}, {"R", 2}, {"S", 2}};
    for (int i = 0; i < 200; ++i) {
        Structure s = random_structure(rng, sig, 1 + rng() % 5);
        auto perm = fx::random_perm(rng, s.size());
        Structure t = permute(s, perm);
        auto iso = are_isomorphic(s, t);
        REQUIRE(iso);
        for (const auto& [rel, arity] : sig.relations())
            for (const auto& tup : s.relation(rel).tuples()) {
                std::vector<Element> img;
                for (auto e : tup) img.push_back((*iso)[e]);
                CHECK(t.holds(rel, img));
            }
        std::vector<std::string> names;
        for (std::size_t j = 0; j < s.size(); ++j) names.push_back("n" + std::to_string(perm[j]));
        Structure renamed = apply_bijection(s, names);
        CHECK(are_isomorphic(renamed, t));
        Signature sub{{"R", 2}};
        CHECK(reduct(permute(s, perm), sub) == permute(reduct(s, sub), perm));
    }
}

TEST_CASE("property: serialize round-trip") {
    std::mt19937_64 rng(9);
    for (int i = 0; i < 100; ++i) {
        Structure s = random_structure(rng, Signature{{"P", 1}, {"R", 2}, {"T", 3}}, 1 + rng() % 4);
        CHECK(load_structure(serialize_structure(s)) == s);
    }
}

TEST_CASE("tuple space encoding is lexicographic") {
    TupleSpace sp(3, 2);
    CHECK(sp.size() == 9);
    CHECK(sp.encode(std::vector<Element>{1, 2}) == 5);
    CHECK(sp.decode(5) == std::vector<Element>{1, 2});
    CHECK(sp.at(5, 0) == 1);
    CHECK(sp.with(5, 1, 0) == 3);
    Structure s = fx::k1();
    CHECK(parse_assignment(s, "a, c", 2) == Assignment{0, 2});
    CHECK_THROWS_AS(parse_assignment(s, "a", 2), ValidationError);
    CHECK_THROWS_AS(parse_assignment(s, "z", 1), ValidationError);
}
