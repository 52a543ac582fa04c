#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <kql/charform.hpp>
#include <kql/error.hpp>
#include <kql/game.hpp>
#include <kql/verify.hpp>

#include "fixtures.hpp"

using namespace kql;

namespace {

const std::vector<Quantifier> kDia{Quantifier::diamond("R")};

TupleSet extension(const Structure& s, const Formula& f) {
    Evaluator ev(s, 1);
    return ev.extension(f);
}

} // namespace

TEST_CASE("chi^0 on K1 is the atomic type") {
    Structure s = fx::k1();
    CharContext ctx({s}, kDia, 1);
    Formula f = chi(ctx, s, fx::at(s, "a"), 0);
    CHECK(quantifier_rank(f) == 0);
    CHECK(extension(s, f) == fx::set_of(s, 1, {"a", "c"}));
    Formula expected = parse_formula("(!P(x1) & !R(x1,x1))", 1, s.signature());
    CHECK(extension(s, f) == extension(s, expected));
}

TEST_CASE("chi^1 on K1 separates a from c") {
    Structure s = fx::k1();
    CharContext ctx({s}, kDia, 1);
    Formula f = chi(ctx, s, fx::at(s, "a"), 1);
    CHECK(quantifier_rank(f) <= 1);
    CHECK(extension(s, f) == fx::set_of(s, 1, {"a"}));
    CHECK(check_char(ctx, s, fx::at(s, "a"), s, fx::at(s, "a"), 1));
    CHECK_FALSE(check_char(ctx, s, fx::at(s, "a"), s, fx::at(s, "c"), 1));
    CHECK(check_char(ctx, s, fx::at(s, "a"), s, fx::at(s, "c"), 0));
    CHECK(ctx.class_count(0) == 2);
    CHECK(ctx.class_count(1) == 3);
}

TEST_CASE("normal forms") {
    Structure s = fx::k1();
    CharContext ctx({s}, kDia, 1);
    for (const char* text : {"true", "false", "dia[R] P(x1)", "!dia[R] true", "(P(x1) | dia[R] dia[R] true)"}) {
        Formula f = parse_formula(text, 1, s.signature());
        Formula nf = normal_form(ctx, f);
        CHECK(extension(s, nf) == extension(s, f));
        CHECK(quantifier_rank(nf) <= quantifier_rank(f));
    }
    CHECK(extension(s, normal_form(ctx, Formula::bottom())).empty());
}

TEST_CASE("distinguishing formulas") {
    Structure s = fx::k1();
    CharContext ctx({s}, kDia, 1);
    auto d = distinguishing_formula(ctx, s, fx::at(s, "a"), s, fx::at(s, "c"));
    REQUIRE(d);
    CHECK(quantifier_rank(*d) == 1);
    CHECK(eval(s, fx::at(s, "a"), *d));
    CHECK_FALSE(eval(s, fx::at(s, "c"), *d));
    CHECK_FALSE(distinguishing_formula(ctx, s, fx::at(s, "a"), s, fx::at(s, "a")));
    auto d0 = distinguishing_formula(ctx, s, fx::at(s, "a"), s, fx::at(s, "b"));
    REQUIRE(d0);
    CHECK(quantifier_rank(*d0) == 0);
}

TEST_CASE("context errors") {
    Structure s = fx::k1();
    CharContext ctx({s}, kDia, 1);
    try {
        normal_form(ctx, parse_formula("all P(x1)", 1, s.signature()));
        FAIL("expected an error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("registry") != std::string::npos);
    }
    Structure other = reduct(s, Signature{{"R", 2}});
    CHECK_THROWS_AS(CharContext({s, other}, kDia, 1), SignatureMismatch);
    Structure loop = load_structure(R"({"signature": {"R": 2, "P": 1}, "universe": ["u"], "relations": {"R": [["u","u"]], "P": []}})");
    try {
        chi(ctx, loop, {0}, 1);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == "structure_outside_context");
    }
    CHECK_THROWS_AS(chi(ctx, s, fx::at(s, "a"), -1), ValidationError);
}

TEST_CASE("property: characteristic formulas match the game relation") {
    Corpus c;
    c.max_rank = 2;
    for (int i = 0; i < 60; ++i) {
        Instance inst = gen_instance(c, i);
        GameArena arena(inst.left, inst.right, inst.k, inst.registry);
        auto rel = bisim_rank(arena, 2);
        CharContext ctx({inst.left, inst.right}, inst.registry, inst.k);
        std::mt19937_64 rng(static_cast<std::uint64_t>(i));
        for (int t = 0; t < 6; ++t) {
            TupleCode a = rng() % arena.left_space().size();
            TupleCode b = rng() % arena.right_space().size();
            auto alpha = arena.left_space().decode(a);
            auto beta = arena.right_space().decode(b);
            for (int q = 0; q <= 2; ++q) {
                Formula f = chi(ctx, inst.left, alpha, q);
                CHECK(quantifier_rank(f) <= q);
                CHECK(eval(inst.left, alpha, f));
                CHECK(check_char(ctx, inst.left, alpha, inst.right, beta, q) == rel.contains(a, b, q));
            }
        }
    }
}

TEST_CASE("property: weakened formulas are detected") {
    Corpus c;
    c.max_rank = 2;
    bool caught = false;
    for (int i = 0; i < 60 && !caught; ++i) {
        Instance inst = gen_instance(c, i);
        GameArena arena(inst.left, inst.right, inst.k, inst.registry);
        auto rel = bisim_rank(arena, 2);
        CharContext weak({inst.left, inst.right}, inst.registry, inst.k, CharOptions{true, false});
        for (TupleCode a = 0; a < arena.left_space().size() && !caught; ++a)
            for (TupleCode b = 0; b < arena.right_space().size() && !caught; ++b)
                for (int q = 1; q <= 2; ++q)
                    if (check_char(weak, inst.left, arena.left_space().decode(a), inst.right,
                                   arena.right_space().decode(b), q) != rel.contains(a, b, q))
                        caught = true;
    }
    CHECK(caught);
}
