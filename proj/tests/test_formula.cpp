#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <kql/error.hpp>
#include <kql/formula.hpp>
#include <kql/verify.hpp>

#include "fixtures.hpp"

using namespace kql;

namespace {
const Signature kSig{{"P", 1}, {"R", 2}};
}

TEST_CASE("parse and print") {
    Formula f = parse_formula("dia[R] P(x1)", 1, kSig);
    CHECK(f == Formula::quant(Quantifier::diamond("R"), Formula::atom("P", {1})));
    CHECK(print_formula(f) == "dia[R] P(x1)");
    CHECK(print_formula(Formula::top()) == "true");
    CHECK(print_formula(parse_formula("(P(x1) & (R(x1,x2) & true))", 2, kSig)) == "(P(x1) & (R(x1,x2) & true))");
}

TEST_CASE("derived connectives desugar") {
    Formula p = Formula::atom("P", {1});
    CHECK(parse_formula("(P(x1) | !P(x1))", 1, kSig) ==
          Formula::negate(Formula::conj(Formula::negate(p), Formula::negate(Formula::negate(p)))));
    CHECK(parse_formula("false", 1, kSig) == Formula::negate(Formula::top()));
    CHECK(parse_formula("(P(x1) -> true)", 1, kSig) == Formula::negate(Formula::conj(p, Formula::negate(Formula::top()))));
    CHECK(parse_formula("(P(x1) <-> P(x1))", 1, kSig) == Formula::iff(p, p));
    CHECK(Formula::conjunction({}) == Formula::top());
    CHECK(Formula::disjunction({}) == Formula::bottom());
}

TEST_CASE("parse errors") {
    CHECK_THROWS_AS(parse_formula("dia[S] true", 1, kSig), SignatureMismatch);
    CHECK_THROWS_AS(parse_formula("Q(x1)", 1, kSig), SignatureMismatch);
    CHECK_THROWS_AS(parse_formula("R(x1)", 1, kSig), Error);
    CHECK_THROWS_AS(parse_formula("P(x3)", 2, kSig), Error);
    CHECK_THROWS_AS(parse_formula("(P(x1) & P(x1)", 1, kSig), ParseError);
    CHECK_THROWS_AS(parse_formula("P(x1) P(x1)", 1, kSig), ParseError);
    CHECK_THROWS_AS(parse_formula("ex>=1[x2] true", 1, kSig), Error);
}

TEST_CASE("formula file lines") {
    auto fs = parse_formula_lines("# comment\ntrue\n\n  dia[R] P(x1)  # tail\n", 1, kSig);
    REQUIRE(fs.size() == 2);
    CHECK(quantifier_rank(fs[1]) == 1);
}

TEST_CASE("quantifier rank") {
    CHECK(quantifier_rank(parse_formula("true", 1, kSig)) == 0);
    CHECK(quantifier_rank(parse_formula("dia[R] dia[R] P(x1)", 1, kSig)) == 2);
    CHECK(quantifier_rank(parse_formula("(P(x1) & dia[R] true)", 1, kSig)) == 1);
}

TEST_CASE("property: print/parse round trip and rank recursion") {
    std::mt19937_64 rng(3);
    Signature sig{{"P", 1}, {"R", 2}, {"S", 2}};
    std::vector<Quantifier> reg{Quantifier::diamond("R"), Quantifier::diamond_at_least(2, "S"), Quantifier::all(),
                                Quantifier::some(),       Quantifier::cycle("R"),                Quantifier::infinite("S"),
                                Quantifier::reach("R"),   Quantifier::count_at_least(3, 2)};
    for (int i = 0; i < 500; ++i) {
        Formula f = random_formula(rng, sig, 2, reg, 3);
        std::string text = print_formula(f);
        Formula g = parse_formula(text, 2, sig);
        CHECK(g == f);
        CHECK(print_formula(g) == text);
        CHECK(quantifier_rank(f) <= 3);
        CHECK(quantifier_rank(Formula::negate(f)) == quantifier_rank(f));
        Formula h = random_formula(rng, sig, 2, reg, 2);
        CHECK(quantifier_rank(Formula::conj(f, h)) == std::max(quantifier_rank(f), quantifier_rank(h)));
    }
}

TEST_CASE("quantifier syntax round trip") {
    for (const char* q : {"dia[R]", "dia>=2[R]", "all", "some", "cyc[R]", "inf[R]", "reach[R]", "ex>=3[x2]"})
        CHECK(Quantifier::parse(q).to_string() == q);
    CHECK(format_quantifier_list(parse_quantifier_list("dia[R], all")) == "dia[R],all");
    CHECK_THROWS_AS(Quantifier::parse("dia>=0[R]"), Error);
    CHECK_THROWS_AS(Quantifier::parse("box[R]"), Error);
}

TEST_CASE("variable tuples") {
    auto ts = variable_tuples(2, 2);
    REQUIRE(ts.size() == 4);
    CHECK(ts[1] == std::vector<int>{1, 2});
}
