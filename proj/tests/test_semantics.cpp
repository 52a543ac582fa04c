#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <kql/error.hpp>
#include <kql/semantics.hpp>
#include <kql/verify.hpp>

#include "fixtures.hpp"

using namespace kql;

namespace {

Formula F(const Structure& s, const std::string& text, int k = 1) { return parse_formula(text, k, s.signature()); }

std::vector<Quantifier> registry(int k) {
    return {Quantifier::diamond("R"), Quantifier::diamond_at_least(2, "R"), Quantifier::all(),
            Quantifier::some(),       Quantifier::cycle("R"),                Quantifier::infinite("R"),
            Quantifier::reach("R"),   Quantifier::count_at_least(1, k)};
}

} // namespace

TEST_CASE("eval on K1") {
    Structure s = fx::k1();
    CHECK(eval(s, fx::at(s, "a"), F(s, "dia[R] P(x1)")));
    CHECK_FALSE(eval(s, fx::at(s, "a"), F(s, "dia[R] dia[R] P(x1)")));
    CHECK(eval(s, fx::at(s, "c"), F(s, "true")));
    CHECK_FALSE(eval(s, fx::at(s, "a"), F(s, "inf[R] true")));
    CHECK(eval(s, fx::at(s, "a"), F(s, "reach[R] !dia[R] true")));
}

TEST_CASE("team semantics") {
    Structure s = fx::k1();
    CHECK(eval_team(s, {fx::at(s, "a"), fx::at(s, "b"), fx::at(s, "c")}, 1, F(s, "true")));
    CHECK(eval_team(s, {fx::at(s, "b")}, 1, F(s, "P(x1)")));
    CHECK(eval_team(s, {}, 1, F(s, "false")));
    CHECK_FALSE(eval_team(s, {fx::at(s, "a"), fx::at(s, "b")}, 1, F(s, "P(x1)")));
}

TEST_CASE("errors") {
    Structure s = fx::k1();
    Formula bad = Formula::atom("Q", {1});
    CHECK_THROWS_AS(eval(s, fx::at(s, "a"), bad), SignatureMismatch);
    CHECK_THROWS_AS(eval(s, fx::at(s, "a"), Formula::atom("P", {2})), Error);
}

TEST_CASE("trace lists subformulas children first") {
    Structure s = fx::k1();
    Evaluator ev(s, 1);
    auto tr = ev.trace(F(s, "dia[R] P(x1)"));
    REQUIRE(tr.size() == 2);
    CHECK(print_formula(tr[0].first) == "P(x1)");
    CHECK(tr[0].second == fx::set_of(s, 1, {"b"}));
    CHECK(tr[1].second == fx::set_of(s, 1, {"a"}));
}

TEST_CASE("type realization") {
    Structure s = fx::k1();
    auto dia = Quantifier::diamond("R");
    auto w = check_type_realization(s, fx::at(s, "a"), dia, {F(s, "P(x1)")});
    REQUIRE(w);
    CHECK(*w == fx::set_of(s, 1, {"b"}));
    CHECK_FALSE(check_type_realization(s, fx::at(s, "a"), dia, {F(s, "!P(x1)")}));
    CHECK(check_type_realization(s, fx::at(s, "a"), dia, {}).has_value());
    CHECK_FALSE(check_type_realization(s, fx::at(s, "c"), dia, {}).has_value());
}

TEST_CASE("property: evaluator agrees with oracle mode") {
    std::mt19937_64 rng(41);
    Signature sig{{"P", 1}, {"R", 2}};
    for (int i = 0; i < 200; ++i) {
        std::size_t n = 1 + rng() % 4;
        int k = n <= 2 ? 1 + static_cast<int>(rng() % 2) : 1;
        Structure s = random_structure(rng, sig, n);
        Evaluator fast(s, k), slow(s, k, true);
        for (int j = 0; j < 5; ++j) {
            Formula f = random_formula(rng, sig, k, registry(k), 3);
            CHECK(fast.extension(f) == slow.extension(f));
        }
    }
}

TEST_CASE("property: isomorphism invariance, upward monotonicity, finite saturation") {
    std::mt19937_64 rng(43);
    Signature sig{{"P", 1}, {"R", 2}};
    for (int i = 0; i < 200; ++i) {
        std::size_t n = 1 + rng() % 5;
        int k = 1 + static_cast<int>(rng() % 2);
        Structure s = random_structure(rng, sig, n);
        auto perm = fx::random_perm(rng, n);
        Structure t = permute(s, perm);
        Evaluator es(s, k), et(t, k);
        auto reg = registry(k);
        for (int j = 0; j < 4; ++j) {
            Formula f = random_formula(rng, sig, k, reg, 2);
            const TupleSet& ext = es.extension(f);
            CHECK(fx::map_set(es.space(), perm, ext) == et.extension(f));

            const Quantifier& q = reg[rng() % reg.size()];
            TupleCode a = rng() % es.space().size();
            for (const auto& w : q.minimal_witnesses(s, es.space(), a))
                if (es.holds_on_team(w, f)) CHECK(es.holds(a, Formula::quant(q, f)));

            Formula g = random_formula(rng, sig, k, reg, 1);
            std::vector<Formula> psi{f, g};
            Assignment alpha = es.space().decode(a);
            if (es.holds(a, Formula::quant(q, Formula::conjunction(psi)))) {
                auto w = check_type_realization(s, alpha, q, psi);
                REQUIRE(w);
                CHECK(q.is_witness(s, es.space(), a, *w));
                CHECK(es.holds_on_team(*w, f));
                CHECK(es.holds_on_team(*w, g));
            } else {
                CHECK_FALSE(check_type_realization(s, alpha, q, psi));
            }
        }
    }
}
