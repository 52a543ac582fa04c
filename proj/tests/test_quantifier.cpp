#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <kql/error.hpp>
#include <kql/quantifier.hpp>
#include <kql/verify.hpp>

#include "fixtures.hpp"

using namespace kql;

namespace {

std::vector<Quantifier> all_families(int k) {
    return {Quantifier::diamond("R"), Quantifier::diamond_at_least(2, "R"), Quantifier::all(),
            Quantifier::some(),       Quantifier::cycle("R"),                Quantifier::infinite("R"),
            Quantifier::reach("R"),   Quantifier::count_at_least(2, k)};
}

} // namespace

TEST_CASE("is_witness on K1") {
    Structure s = fx::k1();
    TupleSpace sp(3, 1);
    auto a = fx::code(s, "a");
    CHECK(Quantifier::diamond("R").is_witness(s, sp, a, fx::set_of(s, 1, {"b"})));
    CHECK_FALSE(Quantifier::diamond("R").is_witness(s, sp, a, fx::set_of(s, 1, {"b", "c"})));
    for (TupleCode x = 0; x < 3; ++x)
        for (std::uint32_t m = 0; m < 8; ++m) {
            TupleSet w = sp.empty_set();
            for (TupleCode y = 0; y < 3; ++y)
                if ((m >> y) & 1U) w.insert(y);
            CHECK_FALSE(Quantifier::infinite("R").is_witness(s, sp, x, w));
        }
}

TEST_CASE("minimal witnesses on K1") {
    Structure s = fx::k1();
    TupleSpace sp(3, 1);
    auto a = fx::code(s, "a");
    auto dia = Quantifier::diamond("R").minimal_witnesses(s, sp, a);
    REQUIRE(dia.size() == 1);
    CHECK(dia[0] == fx::set_of(s, 1, {"b"}));
    auto all = Quantifier::all().minimal_witnesses(s, sp, a);
    REQUIRE(all.size() == 1);
    CHECK(all[0] == sp.full_set());
    CHECK(Quantifier::count_at_least(2, 1).minimal_witnesses(s, sp, a).size() == 3);
    CHECK(Quantifier::infinite("R").minimal_witnesses(s, sp, a).empty());
    CHECK(oracle::minimal_witnesses(Quantifier::count_at_least(2, 1), s, sp, a).size() == 3);
}

TEST_CASE("admits_witness_within on K1") {
    Structure s = fx::k1();
    TupleSpace sp(3, 1);
    auto a = fx::code(s, "a");
    CHECK(Quantifier::diamond("R").admits_witness_within(s, sp, a, fx::set_of(s, 1, {"b"})));
    CHECK(Quantifier::reach("R").admits_witness_within(s, sp, a, fx::set_of(s, 1, {"c"})));
    CHECK(Quantifier::reach("R").admits_witness_within(s, sp, a, fx::set_of(s, 1, {"a"})));
    CHECK_FALSE(Quantifier::cycle("R").admits_witness_within(s, sp, a, sp.full_set()));
    CHECK(oracle::admits_witness_within(Quantifier::reach("R"), s, sp, a, fx::set_of(s, 1, {"c"})));
    CHECK_FALSE(oracle::admits_witness_within(Quantifier::cycle("R"), s, sp, a, sp.full_set()));
}

TEST_CASE("cycles are simple and of length at least 3") {
    Structure two = load_structure(R"({"signature": {"R": 2}, "universe": ["a","b"],
        "relations": {"R": [["a","b"],["b","a"]]}})");
    TupleSpace sp2(2, 1);
    CHECK_FALSE(Quantifier::cycle("R").admits_witness_within(two, sp2, 0, sp2.full_set()));
    Structure tri = load_structure(R"({"signature": {"R": 2}, "universe": ["a","b","c","d"],
        "relations": {"R": [["a","b"],["b","c"],["c","a"],["c","d"]]}})");
    TupleSpace sp(4, 1);
    auto w = Quantifier::cycle("R").minimal_witnesses(tri, sp, 3);  // ignores alpha
    REQUIRE(w.size() == 1);
    CHECK(w[0] == fx::set_of(tri, 1, {"a", "b", "c"}));
}

TEST_CASE("lifted families at k = 2") {
    Structure s = fx::k1();
    TupleSpace sp(3, 2);
    auto ab = fx::code(s, "a,b");
    auto dia = Quantifier::diamond("R").minimal_witnesses(s, sp, ab);
    REQUIRE(dia.size() == 1);
    CHECK(dia[0] == fx::set_of(s, 2, {"b,b"}));
    auto ex = Quantifier::count_at_least(1, 2).minimal_witnesses(s, sp, ab);
    CHECK(ex.size() == 3);
    CHECK(ex[0] == fx::set_of(s, 2, {"a,a"}));
}

TEST_CASE("signature checks") {
    Structure s = load_structure(R"({"signature": {"P": 1}, "universe": ["a"], "relations": {}})");
    TupleSpace sp(1, 1);
    CHECK_THROWS_AS(Quantifier::diamond("R").minimal_witnesses(s, sp, 0), SignatureMismatch);
    CHECK_THROWS_AS(Quantifier::count_at_least(1, 2).check(s.signature(), 1), ValidationError);
    CHECK(applicable({Quantifier::diamond("R"), Quantifier::all()}, s.signature()).size() == 1);
    std::mt19937_64 rng(1);
    Structure big = random_structure(rng, Signature{{"R", 2}}, 5);
    CHECK_THROWS_AS(oracle::all_witnesses(Quantifier::some(), big, TupleSpace(5, 1), 0), SizeGuardError);
}

TEST_CASE("property: consistency, minimality and monotonicity against the oracle") {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 300; ++i) {
        std::size_t n = 1 + rng() % 4;
        int k = n <= 2 ? 1 + static_cast<int>(rng() % 2) : 1;
        Structure s = random_structure(rng, Signature{{"R", 2}}, n);
        TupleSpace sp(n, k);
        TupleCode a = rng() % sp.size();
        for (const auto& q : all_families(k)) {
            auto mins = q.minimal_witnesses(s, sp, a);
            auto everything = oracle::all_witnesses(q, s, sp, a);
            for (const auto& w : mins) {
                CHECK(q.is_witness(s, sp, a, w));
                for (const auto& v : mins) CHECK((v == w || !v.is_subset_of(w)));
            }
            for (const auto& w : everything)
                CHECK(std::any_of(mins.begin(), mins.end(), [&](const TupleSet& m) { return m.is_subset_of(w); }));
            TupleSet e = sp.empty_set();
            for (TupleCode c = 0; c < sp.size(); ++c)
                if (rng() & 1U) e.insert(c);
            bool admits = q.admits_witness_within(s, sp, a, e);
            bool via_min = std::any_of(mins.begin(), mins.end(), [&](const TupleSet& m) { return m.is_subset_of(e); });
            CHECK(admits == via_min);
            CHECK(admits == oracle::admits_witness_within(q, s, sp, a, e));
            TupleSet bigger = e;
            for (TupleCode c = 0; c < sp.size(); ++c)
                if (rng() & 1U) bigger.insert(c);
            if (admits) CHECK(q.admits_witness_within(s, sp, a, bigger));
        }
    }
}

TEST_CASE("property: isomorphism equivariance and reduct independence") {
    std::mt19937_64 rng(23);
    for (int i = 0; i < 200; ++i) {
        std::size_t n = 1 + rng() % 5;
        int k = 1 + static_cast<int>(rng() % 2);
        Structure s = random_structure(rng, Signature{{"P", 1}, {"R", 2}}, n);
        auto perm = fx::random_perm(rng, n);
        Structure t = permute(s, perm);
        Structure r = reduct(s, Signature{{"R", 2}});
        TupleSpace sp(n, k);
        TupleCode a = rng() % sp.size();
        TupleCode pa = fx::map_code(sp, perm, a);
        TupleSet e = sp.empty_set();
        for (TupleCode c = 0; c < sp.size(); ++c)
            if (rng() & 1U) e.insert(c);
        for (const auto& q : all_families(k)) {
            CHECK(q.admits_witness_within(s, sp, a, e) == q.admits_witness_within(t, sp, pa, fx::map_set(sp, perm, e)));
            CHECK(q.admits_witness_within(s, sp, a, e) == q.admits_witness_within(r, sp, a, e));
            auto ms = q.minimal_witnesses(s, sp, a);
            auto mt = q.minimal_witnesses(t, sp, pa);
            REQUIRE(ms.size() == mt.size());
            for (const auto& w : ms) {
                auto img = fx::map_set(sp, perm, w);
                CHECK(std::find(mt.begin(), mt.end(), img) != mt.end());
                CHECK(q.is_witness(t, sp, pa, img));
            }
        }
    }
}
