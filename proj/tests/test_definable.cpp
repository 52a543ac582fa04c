#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <kql/definable.hpp>
#include <kql/error.hpp>
#include <kql/semantics.hpp>
#include <kql/verify.hpp>

#include "fixtures.hpp"

using namespace kql;

namespace {

bool has_pair(const std::vector<DefinableSetPair>& ps, const TupleSet& l, const TupleSet& r) {
    return std::any_of(ps.begin(), ps.end(), [&](const DefinableSetPair& p) { return p.left == l && p.right == r; });
}

} // namespace

TEST_CASE("definable sets of K1") {
    Structure s = fx::k1();
    std::vector<Quantifier> dia{Quantifier::diamond("R")};
    auto p = fx::set_of(s, 1, {"b"}), np = fx::set_of(s, 1, {"a", "c"}), a = fx::set_of(s, 1, {"a"});
    auto l0 = definable_sets(s, s, 1, 0, dia);
    CHECK(has_pair(l0, p, p));
    CHECK(has_pair(l0, np, np));
    CHECK_FALSE(has_pair(l0, a, a));
    auto l1 = definable_sets(s, s, 1, 1, dia);
    CHECK(has_pair(l1, a, a));
    CHECK(l0.size() <= (std::size_t{1} << 6));
    for (const auto& pr : l1) CHECK(pr.rank <= 1);
}

TEST_CASE("rank oracle on K1") {
    Structure s = fx::k1();
    std::vector<Quantifier> dia{Quantifier::diamond("R")};
    for (int q = 0; q <= 3; ++q) CHECK(equiv_rank_oracle(s, fx::at(s, "a"), s, fx::at(s, "a"), q, dia));
    CHECK_FALSE(equiv_rank_oracle(s, fx::at(s, "a"), s, fx::at(s, "c"), 1, dia));
    Structure p_only = reduct(s, Signature{{"P", 1}});
    CHECK(equiv_rank_oracle(p_only, fx::at(p_only, "a"), p_only, fx::at(p_only, "c"), 0, {}));
}

TEST_CASE("signature mismatch") {
    Structure s = fx::k1();
    Structure r = reduct(s, Signature{{"R", 2}});
    CHECK_THROWS_AS(DefinableAlgebra(s, r, 1, {}), SignatureMismatch);
}

TEST_CASE("property: both refinement routes agree; levels refine; block formulas define blocks") {
    Corpus c;
    for (int i = 0; i < 60; ++i) {
        Instance inst = gen_instance(c, i);
        DefinableAlgebra brute(inst.left, inst.right, inst.k, inst.registry, DefinableAlgebra::Route::Brute);
        DefinableAlgebra anti(inst.left, inst.right, inst.k, inst.registry, DefinableAlgebra::Route::Antichain, true);
        Evaluator ea(inst.left, inst.k), eb(inst.right, inst.k);
        for (int q = 0; q <= 3; ++q) {
            if (brute.block_count(q) > 12) break;
            const auto& bb = brute.blocks(q);
            const auto& ba = anti.blocks(q);
            CHECK(bb == ba);
            if (q > 0) {
                CHECK(brute.block_count(q) >= brute.block_count(q - 1));
                const auto& prev = brute.blocks(q - 1);
                for (std::size_t p = 0; p < bb.size(); ++p)
                    for (std::size_t p2 = 0; p2 < bb.size(); ++p2)
                        if (bb[p] == bb[p2]) CHECK(prev[p] == prev[p2]);
            }
            const auto& fs = anti.block_formulas(q);
            for (std::size_t b = 0; b < fs.size(); ++b) {
                auto pr = anti.union_of(q, {static_cast<int>(b)});
                CHECK(ea.extension(fs[b]) == pr.left);
                CHECK(eb.extension(fs[b]) == pr.right);
                CHECK(quantifier_rank(fs[b]) <= q);
            }
        }
    }
}

TEST_CASE("property: definable families are boolean algebras and grow with the rank") {
    Corpus c;
    c.max_size = 2;
    for (int i = 0; i < 40; ++i) {
        Instance inst = gen_instance(c, i);
        std::vector<DefinableSetPair> prev;
        for (int q = 0; q <= 2; ++q) {
            DefinableAlgebra alg(inst.left, inst.right, inst.k, inst.registry);
            if (alg.block_count(q) > 8) break;
            auto ps = definable_sets(inst.left, inst.right, inst.k, q, inst.registry);
            for (const auto& x : ps) {
                CHECK(has_pair(ps, x.left.complement(), x.right.complement()));
                for (const auto& y : ps) CHECK(has_pair(ps, x.left & y.left, x.right & y.right));
            }
            for (const auto& x : prev) CHECK(has_pair(ps, x.left, x.right));
            prev = ps;
        }
    }
}
