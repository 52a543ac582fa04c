#pragma once

#include <vector>

#include <kql/formula.hpp>
#include <kql/quantifier.hpp>
#include <kql/structure.hpp>

namespace kql {

/// Pair of extensions of one formula, evaluated in A and B simultaneously.
struct DefinableSetPair {
    TupleSet left;
    TupleSet right;
    int rank = 0;  // least level at which the pair is definable
};

/// Stratified definable-set algebra over the points of A^k ⊔ B^k.
///
/// Level 0 is the boolean algebra generated by the atom extensions; level q+1
/// the one generated by level q and the Q-images of level-q sets. Every level
/// is finite, so it is stored by its atoms (blocks). A block refines its
/// parent by the tests "admits(Q, p, X)" for X ranging over unions of
/// parent-level blocks.
///
/// Two refinement routes compute the same partition:
///   Brute      tests every union of level-q blocks with admits_witness_within;
///   Antichain  compares, per Q, the minimal block-sets of each point's minimal
///              witnesses (admits(Q,p,∪U) iff one of them is contained in U).
/// Auto uses Brute while the block count is small.
class DefinableAlgebra {
public:
    enum class Route { Auto, Brute, Antichain };

    DefinableAlgebra(const Structure& a, const Structure& b, int k, std::vector<Quantifier> registry,
                     Route route = Route::Auto, bool build_formulas = false);

    std::size_t left_points() const { return left_space_.size(); }
    std::size_t points() const { return left_space_.size() + right_space_.size(); }
    std::size_t left_point(TupleCode alpha) const { return alpha; }
    std::size_t right_point(TupleCode beta) const { return left_space_.size() + beta; }

    /// Highest computed level.
    int level() const { return static_cast<int>(blocks_.size()) - 1; }
    /// Computes levels up to q (cheap once stable).
    void refine_to(int q);
    /// Refines until a level equals its predecessor; returns the first level
    /// q with level q+1 = level q.
    int stabilize();
    bool stable() const { return stable_at_ >= 0; }

    /// Block id of every point at level q (ids numbered by first occurrence).
    const std::vector<int>& blocks(int q);
    int block_count(int q);
    bool equivalent(std::size_t p, std::size_t p2, int q) { return blocks(q)[p] == blocks(q)[p2]; }

    /// One formula per level-q block, defining exactly that block in both
    /// structures; requires build_formulas.
    const std::vector<Formula>& block_formulas(int q);

    /// Extension pair of the union of the given level-q blocks.
    DefinableSetPair union_of(int q, const std::vector<int>& block_ids);

private:
    using BlockSet = TupleSet;  // set of block ids of the previous level
    using Antichain = std::vector<BlockSet>;

    void refine_once();
    std::vector<std::vector<Antichain>> tests_brute(const std::vector<int>& prev, int m);
    std::vector<std::vector<Antichain>> tests_antichain(const std::vector<int>& prev, int m);
    Formula test_formula(std::size_t qi, const BlockSet& set, int level) const;
    bool admits_point(std::size_t qi, std::size_t p, const TupleSet& left_ext, const TupleSet& right_ext) const;

    const Structure* a_;
    const Structure* b_;
    std::vector<Quantifier> registry_;
    TupleSpace left_space_;
    TupleSpace right_space_;
    Route route_;
    bool build_formulas_;
    std::vector<std::vector<int>> blocks_;
    std::vector<int> counts_;
    std::vector<std::vector<Formula>> formulas_;
    int stable_at_ = -1;
    // Minimal witnesses per quantifier and point (antichain route only).
    std::vector<std::vector<std::vector<TupleSet>>> witnesses_;
};

/// All pairs of rank <= q (unions of level-q blocks); at most 16 blocks.
std::vector<DefinableSetPair> definable_sets(const Structure& a, const Structure& b, int k, int q,
                                             const std::vector<Quantifier>& registry);

/// True iff no definable pair of rank <= q separates alpha from beta.
bool equiv_rank_oracle(const Structure& a, const Assignment& alpha, const Structure& b,
                       const Assignment& beta, int q, const std::vector<Quantifier>& registry);

/// Validates a registry against a signature and k (throws SignatureMismatch).
void check_registry(const std::vector<Quantifier>& registry, const Signature& sig, int k);

} // namespace kql
