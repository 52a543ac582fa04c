#pragma once

#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include <kql/formula.hpp>
#include <kql/structure.hpp>

namespace kql {

/// Model checker for one structure and fixed k.
///
/// Extensions are computed bottom-up and memoized per formula node, so a
/// quantified subformula costs one admits_witness_within call per tuple.
/// Not thread-safe; use one evaluator per thread.
class Evaluator {
public:
    /// With `oracle` set, quantifiers are evaluated through the powerset
    /// defaults (tiny universes only).
    Evaluator(const Structure& s, int k, bool oracle = false);

    const Structure& structure() const { return *structure_; }
    const TupleSpace& space() const { return space_; }
    int k() const { return space_.k(); }

    /// [[f]] as a subset of A^k. Validates f against the signature and k.
    const TupleSet& extension(const Formula& f);

    bool holds(TupleCode alpha, const Formula& f) { return extension(f).contains(alpha); }
    bool holds(const Assignment& alpha, const Formula& f) { return holds(space_.encode(alpha), f); }

    /// Flat team semantics: f holds at every member (vacuously on the empty team).
    bool holds_on_team(const TupleSet& team, const Formula& f) { return team.is_subset_of(extension(f)); }

    /// Extension of every distinct subformula, children before parents.
    std::vector<std::pair<Formula, TupleSet>> trace(const Formula& f);

    void clear() { memo_.clear(); }

private:
    const TupleSet& compute(const Formula& f);

    const Structure* structure_;
    TupleSpace space_;
    bool oracle_;
    // The formula copy keeps the node alive so its address cannot be reused.
    std::unordered_map<const FormulaNode*, std::pair<Formula, TupleSet>> memo_;
};

bool eval(const Structure& s, const Assignment& alpha, const Formula& f);
bool eval_team(const Structure& s, const std::vector<Assignment>& team, int k, const Formula& f);

/// If Q /\Psi holds at alpha, a witness w in Q(alpha) with every psi true on
/// all of w; otherwise nothing. Finite structures are saturated, so the
/// witness exists whenever the type condition holds.
std::optional<TupleSet> check_type_realization(const Structure& s, const Assignment& alpha,
                                               const Quantifier& q, const std::vector<Formula>& psi);

} // namespace kql
