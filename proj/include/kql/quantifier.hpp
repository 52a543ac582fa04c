#pragma once

#include <string>
#include <vector>

#include <kql/structure.hpp>
#include <kql/tuple_set.hpp>

namespace kql {

enum class Family {
    Diamond,         // dia[R]
    DiamondAtLeast,  // dia>=n[R]
    All,             // all
    Some,            // some
    Cycle,           // cyc[R]
    Infinite,        // inf[R]
    Reach,           // reach[R]
    CountAtLeast,    // ex>=n[xi]
};

/// An instantiated k-quantifier from the closed built-in registry.
///
/// The modal families (dia, dia>=n, cyc, inf, reach) are 1-quantifiers acting
/// on x1: at k > 1 their witnesses are the tuples alpha[x1 := c] for c in the
/// one-dimensional witness, all other coordinates copied from alpha. `all` and
/// `some` range over all of A^k; ex>=n[xi] over the xi-line through alpha.
class Quantifier {
public:
    static Quantifier diamond(std::string relation);
    static Quantifier diamond_at_least(int n, std::string relation);
    static Quantifier all();
    static Quantifier some();
    static Quantifier cycle(std::string relation);
    static Quantifier infinite(std::string relation);
    static Quantifier reach(std::string relation);
    /// `variable` is 1-based (x1 is 1).
    static Quantifier count_at_least(int n, int variable);

    /// Parses the concrete syntax, e.g. "dia>=2[R]" or "ex>=1[x2]".
    static Quantifier parse(const std::string& text);

    Family family() const { return family_; }
    const std::string& relation() const { return relation_; }
    int threshold() const { return threshold_; }
    int variable() const { return variable_; }

    /// The associated signature sigma_Q.
    Signature signature() const;
    std::string to_string() const;

    /// Throws SignatureMismatch unless sigma_Q is contained in `sig`, and
    /// ValidationError if a variable parameter exceeds k.
    void check(const Signature& sig, int k) const;

    bool is_witness(const Structure& s, const TupleSpace& space, TupleCode alpha,
                    const TupleSet& w) const;

    /// The subset-minimal witnesses, in canonical order.
    std::vector<TupleSet> minimal_witnesses(const Structure& s, const TupleSpace& space,
                                            TupleCode alpha) const;

    /// minimal_witnesses for every alpha in A^k; shares per-structure work.
    std::vector<std::vector<TupleSet>> minimal_witness_table(const Structure& s,
                                                             const TupleSpace& space) const;

    /// True iff some witness w in Q(alpha) satisfies w ⊆ extension.
    bool admits_witness_within(const Structure& s, const TupleSpace& space, TupleCode alpha,
                               const TupleSet& extension) const;

    friend bool operator==(const Quantifier&, const Quantifier&) = default;
    friend auto operator<=>(const Quantifier&, const Quantifier&) = default;

private:
    Quantifier(Family f, std::string rel, int n, int var)
        : family_(f), relation_(std::move(rel)), threshold_(n), variable_(var) {}

    void require(const Structure& s, const TupleSpace& space) const;

    Family family_ = Family::Some;
    std::string relation_;
    int threshold_ = 0;
    int variable_ = 0;
};

/// Comma-separated list in quantifier syntax, e.g. "dia[R],all,ex>=2[x1]".
std::vector<Quantifier> parse_quantifier_list(const std::string& text);
std::string format_quantifier_list(const std::vector<Quantifier>& qs);

/// Registry members whose sigma_Q is contained in `sig`.
std::vector<Quantifier> applicable(const std::vector<Quantifier>& registry, const Signature& sig);

/// Vertex sets of simple directed R-cycles of length >= 3 that are subset-minimal
/// among such sets, as bitmasks over the universe (universe <= 16).
std::vector<std::uint32_t> minimal_cycle_sets(const Structure& s, const std::string& relation);

/// Whether R restricted to `vertices` contains a simple cycle of length >= 3.
bool has_long_cycle(const Structure& s, const std::string& relation, const std::vector<bool>& vertices);

/// Reference semantics derived from is_witness alone by powerset enumeration.
/// Only defined for tiny universes: |A| <= 4 and |A^k| <= 16.
namespace oracle {

inline constexpr std::size_t kMaxUniverse = 4;
inline constexpr std::size_t kMaxTupleSpace = 16;

void check_size(const Structure& s, const TupleSpace& space);

std::vector<TupleSet> all_witnesses(const Quantifier& q, const Structure& s,
                                    const TupleSpace& space, TupleCode alpha);
std::vector<TupleSet> minimal_witnesses(const Quantifier& q, const Structure& s,
                                        const TupleSpace& space, TupleCode alpha);
bool admits_witness_within(const Quantifier& q, const Structure& s, const TupleSpace& space,
                           TupleCode alpha, const TupleSet& extension);

} // namespace oracle

} // namespace kql
