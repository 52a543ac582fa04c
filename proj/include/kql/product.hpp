#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include <kql/formula.hpp>
#include <kql/structure.hpp>

namespace kql {

/// Filter over a finite index set I (|I| <= 16); members are bitmasks over I.
class FiniteFilter {
public:
    using Mask = std::uint32_t;
    static constexpr std::size_t kMaxIndex = 16;

    /// Validates the filter axioms; throws ValidationError naming the first violation.
    FiniteFilter(std::vector<std::string> index, std::vector<Mask> sets);

    /// Closure of `generators` under supersets and intersections; throws if it
    /// contains the empty set.
    static FiniteFilter generated_by(std::vector<std::string> index, const std::vector<Mask>& generators);
    static FiniteFilter principal(std::vector<std::string> index, std::size_t i);
    /// {I}.
    static FiniteFilter trivial(std::vector<std::string> index);

    const std::vector<std::string>& index() const { return index_; }
    std::size_t size() const { return index_.size(); }
    Mask full() const { return static_cast<Mask>((std::uint64_t{1} << index_.size()) - 1); }
    const std::vector<Mask>& sets() const { return sets_; }
    bool contains(Mask m) const;
    bool is_ultrafilter() const;

    nlohmann::ordered_json to_json() const;

private:
    std::vector<std::string> index_;
    std::vector<Mask> sets_;  // sorted
};

/// {"index": [...], "sets": [[...], ...]}
FiniteFilter load_filter(const std::string& text);
FiniteFilter load_filter_file(const std::string& path);

struct ReducedProduct {
    Structure structure;
    /// Index tuples (one element per component) of the class representatives,
    /// in product element order.
    std::vector<std::vector<Element>> representatives;
    /// Class of every index tuple, by its code in the direct-product enumeration.
    std::vector<Element> quotient;
    std::vector<std::size_t> component_sizes;

    /// The class of an index tuple.
    Element class_of(const std::vector<Element>& components) const;
    /// alpha_F from one k-assignment per component.
    Assignment transport(const std::vector<Assignment>& assignments) const;
};

/// Product elements are named "<a|b|...>" after their representative.
ReducedProduct reduced_product(const std::vector<Structure>& family, const FiniteFilter& filter);
ReducedProduct direct_product(const std::vector<Structure>& family);

/// Indices i with A_i, alpha_i |= f, as a bitmask.
FiniteFilter::Mask truth_value_set(const std::vector<Structure>& family, const std::vector<Assignment>& assignments,
                                   const Formula& f);

struct LosReport {
    bool product_side = false;       // prod A_i / U, alpha_U |= f
    FiniteFilter::Mask truth_set = 0;
    bool filter_side = false;        // truth set in U
    bool agree = false;
    std::string note;

    nlohmann::ordered_json to_json(const FiniteFilter& filter) const;
};

/// Both sides of the Łoś equivalence for one formula; U must be an ultrafilter.
LosReport los_check(const std::vector<Structure>& family, const std::vector<Assignment>& assignments,
                    const FiniteFilter& ultrafilter, const Formula& f);

/// The same comparison for an atomic formula under any filter.
LosReport atomic_los_check(const std::vector<Structure>& family, const std::vector<Assignment>& assignments,
                           const FiniteFilter& filter, const Formula& atom);

/// The |I| principal ultrafilters.
std::vector<FiniteFilter> enumerate_ultrafilters(const std::vector<std::string>& index);

/// Every filter on I (on a finite set, the up-sets of non-empty subsets).
std::vector<FiniteFilter> enumerate_filters(const std::vector<std::string>& index);

} // namespace kql
