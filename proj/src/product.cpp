#include <kql/product.hpp>

#include <algorithm>
#include <set>

#include <kql/error.hpp>
#include <kql/semantics.hpp>

namespace kql {

namespace {

constexpr std::size_t kMaxProduct = 4096;
constexpr std::size_t kMaxRelationCells = std::size_t{1} << 24;

void check_index(const std::vector<std::string>& index) {
    if (index.empty()) throw ValidationError("index set is empty");
    if (index.size() > FiniteFilter::kMaxIndex)
        throw SizeGuardError("index sets are limited to " + std::to_string(FiniteFilter::kMaxIndex) + " entries");
    std::set<std::string> seen;
    for (const auto& i : index)
        if (!seen.insert(i).second) throw ValidationError("duplicate index '" + i + "'");
}

std::string mask_text(const std::vector<std::string>& index, FiniteFilter::Mask m) {
    std::string out = "{";
    bool first = true;
    for (std::size_t i = 0; i < index.size(); ++i)
        if ((m >> i) & 1U) {
            if (!first) out += ",";
            first = false;
            out += index[i];
        }
    return out + "}";
}

std::vector<FiniteFilter::Mask> upset(FiniteFilter::Mask base, FiniteFilter::Mask full) {
    std::vector<FiniteFilter::Mask> out;
    for (FiniteFilter::Mask m = 0; m <= full; ++m)
        if ((m & base) == base) out.push_back(m);
    return out;
}

} // namespace

FiniteFilter::FiniteFilter(std::vector<std::string> index, std::vector<Mask> sets)
    : index_(std::move(index)), sets_(std::move(sets)) {
    check_index(index_);
    std::sort(sets_.begin(), sets_.end());
    sets_.erase(std::unique(sets_.begin(), sets_.end()), sets_.end());
    if (sets_.empty()) throw ValidationError("filter has no members");
    for (Mask m : sets_) {
        if (m > full()) throw ValidationError("filter member outside the index set");
        if (m == 0) throw ValidationError("filter contains the empty set");
    }
    for (Mask m : sets_) {
        // Every one-element extension must be present; that suffices for upward closure.
        for (std::size_t i = 0; i < index_.size(); ++i) {
            Mask bigger = m | (Mask{1} << i);
            if (!contains(bigger))
                throw ValidationError("filter is not upward closed: " + mask_text(index_, m) + " is a member but " +
                                      mask_text(index_, bigger) + " is not");
        }
    }
    for (Mask m : sets_)
        for (Mask n : sets_)
            if (!contains(m & n))
                throw ValidationError("filter is not closed under intersection: " + mask_text(index_, m) + " and " +
                                      mask_text(index_, n));
}

FiniteFilter FiniteFilter::generated_by(std::vector<std::string> index, const std::vector<Mask>& generators) {
    check_index(index);
    Mask full = static_cast<Mask>((std::uint64_t{1} << index.size()) - 1);
    // On a finite set the generated filter is the up-set of the intersection of all generators.
    Mask base = full;
    for (Mask g : generators) base &= g;
    if (base == 0) throw ValidationError("generated family contains the empty set");
    return FiniteFilter(std::move(index), upset(base, full));
}

FiniteFilter FiniteFilter::principal(std::vector<std::string> index, std::size_t i) {
    if (i >= index.size()) throw ValidationError("principal index out of range");
    return generated_by(std::move(index), {Mask{1} << i});
}

FiniteFilter FiniteFilter::trivial(std::vector<std::string> index) { return generated_by(std::move(index), {}); }

bool FiniteFilter::contains(Mask m) const { return std::binary_search(sets_.begin(), sets_.end(), m); }

bool FiniteFilter::is_ultrafilter() const {
    for (Mask m = 0; m <= full(); ++m)
        if (!contains(m) && !contains(full() & ~m)) return false;
    return true;
}

nlohmann::ordered_json FiniteFilter::to_json() const {
    nlohmann::ordered_json out;
    out["index"] = index_;
    auto arr = nlohmann::ordered_json::array();
    for (Mask m : sets_) {
        auto names = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < index_.size(); ++i)
            if ((m >> i) & 1U) names.push_back(index_[i]);
        arr.push_back(std::move(names));
    }
    out["sets"] = std::move(arr);
    return out;
}

FiniteFilter load_filter(const std::string& text) {
    nlohmann::json doc = parse_json_document(text, "filter document");
    if (!doc.is_object() || !doc.contains("index") || !doc["index"].is_array())
        throw ValidationError("filter document needs 'index' as an array");
    if (!doc.contains("sets") || !doc["sets"].is_array())
        throw ValidationError("filter document needs 'sets' as an array");
    std::vector<std::string> index;
    for (const auto& j : doc["index"]) {
        if (!j.is_string()) throw ValidationError("index entries must be strings");
        index.push_back(j.get<std::string>());
    }
    check_index(index);
    std::vector<FiniteFilter::Mask> sets;
    for (const auto& js : doc["sets"]) {
        if (!js.is_array()) throw ValidationError("filter members must be arrays");
        FiniteFilter::Mask m = 0;
        for (const auto& j : js) {
            if (!j.is_string()) throw ValidationError("filter member entries must be strings");
            auto it = std::find(index.begin(), index.end(), j.get<std::string>());
            if (it == index.end()) throw ValidationError("unknown index '" + j.get<std::string>() + "'");
            m |= FiniteFilter::Mask{1} << (it - index.begin());
        }
        sets.push_back(m);
    }
    return FiniteFilter(std::move(index), std::move(sets));
}

FiniteFilter load_filter_file(const std::string& path) { return load_filter(read_text_file(path)); }

// ---------------------------------------------------------------------------
// Products

Element ReducedProduct::class_of(const std::vector<Element>& components) const {
    if (components.size() != component_sizes.size()) throw ValidationError("wrong number of components");
    std::size_t code = 0;
    for (std::size_t i = 0; i < components.size(); ++i) {
        if (components[i] >= component_sizes[i]) throw ValidationError("component element out of range");
        code = code * component_sizes[i] + components[i];
    }
    return quotient[code];
}

Assignment ReducedProduct::transport(const std::vector<Assignment>& assignments) const {
    if (assignments.size() != component_sizes.size())
        throw ValidationError("need one assignment per component");
    std::size_t k = assignments[0].size();
    Assignment out;
    for (std::size_t j = 0; j < k; ++j) {
        std::vector<Element> comps;
        for (const auto& a : assignments) {
            if (a.size() != k) throw ValidationError("component assignments differ in length");
            comps.push_back(a[j]);
        }
        out.push_back(class_of(comps));
    }
    return out;
}

ReducedProduct reduced_product(const std::vector<Structure>& family, const FiniteFilter& filter) {
    if (family.empty()) throw ValidationError("product of an empty family");
    if (filter.size() != family.size())
        throw ValidationError("filter index set has " + std::to_string(filter.size()) + " entries for " +
                              std::to_string(family.size()) + " structures");
    const Signature& sig = family[0].signature();
    for (const auto& s : family)
        if (!(s.signature() == sig)) throw SignatureMismatch("family members have different signatures");

    ReducedProduct rp;
    const std::size_t n = family.size();
    std::size_t total = 1;
    for (const auto& s : family) {
        rp.component_sizes.push_back(s.size());
        total *= s.size();
        if (total > kMaxProduct)
            throw SizeGuardError("product universe exceeds " + std::to_string(kMaxProduct) + " elements");
    }

    // Lexicographic enumeration: the first member met of each class is its least representative.
    std::vector<Element> cur(n, 0);
    rp.quotient.resize(total);
    for (std::size_t code = 0; code < total; ++code) {
        std::optional<Element> cls;
        for (Element c = 0; c < rp.representatives.size() && !cls; ++c) {
            FiniteFilter::Mask agree = 0;
            for (std::size_t i = 0; i < n; ++i)
                if (rp.representatives[c][i] == cur[i]) agree |= FiniteFilter::Mask{1} << i;
            if (filter.contains(agree)) cls = c;
        }
        if (!cls) {
            cls = static_cast<Element>(rp.representatives.size());
            rp.representatives.push_back(cur);
        }
        rp.quotient[code] = *cls;
        for (std::size_t i = n; i-- > 0;) {
            if (++cur[i] < family[i].size()) break;
            cur[i] = 0;
        }
    }

    std::vector<std::string> names;
    for (const auto& rep : rp.representatives) {
        std::string name = "<";
        for (std::size_t i = 0; i < n; ++i) name += (i ? "|" : "") + family[i].name(rep[i]);
        names.push_back(name + ">");
    }

    const std::size_t m = rp.representatives.size();
    std::map<std::string, std::vector<std::vector<Element>>> rels;
    for (const auto& [rel, arity] : sig.relations()) {
        std::size_t cells = 1;
        for (int j = 0; j < arity; ++j) {
            cells *= m;
            if (cells > kMaxRelationCells) throw SizeGuardError("product relation '" + rel + "' is too large");
        }
        auto& out = rels[rel];
        std::vector<Element> tuple(static_cast<std::size_t>(arity), 0);
        std::vector<Element> comp(static_cast<std::size_t>(arity));
        for (std::size_t cell = 0; cell < cells; ++cell) {
            FiniteFilter::Mask holds = 0;
            for (std::size_t i = 0; i < n; ++i) {
                for (int j = 0; j < arity; ++j) comp[j] = rp.representatives[tuple[j]][i];
                if (family[i].relation(rel).contains(comp)) holds |= FiniteFilter::Mask{1} << i;
            }
            if (filter.contains(holds)) out.push_back(tuple);
            for (int j = arity; j-- > 0;) {
                if (++tuple[j] < m) break;
                tuple[j] = 0;
            }
        }
    }
    rp.structure = Structure(sig, std::move(names), rels);
    return rp;
}

ReducedProduct direct_product(const std::vector<Structure>& family) {
    std::vector<std::string> index;
    for (std::size_t i = 0; i < family.size(); ++i) index.push_back(std::to_string(i));
    if (index.empty()) throw ValidationError("product of an empty family");
    return reduced_product(family, FiniteFilter::trivial(index));
}

FiniteFilter::Mask truth_value_set(const std::vector<Structure>& family, const std::vector<Assignment>& assignments,
                                   const Formula& f) {
    if (assignments.size() != family.size()) throw ValidationError("need one assignment per component");
    FiniteFilter::Mask out = 0;
    for (std::size_t i = 0; i < family.size(); ++i)
        if (eval(family[i], assignments[i], f)) out |= FiniteFilter::Mask{1} << i;
    return out;
}

namespace {

LosReport compare(const std::vector<Structure>& family, const std::vector<Assignment>& assignments,
                  const FiniteFilter& filter, const Formula& f) {
    ReducedProduct rp = reduced_product(family, filter);
    LosReport rep;
    rep.product_side = eval(rp.structure, rp.transport(assignments), f);
    rep.truth_set = truth_value_set(family, assignments, f);
    rep.filter_side = filter.contains(rep.truth_set);
    rep.agree = rep.product_side == rep.filter_side;
    return rep;
}

} // namespace

nlohmann::ordered_json LosReport::to_json(const FiniteFilter& filter) const {
    nlohmann::ordered_json out;
    out["product_side"] = product_side;
    out["truth_value_set"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < filter.size(); ++i)
        if ((truth_set >> i) & 1U) out["truth_value_set"].push_back(filter.index()[i]);
    out["in_filter"] = filter_side;
    out["agree"] = agree;
    out["note"] = note;
    return out;
}

LosReport los_check(const std::vector<Structure>& family, const std::vector<Assignment>& assignments,
                    const FiniteFilter& ultrafilter, const Formula& f) {
    if (!ultrafilter.is_ultrafilter()) throw ValidationError("los_check needs an ultrafilter");
    LosReport rep = compare(family, assignments, ultrafilter, f);
    rep.note = "finite index set: the ultrafilter is principal, so agreement validates the product "
               "construction, not a Łoś property of the logic";
    if (!rep.agree) rep.note += "; DISAGREEMENT indicates a construction bug";
    return rep;
}

LosReport atomic_los_check(const std::vector<Structure>& family, const std::vector<Assignment>& assignments,
                           const FiniteFilter& filter, const Formula& atom) {
    if (atom.kind() != Formula::Kind::Atom) throw ValidationError("atomic_los_check needs an atomic formula");
    LosReport rep = compare(family, assignments, filter, atom);
    rep.note = "atomic formulas: the equivalence holds for every filter by the relation clause";
    if (!rep.agree) rep.note += "; DISAGREEMENT indicates a construction bug";
    return rep;
}

std::vector<FiniteFilter> enumerate_ultrafilters(const std::vector<std::string>& index) {
    check_index(index);
    std::vector<FiniteFilter> out;
    for (std::size_t i = 0; i < index.size(); ++i) out.push_back(FiniteFilter::principal(index, i));
    return out;
}

std::vector<FiniteFilter> enumerate_filters(const std::vector<std::string>& index) {
    check_index(index);
    std::vector<FiniteFilter> out;
    FiniteFilter::Mask full = static_cast<FiniteFilter::Mask>((std::uint64_t{1} << index.size()) - 1);
    for (FiniteFilter::Mask base = 1; base <= full; ++base) out.push_back(FiniteFilter::generated_by(index, {base}));
    return out;
}

} // namespace kql
