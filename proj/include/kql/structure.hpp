#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include <kql/tuple_set.hpp>

namespace kql {

using Element = std::uint32_t;

/// Relation names mapped to their arities. Iteration order is by name.
class Signature {
public:
    Signature() = default;
    Signature(std::initializer_list<std::pair<const std::string, int>> rels);

    void add(const std::string& name, int arity);
    bool contains(const std::string& name) const { return arities_.count(name) != 0; }
    int arity(const std::string& name) const;
    bool empty() const { return arities_.empty(); }
    std::size_t size() const { return arities_.size(); }

    /// True when every relation of `this` occurs in `other` with the same arity.
    bool is_subset_of(const Signature& other) const;

    const std::map<std::string, int>& relations() const { return arities_; }

    friend bool operator==(const Signature&, const Signature&) = default;

private:
    std::map<std::string, int> arities_;
};

/// Interpretation of one relation symbol: a dense membership table over A^arity.
class Relation {
public:
    Relation() = default;
    Relation(int arity, std::size_t universe_size);

    int arity() const { return arity_; }
    bool contains(std::span<const Element> tuple) const { return bits_[index(tuple)]; }
    bool contains(Element a, Element b) const { return bits_[a * n_ + b]; }
    void insert(std::span<const Element> tuple) { bits_[index(tuple)] = true; }
    std::size_t size() const;

    /// All member tuples in lexicographic order.
    std::vector<std::vector<Element>> tuples() const;

    friend bool operator==(const Relation&, const Relation&) = default;

private:
    std::size_t index(std::span<const Element> tuple) const {
        std::size_t idx = 0;
        for (Element e : tuple) idx = idx * n_ + e;
        return idx;
    }

    int arity_ = 0;
    std::size_t n_ = 0;
    std::vector<bool> bits_;
};

/// Finite relational structure over named elements. Immutable once built.
class Structure {
public:
    Structure() = default;

    /// Validates names and tuples; throws ValidationError on any violation.
    Structure(Signature signature, std::vector<std::string> universe,
              const std::map<std::string, std::vector<std::vector<std::string>>>& relations);

    /// Same, with tuples already given as element indices.
    Structure(Signature signature, std::vector<std::string> universe,
              const std::map<std::string, std::vector<std::vector<Element>>>& relations);

    const Signature& signature() const { return signature_; }
    std::size_t size() const { return universe_.size(); }
    const std::vector<std::string>& universe() const { return universe_; }
    const std::string& name(Element e) const { return universe_[e]; }
    std::optional<Element> find(const std::string& name) const;
    Element element(const std::string& name) const;  // throws ValidationError

    const Relation& relation(const std::string& name) const;
    bool holds(const std::string& rel, std::span<const Element> tuple) const {
        return relation(rel).contains(tuple);
    }

    /// R[a] in universe order.
    std::vector<Element> successors(const std::string& rel, Element a) const;

    friend bool operator==(const Structure& a, const Structure& b) {
        return a.signature_ == b.signature_ && a.universe_ == b.universe_ &&
               a.relations_ == b.relations_;
    }

private:
    void index_universe();

    Signature signature_;
    std::vector<std::string> universe_;
    std::unordered_map<std::string, Element> index_;
    std::map<std::string, Relation> relations_;
};

/// Encoding of k-tuples over an n-element universe as codes in [0, n^k).
/// Code order coincides with lexicographic tuple order (x1 most significant).
class TupleSpace {
public:
    TupleSpace(std::size_t universe_size, int k);

    std::size_t universe_size() const { return n_; }
    int k() const { return k_; }
    std::size_t size() const { return size_; }

    TupleCode encode(std::span<const Element> tuple) const;
    std::vector<Element> decode(TupleCode code) const;
    Element at(TupleCode code, int position) const {  // position is 0-based
        return static_cast<Element>((code / stride_[position]) % n_);
    }
    /// The tuple `code` with coordinate `position` replaced by `e`.
    TupleCode with(TupleCode code, int position, Element e) const {
        return code - at(code, position) * stride_[position] + e * stride_[position];
    }

    TupleSet empty_set() const { return TupleSet(size_); }
    TupleSet full_set() const { return TupleSet::full(size_); }

private:
    std::size_t n_;
    int k_;
    std::size_t size_;
    std::vector<TupleCode> stride_;
};

/// A k-assignment alpha : {x1..xk} -> A, identified with a k-tuple.
using Assignment = std::vector<Element>;

/// Parses "a,b" against the structure's element names; length must equal k.
Assignment parse_assignment(const Structure& s, const std::string& text, int k);
std::string format_assignment(const Structure& s, std::span<const Element> tuple);
std::string format_tuple_set(const Structure& s, const TupleSpace& space, const TupleSet& set);

/// Parses JSON, reporting syntax errors as ParseError with line and column.
nlohmann::json parse_json_document(const std::string& text, const std::string& what);
std::string read_text_file(const std::string& path);

struct LoadOptions {
    /// Adds a binary relation "eq" interpreted as the diagonal.
    bool add_equality = false;
};

Structure load_structure(const std::string& text, const LoadOptions& options = {});
Structure load_structure_file(const std::string& path, const LoadOptions& options = {});
std::string serialize_structure(const Structure& s);

/// Element renaming: element i of the source is mapped to name names[i].
/// Names must be pairwise distinct (ValidationError otherwise).
Structure apply_bijection(const Structure& s, const std::vector<std::string>& names);
/// Convenience overload for a renaming given by name.
Structure apply_bijection(const Structure& s, const std::map<std::string, std::string>& mapping);

/// Reorders the universe: element i of `s` becomes element perm[i] of the
/// result, keeping its name.
Structure permute(const Structure& s, const std::vector<Element>& perm);

/// Restriction of the interpretation to `sub`; throws SignatureMismatch if `sub`
/// is not contained in the structure's signature.
Structure reduct(const Structure& s, const Signature& sub);

/// Brute-force isomorphism search. Returns image[i] = element of `t` that element
/// i of `s` is mapped to. Universes above 12 elements are rejected.
std::optional<std::vector<Element>> are_isomorphic(const Structure& s, const Structure& t);

} // namespace kql
