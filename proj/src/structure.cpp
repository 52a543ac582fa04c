#include <kql/structure.hpp>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include <kql/error.hpp>

namespace kql {

namespace {

constexpr std::size_t kMaxRelationCells = std::size_t{1} << 24;

bool valid_name(const std::string& name) {
    if (name.empty()) return false;
    return std::all_of(name.begin(), name.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    });
}

} // namespace

// ---------------------------------------------------------------------------
// Signature

Signature::Signature(std::initializer_list<std::pair<const std::string, int>> rels) {
    for (const auto& [name, arity] : rels) add(name, arity);
}

void Signature::add(const std::string& name, int arity) {
    if (!valid_name(name) || std::isdigit(static_cast<unsigned char>(name.front())))
        throw ValidationError("invalid relation name '" + name + "'");
    if (arity < 1)
        throw ValidationError("relation '" + name + "' must have arity >= 1");
    if (!arities_.emplace(name, arity).second)
        throw ValidationError("duplicate relation '" + name + "'");
}

int Signature::arity(const std::string& name) const {
    auto it = arities_.find(name);
    if (it == arities_.end()) throw SignatureMismatch("unknown relation '" + name + "'");
    return it->second;
}

bool Signature::is_subset_of(const Signature& other) const {
    for (const auto& [name, arity] : arities_) {
        auto it = other.arities_.find(name);
        if (it == other.arities_.end() || it->second != arity) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Relation

Relation::Relation(int arity, std::size_t universe_size) : arity_(arity), n_(universe_size) {
    std::size_t cells = 1;
    for (int i = 0; i < arity; ++i) {
        cells *= universe_size;
        if (cells > kMaxRelationCells)
            throw SizeGuardError("relation table exceeds " + std::to_string(kMaxRelationCells) +
                                 " cells");
    }
    bits_.assign(cells, false);
}

std::size_t Relation::size() const {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), true));
}

std::vector<std::vector<Element>> Relation::tuples() const {
    std::vector<std::vector<Element>> out;
    for (std::size_t idx = 0; idx < bits_.size(); ++idx) {
        if (!bits_[idx]) continue;
        std::vector<Element> t(static_cast<std::size_t>(arity_));
        std::size_t rest = idx;
        for (int i = arity_ - 1; i >= 0; --i) {
            t[static_cast<std::size_t>(i)] = static_cast<Element>(rest % n_);
            rest /= n_;
        }
        out.push_back(std::move(t));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Structure

void Structure::index_universe() {
    if (universe_.empty()) throw ValidationError("universe must not be empty");
    for (std::size_t i = 0; i < universe_.size(); ++i) {
        const auto& name = universe_[i];
        if (name.empty()) throw ValidationError("element names must be non-empty");
        if (name.find(',') != std::string::npos || name.find(';') != std::string::npos)
            throw ValidationError("element name '" + name + "' must not contain ',' or ';'");
        if (!index_.emplace(name, static_cast<Element>(i)).second)
            throw ValidationError("duplicate element '" + name + "'");
    }
}

Structure::Structure(Signature signature, std::vector<std::string> universe,
                     const std::map<std::string, std::vector<std::vector<std::string>>>& relations)
    : signature_(std::move(signature)), universe_(std::move(universe)) {
    index_universe();
    std::map<std::string, std::vector<std::vector<Element>>> resolved;
    for (const auto& [rel, tuples] : relations) {
        if (!signature_.contains(rel))
            throw ValidationError("relation '" + rel + "' is not declared in the signature");
        auto& out = resolved[rel];
        for (const auto& t : tuples) {
            std::vector<Element> idx;
            for (const auto& name : t) {
                auto it = index_.find(name);
                if (it == index_.end())
                    throw ValidationError("tuple of relation '" + rel + "' mentions '" + name +
                                          "', which is not in the universe");
                idx.push_back(it->second);
            }
            out.push_back(std::move(idx));
        }
    }
    *this = Structure(signature_, universe_, resolved);
}

Structure::Structure(Signature signature, std::vector<std::string> universe,
                     const std::map<std::string, std::vector<std::vector<Element>>>& relations)
    : signature_(std::move(signature)), universe_(std::move(universe)) {
    index_universe();
    for (const auto& [name, arity] : signature_.relations())
        relations_.emplace(name, Relation(arity, universe_.size()));
    for (const auto& [rel, tuples] : relations) {
        if (!signature_.contains(rel))
            throw ValidationError("relation '" + rel + "' is not declared in the signature");
        auto& r = relations_.at(rel);
        for (const auto& t : tuples) {
            if (static_cast<int>(t.size()) != r.arity())
                throw ValidationError("relation '" + rel + "' has arity " +
                                      std::to_string(r.arity()) + " but a tuple of length " +
                                      std::to_string(t.size()) + " was given");
            for (Element e : t)
                if (e >= universe_.size())
                    throw ValidationError("tuple of relation '" + rel + "' is out of range");
            r.insert(t);
        }
    }
}

std::optional<Element> Structure::find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

Element Structure::element(const std::string& name) const {
    auto e = find(name);
    if (!e) throw ValidationError("unknown element '" + name + "'");
    return *e;
}

const Relation& Structure::relation(const std::string& name) const {
    auto it = relations_.find(name);
    if (it == relations_.end()) throw SignatureMismatch("unknown relation '" + name + "'");
    return it->second;
}

std::vector<Element> Structure::successors(const std::string& rel, Element a) const {
    const auto& r = relation(rel);
    if (r.arity() != 2) throw SignatureMismatch("relation '" + rel + "' is not binary");
    std::vector<Element> out;
    for (Element c = 0; c < size(); ++c)
        if (r.contains(a, c)) out.push_back(c);
    return out;
}

// ---------------------------------------------------------------------------
// TupleSpace

TupleSpace::TupleSpace(std::size_t universe_size, int k) : n_(universe_size), k_(k) {
    if (k < 1) throw ValidationError("k must be positive");
    stride_.assign(static_cast<std::size_t>(k), 1);
    std::size_t size = 1;
    for (int i = k - 1; i >= 0; --i) {
        stride_[static_cast<std::size_t>(i)] = static_cast<TupleCode>(size);
        size *= n_;
        if (size > (std::size_t{1} << 24))
            throw SizeGuardError("tuple space " + std::to_string(n_) + "^" + std::to_string(k) +
                                 " is too large");
    }
    size_ = size;
}

TupleCode TupleSpace::encode(std::span<const Element> tuple) const {
    TupleCode code = 0;
    for (int i = 0; i < k_; ++i) code += tuple[static_cast<std::size_t>(i)] * stride_[static_cast<std::size_t>(i)];
    return code;
}

std::vector<Element> TupleSpace::decode(TupleCode code) const {
    std::vector<Element> t(static_cast<std::size_t>(k_));
    for (int i = 0; i < k_; ++i) t[static_cast<std::size_t>(i)] = at(code, i);
    return t;
}

// ---------------------------------------------------------------------------
// Assignments

Assignment parse_assignment(const Structure& s, const std::string& text, int k) {
    Assignment out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto b = item.find_first_not_of(" \t");
        auto e = item.find_last_not_of(" \t");
        out.push_back(s.element(b == std::string::npos ? "" : item.substr(b, e - b + 1)));
    }
    if (static_cast<int>(out.size()) != k)
        throw ValidationError("assignment '" + text + "' has length " + std::to_string(out.size()) +
                              ", expected k = " + std::to_string(k));
    return out;
}

std::string format_assignment(const Structure& s, std::span<const Element> tuple) {
    std::string out;
    for (std::size_t i = 0; i < tuple.size(); ++i) {
        if (i) out += ',';
        out += s.name(tuple[i]);
    }
    return out;
}

std::string format_tuple_set(const Structure& s, const TupleSpace& space, const TupleSet& set) {
    std::string out = "{";
    bool first = true;
    set.for_each([&](TupleCode c) {
        if (!first) out += "; ";
        first = false;
        out += format_assignment(s, space.decode(c));
    });
    return out + "}";
}

// ---------------------------------------------------------------------------
// JSON documents

nlohmann::json parse_json_document(const std::string& text, const std::string& what) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        // nlohmann reports a byte offset; translate it into line/column.
        std::size_t offset = e.byte == 0 ? 0 : e.byte - 1;
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ParseError("malformed " + what, line, col);
    }
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

Structure load_structure(const std::string& text, const LoadOptions& options) {
    nlohmann::json doc = parse_json_document(text, "structure document");

    auto require = [&](const char* key, auto pred, const char* what) -> const nlohmann::json& {
        if (!doc.is_object() || !doc.contains(key) || !pred(doc[key]))
            throw ValidationError(std::string("structure document needs '") + key + "' as " + what);
        return doc[key];
    };
    const auto& jsig = require("signature", [](const auto& j) { return j.is_object(); }, "an object");
    const auto& juni = require("universe", [](const auto& j) { return j.is_array(); }, "an array");

    Signature sig;
    for (const auto& [name, arity] : jsig.items()) {
        if (!arity.is_number_integer())
            throw ValidationError("arity of '" + name + "' must be an integer");
        sig.add(name, arity.get<int>());
    }
    std::vector<std::string> universe;
    for (const auto& e : juni) {
        if (!e.is_string()) throw ValidationError("universe entries must be strings");
        universe.push_back(e.get<std::string>());
    }

    std::map<std::string, std::vector<std::vector<std::string>>> rels;
    if (doc.contains("relations")) {
        const auto& jrel = doc["relations"];
        if (!jrel.is_object()) throw ValidationError("'relations' must be an object");
        for (const auto& [name, tuples] : jrel.items()) {
            if (!tuples.is_array())
                throw ValidationError("tuples of relation '" + name + "' must be an array");
            auto& out = rels[name];
            for (const auto& t : tuples) {
                if (!t.is_array())
                    throw ValidationError("tuple of relation '" + name + "' must be an array");
                std::vector<std::string> names;
                for (const auto& e : t) {
                    if (!e.is_string())
                        throw ValidationError("tuple entries of '" + name + "' must be strings");
                    names.push_back(e.get<std::string>());
                }
                out.push_back(std::move(names));
            }
        }
    }

    if (options.add_equality) {
        if (sig.contains("eq"))
            throw ValidationError("relation 'eq' already declared; cannot add equality");
        sig.add("eq", 2);
        auto& diag = rels["eq"];
        for (const auto& e : universe) diag.push_back({e, e});
    }
    return Structure(std::move(sig), std::move(universe), rels);
}

Structure load_structure_file(const std::string& path, const LoadOptions& options) {
    return load_structure(read_text_file(path), options);
}

std::string serialize_structure(const Structure& s) {
    nlohmann::ordered_json doc;
    doc["signature"] = nlohmann::ordered_json::object();
    for (const auto& [name, arity] : s.signature().relations()) doc["signature"][name] = arity;
    doc["universe"] = s.universe();
    doc["relations"] = nlohmann::ordered_json::object();
    for (const auto& [name, arity] : s.signature().relations()) {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& t : s.relation(name).tuples()) {
            auto jt = nlohmann::ordered_json::array();
            for (Element e : t) jt.push_back(s.name(e));
            arr.push_back(std::move(jt));
        }
        doc["relations"][name] = std::move(arr);
    }
    return doc.dump();
}

// ---------------------------------------------------------------------------
// Renaming, reducts, isomorphism

Structure apply_bijection(const Structure& s, const std::vector<std::string>& names) {
    if (names.size() != s.size())
        throw ValidationError("bijection must be total on the universe");
    std::set<std::string> seen(names.begin(), names.end());
    if (seen.size() != names.size()) throw ValidationError("bijection is not injective");
    // Element i of the result is the image of element i.
    std::map<std::string, std::vector<std::vector<Element>>> rels;
    for (const auto& [name, arity] : s.signature().relations()) rels[name] = s.relation(name).tuples();
    return Structure(s.signature(), names, rels);
}

Structure apply_bijection(const Structure& s, const std::map<std::string, std::string>& mapping) {
    std::vector<std::string> names;
    for (const auto& e : s.universe()) {
        auto it = mapping.find(e);
        if (it == mapping.end()) throw ValidationError("bijection undefined on '" + e + "'");
        names.push_back(it->second);
    }
    return apply_bijection(s, names);
}

Structure permute(const Structure& s, const std::vector<Element>& perm) {
    if (perm.size() != s.size()) throw ValidationError("permutation must be total on the universe");
    std::vector<std::string> names(s.size());
    std::vector<bool> hit(s.size(), false);
    for (std::size_t i = 0; i < perm.size(); ++i) {
        if (perm[i] >= s.size() || hit[perm[i]]) throw ValidationError("not a permutation");
        hit[perm[i]] = true;
        names[perm[i]] = s.name(static_cast<Element>(i));
    }
    std::map<std::string, std::vector<std::vector<Element>>> rels;
    for (const auto& [name, arity] : s.signature().relations()) {
        auto& out = rels[name];
        for (auto t : s.relation(name).tuples()) {
            for (auto& e : t) e = perm[e];
            out.push_back(std::move(t));
        }
    }
    return Structure(s.signature(), names, rels);
}

Structure reduct(const Structure& s, const Signature& sub) {
    if (!sub.is_subset_of(s.signature()))
        throw SignatureMismatch("reduct signature is not contained in the structure's signature");
    std::map<std::string, std::vector<std::vector<Element>>> rels;
    for (const auto& [name, arity] : sub.relations()) rels[name] = s.relation(name).tuples();
    return Structure(sub, s.universe(), rels);
}

namespace {

struct IsoSearch {
    const Structure& s;
    const Structure& t;
    std::vector<Element> image;
    std::vector<bool> used;
    std::vector<std::string> rel_names;

    // Checks every s-tuple whose elements are all assigned and whose maximum is `last`.
    bool consistent(Element last) const {
        for (std::size_t r = 0; r < rel_names.size(); ++r) {
            const auto& rel_t = t.relation(rel_names[r]);
            const auto& rel_s = s.relation(rel_names[r]);
            // Forward: every s-tuple involving `last` over assigned elements maps into t.
            int arity = rel_s.arity();
            std::vector<Element> cur(static_cast<std::size_t>(arity));
            std::vector<Element> mapped(static_cast<std::size_t>(arity));
            // Enumerate tuples over {0..last} that contain `last`.
            std::size_t total = 1;
            for (int i = 0; i < arity; ++i) total *= (last + 1);
            for (std::size_t idx = 0; idx < total; ++idx) {
                std::size_t rest = idx;
                bool has_last = false;
                for (int i = arity - 1; i >= 0; --i) {
                    cur[static_cast<std::size_t>(i)] = static_cast<Element>(rest % (last + 1));
                    rest /= (last + 1);
                    if (cur[static_cast<std::size_t>(i)] == last) has_last = true;
                }
                if (!has_last) continue;
                for (int i = 0; i < arity; ++i)
                    mapped[static_cast<std::size_t>(i)] = image[cur[static_cast<std::size_t>(i)]];
                if (rel_s.contains(cur) != rel_t.contains(mapped)) return false;
            }
        }
        return true;
    }

    bool search(Element next) {
        if (next == s.size()) return true;
        for (Element cand = 0; cand < t.size(); ++cand) {
            if (used[cand]) continue;
            image[next] = cand;
            used[cand] = true;
            if (consistent(next) && search(next + 1)) return true;
            used[cand] = false;
        }
        return false;
    }
};

} // namespace

std::optional<std::vector<Element>> are_isomorphic(const Structure& s, const Structure& t) {
    if (!(s.signature() == t.signature()))
        throw SignatureMismatch("isomorphism test needs structures over the same signature");
    if (s.size() > 12) throw SizeGuardError("isomorphism search is limited to 12 elements");
    if (s.size() != t.size()) return std::nullopt;
    for (const auto& [name, arity] : s.signature().relations())
        if (s.relation(name).size() != t.relation(name).size()) return std::nullopt;
    IsoSearch search{s, t, std::vector<Element>(s.size()), std::vector<bool>(t.size(), false), {}};
    for (const auto& [name, arity] : s.signature().relations()) search.rel_names.push_back(name);
    if (!search.search(0)) return std::nullopt;
    return search.image;
}

} // namespace kql
