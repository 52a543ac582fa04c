#pragma once

#include <algorithm>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <kql/structure.hpp>

namespace fx {

inline const char* kK1 = R"({"signature": {"R": 2, "P": 1}, "universe": ["a","b","c"],
  "relations": {"R": [["a","b"],["b","c"]], "P": [["b"]]}})";

inline kql::Structure k1() { return kql::load_structure(kK1); }

inline kql::Assignment at(const kql::Structure& s, const std::string& t) {
    return kql::parse_assignment(s, t, static_cast<int>(std::count(t.begin(), t.end(), ',')) + 1);
}

inline kql::TupleCode code(const kql::Structure& s, const std::string& t) {
    auto a = at(s, t);
    return kql::TupleSpace(s.size(), static_cast<int>(a.size())).encode(a);
}

inline kql::TupleSet set_of(const kql::Structure& s, int k, const std::vector<std::string>& tuples) {
    kql::TupleSpace space(s.size(), k);
    kql::TupleSet out = space.empty_set();
    for (const auto& t : tuples) out.insert(space.encode(kql::parse_assignment(s, t, k)));
    return out;
}

inline std::vector<kql::Element> random_perm(std::mt19937_64& rng, std::size_t n) {
    std::vector<kql::Element> p(n);
    std::iota(p.begin(), p.end(), 0);
    std::shuffle(p.begin(), p.end(), rng);
    return p;
}

// Image of a tuple code under an element permutation.
inline kql::TupleCode map_code(const kql::TupleSpace& space, const std::vector<kql::Element>& perm,
                               kql::TupleCode c) {
    auto t = space.decode(c);
    for (auto& e : t) e = perm[e];
    return space.encode(t);
}

inline kql::TupleSet map_set(const kql::TupleSpace& space, const std::vector<kql::Element>& perm,
                             const kql::TupleSet& s) {
    kql::TupleSet out = space.empty_set();
    s.for_each([&](kql::TupleCode c) { out.insert(map_code(space, perm, c)); });
    return out;
}

} // namespace fx
