#include <kql/quantifier.hpp>

#include <algorithm>
#include <bit>
#include <cctype>
#include <deque>

#include <kql/error.hpp>

namespace kql {

namespace {

constexpr std::size_t kMaxMinimalWitnesses = 1u << 18;
constexpr std::size_t kMaxCycleUniverse = 16;

bool is_modal(Family f) {
    return f == Family::Diamond || f == Family::DiamondAtLeast || f == Family::Cycle ||
           f == Family::Infinite || f == Family::Reach;
}

/// True iff gamma and alpha agree on every coordinate except `position`.
bool agree_off(const TupleSpace& space, TupleCode gamma, TupleCode alpha, int position) {
    return space.with(gamma, position, 0) == space.with(alpha, position, 0);
}

/// The position-line through alpha: alpha[x_{position+1} := c] for all c.
std::vector<TupleCode> line(const TupleSpace& space, TupleCode alpha, int position) {
    std::vector<TupleCode> out;
    out.reserve(space.universe_size());
    for (Element c = 0; c < space.universe_size(); ++c) out.push_back(space.with(alpha, position, c));
    return out;
}

std::size_t binomial_capped(std::size_t n, std::size_t r) {
    if (r > n) return 0;
    std::size_t result = 1;
    for (std::size_t i = 1; i <= r; ++i) {
        result = result * (n - r + i) / i;
        if (result > kMaxMinimalWitnesses) return kMaxMinimalWitnesses + 1;
    }
    return result;
}

/// All r-subsets of `pool` (sorted ascending) in lexicographic order.
std::vector<TupleSet> combinations(std::size_t domain, const std::vector<TupleCode>& pool, int r) {
    std::vector<TupleSet> out;
    auto n = pool.size();
    auto rr = static_cast<std::size_t>(r);
    if (rr > n) return out;
    if (binomial_capped(n, rr) > kMaxMinimalWitnesses)
        throw SizeGuardError("too many minimal witnesses to enumerate");
    std::vector<std::size_t> idx(rr);
    for (std::size_t i = 0; i < rr; ++i) idx[i] = i;
    while (true) {
        TupleSet s(domain);
        for (auto i : idx) s.insert(pool[i]);
        out.push_back(std::move(s));
        std::size_t i = rr;
        while (i > 0 && idx[i - 1] == n - rr + (i - 1)) --i;
        if (i == 0) break;
        ++idx[i - 1];
        for (std::size_t j = i; j < rr; ++j) idx[j] = idx[j - 1] + 1;
    }
    return out;
}

std::vector<bool> reachable_from(const Structure& s, const std::string& rel, Element start) {
    std::vector<bool> seen(s.size(), false);
    std::deque<Element> queue{start};
    seen[start] = true;
    const auto& r = s.relation(rel);
    while (!queue.empty()) {
        Element a = queue.front();
        queue.pop_front();
        for (Element c = 0; c < s.size(); ++c) {
            if (!seen[c] && r.contains(a, c)) {
                seen[c] = true;
                queue.push_back(c);
            }
        }
    }
    return seen;
}

/// Whether the vertex set (bitmask) admits a Hamiltonian R-cycle of length >= 3.
bool hamiltonian_cycle(const Relation& r, std::uint32_t mask) {
    if (std::popcount(mask) < 3) return false;
    if (std::popcount(mask) > 20) throw SizeGuardError("cycle witness test is limited to 20 vertices");
    std::vector<Element> verts;
    for (std::uint32_t m = mask; m != 0; m &= m - 1) verts.push_back(static_cast<Element>(std::countr_zero(m)));
    auto n = verts.size();
    // dp[sub] = bitmask (over positions in verts) of path ends starting at verts[0].
    std::vector<std::uint32_t> dp(std::size_t{1} << n, 0);
    dp[1] = 1;
    for (std::uint32_t sub = 1; sub < dp.size(); sub += 2) {
        for (std::uint32_t ends = dp[sub]; ends != 0; ends &= ends - 1) {
            auto v = static_cast<std::size_t>(std::countr_zero(ends));
            for (std::size_t u = 1; u < n; ++u) {
                if ((sub >> u) & 1U) continue;
                if (r.contains(verts[v], verts[u])) dp[sub | (1U << u)] |= 1U << u;
            }
        }
    }
    std::uint32_t all = static_cast<std::uint32_t>(dp.size() - 1);
    for (std::uint32_t ends = dp[all]; ends != 0; ends &= ends - 1) {
        auto v = static_cast<std::size_t>(std::countr_zero(ends));
        if (r.contains(verts[v], verts[0])) return true;
    }
    return false;
}

bool cycle_dfs(const Relation& r, const std::vector<bool>& allowed, Element start, Element current,
               std::size_t depth, std::vector<bool>& on_path) {
    for (Element next = start; next < allowed.size(); ++next) {
        if (!allowed[next] || !r.contains(current, next)) continue;
        if (next == start) {
            if (depth >= 3) return true;
            continue;
        }
        if (on_path[next]) continue;
        on_path[next] = true;
        bool found = cycle_dfs(r, allowed, start, next, depth + 1, on_path);
        on_path[next] = false;
        if (found) return true;
    }
    return false;
}

TupleSet lift(const TupleSpace& space, TupleCode alpha, std::uint32_t mask) {
    TupleSet w = space.empty_set();
    for (std::uint32_t m = mask; m != 0; m &= m - 1)
        w.insert(space.with(alpha, 0, static_cast<Element>(std::countr_zero(m))));
    return w;
}

void sort_canonical(std::vector<TupleSet>& ws) {
    std::sort(ws.begin(), ws.end(), canonical_less);
}

int parse_int(const std::string& text, std::size_t& pos) {
    std::size_t start = pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    if (start == pos) throw ValidationError("expected a number in quantifier '" + text + "'");
    if (pos - start > 6) throw ValidationError("number too large in quantifier '" + text + "'");
    return std::stoi(text.substr(start, pos - start));
}

} // namespace

// ---------------------------------------------------------------------------
// Construction and syntax

Quantifier Quantifier::diamond(std::string relation) {
    return {Family::Diamond, std::move(relation), 1, 0};
}
Quantifier Quantifier::diamond_at_least(int n, std::string relation) {
    if (n < 1) throw ValidationError("dia>=n needs n >= 1");
    return {Family::DiamondAtLeast, std::move(relation), n, 0};
}
Quantifier Quantifier::all() { return {Family::All, "", 0, 0}; }
Quantifier Quantifier::some() { return {Family::Some, "", 0, 0}; }
Quantifier Quantifier::cycle(std::string relation) { return {Family::Cycle, std::move(relation), 0, 0}; }
Quantifier Quantifier::infinite(std::string relation) {
    return {Family::Infinite, std::move(relation), 0, 0};
}
Quantifier Quantifier::reach(std::string relation) { return {Family::Reach, std::move(relation), 0, 0}; }
Quantifier Quantifier::count_at_least(int n, int variable) {
    if (n < 1) throw ValidationError("ex>=n needs n >= 1");
    if (variable < 1) throw ValidationError("ex>=n[xi] needs i >= 1");
    return {Family::CountAtLeast, "", n, variable};
}

Quantifier Quantifier::parse(const std::string& raw) {
    auto b = raw.find_first_not_of(" \t");
    auto e = raw.find_last_not_of(" \t");
    if (b == std::string::npos) throw ValidationError("empty quantifier");
    std::string text = raw.substr(b, e - b + 1);
    if (text == "all") return all();
    if (text == "some") return some();

    std::size_t pos = 0;
    while (pos < text.size() && std::isalpha(static_cast<unsigned char>(text[pos]))) ++pos;
    std::string head = text.substr(0, pos);
    int n = -1;
    if (text.compare(pos, 2, ">=") == 0) {
        if (head != "dia" && head != "ex")
            throw ValidationError("unknown quantifier '" + text + "'");
        pos += 2;
        n = parse_int(text, pos);
    }
    if (pos >= text.size() || text[pos] != '[' || text.back() != ']')
        throw ValidationError("malformed quantifier '" + text + "'");
    std::string arg = text.substr(pos + 1, text.size() - pos - 2);
    auto check_ident = [&] {
        if (arg.empty() || !(std::isalpha(static_cast<unsigned char>(arg[0])) || arg[0] == '_') ||
            !std::all_of(arg.begin(), arg.end(), [](char c) {
                return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
            }))
            throw ValidationError("malformed relation name in quantifier '" + text + "'");
    };
    if (head == "ex") {
        if (n < 0) throw ValidationError("malformed quantifier '" + text + "'");
        std::size_t vp = 1;
        if (arg.size() < 2 || arg[0] != 'x') throw ValidationError("malformed variable in '" + text + "'");
        int var = parse_int(arg, vp);
        if (vp != arg.size()) throw ValidationError("malformed variable in '" + text + "'");
        return count_at_least(n, var);
    }
    check_ident();
    if (head == "dia") return n < 0 ? diamond(arg) : diamond_at_least(n, arg);
    if (n >= 0) throw ValidationError("unknown quantifier '" + text + "'");
    if (head == "cyc") return cycle(arg);
    if (head == "inf") return infinite(arg);
    if (head == "reach") return reach(arg);
    throw ValidationError("unknown quantifier '" + text + "'");
}

Signature Quantifier::signature() const {
    Signature sig;
    if (is_modal(family_)) sig.add(relation_, 2);
    return sig;
}

std::string Quantifier::to_string() const {
    switch (family_) {
    case Family::Diamond: return "dia[" + relation_ + "]";
    case Family::DiamondAtLeast: return "dia>=" + std::to_string(threshold_) + "[" + relation_ + "]";
    case Family::All: return "all";
    case Family::Some: return "some";
    case Family::Cycle: return "cyc[" + relation_ + "]";
    case Family::Infinite: return "inf[" + relation_ + "]";
    case Family::Reach: return "reach[" + relation_ + "]";
    case Family::CountAtLeast:
        return "ex>=" + std::to_string(threshold_) + "[x" + std::to_string(variable_) + "]";
    }
    return "?";
}

void Quantifier::check(const Signature& sig, int k) const {
    if (is_modal(family_) && (!sig.contains(relation_) || sig.arity(relation_) != 2))
        throw SignatureMismatch("quantifier signature not contained: " + to_string() +
                                " needs binary relation '" + relation_ + "'");
    if (family_ == Family::CountAtLeast && variable_ > k)
        throw ValidationError("variable x" + std::to_string(variable_) + " of " + to_string() +
                              " exceeds k = " + std::to_string(k));
}

void Quantifier::require(const Structure& s, const TupleSpace& space) const {
    if (space.universe_size() != s.size())
        throw ValidationError("tuple space does not match the structure");
    check(s.signature(), space.k());
}

std::vector<Quantifier> parse_quantifier_list(const std::string& text) {
    std::vector<Quantifier> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto comma = text.find(',', start);
        auto item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        if (item.find_first_not_of(" \t") != std::string::npos) out.push_back(Quantifier::parse(item));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string format_quantifier_list(const std::vector<Quantifier>& qs) {
    std::string out;
    for (std::size_t i = 0; i < qs.size(); ++i) {
        if (i) out += ',';
        out += qs[i].to_string();
    }
    return out;
}

std::vector<Quantifier> applicable(const std::vector<Quantifier>& registry, const Signature& sig) {
    std::vector<Quantifier> out;
    for (const auto& q : registry)
        if (q.signature().is_subset_of(sig)) out.push_back(q);
    return out;
}

// ---------------------------------------------------------------------------
// Cycles

std::vector<std::uint32_t> minimal_cycle_sets(const Structure& s, const std::string& relation) {
    auto n = s.size();
    if (n > kMaxCycleUniverse)
        throw SizeGuardError("cycle witness enumeration is limited to 16 elements");
    const auto& r = s.relation(relation);
    std::size_t full = std::size_t{1} << n;
    // ends[mask]: path ends v such that some simple path from lowest(mask) to v
    // visits exactly the vertices of mask.
    std::vector<std::uint32_t> ends(full, 0);
    std::vector<bool> cyclic(full, false);
    for (std::size_t v = 0; v < n; ++v) ends[std::size_t{1} << v] = 1U << v;
    for (std::size_t mask = 1; mask < full; ++mask) {
        auto low = static_cast<Element>(std::countr_zero(mask));
        for (std::uint32_t e = ends[mask]; e != 0; e &= e - 1) {
            auto v = static_cast<Element>(std::countr_zero(e));
            if (std::popcount(mask) >= 3 && r.contains(v, low)) cyclic[mask] = true;
            for (Element u = low + 1; u < n; ++u) {
                if ((mask >> u) & 1U) continue;
                if (r.contains(v, u)) ends[mask | (std::size_t{1} << u)] |= 1U << u;
            }
        }
    }
    // contains[mask]: some submask (including mask) is cyclic.
    std::vector<bool> contains_cycle(cyclic);
    for (std::size_t mask = 1; mask < full; ++mask) {
        if (contains_cycle[mask]) continue;
        for (std::size_t m = mask; m != 0; m &= m - 1) {
            if (contains_cycle[mask & ~(m & (~m + 1))]) {
                contains_cycle[mask] = true;
                break;
            }
        }
    }
    std::vector<std::uint32_t> out;
    for (std::size_t mask = 1; mask < full; ++mask) {
        if (!cyclic[mask]) continue;
        bool minimal = true;
        for (std::size_t m = mask; m != 0 && minimal; m &= m - 1)
            if (contains_cycle[mask & ~(m & (~m + 1))]) minimal = false;
        if (minimal) out.push_back(static_cast<std::uint32_t>(mask));
    }
    return out;
}

bool has_long_cycle(const Structure& s, const std::string& relation, const std::vector<bool>& vertices) {
    const auto& r = s.relation(relation);
    std::vector<bool> on_path(s.size(), false);
    for (Element start = 0; start < s.size(); ++start) {
        if (!vertices[start]) continue;
        on_path[start] = true;
        bool found = cycle_dfs(r, vertices, start, start, 1, on_path);
        on_path[start] = false;
        if (found) return true;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Witness semantics

bool Quantifier::is_witness(const Structure& s, const TupleSpace& space, TupleCode alpha,
                            const TupleSet& w) const {
    require(s, space);
    Element a = space.at(alpha, 0);
    auto on_x1_line = [&] {
        bool ok = true;
        w.for_each([&](TupleCode g) { ok = ok && agree_off(space, g, alpha, 0); });
        return ok;
    };
    switch (family_) {
    case Family::Diamond: {
        if (w.count() != 1 || !on_x1_line()) return false;
        Element c = space.at(w.elements().front(), 0);
        return s.relation(relation_).contains(a, c);
    }
    case Family::DiamondAtLeast: {
        int hits = 0;
        for (Element c : s.successors(relation_, a))
            if (w.contains(space.with(alpha, 0, c))) ++hits;
        return hits >= threshold_;
    }
    case Family::All: return w == space.full_set();
    case Family::Some: return !w.empty();
    case Family::Cycle: {
        if (!on_x1_line()) return false;
        std::uint32_t mask = 0;
        w.for_each([&](TupleCode g) { mask |= 1U << space.at(g, 0); });
        if (s.size() > 32) throw SizeGuardError("cycle witness test is limited to 32 elements");
        return hamiltonian_cycle(s.relation(relation_), mask);
    }
    case Family::Infinite: return false;
    case Family::Reach: {
        if (w.count() != 1 || !on_x1_line()) return false;
        Element c = space.at(w.elements().front(), 0);
        return reachable_from(s, relation_, a)[c];
    }
    case Family::CountAtLeast: {
        if (w.count() < static_cast<std::size_t>(threshold_)) return false;
        bool ok = true;
        w.for_each([&](TupleCode g) { ok = ok && agree_off(space, g, alpha, variable_ - 1); });
        return ok;
    }
    }
    return false;
}

std::vector<std::vector<TupleSet>> Quantifier::minimal_witness_table(const Structure& s,
                                                                     const TupleSpace& space) const {
    require(s, space);
    std::vector<std::vector<TupleSet>> table(space.size());
    if (family_ == Family::Cycle) {
        auto sets = minimal_cycle_sets(s, relation_);
        for (TupleCode alpha = 0; alpha < space.size(); ++alpha) {
            auto& ws = table[alpha];
            for (auto mask : sets) ws.push_back(lift(space, alpha, mask));
            sort_canonical(ws);
        }
        return table;
    }
    for (TupleCode alpha = 0; alpha < space.size(); ++alpha)
        table[alpha] = minimal_witnesses(s, space, alpha);
    return table;
}

std::vector<TupleSet> Quantifier::minimal_witnesses(const Structure& s, const TupleSpace& space,
                                                    TupleCode alpha) const {
    require(s, space);
    Element a = space.at(alpha, 0);
    std::vector<TupleSet> out;
    auto singleton = [&](TupleCode c) {
        TupleSet w = space.empty_set();
        w.insert(c);
        return w;
    };
    switch (family_) {
    case Family::Diamond:
        for (Element c : s.successors(relation_, a)) out.push_back(singleton(space.with(alpha, 0, c)));
        break;
    case Family::DiamondAtLeast: {
        std::vector<TupleCode> pool;
        for (Element c : s.successors(relation_, a)) pool.push_back(space.with(alpha, 0, c));
        out = combinations(space.size(), pool, threshold_);
        break;
    }
    case Family::All: out.push_back(space.full_set()); break;
    case Family::Some:
        for (TupleCode c = 0; c < space.size(); ++c) out.push_back(singleton(c));
        break;
    case Family::Cycle:
        for (auto mask : minimal_cycle_sets(s, relation_)) out.push_back(lift(space, alpha, mask));
        break;
    case Family::Infinite: break;
    case Family::Reach: {
        auto seen = reachable_from(s, relation_, a);
        for (Element c = 0; c < s.size(); ++c)
            if (seen[c]) out.push_back(singleton(space.with(alpha, 0, c)));
        break;
    }
    case Family::CountAtLeast: {
        auto pool = line(space, alpha, variable_ - 1);
        std::sort(pool.begin(), pool.end());
        out = combinations(space.size(), pool, threshold_);
        break;
    }
    }
    sort_canonical(out);
    return out;
}

bool Quantifier::admits_witness_within(const Structure& s, const TupleSpace& space, TupleCode alpha,
                                       const TupleSet& extension) const {
    require(s, space);
    Element a = space.at(alpha, 0);
    switch (family_) {
    case Family::Diamond: {
        const auto& r = s.relation(relation_);
        for (Element c = 0; c < s.size(); ++c)
            if (r.contains(a, c) && extension.contains(space.with(alpha, 0, c))) return true;
        return false;
    }
    case Family::DiamondAtLeast: {
        const auto& r = s.relation(relation_);
        int hits = 0;
        for (Element c = 0; c < s.size(); ++c)
            if (r.contains(a, c) && extension.contains(space.with(alpha, 0, c))) ++hits;
        return hits >= threshold_;
    }
    case Family::All: return extension == space.full_set();
    case Family::Some: return !extension.empty();
    case Family::Cycle: {
        std::vector<bool> vertices(s.size(), false);
        for (Element c = 0; c < s.size(); ++c) vertices[c] = extension.contains(space.with(alpha, 0, c));
        return has_long_cycle(s, relation_, vertices);
    }
    case Family::Infinite: return false;
    case Family::Reach: {
        auto seen = reachable_from(s, relation_, a);
        for (Element c = 0; c < s.size(); ++c)
            if (seen[c] && extension.contains(space.with(alpha, 0, c))) return true;
        return false;
    }
    case Family::CountAtLeast: {
        int hits = 0;
        for (TupleCode g : line(space, alpha, variable_ - 1))
            if (extension.contains(g)) ++hits;
        return hits >= threshold_;
    }
    }
    return false;
}

// ---------------------------------------------------------------------------
// Powerset oracle

namespace oracle {

void check_size(const Structure& s, const TupleSpace& space) {
    if (s.size() > kMaxUniverse || space.size() > kMaxTupleSpace)
        throw SizeGuardError("oracle mode is limited to universes of at most 4 elements and |A^k| <= 16");
}

namespace {

TupleSet from_mask(const TupleSpace& space, std::uint32_t mask) {
    TupleSet w = space.empty_set();
    for (std::uint32_t m = mask; m != 0; m &= m - 1) w.insert(static_cast<TupleCode>(std::countr_zero(m)));
    return w;
}

std::uint32_t to_mask(const TupleSet& set) {
    std::uint32_t mask = 0;
    set.for_each([&](TupleCode c) { mask |= 1U << c; });
    return mask;
}

} // namespace

std::vector<TupleSet> all_witnesses(const Quantifier& q, const Structure& s, const TupleSpace& space,
                                    TupleCode alpha) {
    check_size(s, space);
    std::vector<TupleSet> out;
    std::uint32_t full = (1U << space.size());
    for (std::uint32_t mask = 0; mask < full; ++mask) {
        auto w = from_mask(space, mask);
        if (q.is_witness(s, space, alpha, w)) out.push_back(std::move(w));
    }
    sort_canonical(out);
    return out;
}

std::vector<TupleSet> minimal_witnesses(const Quantifier& q, const Structure& s,
                                        const TupleSpace& space, TupleCode alpha) {
    check_size(s, space);
    const std::size_t n = space.size();
    const std::uint32_t full = 1U << n;
    std::vector<char> witness(full), below(full);
    for (std::uint32_t mask = 0; mask < full; ++mask)
        witness[mask] = below[mask] = q.is_witness(s, space, alpha, from_mask(space, mask));
    // below[m]: some submask of m is a witness (subset-sum closure).
    for (std::size_t i = 0; i < n; ++i)
        for (std::uint32_t mask = 0; mask < full; ++mask)
            if ((mask >> i) & 1U) below[mask] |= below[mask ^ (1U << i)];
    std::vector<TupleSet> out;
    for (std::uint32_t mask = 0; mask < full; ++mask) {
        if (!witness[mask]) continue;
        bool minimal = true;
        for (std::uint32_t m = mask; m != 0 && minimal; m &= m - 1)
            minimal = !below[mask ^ (m & -m)];
        if (minimal) out.push_back(from_mask(space, mask));
    }
    sort_canonical(out);
    return out;
}

bool admits_witness_within(const Quantifier& q, const Structure& s, const TupleSpace& space,
                           TupleCode alpha, const TupleSet& extension) {
    check_size(s, space);
    std::uint32_t e = to_mask(extension);
    // Enumerate every submask of the extension, including the empty set.
    for (std::uint32_t sub = e;; sub = (sub - 1) & e) {
        if (q.is_witness(s, space, alpha, from_mask(space, sub))) return true;
        if (sub == 0) break;
    }
    return false;
}

} // namespace oracle

} // namespace kql
