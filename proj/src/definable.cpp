#include <kql/definable.hpp>

#include <algorithm>
#include <bit>
#include <functional>
#include <map>

#include <kql/error.hpp>
#include <kql/semantics.hpp>

namespace kql {

namespace {

constexpr int kBruteAutoLimit = 8;
constexpr int kBruteHardLimit = 20;
constexpr int kUnionLimit = 16;

// Numbers keys by first occurrence over the points.
template <class Key>
int number_blocks(const std::vector<Key>& keys, std::vector<int>& out) {
    std::map<Key, int> ids;
    out.resize(keys.size());
    for (std::size_t p = 0; p < keys.size(); ++p) {
        auto [it, inserted] = ids.emplace(keys[p], static_cast<int>(ids.size()));
        out[p] = it->second;
    }
    return static_cast<int>(ids.size());
}

std::vector<TupleCode> as_vector(const TupleSet& s) { return s.elements(); }

bool in_upset(const std::vector<TupleSet>& family, const TupleSet& s) {
    for (const auto& f : family)
        if (f.is_subset_of(s)) return true;
    return false;
}

struct Separator {
    std::size_t qi;
    TupleSet set;
    bool first_admits;
};

} // namespace

void check_registry(const std::vector<Quantifier>& registry, const Signature& sig, int k) {
    for (const auto& q : registry) q.check(sig, k);
}

DefinableAlgebra::DefinableAlgebra(const Structure& a, const Structure& b, int k,
                                   std::vector<Quantifier> registry, Route route, bool build_formulas)
    : a_(&a), b_(&b), registry_(std::move(registry)), left_space_(a.size(), k),
      right_space_(b.size(), k), route_(route), build_formulas_(build_formulas) {
    if (!(a.signature() == b.signature()))
        throw SignatureMismatch("structures have different signatures");
    check_registry(registry_, a.signature(), k);

    // Level 0: points grouped by the extensions of all atoms.
    Evaluator ea(a, k), eb(b, k);
    std::vector<Formula> atoms;
    for (const auto& [rel, arity] : a.signature().relations())
        for (auto& vars : variable_tuples(k, arity)) atoms.push_back(Formula::atom(rel, vars));
    std::vector<std::vector<bool>> keys(points(), std::vector<bool>(atoms.size()));
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        const auto& la = ea.extension(atoms[i]);
        const auto& lb = eb.extension(atoms[i]);
        for (TupleCode c = 0; c < left_space_.size(); ++c) keys[left_point(c)][i] = la.contains(c);
        for (TupleCode c = 0; c < right_space_.size(); ++c) keys[right_point(c)][i] = lb.contains(c);
    }
    std::vector<int> level0;
    counts_.push_back(number_blocks(keys, level0));
    blocks_.push_back(std::move(level0));

    if (build_formulas_) {
        std::vector<Formula> fs(counts_[0]);
        std::vector<bool> done(counts_[0], false);
        for (std::size_t p = 0; p < points(); ++p) {
            int blk = blocks_[0][p];
            if (done[blk]) continue;
            done[blk] = true;
            std::vector<Formula> lits;
            for (std::size_t i = 0; i < atoms.size(); ++i)
                lits.push_back(keys[p][i] ? atoms[i] : Formula::negate(atoms[i]));
            fs[blk] = Formula::conjunction(lits);
        }
        formulas_.push_back(std::move(fs));
    }
}

bool DefinableAlgebra::admits_point(std::size_t qi, std::size_t p, const TupleSet& left_ext,
                                    const TupleSet& right_ext) const {
    const auto& q = registry_[qi];
    if (p < left_points()) return q.admits_witness_within(*a_, left_space_, static_cast<TupleCode>(p), left_ext);
    return q.admits_witness_within(*b_, right_space_, static_cast<TupleCode>(p - left_points()), right_ext);
}

Formula DefinableAlgebra::test_formula(std::size_t qi, const BlockSet& set, int level) const {
    std::vector<Formula> parts;
    set.for_each([&](TupleCode blk) { parts.push_back(formulas_[level][blk]); });
    return Formula::quant(registry_[qi], Formula::disjunction(parts));
}

void DefinableAlgebra::refine_once() {
    const int cur = level();
    const auto& prev = blocks_[cur];
    const int m = counts_[cur];
    const std::size_t nq = registry_.size();

    bool brute = route_ == Route::Brute || (route_ == Route::Auto && m <= kBruteAutoLimit);
    if (brute && m > kBruteHardLimit)
        throw SizeGuardError("brute-force refinement limited to " + std::to_string(kBruteHardLimit) + " blocks");

    std::vector<int> next;
    int next_count = 0;
    // Finds a test separating points p and p2; only called when their keys differ.
    std::function<Separator(std::size_t, std::size_t)> separate;

    std::vector<std::vector<std::vector<bool>>> admits;          // brute: [p][qi][mask]
    std::vector<std::vector<std::vector<TupleSet>>> antichains;  // antichain: [p][qi]

    if (brute) {
        const std::size_t masks = std::size_t{1} << m;
        std::vector<TupleSet> left_ext(masks, left_space_.empty_set());
        std::vector<TupleSet> right_ext(masks, right_space_.empty_set());
        std::vector<TupleSet> left_blk(m, left_space_.empty_set()), right_blk(m, right_space_.empty_set());
        for (TupleCode c = 0; c < left_space_.size(); ++c) left_blk[prev[left_point(c)]].insert(c);
        for (TupleCode c = 0; c < right_space_.size(); ++c) right_blk[prev[right_point(c)]].insert(c);
        for (std::size_t mask = 1; mask < masks; ++mask) {
            int low = std::countr_zero(mask);
            left_ext[mask] = left_ext[mask & (mask - 1)] | left_blk[low];
            right_ext[mask] = right_ext[mask & (mask - 1)] | right_blk[low];
        }
        admits.assign(points(), std::vector<std::vector<bool>>(nq, std::vector<bool>(masks)));
        for (std::size_t p = 0; p < points(); ++p)
            for (std::size_t qi = 0; qi < nq; ++qi)
                for (std::size_t mask = 0; mask < masks; ++mask)
                    admits[p][qi][mask] = admits_point(qi, p, left_ext[mask], right_ext[mask]);

        std::vector<std::pair<int, std::vector<std::vector<bool>>>> keys;
        for (std::size_t p = 0; p < points(); ++p) keys.emplace_back(prev[p], admits[p]);
        next_count = number_blocks(keys, next);

        separate = [&, m, masks](std::size_t p, std::size_t p2) {
            for (std::size_t qi = 0; qi < nq; ++qi)
                for (std::size_t mask = 0; mask < masks; ++mask)
                    if (admits[p][qi][mask] != admits[p2][qi][mask]) {
                        TupleSet set(static_cast<std::size_t>(m));
                        for (int bit = 0; bit < m; ++bit)
                            if ((mask >> bit) & 1U) set.insert(static_cast<TupleCode>(bit));
                        return Separator{qi, set, static_cast<bool>(admits[p][qi][mask])};
                    }
            throw Error("internal", "points with equal keys cannot be separated");
        };
    } else {
        if (witnesses_.empty()) {
            witnesses_.resize(nq);
            for (std::size_t qi = 0; qi < nq; ++qi) {
                auto left = registry_[qi].minimal_witness_table(*a_, left_space_);
                auto right = registry_[qi].minimal_witness_table(*b_, right_space_);
                witnesses_[qi] = std::move(left);
                for (auto& w : right) witnesses_[qi].push_back(std::move(w));
            }
        }
        antichains.assign(points(), std::vector<std::vector<TupleSet>>(nq));
        for (std::size_t p = 0; p < points(); ++p) {
            bool left = p < left_points();
            std::size_t offset = left ? 0 : left_points();
            for (std::size_t qi = 0; qi < nq; ++qi) {
                std::vector<TupleSet> sets;
                for (const auto& w : witnesses_[qi][p]) {
                    TupleSet bs(static_cast<std::size_t>(m));
                    w.for_each([&](TupleCode c) { bs.insert(static_cast<TupleCode>(prev[offset + c])); });
                    sets.push_back(std::move(bs));
                }
                std::sort(sets.begin(), sets.end(), [](const TupleSet& x, const TupleSet& y) {
                    if (x.count() != y.count()) return x.count() < y.count();
                    return canonical_less(x, y);
                });
                sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
                std::vector<TupleSet> minimal;
                for (auto& s : sets)
                    if (!in_upset(minimal, s)) minimal.push_back(std::move(s));
                std::sort(minimal.begin(), minimal.end(), canonical_less);
                antichains[p][qi] = std::move(minimal);
            }
        }
        std::vector<std::pair<int, std::vector<std::vector<std::vector<TupleCode>>>>> keys;
        for (std::size_t p = 0; p < points(); ++p) {
            std::vector<std::vector<std::vector<TupleCode>>> key(nq);
            for (std::size_t qi = 0; qi < nq; ++qi)
                for (const auto& s : antichains[p][qi]) key[qi].push_back(as_vector(s));
            keys.emplace_back(prev[p], std::move(key));
        }
        next_count = number_blocks(keys, next);

        separate = [&](std::size_t p, std::size_t p2) {
            for (std::size_t qi = 0; qi < nq; ++qi) {
                const auto& f = antichains[p][qi];
                const auto& g = antichains[p2][qi];
                if (f == g) continue;
                for (const auto& s : f)
                    if (!in_upset(g, s)) return Separator{qi, s, true};
                for (const auto& s : g)
                    if (!in_upset(f, s)) return Separator{qi, s, false};
            }
            throw Error("internal", "points with equal keys cannot be separated");
        };
    }

    if (build_formulas_) {
        std::vector<std::size_t> rep(next_count, points());
        for (std::size_t p = 0; p < points(); ++p)
            if (rep[next[p]] == points()) rep[next[p]] = p;
        std::vector<Formula> fs(next_count);
        for (int c = 0; c < next_count; ++c) {
            int parent = prev[rep[c]];
            std::vector<Formula> parts{formulas_[cur][parent]};
            for (int d = 0; d < next_count; ++d) {
                if (d == c || prev[rep[d]] != parent) continue;
                Separator sep = separate(rep[c], rep[d]);
                Formula t = test_formula(sep.qi, sep.set, cur);
                parts.push_back(sep.first_admits ? t : Formula::negate(t));
            }
            fs[c] = parts.size() == 1 ? parts[0] : Formula::conjunction(parts);
        }
        formulas_.push_back(std::move(fs));
    }

    if (next_count == m && stable_at_ < 0) stable_at_ = cur;
    blocks_.push_back(std::move(next));
    counts_.push_back(next_count);
}

void DefinableAlgebra::refine_to(int q) {
    while (level() < q) {
        if (stable()) {
            // A stable partition refines to itself; formulas carry over.
            blocks_.push_back(blocks_.back());
            counts_.push_back(counts_.back());
            if (build_formulas_) formulas_.push_back(formulas_.back());
        } else {
            refine_once();
        }
    }
}

int DefinableAlgebra::stabilize() {
    while (!stable()) refine_once();
    return stable_at_;
}

const std::vector<int>& DefinableAlgebra::blocks(int q) {
    refine_to(q);
    return blocks_[q];
}

int DefinableAlgebra::block_count(int q) {
    refine_to(q);
    return counts_[q];
}

const std::vector<Formula>& DefinableAlgebra::block_formulas(int q) {
    if (!build_formulas_) throw ValidationError("block formulas were not requested");
    refine_to(q);
    return formulas_[q];
}

DefinableSetPair DefinableAlgebra::union_of(int q, const std::vector<int>& block_ids) {
    const auto& blk = blocks(q);
    std::vector<bool> chosen(counts_[q], false);
    for (int id : block_ids) chosen.at(id) = true;
    DefinableSetPair out{left_space_.empty_set(), right_space_.empty_set(), q};
    for (TupleCode c = 0; c < left_space_.size(); ++c)
        if (chosen[blk[left_point(c)]]) out.left.insert(c);
    for (TupleCode c = 0; c < right_space_.size(); ++c)
        if (chosen[blk[right_point(c)]]) out.right.insert(c);
    return out;
}

std::vector<DefinableSetPair> definable_sets(const Structure& a, const Structure& b, int k, int q,
                                             const std::vector<Quantifier>& registry) {
    DefinableAlgebra alg(a, b, k, registry);
    int m = alg.block_count(q);
    if (m > kUnionLimit)
        throw SizeGuardError("definable_sets: " + std::to_string(m) + " blocks exceed the limit of " +
                             std::to_string(kUnionLimit));
    std::vector<DefinableSetPair> out;
    for (std::uint32_t mask = 0; mask < (1U << m); ++mask) {
        std::vector<int> ids;
        for (int i = 0; i < m; ++i)
            if ((mask >> i) & 1U) ids.push_back(i);
        auto pair = alg.union_of(q, ids);
        // First level at which every block is entirely inside or outside the union.
        const auto& top = alg.blocks(q);
        for (int r = 0; r <= q; ++r) {
            const auto& blk = alg.blocks(r);
            std::vector<int> side(alg.block_count(r), -1);
            bool ok = true;
            for (std::size_t p = 0; p < alg.points() && ok; ++p) {
                int in = (mask >> top[p]) & 1U;
                if (side[blk[p]] < 0) side[blk[p]] = in;
                else if (side[blk[p]] != in) ok = false;
            }
            if (ok) {
                pair.rank = r;
                break;
            }
        }
        out.push_back(std::move(pair));
    }
    return out;
}

bool equiv_rank_oracle(const Structure& a, const Assignment& alpha, const Structure& b,
                       const Assignment& beta, int q, const std::vector<Quantifier>& registry) {
    if (alpha.size() != beta.size() || alpha.empty())
        throw ValidationError("assignments must have the same length k >= 1");
    int k = static_cast<int>(alpha.size());
    DefinableAlgebra alg(a, b, k, registry);
    TupleSpace sa(a.size(), k), sb(b.size(), k);
    return alg.equivalent(alg.left_point(sa.encode(alpha)), alg.right_point(sb.encode(beta)), q);
}

} // namespace kql
