#include <kql/charform.hpp>

#include <algorithm>
#include <bit>
#include <functional>
#include <unordered_map>

#include <kql/definable.hpp>
#include <kql/error.hpp>
#include <kql/game.hpp>

namespace kql {

namespace {

constexpr std::size_t kMaxTransversals = 1U << 16;
constexpr std::size_t kMaxBruteClasses = 20;

struct ExtensionKeyHash {
    std::size_t operator()(const std::vector<TupleSet>& key) const noexcept {
        std::size_t h = key.size();
        for (const auto& s : key) h = h * 1000003U ^ s.hash();
        return h;
    }
};

// Minimal hitting sets of a hypergraph given as bitmasks (Berge's algorithm).
std::vector<std::uint64_t> minimal_transversals(std::vector<std::uint64_t> edges) {
    std::sort(edges.begin(), edges.end(), [](auto x, auto y) { return std::popcount(x) < std::popcount(y); });
    std::vector<std::uint64_t> reduced;
    for (auto e : edges) {
        bool redundant = std::any_of(reduced.begin(), reduced.end(), [&](auto f) { return (f & ~e) == 0; });
        if (!redundant) reduced.push_back(e);
    }
    std::vector<std::uint64_t> trs{0};
    for (auto e : reduced) {
        std::vector<std::uint64_t> next;
        for (auto t : trs) {
            if (t & e) {
                next.push_back(t);
                continue;
            }
            for (auto bits = e; bits != 0; bits &= bits - 1) next.push_back(t | (bits & (~bits + 1)));
        }
        std::sort(next.begin(), next.end());
        next.erase(std::unique(next.begin(), next.end()), next.end());
        std::stable_sort(next.begin(), next.end(),
                         [](auto x, auto y) { return std::popcount(x) < std::popcount(y); });
        trs.clear();
        for (auto t : next) {
            bool covered = std::any_of(trs.begin(), trs.end(), [&](auto m) { return (m & ~t) == 0; });
            if (!covered) trs.push_back(t);
        }
        if (trs.size() > kMaxTransversals) throw SizeGuardError("too many back conjuncts in characteristic formula");
    }
    std::sort(trs.begin(), trs.end());
    return trs;
}

void collect_quantifiers(const Formula& f, std::vector<Quantifier>& out) {
    switch (f.kind()) {
    case Formula::Kind::Not: collect_quantifiers(f.sub(), out); break;
    case Formula::Kind::And:
        collect_quantifiers(f.left(), out);
        collect_quantifiers(f.right(), out);
        break;
    case Formula::Kind::Quant:
        out.push_back(f.quantifier());
        collect_quantifiers(f.body(), out);
        break;
    default: break;
    }
}

} // namespace

CharContext::CharContext(std::vector<Structure> universe, std::vector<Quantifier> registry, int k,
                         CharOptions options)
    : universe_(std::move(universe)), registry_(std::move(registry)), k_(k), options_(options) {
    if (universe_.empty()) throw ValidationError("comparison universe is empty");
    if (k < 1) throw ValidationError("k must be >= 1");
    for (const auto& s : universe_)
        if (!(s.signature() == universe_[0].signature()))
            throw SignatureMismatch("comparison universe mixes signatures");
    check_registry(registry_, universe_[0].signature(), k);
    for (const auto& s : universe_) {
        spaces_.emplace_back(s.size(), k);
        evaluators_.push_back(std::make_unique<Evaluator>(s, k));
        std::vector<std::vector<std::vector<TupleSet>>> per_q;
        for (const auto& q : registry_) per_q.push_back(q.minimal_witness_table(s, spaces_.back()));
        witnesses_.push_back(std::move(per_q));
    }
}

std::size_t CharContext::index_of(const Structure& s) const {
    for (std::size_t i = 0; i < universe_.size(); ++i)
        if (&universe_[i] == &s || universe_[i] == s) return i;
    throw ValidationError("structure_outside_context", "structure is not in the comparison universe");
}

void CharContext::ensure(int q) {
    if (q < 0) throw ValidationError("rank must be >= 0");
    if (levels_.empty()) build_base();
    while (static_cast<int>(levels_.size()) <= q) build_next();
}

const Formula& CharContext::chi(std::size_t s, TupleCode alpha, int q) {
    ensure(q);
    return levels_[q].chi.at(s).at(alpha);
}

int CharContext::class_of(std::size_t s, TupleCode alpha, int q) {
    ensure(q);
    return levels_[q].cls.at(s).at(alpha);
}

std::size_t CharContext::class_count(int q) {
    ensure(q);
    return levels_[q].reps.size();
}

const Formula& CharContext::representative(int q, int cls) {
    ensure(q);
    return levels_[q].reps.at(cls);
}

void CharContext::intern(Level& lvl) {
    std::unordered_map<std::vector<TupleSet>, int, ExtensionKeyHash> ids;
    lvl.cls.assign(universe_.size(), {});
    for (std::size_t s = 0; s < universe_.size(); ++s) {
        for (TupleCode a = 0; a < spaces_[s].size(); ++a) {
            const Formula& f = lvl.chi[s][a];
            std::vector<TupleSet> key;
            for (std::size_t t = 0; t < universe_.size(); ++t) key.push_back(evaluators_[t]->extension(f));
            auto [it, inserted] = ids.emplace(key, static_cast<int>(lvl.reps.size()));
            if (inserted) {
                lvl.reps.push_back(f);
                lvl.ext.push_back(std::move(key));
            }
            lvl.cls[s].push_back(it->second);
        }
    }
}

void CharContext::build_base() {
    Level lvl;
    const auto& sig = universe_[0].signature();
    for (std::size_t s = 0; s < universe_.size(); ++s) {
        std::vector<Formula> row;
        for (TupleCode a = 0; a < spaces_[s].size(); ++a) {
            std::vector<Formula> lits{Formula::top()};
            for (const auto& [rel, arity] : sig.relations()) {
                const auto& r = universe_[s].relation(rel);
                for (const auto& vars : variable_tuples(k_, arity)) {
                    std::vector<Element> args;
                    for (int v : vars) args.push_back(spaces_[s].at(a, v - 1));
                    Formula atom = Formula::atom(rel, vars);
                    lits.push_back(r.contains(args) ? atom : Formula::negate(atom));
                }
            }
            row.push_back(Formula::conjunction(lits));
        }
        lvl.chi.push_back(std::move(row));
    }
    intern(lvl);
    levels_.push_back(std::move(lvl));
}

const Formula& CharContext::disjunction(Level& lvl, const std::vector<int>& classes) {
    auto it = lvl.disjunctions.find(classes);
    if (it != lvl.disjunctions.end()) return it->second;
    std::vector<Formula> parts;
    for (int c : classes) parts.push_back(lvl.reps[c]);
    return lvl.disjunctions.emplace(classes, Formula::disjunction(parts)).first->second;
}

std::vector<Formula> CharContext::back_part(Level& lvl, std::size_t s, TupleCode alpha, std::size_t qi) {
    const auto& q = registry_[qi];
    const auto& ws = witnesses_[s][qi][alpha];
    const int nclasses = static_cast<int>(lvl.reps.size());
    std::vector<std::vector<int>> maximal;  // each a sorted class list Phi

    // Classes grouped by their extension in this structure.
    std::vector<int> always;  // empty extension here
    std::vector<std::vector<int>> groups;
    std::vector<TupleSet> group_ext;
    for (int c = 0; c < nclasses; ++c) {
        const TupleSet& e = lvl.ext[c][s];
        if (e.empty()) {
            always.push_back(c);
            continue;
        }
        auto pos = std::find(group_ext.begin(), group_ext.end(), e);
        if (pos == group_ext.end()) {
            group_ext.push_back(e);
            groups.push_back({c});
        } else {
            groups[pos - group_ext.begin()].push_back(c);
        }
    }
    bool disjoint = groups.size() <= 64;
    for (std::size_t i = 0; i < group_ext.size() && disjoint; ++i)
        for (std::size_t j = i + 1; j < group_ext.size() && disjoint; ++j)
            if (group_ext[i].intersects(group_ext[j])) disjoint = false;

    if (disjoint) {
        TupleSet covered = spaces_[s].empty_set();
        for (const auto& e : group_ext) covered |= e;
        std::vector<std::uint64_t> edges;
        for (const auto& w : ws) {
            if (!w.is_subset_of(covered)) continue;  // never inside any union of classes
            std::uint64_t edge = 0;
            for (std::size_t g = 0; g < group_ext.size(); ++g)
                if (group_ext[g].intersects(w)) edge |= std::uint64_t{1} << g;
            if (edge == 0) return {};  // empty witness: Q \/ Phi holds for every Phi
            edges.push_back(edge);
        }
        for (auto t : minimal_transversals(edges)) {
            std::vector<int> phi = always;
            for (std::size_t g = 0; g < groups.size(); ++g)
                if (!((t >> g) & 1U)) phi.insert(phi.end(), groups[g].begin(), groups[g].end());
            std::sort(phi.begin(), phi.end());
            maximal.push_back(std::move(phi));
        }
    } else {
        if (static_cast<std::size_t>(nclasses) > kMaxBruteClasses)
            throw SizeGuardError("back part: overlapping class extensions with too many classes");
        std::vector<std::uint32_t> good;
        for (std::uint32_t mask = 0; mask < (1U << nclasses); ++mask) {
            TupleSet e = spaces_[s].empty_set();
            for (int c = 0; c < nclasses; ++c)
                if ((mask >> c) & 1U) e |= lvl.ext[c][s];
            if (!q.admits_witness_within(universe_[s], spaces_[s], alpha, e)) good.push_back(mask);
        }
        for (auto m : good) {
            bool is_max = std::none_of(good.begin(), good.end(), [&](auto o) { return o != m && (m & ~o) == 0; });
            if (!is_max) continue;
            std::vector<int> phi;
            for (int c = 0; c < nclasses; ++c)
                if ((m >> c) & 1U) phi.push_back(c);
            maximal.push_back(std::move(phi));
        }
    }

    std::vector<Formula> out;
    for (const auto& phi : maximal) out.push_back(Formula::negate(Formula::quant(q, disjunction(lvl, phi))));
    return out;
}

void CharContext::build_next() {
    Level& prev = levels_.back();
    Level lvl;
    for (std::size_t s = 0; s < universe_.size(); ++s) {
        std::vector<Formula> row;
        for (TupleCode a = 0; a < spaces_[s].size(); ++a) {
            std::vector<Formula> parts{levels_[0].chi[s][a]};
            for (std::size_t qi = 0; qi < registry_.size(); ++qi) {
                if (options_.forth) {
                    for (const auto& w : witnesses_[s][qi][a]) {
                        std::vector<int> classes;
                        w.for_each([&](TupleCode g) { classes.push_back(prev.cls[s][g]); });
                        std::sort(classes.begin(), classes.end());
                        classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
                        parts.push_back(Formula::quant(registry_[qi], disjunction(prev, classes)));
                    }
                }
                if (options_.back) {
                    auto back = back_part(prev, s, a, qi);
                    parts.insert(parts.end(), back.begin(), back.end());
                }
            }
            row.push_back(Formula::conjunction(parts));
        }
        lvl.chi.push_back(std::move(row));
    }
    intern(lvl);
    levels_.push_back(std::move(lvl));
}

Formula chi(CharContext& ctx, const Structure& s, const Assignment& alpha, int q) {
    std::size_t i = ctx.index_of(s);
    return ctx.chi(i, ctx.space(i).encode(alpha), q);
}

bool check_char(CharContext& ctx, const Structure& a, const Assignment& alpha, const Structure& b,
                const Assignment& beta, int q) {
    std::size_t ia = ctx.index_of(a), ib = ctx.index_of(b);
    const Formula& f = ctx.chi(ia, ctx.space(ia).encode(alpha), q);
    return ctx.evaluator(ib).holds(ctx.space(ib).encode(beta), f);
}

Formula normal_form(CharContext& ctx, const Formula& f) {
    std::vector<Quantifier> used;
    collect_quantifiers(f, used);
    for (const auto& q : used)
        if (std::find(ctx.registry().begin(), ctx.registry().end(), q) == ctx.registry().end())
            throw ValidationError("quantifier " + q.to_string() + " is not in the context registry");
    const int q = quantifier_rank(f);
    std::vector<bool> seen(ctx.class_count(q), false);
    std::vector<Formula> parts;
    for (std::size_t s = 0; s < ctx.universe().size(); ++s) {
        const TupleSet& ext = ctx.evaluator(s).extension(f);
        ext.for_each([&](TupleCode a) {
            int c = ctx.class_of(s, a, q);
            if (seen[c]) return;
            seen[c] = true;
            parts.push_back(ctx.representative(q, c));
        });
    }
    return Formula::disjunction(parts);
}

std::optional<Formula> distinguishing_formula(CharContext& ctx, const Structure& a, const Assignment& alpha,
                                              const Structure& b, const Assignment& beta) {
    std::size_t ia = ctx.index_of(a), ib = ctx.index_of(b);
    GameArena arena(ctx.universe()[ia], ctx.universe()[ib], ctx.k(), ctx.registry());
    BisimRelation rel = bisim(arena);
    TupleCode ca = ctx.space(ia).encode(alpha), cb = ctx.space(ib).encode(beta);
    int lv = rel.level(ca, cb);
    if (lv == BisimRelation::kInfinite) return std::nullopt;
    return ctx.chi(ia, ca, lv + 1);
}

} // namespace kql
