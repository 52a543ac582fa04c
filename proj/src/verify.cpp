#include <kql/verify.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>

#include <kql/charform.hpp>
#include <kql/definable.hpp>
#include <kql/error.hpp>
#include <kql/product.hpp>
#include <kql/semantics.hpp>

namespace kql {

using json = nlohmann::ordered_json;

namespace {

const std::vector<Family> kFamilies = {Family::Diamond, Family::DiamondAtLeast, Family::All,
                                       Family::Some,    Family::Cycle,          Family::Infinite,
                                       Family::Reach,   Family::CountAtLeast};

int uniform(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
bool coin(std::mt19937_64& rng) { return (rng() & 1U) != 0; }

std::string element_name(std::size_t i) {
    if (i < 26) return std::string(1, static_cast<char>('a' + i));
    return "e" + std::to_string(i);
}

TupleSet random_set(std::mt19937_64& rng, std::size_t domain) {
    TupleSet s(domain);
    for (TupleCode c = 0; c < domain; ++c)
        if (coin(rng)) s.insert(c);
    return s;
}

std::vector<std::string> binary_relations(const Signature& sig) {
    std::vector<std::string> out;
    for (const auto& [name, arity] : sig.relations())
        if (arity == 2) out.push_back(name);
    return out;
}

json structure_json(const Structure& s) { return json::parse(serialize_structure(s)); }

std::string fmt(const Structure& s, const TupleSpace& space, TupleCode c) {
    return format_assignment(s, space.decode(c));
}

// Largest k <= max_k with size^k <= limit (at least 1).
int clamp_k(int k, std::size_t size, std::size_t limit) {
    while (k > 1) {
        std::size_t n = 1;
        for (int i = 0; i < k; ++i) n *= size;
        if (n <= limit) break;
        --k;
    }
    return k;
}

Signature random_signature(std::mt19937_64& rng, const Corpus& c) {
    Signature sig;
    for (const auto& q : c.quantifiers)
        if (!q.relation().empty() && !sig.contains(q.relation())) sig.add(q.relation(), 2);
    if (!sig.empty() && c.max_relations <= static_cast<int>(sig.size())) return sig;
    if (c.max_arity < 2) {
        sig.add("P", 1);
        if (c.max_relations >= 2 && coin(rng)) sig.add("Q", 1);
        return sig;
    }
    int shape = uniform(rng, 0, 7);
    if (shape == 0 && sig.empty()) {
        sig.add("P", 1);
        return sig;
    }
    if (!sig.contains("R") && static_cast<int>(sig.size()) < c.max_relations) sig.add("R", 2);
    if (static_cast<int>(sig.size()) < c.max_relations) {
        if (shape <= 3 && !sig.contains("P")) sig.add("P", 1);
        else if (shape <= 5 && !sig.contains("S")) sig.add("S", 2);
    }
    return sig;
}

std::vector<Quantifier> random_registry(std::mt19937_64& rng, const Signature& sig, int k) {
    std::vector<Quantifier> pool{Quantifier::all(), Quantifier::some()};
    for (const auto& r : binary_relations(sig)) {
        pool.push_back(Quantifier::diamond(r));
        pool.push_back(Quantifier::diamond_at_least(2, r));
        pool.push_back(Quantifier::reach(r));
        pool.push_back(Quantifier::cycle(r));
    }
    for (int n = 1; n <= 2; ++n)
        for (int v = 1; v <= k; ++v) pool.push_back(Quantifier::count_at_least(n, v));
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.erase(pool.begin() + std::min<int>(uniform(rng, 1, 3), static_cast<int>(pool.size())), pool.end());
    std::sort(pool.begin(), pool.end());
    return pool;
}

Quantifier random_quantifier(std::mt19937_64& rng, Family f, int k) {
    switch (f) {
    case Family::Diamond: return Quantifier::diamond("R");
    case Family::DiamondAtLeast: return Quantifier::diamond_at_least(uniform(rng, 1, 3), "R");
    case Family::All: return Quantifier::all();
    case Family::Some: return Quantifier::some();
    case Family::Cycle: return Quantifier::cycle("R");
    case Family::Infinite: return Quantifier::infinite("R");
    case Family::Reach: return Quantifier::reach("R");
    case Family::CountAtLeast: return Quantifier::count_at_least(uniform(rng, 1, 3), uniform(rng, 1, k));
    }
    throw Error("internal", "unknown family");
}

CharOptions mutant_options(const Corpus& c) {
    CharOptions o;
    if (c.mutant == "drop-back") o.back = false;
    if (c.mutant == "drop-forth") o.forth = false;
    return o;
}

std::string corpus_args(const Corpus& c) {
    std::ostringstream out;
    out << "--seed " << c.seed << " --count " << c.count << " --max-size " << c.max_size << " --rank "
        << c.max_rank;
    if (c.max_k != 2) out << " --max-k " << c.max_k;
    if (!c.quantifiers.empty()) out << " --quantifiers '" << format_quantifier_list(c.quantifiers) << "'";
    if (c.mutant != "none") out << " --mutant " << c.mutant;
    return out.str();
}

// Outcome of one instance.
struct Outcome {
    std::size_t checks = 0;
    std::optional<json> cex;
    std::vector<std::string> notes;
    bool counted = true;  // contributes to the instance count
};

json base_cex(const std::string& suite, const Corpus& c, int index, const std::string& message) {
    json out;
    out["suite"] = suite;
    out["instance"] = index;
    out["message"] = message;
    out["reproduce"] = "kql verify " + suite + " " + corpus_args(c) + " --only " + std::to_string(index);
    return out;
}

json instance_cex(const std::string& suite, const Corpus& c, int index, const Instance& inst,
                  const std::string& message) {
    json out = base_cex(suite, c, index, message);
    out["k"] = inst.k;
    out["quantifiers"] = format_quantifier_list(inst.registry);
    out["left"] = structure_json(inst.left);
    out["right"] = structure_json(inst.right);
    return out;
}

SuiteReport drive(const std::string& name, const Corpus& c, int n, const std::function<Outcome(int)>& fn) {
    auto t0 = std::chrono::steady_clock::now();
    std::vector<int> indices;
    if (c.only) indices.push_back(*c.only);
    else {
        indices.resize(static_cast<std::size_t>(n));
        std::iota(indices.begin(), indices.end(), 0);
    }
    std::vector<Outcome> outs(indices.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < static_cast<long>(indices.size()); ++i) {
        try {
            outs[i] = fn(indices[i]);
        } catch (const std::exception& e) {
            outs[i].cex = base_cex(name, c, indices[i], std::string("exception: ") + e.what());
        }
    }
    SuiteReport rep;
    rep.suite = name;
    for (std::size_t i = 0; i < outs.size(); ++i) {
        if (outs[i].counted) ++rep.instances;
        rep.checks += outs[i].checks;
        for (auto& note : outs[i].notes) rep.details.push_back(note);
        if (outs[i].cex && !rep.counterexample) rep.counterexample = outs[i].cex;
    }
    rep.passed = !rep.counterexample;
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

// Union-find over the points of A^k ⊔ B^k.
struct Partition {
    std::vector<std::size_t> parent;
    explicit Partition(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void join(std::size_t x, std::size_t y) { parent[find(x)] = find(y); }
    std::size_t classes() {
        std::size_t n = 0;
        for (std::size_t i = 0; i < parent.size(); ++i) n += find(i) == i;
        return n;
    }
};

// ---------------------------------------------------------------------------
// Suites

Outcome suite_quantifiers(const Corpus& c, int index) {
    auto rng = instance_rng(c, index, 11);
    Family fam = kFamilies[static_cast<std::size_t>(index) % kFamilies.size()];
    std::size_t size = static_cast<std::size_t>(uniform(rng, 1, std::min(4, c.max_size)));
    int k = clamp_k(uniform(rng, 1, c.max_k), size, oracle::kMaxTupleSpace);
    Signature sig{{"R", 2}};
    Structure s = random_structure(rng, sig, size);
    TupleSpace space(size, k);
    Quantifier q = random_quantifier(rng, fam, k);
    TupleCode alpha = static_cast<TupleCode>(uniform(rng, 0, static_cast<int>(space.size()) - 1));

    Outcome out;
    auto fail = [&](const std::string& msg, const TupleSet* e) {
        json cex = base_cex("quantifiers", c, index, msg);
        cex["quantifier"] = q.to_string();
        cex["k"] = k;
        cex["structure"] = structure_json(s);
        cex["alpha"] = fmt(s, space, alpha);
        if (e) cex["extension"] = format_tuple_set(s, space, *e);
        out.cex = cex;
    };

    auto minimal = q.minimal_witnesses(s, space, alpha);
    auto reference = oracle::minimal_witnesses(q, s, space, alpha);
    std::sort(minimal.begin(), minimal.end(), canonical_less);
    std::sort(reference.begin(), reference.end(), canonical_less);
    ++out.checks;
    if (minimal != reference) {
        fail("minimal witnesses differ from powerset brute force", nullptr);
        return out;
    }
    std::vector<TupleSet> probes{space.empty_set(), space.full_set()};
    for (const auto& w : minimal) probes.push_back(w);
    for (int i = 0; i < 8; ++i) probes.push_back(random_set(rng, space.size()));
    for (const auto& e : probes) {
        ++out.checks;
        bool fast = q.admits_witness_within(s, space, alpha, e);
        bool slow = oracle::admits_witness_within(q, s, space, alpha, e);
        if (fast != slow) {
            fail("admits_witness_within disagrees with powerset brute force", &e);
            return out;
        }
    }
    return out;
}

Outcome suite_monotone(const Corpus& c, int index) {
    auto rng = instance_rng(c, index, 12);
    Family fam = kFamilies[static_cast<std::size_t>(index) % kFamilies.size()];
    std::size_t size = static_cast<std::size_t>(uniform(rng, 1, c.max_size));
    int k = clamp_k(uniform(rng, 1, c.max_k), size, 4096);
    Signature sig{{"R", 2}};
    Structure s = random_structure(rng, sig, size);
    TupleSpace space(size, k);
    Quantifier q = random_quantifier(rng, fam, k);
    TupleCode alpha = static_cast<TupleCode>(uniform(rng, 0, static_cast<int>(space.size()) - 1));
    TupleSet e = random_set(rng, space.size());
    TupleSet bigger = e | random_set(rng, space.size());

    Outcome out;
    out.checks = 1;
    if (q.admits_witness_within(s, space, alpha, e) && !q.admits_witness_within(s, space, alpha, bigger)) {
        json cex = base_cex("monotone", c, index, "admits(E) holds but admits(E') fails for E ⊆ E'");
        cex["quantifier"] = q.to_string();
        cex["structure"] = structure_json(s);
        cex["alpha"] = fmt(s, space, alpha);
        cex["E"] = format_tuple_set(s, space, e);
        cex["E_prime"] = format_tuple_set(s, space, bigger);
        out.cex = cex;
    }
    return out;
}

Outcome suite_ef(const Corpus& c, int index) {
    Instance inst = gen_instance(c, index);
    GameArena arena(inst.left, inst.right, inst.k, inst.registry);
    BisimRelation rel = bisim_rank(arena, c.max_rank);
    DefinableAlgebra alg(inst.left, inst.right, inst.k, inst.registry);
    CharContext ctx({inst.left, inst.right}, inst.registry, inst.k, mutant_options(c));
    const auto& sa = arena.left_space();
    const auto& sb = arena.right_space();

    Outcome out;
    for (int q = 0; q <= c.max_rank; ++q)
        for (TupleCode a = 0; a < sa.size(); ++a)
            for (TupleCode b = 0; b < sb.size(); ++b) {
                bool game = rel.contains(a, b, q);
                bool orc = alg.equivalent(alg.left_point(a), alg.right_point(b), q);
                bool chi_ab = ctx.evaluator(1).holds(b, ctx.chi(0, a, q));
                bool chi_ba = ctx.evaluator(0).holds(a, ctx.chi(1, b, q));
                ++out.checks;
                if (game == orc && orc == chi_ab && chi_ab == chi_ba) continue;
                json cex = instance_cex("ef", c, index, inst, "game, oracle and characteristic formulas disagree");
                cex["alpha"] = fmt(inst.left, sa, a);
                cex["beta"] = fmt(inst.right, sb, b);
                cex["q"] = q;
                cex["game"] = game;
                cex["oracle"] = orc;
                cex["chi"] = chi_ab;
                cex["chi_reverse"] = chi_ba;
                out.cex = cex;
                return out;
            }
    return out;
}

Outcome suite_charform(const Corpus& c, int index) {
    Instance inst = gen_instance(c, index);
    CharContext ctx({inst.left, inst.right}, inst.registry, inst.k, mutant_options(c));
    Outcome out;
    const Structure* structs[2] = {&inst.left, &inst.right};
    for (std::size_t s = 0; s < 2; ++s)
        for (int q = 0; q <= c.max_rank; ++q)
            for (TupleCode a = 0; a < ctx.space(s).size(); ++a) {
                const Formula& f = ctx.chi(s, a, q);
                int rank = quantifier_rank(f);
                bool self = ctx.evaluator(s).holds(a, f);
                ++out.checks;
                if (self && rank <= q && (q > 0 || rank == 0)) continue;
                json cex = instance_cex("charform", c, index, inst,
                                        self ? "characteristic formula exceeds its rank"
                                             : "characteristic formula fails at its own tuple");
                cex["side"] = s == 0 ? "left" : "right";
                cex["alpha"] = fmt(*structs[s], ctx.space(s), a);
                cex["q"] = q;
                cex["rank"] = rank;
                out.cex = cex;
                return out;
            }

    // Normal forms agree with their formula on the comparison universe.
    auto rng = instance_rng(c, index, 13);
    for (int i = 0; i < 3; ++i) {
        Formula f = random_formula(rng, inst.left.signature(), inst.k, inst.registry, std::min(2, c.max_rank));
        Formula nf = normal_form(ctx, f);
        for (std::size_t s = 0; s < 2; ++s) {
            ++out.checks;
            if (ctx.evaluator(s).extension(nf) == ctx.evaluator(s).extension(f)) continue;
            json cex = instance_cex("charform", c, index, inst, "normal form disagrees with its formula");
            cex["formula"] = print_formula(f);
            cex["side"] = s == 0 ? "left" : "right";
            out.cex = cex;
            return out;
        }
    }
    return out;
}

Outcome suite_invariance(const Corpus& c, int index) {
    constexpr int kUnionBlocks = 12;
    Instance inst = gen_instance(c, index);
    GameArena arena(inst.left, inst.right, inst.k, inst.registry);
    BisimRelation rel = bisim(arena);
    const PairRelation& stable = rel.stable();
    Outcome out;
    if (stable.count() == 0) {
        out.counted = false;
        return out;
    }
    DefinableAlgebra alg(inst.left, inst.right, inst.k, inst.registry, DefinableAlgebra::Route::Auto, true);
    Evaluator ea(inst.left, inst.k), eb(inst.right, inst.k);

    std::vector<Formula> formulas;
    for (int r = 0; r <= c.max_rank; ++r) {
        const auto& fs = alg.block_formulas(r);
        const auto& blk = alg.blocks(r);
        for (std::size_t b = 0; b < fs.size(); ++b) {
            auto pair = alg.union_of(r, {static_cast<int>(b)});
            ++out.checks;
            if (ea.extension(fs[b]) != pair.left || eb.extension(fs[b]) != pair.right) {
                json cex = instance_cex("invariance", c, index, inst, "block formula does not define its block");
                cex["formula"] = print_formula(fs[b]);
                cex["q"] = r;
                out.cex = cex;
                return out;
            }
            formulas.push_back(fs[b]);
        }
        (void)blk;
    }
    const int top = c.max_rank;
    const int m = alg.block_count(top);
    if (m <= kUnionBlocks) {
        const auto& fs = alg.block_formulas(top);
        for (std::uint32_t mask = 0; mask < (1U << m); ++mask) {
            std::vector<Formula> parts;
            for (int b = 0; b < m; ++b)
                if ((mask >> b) & 1U) parts.push_back(fs[b]);
            formulas.push_back(Formula::disjunction(parts));
        }
    }
    auto rng = instance_rng(c, index, 14);
    for (int i = 0; i < 20; ++i)
        formulas.push_back(random_formula(rng, inst.left.signature(), inst.k, inst.registry, c.max_rank));

    for (const auto& f : formulas) {
        const TupleSet& xa = ea.extension(f);
        const TupleSet& xb = eb.extension(f);
        for (TupleCode a = 0; a < stable.left_size(); ++a) {
            bool va = xa.contains(a);
            bool bad = false;
            TupleCode witness = 0;
            stable.row(a).for_each([&](TupleCode b) {
                ++out.checks;
                if (!bad && xb.contains(b) != va) {
                    bad = true;
                    witness = b;
                }
            });
            if (!bad) continue;
            json cex = instance_cex("invariance", c, index, inst, "bisimilar tuples disagree on a formula");
            cex["formula"] = print_formula(f);
            cex["alpha"] = fmt(inst.left, arena.left_space(), a);
            cex["beta"] = fmt(inst.right, arena.right_space(), witness);
            out.cex = cex;
            return out;
        }
    }
    return out;
}

Outcome suite_finite_index(const Corpus& c, int index) {
    Instance inst = gen_instance(c, index);
    GameArena ab(inst.left, inst.right, inst.k, inst.registry);
    GameArena aa(inst.left, inst.left, inst.k, inst.registry);
    GameArena bb(inst.right, inst.right, inst.k, inst.registry);
    BisimRelation rab = bisim(ab), raa = bisim(aa), rbb = bisim(bb);
    const std::size_t na = ab.left_space().size(), nb = ab.right_space().size();
    Outcome out;
    auto fail = [&](const std::string& msg, int r) {
        json cex = instance_cex("finite-index", c, index, inst, msg);
        cex["q"] = r;
        out.cex = cex;
    };

    const int top = std::max({rab.stabilization, raa.stabilization, rbb.stabilization}) + 1;
    std::size_t prev_classes = 0, prev_pairs = na * nb + 1;
    for (int r = 0; r <= top; ++r) {
        Partition part(na + nb);
        for (TupleCode a = 0; a < na; ++a) raa.at(r).row(a).for_each([&](TupleCode a2) { part.join(a, a2); });
        for (TupleCode b = 0; b < nb; ++b)
            rbb.at(r).row(b).for_each([&](TupleCode b2) { part.join(na + b, na + b2); });
        for (TupleCode a = 0; a < na; ++a)
            rab.at(r).row(a).for_each([&](TupleCode b) { part.join(a, na + b); });
        // ~^r must be an equivalence on the disjoint union: the closure adds nothing.
        for (TupleCode a = 0; a < na; ++a)
            for (TupleCode b = 0; b < nb; ++b) {
                ++out.checks;
                if ((part.find(a) == part.find(na + b)) != rab.at(r).contains(a, b))
                    return fail("cross relation is not the trace of an equivalence", r), out;
            }
        std::size_t classes = part.classes();
        std::size_t pairs = rab.at(r).count();
        out.checks += 2;
        if (classes < prev_classes) return fail("class count decreased", r), out;
        if (pairs > prev_pairs) return fail("pair count increased", r), out;
        prev_classes = classes;
        prev_pairs = pairs;
    }
    ++out.checks;
    if (static_cast<std::size_t>(rab.stabilization) > na + nb)
        return fail("stabilization index exceeds |A^k| + |B^k|", rab.stabilization), out;
    ++out.checks;
    if (!(rab.stable() == greatest_fixed_point(ab)))
        return fail("stabilized relation differs from the worklist greatest fixed point", rab.stabilization), out;
    ++out.checks;
    if (!(bisim(ab, Exec::Serial).levels == rab.levels))
        return fail("serial and parallel refinement differ", rab.stabilization), out;
    return out;
}

Outcome suite_hm(const Corpus& c, int index) {
    Instance inst = gen_instance(c, index);
    GameArena arena(inst.left, inst.right, inst.k, inst.registry);
    BisimRelation rel = bisim(arena);
    DefinableAlgebra alg(inst.left, inst.right, inst.k, inst.registry);
    int s = alg.stabilize();
    Outcome out;
    for (TupleCode a = 0; a < arena.left_space().size(); ++a)
        for (TupleCode b = 0; b < arena.right_space().size(); ++b) {
            ++out.checks;
            bool equiv = alg.equivalent(alg.left_point(a), alg.right_point(b), s);
            if (equiv == rel.stable().contains(a, b)) continue;
            json cex = instance_cex("hm", c, index, inst, "stabilized equivalence differs from bisimilarity");
            cex["alpha"] = fmt(inst.left, arena.left_space(), a);
            cex["beta"] = fmt(inst.right, arena.right_space(), b);
            cex["equivalent"] = equiv;
            cex["bisimilar"] = !equiv;
            out.cex = cex;
            return out;
        }
    return out;
}

Outcome suite_fig1(const Corpus& c, int index) {
    const int n = index + 1;
    Fig1Family fam = gen_fig1_family(n);
    std::vector<Quantifier> reg{Quantifier::diamond("R")};
    GameArena arena(fam.left, fam.right, 1, reg);
    BisimRelation rel = bisim(arena);
    TupleCode a = arena.left_space().encode(fam.alpha), b = arena.right_space().encode(fam.beta);
    int lv = rel.level(a, b);
    Outcome out;
    auto fail = [&](const std::string& msg) {
        json cex = base_cex("fig1", c, index, msg);
        cex["n"] = n;
        cex["k"] = 1;
        cex["quantifiers"] = "dia[R]";
        cex["left"] = structure_json(fam.left);
        cex["right"] = structure_json(fam.right);
        cex["alpha"] = format_assignment(fam.left, fam.alpha);
        cex["beta"] = format_assignment(fam.right, fam.beta);
        out.cex = cex;
        return out;
    };
    ++out.checks;
    if (lv == BisimRelation::kInfinite) return fail("roots are bisimilar in the unbounded game");
    if (lv < 0) return fail("roots are not atom-equivalent");

    CharContext ctx({fam.left, fam.right}, reg, 1, mutant_options(c));
    DefinableAlgebra alg(fam.left, fam.right, 1, reg);
    // Threshold = last q before the first failure, scanning one level past the game's.
    auto threshold = [&](const std::function<bool(int)>& holds) {
        for (int q = 0; q <= lv + 1; ++q)
            if (!holds(q)) return q - 1;
        return lv + 1;
    };
    int t_chi = threshold([&](int q) { return ctx.evaluator(1).holds(b, ctx.chi(0, a, q)); });
    int t_chi_rev = threshold([&](int q) { return ctx.evaluator(0).holds(a, ctx.chi(1, b, q)); });
    int t_orc = threshold([&](int q) { return alg.equivalent(alg.left_point(a), alg.right_point(b), q); });
    out.checks += 3;
    out.notes.push_back("n=" + std::to_string(n) + ": t=" + std::to_string(lv) + " (game), " +
                        std::to_string(t_chi) + " (chi), " + std::to_string(t_orc) + " (oracle); " +
                        std::to_string(fam.left.size()) + "+" + std::to_string(fam.right.size()) + " elements");
    if (t_chi != lv || t_chi_rev != lv || t_orc != lv) return fail("threshold disagreement");
    return out;
}

Outcome suite_products(const Corpus& c, int index) {
    auto rng = instance_rng(c, index, 15);
    int m = uniform(rng, 1, 3);
    std::vector<std::size_t> sizes;
    if (m == 1) sizes = {static_cast<std::size_t>(uniform(rng, 1, std::min(4, c.max_size)))};
    else if (m == 2) {
        std::size_t x = static_cast<std::size_t>(uniform(rng, 1, std::min(4, c.max_size)));
        std::size_t y = static_cast<std::size_t>(uniform(rng, 1, std::min<int>(std::min(4, c.max_size), 8 / x)));
        sizes = {x, y};
    } else {
        for (int i = 0; i < 3; ++i) sizes.push_back(static_cast<std::size_t>(uniform(rng, 1, std::min(2, c.max_size))));
    }
    Signature sig = random_signature(rng, c);
    std::vector<Structure> family;
    for (auto s : sizes) family.push_back(random_structure(rng, sig, s));
    std::size_t total = 1;
    for (auto s : sizes) total *= s;
    int k = clamp_k(uniform(rng, 1, c.max_k), total, 64);
    auto registry = c.quantifiers.empty() ? random_registry(rng, sig, k) : applicable(c.quantifiers, sig);
    std::vector<std::string> index_set;
    for (int i = 0; i < m; ++i) index_set.push_back(std::to_string(i));

    Outcome out;
    auto fail = [&](const std::string& msg) {
        json cex = base_cex("products", c, index, msg);
        cex["k"] = k;
        cex["quantifiers"] = format_quantifier_list(registry);
        cex["family"] = json::array();
        for (const auto& s : family) cex["family"].push_back(structure_json(s));
        out.cex = cex;
        return out;
    };
    auto random_assignments = [&]() {
        std::vector<Assignment> as;
        for (const auto& s : family) {
            Assignment a;
            for (int j = 0; j < k; ++j) a.push_back(static_cast<Element>(uniform(rng, 0, static_cast<int>(s.size()) - 1)));
            as.push_back(a);
        }
        return as;
    };

    // Direct product: all index tuples, relations componentwise.
    ReducedProduct dp = direct_product(family);
    ++out.checks;
    if (dp.structure.size() != total) return fail("direct product has the wrong size");
    for (const auto& [rel, arity] : sig.relations()) {
        std::size_t expect = 1;
        for (const auto& s : family) expect *= s.relation(rel).size();
        ++out.checks;
        if (dp.structure.relation(rel).size() != expect) return fail("direct product relation '" + rel + "' has the wrong size");
    }

    // Atomic equivalence and tuple factorization under every filter.
    for (const auto& filter : enumerate_filters(index_set)) {
        for (int trial = 0; trial < 3; ++trial) {
            auto as = random_assignments();
            for (const auto& [rel, arity] : sig.relations())
                for (const auto& vars : variable_tuples(k, arity)) {
                    ++out.checks;
                    if (!atomic_los_check(family, as, filter, Formula::atom(rel, vars)).agree)
                        return fail("atomic Łoś equivalence fails for " + rel);
                }
            auto bs = random_assignments();
            ReducedProduct rp = reduced_product(family, filter);
            Assignment ta = rp.transport(as), tb = rp.transport(bs);
            for (int j = 0; j < k; ++j) {
                FiniteFilter::Mask agree = 0;
                for (int i = 0; i < m; ++i)
                    if (as[i][j] == bs[i][j]) agree |= FiniteFilter::Mask{1} << i;
                ++out.checks;
                if ((ta[j] == tb[j]) != filter.contains(agree)) return fail("tuple factorization is not componentwise");
            }
        }
    }

    // Principal ultrafilters: isomorphic to the component, and rank-2 equivalent at transported tuples.
    for (const auto& u : enumerate_ultrafilters(index_set)) {
        std::size_t i0 = static_cast<std::size_t>(std::countr_zero(u.sets().front()));
        for (auto mask : u.sets()) i0 = std::popcount(mask) == 1 ? static_cast<std::size_t>(std::countr_zero(mask)) : i0;
        ReducedProduct rp = reduced_product(family, u);
        ++out.checks;
        if (!are_isomorphic(rp.structure, family[i0])) return fail("principal reduced product is not isomorphic to its component");
        auto as = random_assignments();
        Assignment au = rp.transport(as);
        ++out.checks;
        if (!equiv_rank_oracle(rp.structure, au, family[i0], as[i0], 2, registry))
            return fail("transported tuple is not rank-2 equivalent to the component tuple");
        DefinableAlgebra alg(rp.structure, family[i0], k, registry, DefinableAlgebra::Route::Auto, true);
        std::vector<Formula> formulas = alg.block_formulas(2);
        for (int i = 0; i < 5; ++i) formulas.push_back(random_formula(rng, sig, k, registry, 2));
        for (const auto& f : formulas) {
            ++out.checks;
            if (!los_check(family, as, u, f).agree) return fail("los_check disagrees on " + print_formula(f));
        }
    }
    return out;
}

// Structures over {R:2} with at most `max` elements, one per isomorphism class.
std::vector<Structure> all_small_structures(std::size_t max) {
    std::vector<Structure> out;
    Signature sig{{"R", 2}};
    for (std::size_t n = 1; n <= max; ++n) {
        std::vector<std::string> names;
        for (std::size_t i = 0; i < n; ++i) names.push_back(element_name(i));
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::vector<std::vector<std::size_t>> perms;
        do perms.push_back(perm);
        while (std::next_permutation(perm.begin(), perm.end()));
        const std::size_t cells = n * n;
        for (std::uint32_t mask = 0; mask < (1U << cells); ++mask) {
            // Keep the mask only if it is the least in its orbit.
            bool least = true;
            for (const auto& p : perms) {
                std::uint32_t img = 0;
                for (std::size_t x = 0; x < n; ++x)
                    for (std::size_t y = 0; y < n; ++y)
                        if ((mask >> (x * n + y)) & 1U) img |= 1U << (p[x] * n + p[y]);
                if (img < mask) {
                    least = false;
                    break;
                }
            }
            if (!least) continue;
            std::vector<std::vector<Element>> tuples;
            for (std::size_t x = 0; x < n; ++x)
                for (std::size_t y = 0; y < n; ++y)
                    if ((mask >> (x * n + y)) & 1U) tuples.push_back({static_cast<Element>(x), static_cast<Element>(y)});
            out.emplace_back(sig, names, std::map<std::string, std::vector<std::vector<Element>>>{{"R", tuples}});
        }
    }
    return out;
}

std::vector<std::vector<Quantifier>> exhaustive_registries(int k) {
    std::vector<Quantifier> full{Quantifier::diamond("R"), Quantifier::diamond_at_least(2, "R"), Quantifier::all(),
                                 Quantifier::some(),       Quantifier::cycle("R"),                Quantifier::infinite("R"),
                                 Quantifier::reach("R")};
    for (int v = 1; v <= k; ++v)
        for (int n = 1; n <= 2; ++n) full.push_back(Quantifier::count_at_least(n, v));
    std::vector<std::vector<Quantifier>> out{full};
    for (const auto& q : full) out.push_back({q});
    return out;
}

bool compare_games(const Structure& a, const Structure& b, int k, const std::vector<Quantifier>& reg, int q,
                   std::string& detail) {
    GameArena arena(a, b, k, reg);
    BisimRelation rel = bisim_rank(arena, q);
    auto full = all_witness_game(a, b, k, reg, q);
    for (int r = 0; r <= q; ++r)
        if (!(rel.at(r) == full[r])) {
            detail = "level " + std::to_string(r);
            return false;
        }
    return true;
}

SuiteReport suite_minimal_witness(const Corpus& c) {
    constexpr int kRounds = 2;
    auto t0 = std::chrono::steady_clock::now();
    SuiteReport rep;
    rep.suite = "minimal-witness";

    struct Scope {
        int k;
        std::size_t max;
    };
    for (Scope scope : {Scope{1, 3}, Scope{2, 2}}) {
        if (c.only) break;
        auto structs = all_small_structures(std::min<std::size_t>(scope.max, static_cast<std::size_t>(c.max_size)));
        auto regs = exhaustive_registries(scope.k);
        const std::size_t n = structs.size();
        std::vector<std::optional<json>> fails(n);
        std::vector<std::size_t> checks(n, 0);
#pragma omp parallel for schedule(dynamic)
        for (long i = 0; i < static_cast<long>(n); ++i) {
            try {
                for (std::size_t j = 0; j < n && !fails[i]; ++j)
                    for (const auto& reg : regs) {
                        ++checks[i];
                        std::string detail;
                        if (compare_games(structs[i], structs[j], scope.k, reg, kRounds, detail)) continue;
                        json cex = base_cex("minimal-witness", c, -1, "minimal-witness game differs at " + detail);
                        cex["k"] = scope.k;
                        cex["quantifiers"] = format_quantifier_list(reg);
                        cex["left"] = structure_json(structs[i]);
                        cex["right"] = structure_json(structs[j]);
                        cex.erase("reproduce");
                        fails[i] = cex;
                        break;
                    }
            } catch (const std::exception& e) {
                fails[i] = base_cex("minimal-witness", c, -1, std::string("exception: ") + e.what());
            }
        }
        std::size_t pairs = n * n;
        rep.instances += pairs;
        for (std::size_t i = 0; i < n; ++i) {
            rep.checks += checks[i];
            if (fails[i] && !rep.counterexample) rep.counterexample = fails[i];
        }
        rep.details.push_back("exhaustive k=" + std::to_string(scope.k) + ": " + std::to_string(n) +
                              " structures up to isomorphism (universe <= " + std::to_string(scope.max) + "), " +
                              std::to_string(pairs) + " pairs x " + std::to_string(regs.size()) + " registries");
    }

    // Random sample with richer signatures.
    Corpus small = c;
    small.max_size = std::min(3, c.max_size);
    SuiteReport sample = drive("minimal-witness", c, c.count, [&](int index) {
        Instance inst = gen_instance(small, index);
        Outcome out;
        out.checks = 1;
        std::string detail;
        if (!compare_games(inst.left, inst.right, inst.k, inst.registry, kRounds, detail))
            out.cex = instance_cex("minimal-witness", c, index, inst, "minimal-witness game differs at " + detail);
        return out;
    });
    rep.instances += sample.instances;
    rep.checks += sample.checks;
    if (sample.counterexample && !rep.counterexample) rep.counterexample = sample.counterexample;
    rep.details.push_back("random sample: " + std::to_string(sample.instances) + " pairs (universe <= 3)");
    rep.passed = !rep.counterexample;
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

std::string summary_line(const SuiteReport& r) {
    std::ostringstream out;
    out << r.suite << ": " << (r.passed ? "pass" : "FAIL") << ", " << r.instances << " instances, " << r.checks
        << " checks";
    return out.str();
}

} // namespace

void Corpus::validate() const {
    if (count < 0) throw ValidationError("count must be >= 0");
    if (max_size < 1) throw ValidationError("max-size must be >= 1");
    if (max_k < 1) throw ValidationError("max-k must be >= 1");
    if (max_rank < 0) throw ValidationError("rank must be >= 0");
    if (max_relations < 1) throw ValidationError("at least one relation is needed");
    if (max_arity < 1) throw ValidationError("max arity must be >= 1");
    if (mutant != "none" && mutant != "drop-back" && mutant != "drop-forth")
        throw ValidationError("mutant must be none, drop-back or drop-forth");
    for (const auto& q : quantifiers) {
        if (!q.relation().empty() && max_arity < 2)
            throw ValidationError("quantifier " + q.to_string() + " needs a binary relation");
        if (q.family() == Family::CountAtLeast && q.variable() > max_k)
            throw ValidationError("quantifier " + q.to_string() + " needs k >= " + std::to_string(q.variable()));
    }
}

std::mt19937_64 instance_rng(const Corpus& c, int index, std::uint64_t salt) {
    std::seed_seq seq{static_cast<std::uint32_t>(c.seed), static_cast<std::uint32_t>(c.seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(salt)};
    return std::mt19937_64(seq);
}

Structure random_structure(std::mt19937_64& rng, const Signature& sig, std::size_t size) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < size; ++i) names.push_back(element_name(i));
    std::map<std::string, std::vector<std::vector<Element>>> rels;
    for (const auto& [rel, arity] : sig.relations()) {
        auto& out = rels[rel];
        std::vector<Element> t(static_cast<std::size_t>(arity), 0);
        while (true) {
            if (coin(rng)) out.push_back(t);
            int j = arity - 1;
            while (j >= 0 && t[j] + 1 == size) t[j--] = 0;
            if (j < 0) break;
            ++t[j];
        }
    }
    return Structure(sig, names, rels);
}

std::vector<Structure> fixed_structures() {
    Signature sig{{"P", 1}, {"R", 2}};
    using Tuples = std::map<std::string, std::vector<std::vector<std::string>>>;
    std::vector<Structure> out;
    out.emplace_back(sig, std::vector<std::string>{"a"}, Tuples{});
    out.emplace_back(sig, std::vector<std::string>{"a"}, Tuples{{"P", {{"a"}}}, {"R", {{"a", "a"}}}});
    out.emplace_back(sig, std::vector<std::string>{"a", "b"}, Tuples{});
    out.emplace_back(sig, std::vector<std::string>{"a", "b"},
                     Tuples{{"P", {{"a"}, {"b"}}}, {"R", {{"a", "a"}, {"a", "b"}, {"b", "a"}, {"b", "b"}}}});
    out.emplace_back(sig, std::vector<std::string>{"a", "b", "c"},
                     Tuples{{"P", {{"b"}}}, {"R", {{"a", "b"}, {"b", "c"}}}});
    out.emplace_back(sig, std::vector<std::string>{"a", "b", "c"},
                     Tuples{{"P", {{"a"}}}, {"R", {{"a", "b"}, {"b", "c"}, {"c", "a"}}}});
    out.emplace_back(sig, std::vector<std::string>{"a", "b"}, Tuples{{"R", {{"a", "b"}, {"b", "a"}}}});
    out.emplace_back(sig, std::vector<std::string>{"a", "b", "c"},
                     Tuples{{"P", {{"b"}, {"c"}}}, {"R", {{"a", "a"}, {"a", "b"}}}});
    return out;
}

std::vector<Structure> gen_structures(const Corpus& c) {
    c.validate();
    std::vector<Structure> out;
    if (c.max_relations >= 2 && c.max_arity >= 2 && c.quantifiers.empty())
        for (auto& s : fixed_structures())
            if (static_cast<int>(s.size()) <= c.max_size && static_cast<int>(out.size()) < c.count)
                out.push_back(std::move(s));
    for (int i = static_cast<int>(out.size()); i < c.count; ++i) {
        auto rng = instance_rng(c, i, 2);
        Signature sig = random_signature(rng, c);
        out.push_back(random_structure(rng, sig, static_cast<std::size_t>(uniform(rng, 1, c.max_size))));
    }
    return out;
}

Instance gen_instance(const Corpus& c, int index) {
    auto rng = instance_rng(c, index, 1);
    Signature sig = random_signature(rng, c);
    Structure left;
    auto fixed = fixed_structures();
    bool use_fixed = c.quantifiers.empty() && c.max_relations >= 2 && c.max_arity >= 2 &&
                     index < static_cast<int>(fixed.size()) &&
                     static_cast<int>(fixed[static_cast<std::size_t>(index)].size()) <= c.max_size;
    if (use_fixed) {
        left = fixed[static_cast<std::size_t>(index)];
        sig = left.signature();
    } else {
        left = random_structure(rng, sig, static_cast<std::size_t>(uniform(rng, 1, c.max_size)));
    }

    Structure right;
    switch (uniform(rng, 0, 2)) {
    case 0: {  // isomorphic copy with the universe reordered
        std::vector<Element> perm(left.size());
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        right = permute(left, perm);
        break;
    }
    case 1: {  // one tuple flipped
        std::map<std::string, std::vector<std::vector<Element>>> rels;
        for (const auto& [rel, arity] : sig.relations()) rels[rel] = left.relation(rel).tuples();
        auto names = sig.relations();
        auto it = names.begin();
        std::advance(it, uniform(rng, 0, static_cast<int>(names.size()) - 1));
        std::vector<Element> t;
        for (int j = 0; j < it->second; ++j) t.push_back(static_cast<Element>(uniform(rng, 0, static_cast<int>(left.size()) - 1)));
        auto& tuples = rels[it->first];
        auto pos = std::find(tuples.begin(), tuples.end(), t);
        if (pos == tuples.end()) tuples.push_back(t);
        else tuples.erase(pos);
        right = Structure(sig, left.universe(), rels);
        break;
    }
    default:
        right = random_structure(rng, sig, static_cast<std::size_t>(uniform(rng, 1, c.max_size)));
        break;
    }

    Instance inst;
    inst.k = clamp_k(uniform(rng, 1, c.max_k), std::max(left.size(), right.size()), 4096);
    if (!c.quantifiers.empty()) {
        for (const auto& q : c.quantifiers)
            if (q.family() == Family::CountAtLeast) inst.k = std::max(inst.k, q.variable());
        inst.registry = c.quantifiers;
    } else {
        inst.registry = random_registry(rng, sig, inst.k);
    }
    inst.left = std::move(left);
    inst.right = std::move(right);
    return inst;
}

Formula random_formula(std::mt19937_64& rng, const Signature& sig, int k, const std::vector<Quantifier>& registry,
                       int depth) {
    std::vector<std::pair<std::string, int>> rels(sig.relations().begin(), sig.relations().end());
    int budget = 10;
    std::function<Formula(int)> gen = [&](int d) -> Formula {
        --budget;
        int choice = uniform(rng, 0, 5);
        if (budget <= 0) choice = choice % 2;
        switch (choice) {
        case 0:
            if (rels.empty()) return Formula::top();
            [[fallthrough]];
        case 1: {
            if (rels.empty()) return Formula::top();
            const auto& [name, arity] = rels[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(rels.size()) - 1))];
            std::vector<int> vars;
            for (int j = 0; j < arity; ++j) vars.push_back(uniform(rng, 1, k));
            return Formula::atom(name, vars);
        }
        case 2: return Formula::negate(gen(d));
        case 3: return Formula::conj(gen(d), gen(d));
        default:
            if (d == 0 || registry.empty()) return Formula::negate(gen(d));
            return Formula::quant(registry[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(registry.size()) - 1))],
                                  gen(d - 1));
        }
    };
    return gen(depth);
}

Fig1Family gen_fig1_family(int n) {
    if (n < 1) throw ValidationError("figure family needs n >= 1");
    auto build = [](const std::string& root, int spokes) {
        std::vector<std::string> names{root};
        std::vector<std::vector<std::string>> edges;
        for (int m = 0; m < spokes; ++m) {
            std::string prev = root;
            for (int j = 0; j <= m; ++j) {
                std::string node = root + std::to_string(m) + "_" + std::to_string(j);
                names.push_back(node);
                edges.push_back({prev, node});
                prev = node;
            }
        }
        return Structure(Signature{{"R", 2}}, names,
                         std::map<std::string, std::vector<std::vector<std::string>>>{{"R", edges}});
    };
    Fig1Family fam{build("a", n + 1), build("b", n + 2), {0}, {0}};
    return fam;
}

std::vector<PairRelation> all_witness_game(const Structure& a, const Structure& b, int k,
                                           const std::vector<Quantifier>& registry, int q) {
    TupleSpace sa(a.size(), k), sb(b.size(), k);
    oracle::check_size(a, sa);
    oracle::check_size(b, sb);
    check_registry(registry, a.signature(), k);
    std::vector<std::vector<std::vector<TupleSet>>> wa, wb;  // [qi][tuple]
    for (const auto& quant : registry) {
        std::vector<std::vector<TupleSet>> ta, tb;
        for (TupleCode c = 0; c < sa.size(); ++c) ta.push_back(oracle::all_witnesses(quant, a, sa, c));
        for (TupleCode c = 0; c < sb.size(); ++c) tb.push_back(oracle::all_witnesses(quant, b, sb, c));
        wa.push_back(std::move(ta));
        wb.push_back(std::move(tb));
    }
    std::vector<PairRelation> levels;
    PairRelation base(sa.size(), sb.size());
    for (TupleCode x = 0; x < sa.size(); ++x)
        for (TupleCode y = 0; y < sb.size(); ++y)
            if (atom_equiv(a, sa.decode(x), b, sb.decode(y))) base.insert(x, y);
    levels.push_back(std::move(base));

    // Player 2 answers s with t when every delta in t is matched by some gamma in s.
    auto answers = [](const TupleSet& s, const TupleSet& t, const PairRelation& rel, bool s_left) {
        bool ok = true;
        t.for_each([&](TupleCode d) {
            bool matched = false;
            s.for_each([&](TupleCode g) { matched = matched || (s_left ? rel.contains(g, d) : rel.contains(d, g)); });
            ok = ok && matched;
        });
        return ok;
    };
    for (int r = 0; r < q; ++r) {
        const PairRelation& prev = levels.back();
        PairRelation next(sa.size(), sb.size());
        for (TupleCode x = 0; x < sa.size(); ++x)
            for (TupleCode y = 0; y < sb.size(); ++y) {
                if (!prev.contains(x, y)) continue;
                bool ok = true;
                for (std::size_t qi = 0; qi < registry.size() && ok; ++qi) {
                    for (const auto& s : wa[qi][x]) {
                        bool any = std::any_of(wb[qi][y].begin(), wb[qi][y].end(),
                                               [&](const TupleSet& t) { return answers(s, t, prev, true); });
                        if (!any) { ok = false; break; }
                    }
                    if (!ok) break;
                    for (const auto& t : wb[qi][y]) {
                        bool any = std::any_of(wa[qi][x].begin(), wa[qi][x].end(),
                                               [&](const TupleSet& s) { return answers(t, s, prev, false); });
                        if (!any) { ok = false; break; }
                    }
                }
                if (ok) next.insert(x, y);
            }
        levels.push_back(std::move(next));
    }
    return levels;
}

json SuiteReport::to_json() const {
    json out;
    out["suite"] = suite;
    out["passed"] = passed;
    out["instances"] = instances;
    out["checks"] = checks;
    out["seconds"] = seconds;
    out["details"] = details;
    out["counterexample"] = counterexample ? *counterexample : json(nullptr);
    return out;
}

std::vector<std::string> suite_names() {
    return {"quantifiers", "ef", "minimal-witness", "monotone", "invariance", "finite-index",
            "hm",          "fig1", "products",      "charform"};
}

SuiteReport run_suite(const std::string& name, const Corpus& c) {
    c.validate();
    if (name == "all") {
        SuiteReport all;
        all.suite = "all";
        for (const auto& s : suite_names()) {
            SuiteReport r = run_suite(s, c);
            all.instances += r.instances;
            all.checks += r.checks;
            all.seconds += r.seconds;
            all.details.push_back(summary_line(r));
            if (r.counterexample && !all.counterexample) all.counterexample = r.counterexample;
        }
        all.passed = !all.counterexample;
        return all;
    }
    const int families = static_cast<int>(kFamilies.size());
    SuiteReport rep;
    if (name == "quantifiers") {
        rep = drive(name, c, c.count * families, [&](int i) { return suite_quantifiers(c, i); });
        rep.details.push_back(std::to_string(c.count) + " instances per quantifier family");
    } else if (name == "monotone") {
        rep = drive(name, c, c.count * families, [&](int i) { return suite_monotone(c, i); });
        rep.details.push_back(std::to_string(c.count) + " probes per quantifier family");
    } else if (name == "ef") {
        rep = drive(name, c, c.count, [&](int i) { return suite_ef(c, i); });
    } else if (name == "charform") {
        rep = drive(name, c, c.count, [&](int i) { return suite_charform(c, i); });
    } else if (name == "invariance") {
        rep = drive(name, c, c.count, [&](int i) { return suite_invariance(c, i); });
        rep.details.push_back(std::to_string(rep.instances) + " instances with bisimilar pairs");
    } else if (name == "finite-index") {
        rep = drive(name, c, c.count, [&](int i) { return suite_finite_index(c, i); });
    } else if (name == "hm") {
        rep = drive(name, c, c.count, [&](int i) { return suite_hm(c, i); });
    } else if (name == "fig1") {
        rep = drive(name, c, 3, [&](int i) { return suite_fig1(c, i); });
    } else if (name == "products") {
        rep = drive(name, c, c.count, [&](int i) { return suite_products(c, i); });
    } else if (name == "minimal-witness") {
        rep = suite_minimal_witness(c);
    } else {
        throw ValidationError("unknown suite '" + name + "'");
    }
    return rep;
}

std::string dump_counterexample(const json& cex, const std::string& dir) {
    std::filesystem::create_directories(dir);
    std::string cmd;
    if (cex.contains("left") && cex.contains("right")) {
        auto write = [&](const char* key) {
            std::string path = (std::filesystem::path(dir) / (std::string(key) + ".json")).string();
            std::ofstream(path) << cex[key].dump(2) << "\n";
            return path;
        };
        std::string l = write("left"), r = write("right");
        cmd = "kql bisim " + l + " " + r + " --k " + std::to_string(cex.value("k", 1)) + " --quantifiers '" +
              cex.value("quantifiers", std::string("")) + "'";
        if (cex.contains("q")) cmd += " --rounds " + std::to_string(cex["q"].get<int>());
        if (cex.contains("alpha") && cex.contains("beta"))
            cmd += " --alpha " + cex["alpha"].get<std::string>() + " --beta " + cex["beta"].get<std::string>();
    }
    std::ofstream((std::filesystem::path(dir) / "counterexample.json").string()) << cex.dump(2) << "\n";
    return cmd.empty() ? cex.value("reproduce", std::string("")) : cmd;
}

} // namespace kql
