#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <httplib.h>

#include <kql/charform.hpp>
#include <kql/error.hpp>
#include <kql/formula.hpp>
#include <kql/game.hpp>
#include <kql/product.hpp>
#include <kql/semantics.hpp>
#include <kql/service.hpp>
#include <kql/structure.hpp>
#include <kql/verify.hpp>

using namespace kql;

namespace {

std::vector<Quantifier> registry_for(const std::string& text, const Signature& sig) {
    if (!text.empty()) return parse_quantifier_list(text);
    std::vector<Quantifier> out;
    for (const auto& [name, arity] : sig.relations())
        if (arity == 2) out.push_back(Quantifier::diamond(name));
    if (out.empty()) out.push_back(Quantifier::some());
    return out;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

struct CheckArgs {
    std::string structure, alpha, formula, formula_file;
    int k = 1;
    bool trace = false, oracle = false, eq = false;
};

int run_check(const CheckArgs& a) {
    Structure s = load_structure_file(a.structure, LoadOptions{a.eq});
    std::vector<Formula> fs;
    if (!a.formula_file.empty()) fs = parse_formula_lines(read_text_file(a.formula_file), a.k, s.signature());
    if (!a.formula.empty()) fs.push_back(parse_formula(a.formula, a.k, s.signature()));
    if (fs.empty()) throw ValidationError("give --formula or --formula-file");
    Assignment alpha = parse_assignment(s, a.alpha, a.k);
    Evaluator ev(s, a.k, a.oracle);
    TupleCode code = ev.space().encode(alpha);
    bool all = true;
    for (const auto& f : fs) {
        if (a.trace)
            for (const auto& [sub, ext] : ev.trace(f))
                std::cout << print_formula(sub) << "  ->  " << format_tuple_set(s, ev.space(), ext) << "\n";
        bool v = ev.holds(code, f);
        all = all && v;
        if (fs.size() > 1) std::cout << print_formula(f) << ": ";
        std::cout << (v ? "true" : "false") << "\n";
    }
    return all ? 0 : 1;
}

struct BisimArgs {
    std::string left, right, quantifiers, alpha, beta;
    int k = 1;
    std::optional<int> rounds;
    bool strategy = false;
};

int run_bisim(const BisimArgs& a) {
    Structure A = load_structure_file(a.left), B = load_structure_file(a.right);
    GameArena arena(A, B, a.k, registry_for(a.quantifiers, A.signature()));
    BisimRelation rel = a.rounds ? bisim_rank(arena, *a.rounds) : bisim(arena);
    const int bound = a.rounds ? *a.rounds : BisimRelation::kInfinite;
    const PairRelation& target = a.rounds ? rel.at(*a.rounds) : rel.stable();

    std::optional<std::pair<TupleCode, TupleCode>> pair;
    if (!a.alpha.empty() || !a.beta.empty()) {
        if (a.alpha.empty() || a.beta.empty()) throw ValidationError("give both --alpha and --beta");
        pair = std::make_pair(arena.left_space().encode(parse_assignment(A, a.alpha, a.k)),
                              arena.right_space().encode(parse_assignment(B, a.beta, a.k)));
    }
    if (a.strategy) {
        Strategy strat(arena, rel, bound);
        std::cout << strat.to_json(pair).dump(2) << "\n";
        return pair && !target.contains(pair->first, pair->second) ? 1 : 0;
    }
    if (pair) {
        int lv = rel.level(pair->first, pair->second);
        bool related = target.contains(pair->first, pair->second);
        if (related) {
            std::cout << (a.rounds ? "equivalent up to " + std::to_string(*a.rounds) + " rounds" : "bisimilar") << "\n";
            return 0;
        }
        std::cout << "not " << (a.rounds ? "equivalent" : "bisimilar") << ", failure round " << lv + 1 << "\n";
        return 1;
    }
    if (rel.stabilized()) std::cout << "# stabilized at round " << rel.stabilization << "\n";
    for (TupleCode x = 0; x < arena.left_space().size(); ++x)
        target.row(x).for_each([&](TupleCode y) {
            std::cout << format_assignment(A, arena.left_space().decode(x)) << " ~ "
                      << format_assignment(B, arena.right_space().decode(y)) << "\n";
        });
    return 0;
}

struct CharArgs {
    std::string structure, alpha, quantifiers;
    std::vector<std::string> universe;
    int k = 1, rank = 1;
};

int run_charform(const CharArgs& a) {
    Structure s = load_structure_file(a.structure);
    std::vector<Structure> universe{s};
    for (const auto& f : a.universe) {
        Structure u = load_structure_file(f);
        if (!(u == s)) universe.push_back(std::move(u));
    }
    CharContext ctx(universe, registry_for(a.quantifiers, s.signature()), a.k);
    std::cout << print_formula(chi(ctx, s, parse_assignment(s, a.alpha, a.k), a.rank)) << "\n";
    return 0;
}

struct DistArgs {
    std::string left, right, alpha, beta, quantifiers;
    int k = 1;
};

int run_distinguish(const DistArgs& a) {
    Structure A = load_structure_file(a.left), B = load_structure_file(a.right);
    CharContext ctx({A, B}, registry_for(a.quantifiers, A.signature()), a.k);
    auto f = distinguishing_formula(ctx, A, parse_assignment(A, a.alpha, a.k), B, parse_assignment(B, a.beta, a.k));
    if (!f) {
        std::cout << "bisimilar\n";
        return 0;
    }
    std::cout << print_formula(*f) << "\n";
    return 0;
}

struct ProductArgs {
    std::vector<std::string> files;
    std::string filter, formula, alphas;
    std::optional<int> principal;
    bool los = false;
};

int run_product(const ProductArgs& a) {
    std::vector<Structure> family;
    for (const auto& f : a.files) family.push_back(load_structure_file(f));
    std::vector<std::string> index;
    for (std::size_t i = 0; i < family.size(); ++i) index.push_back(std::to_string(i));
    FiniteFilter filter = FiniteFilter::trivial(index);
    if (!a.filter.empty()) filter = load_filter_file(a.filter);
    if (a.principal) {
        if (*a.principal < 0) throw ValidationError("--principal needs a non-negative index");
        filter = FiniteFilter::principal(index, static_cast<std::size_t>(*a.principal));
    }
    if (filter.size() != family.size())
        throw ValidationError("filter index has " + std::to_string(filter.size()) + " entries for " +
                              std::to_string(family.size()) + " structures");
    if (!a.los) {
        std::cout << serialize_structure(reduced_product(family, filter).structure) << "\n";
        return 0;
    }
    if (a.formula.empty() || a.alphas.empty()) throw ValidationError("--los needs --formula and --alphas");
    auto parts = split(a.alphas, ';');
    if (parts.size() != family.size())
        throw ValidationError("--alphas needs one tuple per structure, separated by ';'");
    const int k = static_cast<int>(split(parts[0], ',').size());
    std::vector<Assignment> as;
    for (std::size_t i = 0; i < family.size(); ++i) as.push_back(parse_assignment(family[i], parts[i], k));
    Formula f = parse_formula(a.formula, k, family[0].signature());
    LosReport rep = filter.is_ultrafilter() ? los_check(family, as, filter, f) : atomic_los_check(family, as, filter, f);
    std::cout << rep.to_json(filter).dump(2) << "\n";
    return rep.agree ? 0 : 1;
}

struct VerifyArgs {
    std::string suite, quantifiers, dump_dir;
    Corpus corpus;
    std::optional<int> only;
    bool json = false;
};

int run_verify(VerifyArgs a) {
    if (!a.quantifiers.empty()) a.corpus.quantifiers = parse_quantifier_list(a.quantifiers);
    a.corpus.only = a.only;
    SuiteReport rep = run_suite(a.suite, a.corpus);
    if (a.json) {
        std::cout << rep.to_json().dump(2) << "\n";
    } else {
        std::printf("%s: %s (%zu instances, %zu checks, %.2f s)\n", rep.suite.c_str(), rep.passed ? "PASS" : "FAIL",
                    rep.instances, rep.checks, rep.seconds);
        for (const auto& d : rep.details) std::cout << "  " << d << "\n";
        if (rep.counterexample) {
            std::cout << "counterexample: " << rep.counterexample->value("message", std::string()) << "\n";
            std::cout << "  rerun: " << rep.counterexample->value("reproduce", std::string()) << "\n";
        }
    }
    if (rep.counterexample && !a.dump_dir.empty())
        std::cerr << "reproduce: " << dump_counterexample(*rep.counterexample, a.dump_dir) << "\n";
    return rep.passed ? 0 : 1;
}

struct ServeArgs {
    std::string host = "127.0.0.1", state_dir, static_dir;
    int port = 8080;
};

int run_serve(const ServeArgs& a) {
    SessionStore store(a.state_dir.empty() ? std::nullopt : std::optional<std::string>(a.state_dir));
    httplib::Server server;
    mount_api(server, store, a.static_dir);
    std::cerr << "listening on http://" << a.host << ":" << a.port << "/api/v1 (" << store.size()
              << " sessions restored)\n";
    if (!server.listen(a.host, a.port)) throw Error("io_error", "cannot listen on port " + std::to_string(a.port));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Workbench for logics with generalized k-quantifiers"};
    app.require_subcommand(1);
    int code = 0;
    std::function<int()> action;

    CheckArgs check;
    auto* c = app.add_subcommand("check", "Evaluate a formula at a tuple");
    c->add_option("structure", check.structure, "Structure document")->required();
    c->add_option("--k", check.k, "Number of variables")->check(CLI::PositiveNumber);
    c->add_option("--alpha", check.alpha, "Tuple, e.g. a,b")->required();
    c->add_option("--formula", check.formula, "Formula text");
    c->add_option("--formula-file", check.formula_file, "One formula per line, # comments");
    c->add_flag("--trace", check.trace, "Print the extension of every subformula");
    c->add_flag("--oracle", check.oracle, "Powerset-based quantifier semantics (universe <= 4)");
    c->add_flag("--eq", check.eq, "Add the equality relation eq");
    c->callback([&] { action = [&] { return run_check(check); }; });

    BisimArgs bis;
    auto* b = app.add_subcommand("bisim", "Bisimulation relation or verdict for a pair");
    b->add_option("left", bis.left)->required();
    b->add_option("right", bis.right)->required();
    b->add_option("--k", bis.k)->check(CLI::PositiveNumber);
    b->add_option("--rounds", bis.rounds, "Round bound q (default: unbounded)")->check(CLI::NonNegativeNumber);
    b->add_option("--quantifiers", bis.quantifiers, "e.g. dia[R],all");
    b->add_option("--alpha", bis.alpha);
    b->add_option("--beta", bis.beta);
    b->add_flag("--strategy", bis.strategy, "Dump Player 2's strategy as JSON");
    b->callback([&] { action = [&] { return run_bisim(bis); }; });

    CharArgs ch;
    auto* cf = app.add_subcommand("charform", "Characteristic formula");
    cf->add_option("structure", ch.structure)->required();
    cf->add_option("--alpha", ch.alpha)->required();
    cf->add_option("--rank", ch.rank)->check(CLI::NonNegativeNumber);
    cf->add_option("--k", ch.k)->check(CLI::PositiveNumber);
    cf->add_option("--universe", ch.universe, "Comparison structures");
    cf->add_option("--quantifiers", ch.quantifiers);
    cf->callback([&] { action = [&] { return run_charform(ch); }; });

    DistArgs di;
    auto* d = app.add_subcommand("distinguish", "Minimal-rank separating formula");
    d->add_option("left", di.left)->required();
    d->add_option("right", di.right)->required();
    d->add_option("--alpha", di.alpha)->required();
    d->add_option("--beta", di.beta)->required();
    d->add_option("--k", di.k)->check(CLI::PositiveNumber);
    d->add_option("--quantifiers", di.quantifiers);
    d->callback([&] { action = [&] { return run_distinguish(di); }; });

    ProductArgs pr;
    auto* p = app.add_subcommand("product", "Reduced products and the Łoś check");
    p->add_option("files", pr.files)->required();
    auto* filt = p->add_option("--filter", pr.filter, "Filter document");
    p->add_option("--principal", pr.principal, "Principal ultrafilter at index i")->excludes(filt);
    p->add_flag("--los", pr.los);
    p->add_option("--formula", pr.formula);
    p->add_option("--alphas", pr.alphas, "One tuple per structure: a;b,c;...");
    p->callback([&] { action = [&] { return run_product(pr); }; });

    VerifyArgs ve;
    auto* v = app.add_subcommand("verify", "Randomized verification suites");
    std::vector<std::string> suites = suite_names();
    suites.push_back("all");
    v->add_option("suite", ve.suite)->required()->check(CLI::IsMember(suites));
    v->add_option("--seed", ve.corpus.seed);
    v->add_option("--count", ve.corpus.count);
    v->add_option("--max-size", ve.corpus.max_size);
    v->add_option("--max-k", ve.corpus.max_k);
    v->add_option("--rank", ve.corpus.max_rank);
    v->add_option("--quantifiers", ve.quantifiers);
    v->add_option("--mutant", ve.corpus.mutant)->check(CLI::IsMember({"none", "drop-back", "drop-forth"}));
    v->add_option("--only", ve.only, "Run one instance index");
    v->add_option("--dump-dir", ve.dump_dir, "Write the counterexample structures here");
    v->add_flag("--json", ve.json);
    v->callback([&] { action = [&] { return run_verify(ve); }; });

    ServeArgs se;
    auto* s = app.add_subcommand("serve", "HTTP API for game sessions");
    s->add_option("--port", se.port);
    s->add_option("--host", se.host);
    s->add_option("--state-dir", se.state_dir, "Session snapshot directory");
    s->add_option("--static", se.static_dir, "Directory served at /");
    s->callback([&] { action = [&] { return run_serve(se); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    try {
        code = action();
    } catch (const Error& e) {
        std::cerr << "error [" << e.code() << "]: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return code;
}
