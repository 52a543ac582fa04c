// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include <kql/game.hpp>
#include <kql/verify.hpp>

using namespace kql;

namespace {

struct Criterion {
    const char* id;
    const char* suite;
    int count;
    double limit_seconds;  // 0: no limit
};

int failures = 0;

void report(const char* id, bool ok, const std::string& detail) {
    std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

void run(const Criterion& c, const std::function<std::string(bool&)>& extra = {}) {
    Corpus corpus;
    corpus.count = c.count;
    auto start = std::chrono::steady_clock::now();
    SuiteReport rep = run_suite(c.suite, corpus);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool ok = rep.passed && rep.instances > 0;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s, %zu instances, %zu checks, %.1f s", c.suite, rep.instances, rep.checks, secs);
    std::string detail = buf;
    if (c.limit_seconds > 0 && secs >= c.limit_seconds) {
        ok = false;
        detail += " (limit " + std::to_string(static_cast<int>(c.limit_seconds)) + " s)";
    }
    if (rep.counterexample) detail += "; " + rep.counterexample->value("reproduce", std::string());
    if (extra) {
        bool extra_ok = true;
        detail += "; " + extra(extra_ok);
        ok = ok && extra_ok;
    }
    report(c.id, ok, detail);
}

} // namespace

int main() {
    run({"A1", "quantifiers", 500, 60});
    run({"A2", "ef", 200, 600});
    run({"A3", "minimal-witness", 200, 0});
    run({"A4", "monotone", 500, 0});
    run({"A5", "invariance", 200, 0});
    run({"A6", "finite-index", 200, 0});
    run({"A7", "hm", 200, 0});
    run({"A8", "fig1", 3, 0}, [](bool& ok) {
        // t(n): the last round at which the roots are still equivalent; must be finite.
        std::string out = "thresholds";
        for (int n = 1; n <= 3; ++n) {
            auto f = gen_fig1_family(n);
            GameArena arena(f.left, f.right, 1, {Quantifier::diamond("R")});
            auto rel = bisim(arena);
            int lv = rel.level(arena.left_space().encode(f.alpha), arena.right_space().encode(f.beta));
            bool finite = lv >= 0 && lv != BisimRelation::kInfinite;
            ok = ok && finite;
            out += " t(" + std::to_string(n) + ")=" + (finite ? std::to_string(lv) : std::string("inf"));
        }
        return out;
    });
    run({"A9", "products", 200, 0});
    run({"A10", "charform", 200, 0});
    std::printf("%s\n", failures == 0 ? "ALL PASS" : "SOME FAILED");
    return failures == 0 ? 0 : 1;
}
