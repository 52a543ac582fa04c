// Serial vs OpenMP refinement on random pairs of growing size.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <numeric>

#include <omp.h>

#include <kql/game.hpp>
#include <kql/verify.hpp>

using namespace kql;

namespace {

double time_bisim(const GameArena& arena, Exec exec, int reps, BisimRelation& out) {
    auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) out = bisim(arena, exec);
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / reps;
}

} // namespace

int main(int argc, char** argv) {
    const int reps = argc > 1 ? std::atoi(argv[1]) : 3;
    std::printf("threads=%d reps=%d\n", omp_get_max_threads(), reps);
    std::printf("%6s %3s %10s %10s %10s %8s %6s\n", "size", "k", "positions", "serial_s", "parallel_s", "speedup", "same");
    std::mt19937_64 rng(7);
    Signature sig{{"P", 1}, {"R", 2}};
    std::vector<Quantifier> reg{Quantifier::diamond("R"), Quantifier::diamond_at_least(2, "R"), Quantifier::all()};
    struct Case {
        std::size_t size;
        int k;
    };
    for (Case c : {Case{16, 1}, Case{64, 1}, Case{6, 2}, Case{10, 2}, Case{14, 2}}) {
        Structure a = random_structure(rng, sig, c.size);
        // B is A with its universe reordered, so the relation is large and refinement runs long.
        std::vector<Element> perm(c.size);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        Structure b = permute(a, perm);
        GameArena arena(a, b, c.k, reg);
        BisimRelation rs, rp;
        double ts = time_bisim(arena, Exec::Serial, reps, rs);
        double tp = time_bisim(arena, Exec::Parallel, reps, rp);
        std::printf("%6zu %3d %10zu %10.4f %10.4f %8.2f %6s\n", c.size, c.k,
                    arena.left_space().size() * arena.right_space().size(), ts, tp, ts / tp,
                    rs.levels == rp.levels ? "yes" : "NO");
    }
    return 0;
}
