#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <kql/error.hpp>
#include <kql/game.hpp>
#include <kql/verify.hpp>

#include "fixtures.hpp"

using namespace kql;

namespace {

const std::vector<Quantifier> kDia{Quantifier::diamond("R")};

struct Move {
    Side side;
    std::size_t qi;
    TupleSet witness;
};

// Every Player-1 witness move available at the current position.
std::vector<Move> moves(const GameArena& arena, const GameState& st) {
    std::vector<Move> out;
    for (Side side : {Side::Left, Side::Right})
        for (std::size_t qi = 0; qi < arena.registry().size(); ++qi)
            for (const auto& w : arena.witnesses(side, qi, side == Side::Left ? st.alpha : st.beta))
                out.push_back({side, qi, w});
    return out;
}

// Round in which Player 2 lost, or -1.
int loss_round(const GameState& st, bool stuck) {
    if (st.loser != "Player 2") return -1;
    return stuck ? st.played + 1 : st.played;
}

// Player 1 always takes the move that minimizes the level of the next position.
int greedy_playout(const GameArena& arena, const BisimRelation& rel, GameState st) {
    while (st.phase != GameState::Phase::Over) {
        std::optional<GameState> best;
        int best_level = BisimRelation::kInfinite;
        for (const auto& m : moves(arena, st)) {
            auto r = game_step(arena, rel, st, WitnessMove{m.side, m.qi, m.witness});
            if (r.state.phase == GameState::Phase::Over) {
                if (r.state.loser == "Player 2") return loss_round(r.state, true);
                continue;
            }
            r.state.response.for_each([&](TupleCode d) {
                auto r2 = game_step(arena, rel, r.state, d);
                int lv = r2.state.phase == GameState::Phase::Over && r2.state.loser == "Player 2"
                             ? -2
                             : rel.level(r2.state.alpha, r2.state.beta);
                if (lv < best_level) {
                    best_level = lv;
                    best = r2.state;
                }
            });
        }
        if (!best) return -1;
        st = *best;
    }
    return loss_round(st, false);
}

// Uniformly random legal Player-1 moves; returns the final state.
GameState random_playout(const GameArena& arena, const BisimRelation& rel, GameState st, std::mt19937_64& rng,
                         int max_rounds, int& moves_made, bool& stuck) {
    stuck = false;
    for (int r = 0; r < max_rounds && st.phase != GameState::Phase::Over; ++r) {
        auto ms = moves(arena, st);
        if (ms.empty()) break;
        const auto& m = ms[rng() % ms.size()];
        auto res = game_step(arena, rel, st, WitnessMove{m.side, m.qi, m.witness});
        ++moves_made;
        st = res.state;
        if (st.phase == GameState::Phase::Over) {
            stuck = res.engine.value("type", "") == "stuck";
            break;
        }
        std::vector<TupleCode> ts;
        st.response.for_each([&](TupleCode d) { ts.push_back(d); });
        st = game_step(arena, rel, st, ts[rng() % ts.size()]).state;
        ++moves_made;
    }
    return st;
}

} // namespace

TEST_CASE("atom equivalence on K1") {
    Structure s = fx::k1();
    CHECK(atom_equiv(s, fx::at(s, "a"), s, fx::at(s, "a")));
    CHECK_FALSE(atom_equiv(s, fx::at(s, "a"), s, fx::at(s, "b")));
    CHECK(atom_equiv(s, fx::at(s, "a"), s, fx::at(s, "c")));
}

TEST_CASE("bounded and unbounded relations on K1") {
    Structure s = fx::k1();
    GameArena arena(s, s, 1, kDia);
    auto rel = bisim_rank(arena, 1);
    TupleCode a = 0, b = 1, c = 2;
    CHECK(rel.contains(a, a, 1));
    CHECK(rel.contains(a, c, 0));
    CHECK_FALSE(rel.contains(a, c, 1));
    CHECK_FALSE(rel.contains(a, b, 0));
    auto full = bisim(arena);
    REQUIRE(full.stabilized());
    for (TupleCode x = 0; x < 3; ++x) CHECK(full.stable().contains(x, x));
    CHECK(static_cast<std::size_t>(full.stabilization) <= 9);
    CHECK(full.level(a, a) == BisimRelation::kInfinite);
    CHECK(full.level(a, c) == 0);
    CHECK(full.level(a, b) == -1);
    CHECK(atom_relation(arena) == full.at(0));
}

TEST_CASE("signature mismatch") {
    Structure s = fx::k1();
    CHECK_THROWS_AS(GameArena(s, reduct(s, Signature{{"R", 2}}), 1, kDia), SignatureMismatch);
}

TEST_CASE("strategy responses") {
    Structure s = fx::k1();
    GameArena arena(s, s, 1, kDia);
    auto rel = bisim(arena);
    Strategy strat(arena, rel, BisimRelation::kInfinite);
    WitnessMove m{Side::Left, 0, fx::set_of(s, 1, {"b"})};
    CHECK(strat.respond(0, 0, m) == fx::set_of(s, 1, {"b"}));
    CHECK(strat.respond_challenge(0, 0, m, 1) == 1);
    try {
        strat.respond(0, 2, m);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == "no_winning_strategy");
    }
    auto table = strat.to_json(std::make_pair(TupleCode{0}, TupleCode{0}));
    CHECK(table.is_object());
}

TEST_CASE("game steps on K1") {
    Structure s = fx::k1();
    GameArena arena(s, s, 1, kDia);
    auto rel = bisim(arena);
    GameState st = game_start(arena, rel, 0, 0, std::nullopt);
    CHECK(st.status == "Player 2 safe");
    auto r = game_step(arena, rel, st, WitnessMove{Side::Left, 0, fx::set_of(s, 1, {"b"})});
    CHECK(r.state.phase == GameState::Phase::Challenge);
    CHECK(r.engine["witness"] == nlohmann::ordered_json::array({"b"}));
    try {
        game_step(arena, rel, st, WitnessMove{Side::Left, 0, fx::set_of(s, 1, {"a", "c"})});
        FAIL("expected an illegal move");
    } catch (const IllegalMove& e) {
        CHECK(e.code() == "not_a_witness");
    }
    CHECK_THROWS_AS(game_step(arena, rel, r.state, TupleCode{0}), IllegalMove);
    CHECK_THROWS_AS(game_step(arena, rel, st, TupleCode{1}), IllegalMove);
    auto r2 = game_step(arena, rel, r.state, TupleCode{1});
    CHECK(r2.state.alpha == 1);
    CHECK(r2.state.beta == 1);
    CHECK(r2.state.played == 1);

    GameState lost = game_start(arena, rel, 0, 2, std::nullopt);
    CHECK(lost.status == "Player 1 forced win in 1 round");
    auto r3 = game_step(arena, rel, lost, WitnessMove{Side::Left, 0, fx::set_of(s, 1, {"b"})});
    CHECK(r3.state.phase == GameState::Phase::Over);
    CHECK(r3.state.loser == "Player 2");
    CHECK_THROWS_AS(game_step(arena, rel, r3.state, WitnessMove{Side::Left, 0, fx::set_of(s, 1, {"b"})}),
                    IllegalMove);

    GameState bounded = game_start(arena, rel, 0, 2, 0);
    CHECK(bounded.phase == GameState::Phase::Over);
    CHECK(bounded.loser == "Player 1");
}

TEST_CASE("property: refinement is monotone, serial equals parallel, fixed point equals worklist") {
    Corpus c;
    for (int i = 0; i < 120; ++i) {
        Instance inst = gen_instance(c, i);
        GameArena arena(inst.left, inst.right, inst.k, inst.registry);
        auto par = bisim(arena, Exec::Parallel);
        auto ser = bisim(arena, Exec::Serial);
        CHECK(par.levels == ser.levels);
        for (int r = 0; r < par.max_level(); ++r) {
            const auto& next = par.at(r + 1);
            for (TupleCode a = 0; a < next.left_size(); ++a) CHECK(next.row(a).is_subset_of(par.at(r).row(a)));
        }
        CHECK(par.stable() == greatest_fixed_point(arena));
        CHECK(static_cast<std::size_t>(par.stabilization) <= arena.left_space().size() * arena.right_space().size());
    }
}

TEST_CASE("property: Player 2 survives exactly the predicted number of rounds") {
    Corpus c;
    std::size_t finite = 0;
    for (int i = 0; i < 80; ++i) {
        Instance inst = gen_instance(c, i);
        GameArena arena(inst.left, inst.right, inst.k, inst.registry);
        auto rel = bisim(arena);
        std::mt19937_64 rng(static_cast<std::uint64_t>(i));
        TupleCode a = rng() % arena.left_space().size();
        TupleCode b = rng() % arena.right_space().size();
        int lv = rel.level(a, b);
        if (lv < 0) continue;
        GameState st = game_start(arena, rel, a, b, std::nullopt);
        if (lv == BisimRelation::kInfinite) {
            CHECK(st.loser != "Player 2");
            continue;
        }
        ++finite;
        CHECK(greedy_playout(arena, rel, st) == lv + 1);
        for (int t = 0; t < 5; ++t) {
            int made = 0;
            bool stuck = false;
            GameState end = random_playout(arena, rel, st, rng, lv + 3, made, stuck);
            int lost = loss_round(end, stuck);
            if (lost >= 0) CHECK(lost >= lv + 1);
            CHECK(end.loser != "Player 1");
        }
    }
    CHECK(finite > 0);
}

TEST_CASE("property: from the winning region Player 2 never loses") {
    Corpus c;
    for (int i = 0; i < 80; ++i) {
        Instance inst = gen_instance(c, i);
        GameArena arena(inst.left, inst.right, inst.k, inst.registry);
        auto rel = bisim(arena);
        std::mt19937_64 rng(static_cast<std::uint64_t>(1000 + i));
        for (TupleCode a = 0; a < arena.left_space().size(); ++a) {
            auto row = rel.stable().row(a);
            if (row.empty()) continue;
            TupleCode b = 0;
            row.for_each([&](TupleCode x) { b = x; });
            int made = 0;
            bool stuck = false;
            GameState end = random_playout(arena, rel, game_start(arena, rel, a, b, std::nullopt), rng, 6, made,
                                           stuck);
            CHECK(end.loser != "Player 2");
            GameState bounded = game_start(arena, rel, a, b, 2);
            end = random_playout(arena, rel, bounded, rng, 3, made, stuck);
            CHECK(end.loser != "Player 2");
            break;
        }
    }
}

TEST_CASE("property: minimal-witness game agrees with the all-witness game") {
    Corpus c;
    c.max_size = 3;
    c.max_k = 1;
    int compared = 0;
    for (int i = 0; i < 40; ++i) {
        Instance inst = gen_instance(c, i);
        if (inst.left.size() > 3 || inst.right.size() > 3) continue;
        GameArena arena(inst.left, inst.right, inst.k, inst.registry);
        auto rel = bisim_rank(arena, 2);
        auto all = all_witness_game(inst.left, inst.right, inst.k, inst.registry, 2);
        for (int q = 0; q <= 2; ++q) CHECK(rel.at(q) == all[static_cast<std::size_t>(q)]);
        ++compared;
    }
    CHECK(compared > 0);
}
