#include <kql/game.hpp>

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <tuple>

#include <kql/definable.hpp>
#include <kql/formula.hpp>

namespace kql {

namespace {

template <class F>
void for_range(std::size_t n, Exec exec, F&& f) {
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic)
        for (long i = 0; i < static_cast<long>(n); ++i) f(static_cast<TupleCode>(i));
    } else {
        for (std::size_t i = 0; i < n; ++i) f(static_cast<TupleCode>(i));
    }
}

std::vector<bool> atomic_type(const Structure& s, const TupleSpace& space, TupleCode alpha) {
    std::vector<bool> out;
    std::vector<Element> args;
    for (const auto& [rel, arity] : s.signature().relations()) {
        const auto& r = s.relation(rel);
        for (const auto& vars : variable_tuples(space.k(), arity)) {
            args.clear();
            for (int v : vars) args.push_back(space.at(alpha, v - 1));
            out.push_back(r.contains(args));
        }
    }
    return out;
}

Side other(Side s) { return s == Side::Left ? Side::Right : Side::Left; }

bool safe(int level, std::optional<int> remaining) {
    if (level == BisimRelation::kInfinite) return true;
    return remaining && level >= *remaining;
}

} // namespace

std::string side_name(Side s) { return s == Side::Left ? "left" : "right"; }

Side parse_side(const std::string& text) {
    if (text == "left") return Side::Left;
    if (text == "right") return Side::Right;
    throw ValidationError("side must be \"left\" or \"right\", got \"" + text + "\"");
}

TupleSet PairRelation::column(TupleCode b) const {
    TupleSet col(rows_.size());
    for (TupleCode a = 0; a < rows_.size(); ++a)
        if (rows_[a].contains(b)) col.insert(a);
    return col;
}

std::size_t PairRelation::count() const {
    std::size_t n = 0;
    for (const auto& r : rows_) n += r.count();
    return n;
}

GameArena::GameArena(const Structure& a, const Structure& b, int k, std::vector<Quantifier> registry)
    : a_(&a), b_(&b), left_space_(a.size(), k), right_space_(b.size(), k), registry_(std::move(registry)) {
    if (!(a.signature() == b.signature())) throw SignatureMismatch("structures have different signatures");
    check_registry(registry_, a.signature(), k);
    for (const auto& q : registry_) {
        left_witnesses_.push_back(q.minimal_witness_table(a, left_space_));
        right_witnesses_.push_back(q.minimal_witness_table(b, right_space_));
    }
    for (TupleCode c = 0; c < left_space_.size(); ++c) left_types_.push_back(atomic_type(a, left_space_, c));
    for (TupleCode c = 0; c < right_space_.size(); ++c) right_types_.push_back(atomic_type(b, right_space_, c));
}

std::optional<std::size_t> GameArena::quantifier_index(const Quantifier& q) const {
    for (std::size_t i = 0; i < registry_.size(); ++i)
        if (registry_[i] == q) return i;
    return std::nullopt;
}

bool atom_equiv(const Structure& a, const Assignment& alpha, const Structure& b, const Assignment& beta) {
    if (!(a.signature() == b.signature())) throw SignatureMismatch("structures have different signatures");
    if (alpha.size() != beta.size() || alpha.empty())
        throw ValidationError("assignments must have the same length k >= 1");
    int k = static_cast<int>(alpha.size());
    TupleSpace sa(a.size(), k), sb(b.size(), k);
    return atomic_type(a, sa, sa.encode(alpha)) == atomic_type(b, sb, sb.encode(beta));
}

const PairRelation& BisimRelation::at(int r) const {
    if (r < 0) throw ValidationError("negative round bound");
    if (r <= max_level()) return levels[r];
    if (!stabilized()) throw ValidationError("level " + std::to_string(r) + " was not computed");
    return levels.back();
}

const PairRelation& BisimRelation::stable() const {
    if (!stabilized()) throw ValidationError("relation has not stabilized");
    return levels.back();
}

int BisimRelation::level(TupleCode a, TupleCode b) const {
    if (!levels[0].contains(a, b)) return -1;
    int r = 0;
    while (r < max_level() && levels[r + 1].contains(a, b)) ++r;
    if (r == max_level() && stabilized()) return kInfinite;
    return r;
}

PairRelation atom_relation(const GameArena& arena) {
    PairRelation rel(arena.left_space().size(), arena.right_space().size());
    for (TupleCode a = 0; a < rel.left_size(); ++a)
        for (TupleCode b = 0; b < rel.right_size(); ++b)
            if (arena.atom_equiv(a, b)) rel.insert(a, b);
    return rel;
}

PairRelation refine_step(const GameArena& arena, const PairRelation& prev, Exec exec) {
    const std::size_t na = prev.left_size(), nb = prev.right_size();
    const std::size_t nq = arena.registry().size();

    std::vector<TupleSet> cols(nb, TupleSet(na));
    for (TupleCode a = 0; a < na; ++a) prev.row(a).for_each([&](TupleCode b) { cols[b].insert(a); });

    // cover_left[qi][a][i]: tuples of B^k matched under prev by some member of
    // the i-th minimal witness at a; symmetrically for cover_right.
    std::vector<std::vector<std::vector<TupleSet>>> cover_left(nq, std::vector<std::vector<TupleSet>>(na));
    std::vector<std::vector<std::vector<TupleSet>>> cover_right(nq, std::vector<std::vector<TupleSet>>(nb));
    for_range(na, exec, [&](TupleCode a) {
        for (std::size_t qi = 0; qi < nq; ++qi)
            for (const auto& s : arena.witnesses(Side::Left, qi, a)) {
                TupleSet cov(nb);
                s.for_each([&](TupleCode g) { cov |= prev.row(g); });
                cover_left[qi][a].push_back(std::move(cov));
            }
    });
    for_range(nb, exec, [&](TupleCode b) {
        for (std::size_t qi = 0; qi < nq; ++qi)
            for (const auto& t : arena.witnesses(Side::Right, qi, b)) {
                TupleSet cov(na);
                t.for_each([&](TupleCode d) { cov |= cols[d]; });
                cover_right[qi][b].push_back(std::move(cov));
            }
    });

    PairRelation next(na, nb);
    for_range(na, exec, [&](TupleCode a) {
        prev.row(a).for_each([&](TupleCode b) {
            for (std::size_t qi = 0; qi < nq; ++qi) {
                const auto& ws = arena.witnesses(Side::Left, qi, a);
                const auto& wt = arena.witnesses(Side::Right, qi, b);
                for (const auto& cov : cover_left[qi][a]) {
                    bool answered = std::any_of(wt.begin(), wt.end(),
                                                [&](const TupleSet& t) { return t.is_subset_of(cov); });
                    if (!answered) return;
                }
                for (const auto& cov : cover_right[qi][b]) {
                    bool answered = std::any_of(ws.begin(), ws.end(),
                                                [&](const TupleSet& s) { return s.is_subset_of(cov); });
                    if (!answered) return;
                }
            }
            next.insert(a, b);
        });
    });
    return next;
}

BisimRelation bisim_rank(const GameArena& arena, int q, Exec exec) {
    if (q < 0) throw ValidationError("round bound must be >= 0");
    BisimRelation rel;
    rel.levels.push_back(atom_relation(arena));
    for (int r = 0; r < q; ++r) {
        PairRelation next = refine_step(arena, rel.levels.back(), exec);
        if (next == rel.levels.back()) {
            rel.stabilization = r;
            break;
        }
        rel.levels.push_back(std::move(next));
    }
    return rel;
}

BisimRelation bisim(const GameArena& arena, Exec exec) {
    BisimRelation rel;
    rel.levels.push_back(atom_relation(arena));
    while (true) {
        PairRelation next = refine_step(arena, rel.levels.back(), exec);
        if (next == rel.levels.back()) break;
        rel.levels.push_back(std::move(next));
    }
    rel.stabilization = rel.max_level();
    return rel;
}

PairRelation greatest_fixed_point(const GameArena& arena) {
    const std::size_t na = arena.left_space().size(), nb = arena.right_space().size();
    const std::size_t nq = arena.registry().size();
    PairRelation rel = atom_relation(arena);

    // Pairs whose survival may depend on (g, d): g in a witness at a', d in a witness at b'.
    std::vector<std::set<TupleCode>> pred_left(na), pred_right(nb);
    for (std::size_t qi = 0; qi < nq; ++qi) {
        for (TupleCode a = 0; a < na; ++a)
            for (const auto& s : arena.witnesses(Side::Left, qi, a))
                s.for_each([&](TupleCode g) { pred_left[g].insert(a); });
        for (TupleCode b = 0; b < nb; ++b)
            for (const auto& t : arena.witnesses(Side::Right, qi, b))
                t.for_each([&](TupleCode d) { pred_right[d].insert(b); });
    }

    auto survives = [&](TupleCode a, TupleCode b) {
        for (std::size_t qi = 0; qi < nq; ++qi) {
            const auto& ws = arena.witnesses(Side::Left, qi, a);
            const auto& wt = arena.witnesses(Side::Right, qi, b);
            for (const auto& s : ws) {
                bool found = false;
                for (const auto& t : wt) {
                    bool ok = true;
                    t.for_each([&](TupleCode d) {
                        bool matched = false;
                        s.for_each([&](TupleCode g) { matched = matched || rel.contains(g, d); });
                        ok = ok && matched;
                    });
                    if (ok) { found = true; break; }
                }
                if (!found) return false;
            }
            for (const auto& t : wt) {
                bool found = false;
                for (const auto& s : ws) {
                    bool ok = true;
                    s.for_each([&](TupleCode g) {
                        bool matched = false;
                        t.for_each([&](TupleCode d) { matched = matched || rel.contains(g, d); });
                        ok = ok && matched;
                    });
                    if (ok) { found = true; break; }
                }
                if (!found) return false;
            }
        }
        return true;
    };

    std::deque<std::pair<TupleCode, TupleCode>> work;
    std::vector<TupleSet> queued(na, TupleSet(nb));
    for (TupleCode a = 0; a < na; ++a)
        rel.row(a).for_each([&](TupleCode b) {
            work.emplace_back(a, b);
            queued[a].insert(b);
        });
    while (!work.empty()) {
        auto [a, b] = work.front();
        work.pop_front();
        queued[a].erase(b);
        if (!rel.contains(a, b) || survives(a, b)) continue;
        rel.erase(a, b);
        for (TupleCode a2 : pred_left[a])
            for (TupleCode b2 : pred_right[b])
                if (rel.contains(a2, b2) && !queued[a2].contains(b2)) {
                    work.emplace_back(a2, b2);
                    queued[a2].insert(b2);
                }
    }
    return rel;
}

// ---------------------------------------------------------------------------
// Strategies

Strategy::Strategy(const GameArena& arena, const BisimRelation& rel, int rounds)
    : arena_(&arena), rel_(&rel), rounds_(rounds) {
    if (rounds < 0) throw ValidationError("round bound must be >= 0");
    if (rounds == BisimRelation::kInfinite && !rel.stabilized())
        throw ValidationError("unbounded strategy needs a stabilized relation");
}

bool Strategy::in_region(TupleCode a, TupleCode b, int remaining) const {
    if (remaining == BisimRelation::kInfinite) return rel_->stable().contains(a, b);
    return rel_->at(remaining).contains(a, b);
}

const PairRelation& Strategy::target(int remaining) const {
    if (remaining == BisimRelation::kInfinite) return rel_->stable();
    return rel_->at(remaining - 1);
}

namespace {

// First minimal witness contained in `w` (w itself must be a witness).
const TupleSet& minimal_inside(const std::vector<TupleSet>& minimal, const TupleSet& w) {
    for (const auto& m : minimal)
        if (m.is_subset_of(w)) return m;
    throw IllegalMove("not_a_witness", "witness contains no minimal witness");
}

} // namespace

TupleSet Strategy::respond(TupleCode a, TupleCode b, const WitnessMove& move, int remaining) const {
    if (remaining <= 0 || !in_region(a, b, remaining))
        throw Error("no_winning_strategy", "position is outside Player 2's winning region");
    const auto& tgt = target(remaining);
    const std::size_t qi = move.quantifier;
    if (move.side == Side::Left) {
        const TupleSet& s0 = minimal_inside(arena_->witnesses(Side::Left, qi, a), move.witness);
        for (const auto& t : arena_->witnesses(Side::Right, qi, b)) {
            bool ok = true;
            t.for_each([&](TupleCode d) {
                bool matched = false;
                s0.for_each([&](TupleCode g) { matched = matched || tgt.contains(g, d); });
                ok = ok && matched;
            });
            if (ok) return t;
        }
    } else {
        const TupleSet& t0 = minimal_inside(arena_->witnesses(Side::Right, qi, b), move.witness);
        for (const auto& s : arena_->witnesses(Side::Left, qi, a)) {
            bool ok = true;
            s.for_each([&](TupleCode g) {
                bool matched = false;
                t0.for_each([&](TupleCode d) { matched = matched || tgt.contains(g, d); });
                ok = ok && matched;
            });
            if (ok) return s;
        }
    }
    throw Error("no_winning_strategy", "no certified response; relation is inconsistent");
}

TupleCode Strategy::respond_challenge(TupleCode a, TupleCode b, const WitnessMove& move, TupleCode delta,
                                      int remaining) const {
    if (remaining <= 0 || !in_region(a, b, remaining))
        throw Error("no_winning_strategy", "position is outside Player 2's winning region");
    const auto& tgt = target(remaining);
    std::optional<TupleCode> found;
    move.witness.for_each([&](TupleCode c) {
        if (found) return;
        bool ok = move.side == Side::Left ? tgt.contains(c, delta) : tgt.contains(delta, c);
        if (ok) found = c;
    });
    if (!found) throw Error("no_winning_strategy", "challenge cannot be answered inside the region");
    return *found;
}

nlohmann::ordered_json Strategy::to_json(std::optional<std::pair<TupleCode, TupleCode>> start) const {
    using json = nlohmann::ordered_json;
    const auto& A = arena_->left();
    const auto& B = arena_->right();
    const auto& sa = arena_->left_space();
    const auto& sb = arena_->right_space();
    auto fmt = [&](Side side, TupleCode c) {
        return format_assignment(side == Side::Left ? A : B, arena_->space(side).decode(c));
    };
    auto fmt_set = [&](Side side, const TupleSet& w) {
        json out = json::array();
        w.for_each([&](TupleCode c) { out.push_back(fmt(side, c)); });
        return out;
    };
    const bool bounded = rounds_ != BisimRelation::kInfinite;

    using Pos = std::tuple<TupleCode, TupleCode, int>;
    std::set<Pos> seen;
    std::deque<Pos> todo;
    if (start) {
        if (in_region(start->first, start->second, rounds_)) todo.emplace_back(start->first, start->second, rounds_);
    } else {
        for (TupleCode a = 0; a < sa.size(); ++a)
            for (TupleCode b = 0; b < sb.size(); ++b)
                if (in_region(a, b, rounds_)) todo.emplace_back(a, b, rounds_);
    }
    for (const auto& p : todo) seen.insert(p);

    json positions = json::array();
    while (!todo.empty()) {
        auto [a, b, remaining] = todo.front();
        todo.pop_front();
        json entry;
        entry["alpha"] = fmt(Side::Left, a);
        entry["beta"] = fmt(Side::Right, b);
        if (bounded) entry["remaining"] = remaining;
        json moves = json::array();
        if (remaining > 0) {
            for (Side side : {Side::Left, Side::Right})
                for (std::size_t qi = 0; qi < arena_->registry().size(); ++qi)
                    for (const auto& w : arena_->witnesses(side, qi, side == Side::Left ? a : b)) {
                        WitnessMove mv{side, qi, w};
                        TupleSet resp = respond(a, b, mv, remaining);
                        json m;
                        m["side"] = side_name(side);
                        m["quantifier"] = arena_->registry()[qi].to_string();
                        m["witness"] = fmt_set(side, w);
                        m["response"] = fmt_set(other(side), resp);
                        json answers = json::array();
                        resp.for_each([&](TupleCode d) {
                            TupleCode g = respond_challenge(a, b, mv, d, remaining);
                            answers.push_back({{"challenge", fmt(other(side), d)}, {"response", fmt(side, g)}});
                            TupleCode na = side == Side::Left ? g : d;
                            TupleCode nb = side == Side::Left ? d : g;
                            int next_remaining = bounded ? remaining - 1 : remaining;
                            Pos next{na, nb, next_remaining};
                            if (start && seen.insert(next).second) todo.push_back(next);
                        });
                        m["challenges"] = std::move(answers);
                        moves.push_back(std::move(m));
                    }
        }
        entry["moves"] = std::move(moves);
        positions.push_back(std::move(entry));
    }
    json out;
    out["rounds"] = bounded ? json(rounds_) : json("unbounded");
    out["quantifiers"] = format_quantifier_list(arena_->registry());
    out["positions"] = std::move(positions);
    return out;
}

Strategy extract_strategy(const GameArena& arena, const BisimRelation& rel, int rounds) {
    return Strategy(arena, rel, rounds);
}

// ---------------------------------------------------------------------------
// Interactive play

std::string position_status(const BisimRelation& rel, TupleCode a, TupleCode b, std::optional<int> remaining) {
    int lv = rel.level(a, b);
    if (safe(lv, remaining)) return "Player 2 safe";
    int r = lv + 1;
    return "Player 1 forced win in " + std::to_string(r) + (r == 1 ? " round" : " rounds");
}

namespace {

std::optional<int> remaining_rounds(const GameState& st) {
    if (!st.rounds) return std::nullopt;
    return *st.rounds - st.played;
}

int strategy_rounds(std::optional<int> remaining) {
    return remaining ? *remaining : BisimRelation::kInfinite;
}

bool player1_stuck(const GameArena& arena, TupleCode a, TupleCode b) {
    for (std::size_t qi = 0; qi < arena.registry().size(); ++qi)
        if (!arena.witnesses(Side::Left, qi, a).empty() || !arena.witnesses(Side::Right, qi, b).empty())
            return false;
    return true;
}

void finish(GameState& st, const std::string& loser, const std::string& reason) {
    st.phase = GameState::Phase::Over;
    st.loser = loser;
    st.status = loser + " loses: " + reason;
}

// Status after arriving at (alpha, beta) at the start of a round.
void settle(const GameArena& arena, const BisimRelation& rel, GameState& st) {
    if (!arena.atom_equiv(st.alpha, st.beta)) return finish(st, "Player 2", "atom equivalence violated");
    if (st.rounds && st.played >= *st.rounds)
        return finish(st, "Player 1", "all " + std::to_string(*st.rounds) + " rounds survived");
    if (player1_stuck(arena, st.alpha, st.beta)) return finish(st, "Player 1", "no witness available");
    st.phase = GameState::Phase::Witness;
    st.status = position_status(rel, st.alpha, st.beta, remaining_rounds(st));
}

nlohmann::ordered_json tuple_list(const GameArena& arena, Side side, const TupleSet& w) {
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    w.for_each([&](TupleCode c) {
        out.push_back(format_assignment(arena.structure(side), arena.space(side).decode(c)));
    });
    return out;
}

void require_turn(const GameState& st, GameState::Phase expected) {
    if (st.phase == GameState::Phase::Over) throw IllegalMove("game_over", "the game is over");
    if (st.phase != expected)
        throw IllegalMove("wrong_turn", expected == GameState::Phase::Witness
                                            ? "a challenge tuple is expected"
                                            : "a witness move is expected");
}

} // namespace

GameState game_start(const GameArena& arena, const BisimRelation& rel, TupleCode a, TupleCode b,
                     std::optional<int> rounds) {
    if (!rel.stabilized()) throw ValidationError("interactive play needs the stabilized relation");
    if (rounds && *rounds < 0) throw ValidationError("round bound must be >= 0");
    GameState st;
    st.alpha = a;
    st.beta = b;
    st.rounds = rounds;
    st.engine_forced = !safe(rel.level(a, b), rounds);
    settle(arena, rel, st);
    return st;
}

StepResult game_step(const GameArena& arena, const BisimRelation& rel, const GameState& state,
                     const WitnessMove& move) {
    require_turn(state, GameState::Phase::Witness);
    if (move.quantifier >= arena.registry().size())
        throw IllegalMove("unknown_quantifier", "quantifier is not in the session registry");
    const Side side = move.side;
    const auto& space = arena.space(side);
    const TupleCode own = side == Side::Left ? state.alpha : state.beta;
    const TupleCode theirs = side == Side::Left ? state.beta : state.alpha;
    const auto& q = arena.registry()[move.quantifier];
    if (move.witness.domain() != space.size() ||
        !q.is_witness(arena.structure(side), space, own, move.witness))
        throw IllegalMove("not_a_witness", "declared set is not a witness of " + q.to_string() + " on the " +
                                               side_name(side) + " side");

    StepResult res{state, {}, {}};
    GameState& st = res.state;
    res.player1 = {{"type", "witness"},
                   {"side", side_name(side)},
                   {"quantifier", q.to_string()},
                   {"witness", tuple_list(arena, side, move.witness)}};

    const auto remaining = remaining_rounds(state);
    const auto& candidates = arena.witnesses(other(side), move.quantifier, theirs);
    if (candidates.empty()) {
        finish(st, "Player 2", "no witness of " + q.to_string() + " on the " + side_name(other(side)) + " side");
        res.engine = {{"type", "stuck"}};
        return res;
    }

    TupleSet response;
    if (safe(rel.level(state.alpha, state.beta), remaining)) {
        Strategy strat(arena, rel, strategy_rounds(remaining));
        response = strat.respond(state.alpha, state.beta, move, strategy_rounds(remaining));
    } else {
        // Best effort: maximize the weakest challenge's best answer level.
        int best = -2;
        for (const auto& t : candidates) {
            int worst = BisimRelation::kInfinite;
            t.for_each([&](TupleCode d) {
                int top = -1;
                move.witness.for_each([&](TupleCode g) {
                    int lv = side == Side::Left ? rel.level(g, d) : rel.level(d, g);
                    top = std::max(top, lv);
                });
                worst = std::min(worst, top);
            });
            if (worst > best) {
                best = worst;
                response = t;
            }
        }
    }

    st.pending = move;
    st.response = response;
    res.engine = {{"type", "witness"},
                  {"side", side_name(other(side))},
                  {"quantifier", q.to_string()},
                  {"witness", tuple_list(arena, other(side), response)}};
    if (response.empty()) {
        finish(st, "Player 1", "no challenge available in the response");
        return res;
    }
    st.phase = GameState::Phase::Challenge;
    return res;
}

StepResult game_step(const GameArena& arena, const BisimRelation& rel, const GameState& state,
                     TupleCode challenge) {
    require_turn(state, GameState::Phase::Challenge);
    const WitnessMove& move = *state.pending;
    const Side side = move.side;
    if (!state.response.contains(challenge))
        throw IllegalMove("not_in_witness", "challenge tuple is not in Player 2's witness");

    StepResult res{state, {}, {}};
    GameState& st = res.state;
    const auto& other_structure = arena.structure(other(side));
    res.player1 = {{"type", "challenge"},
                   {"side", side_name(other(side))},
                   {"tuple", format_assignment(other_structure, arena.space(other(side)).decode(challenge))}};

    const auto remaining = remaining_rounds(state);
    TupleCode answer = 0;
    if (safe(rel.level(state.alpha, state.beta), remaining)) {
        Strategy strat(arena, rel, strategy_rounds(remaining));
        answer = strat.respond_challenge(state.alpha, state.beta, move, challenge, strategy_rounds(remaining));
    } else {
        int best = -2;
        move.witness.for_each([&](TupleCode g) {
            int lv = side == Side::Left ? rel.level(g, challenge) : rel.level(challenge, g);
            if (lv > best) {
                best = lv;
                answer = g;
            }
        });
    }
    res.engine = {{"type", "challenge"},
                  {"side", side_name(side)},
                  {"tuple", format_assignment(arena.structure(side), arena.space(side).decode(answer))}};

    st.alpha = side == Side::Left ? answer : challenge;
    st.beta = side == Side::Left ? challenge : answer;
    st.pending.reset();
    st.response = TupleSet();
    st.played += 1;
    settle(arena, rel, st);
    return res;
}

} // namespace kql
