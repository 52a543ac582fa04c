#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include <kql/error.hpp>
#include <kql/quantifier.hpp>
#include <kql/structure.hpp>

namespace kql {

enum class Side { Left, Right };

std::string side_name(Side s);
Side parse_side(const std::string& text);

/// Subset of A^k x B^k stored as one row (a subset of B^k) per alpha.
class PairRelation {
public:
    PairRelation() = default;
    PairRelation(std::size_t left, std::size_t right)
        : right_(right), rows_(left, TupleSet(right)) {}

    std::size_t left_size() const { return rows_.size(); }
    std::size_t right_size() const { return right_; }
    bool contains(TupleCode a, TupleCode b) const { return rows_[a].contains(b); }
    void insert(TupleCode a, TupleCode b) { rows_[a].insert(b); }
    void erase(TupleCode a, TupleCode b) { rows_[a].erase(b); }
    const TupleSet& row(TupleCode a) const { return rows_[a]; }
    TupleSet& row(TupleCode a) { return rows_[a]; }
    /// Column b as a subset of A^k.
    TupleSet column(TupleCode b) const;
    std::size_t count() const;

    friend bool operator==(const PairRelation&, const PairRelation&) = default;

private:
    std::size_t right_ = 0;
    std::vector<TupleSet> rows_;
};

/// The two structures of a game with the registry's minimal-witness tables.
class GameArena {
public:
    GameArena(const Structure& a, const Structure& b, int k, std::vector<Quantifier> registry);

    const Structure& left() const { return *a_; }
    const Structure& right() const { return *b_; }
    const Structure& structure(Side s) const { return s == Side::Left ? *a_ : *b_; }
    const TupleSpace& left_space() const { return left_space_; }
    const TupleSpace& right_space() const { return right_space_; }
    const TupleSpace& space(Side s) const { return s == Side::Left ? left_space_ : right_space_; }
    int k() const { return left_space_.k(); }
    const std::vector<Quantifier>& registry() const { return registry_; }

    /// Minimal witnesses of registry[qi] at tuple `code` of the given side.
    const std::vector<TupleSet>& witnesses(Side s, std::size_t qi, TupleCode code) const {
        return s == Side::Left ? left_witnesses_[qi][code] : right_witnesses_[qi][code];
    }
    std::optional<std::size_t> quantifier_index(const Quantifier& q) const;

    bool atom_equiv(TupleCode a, TupleCode b) const { return left_types_[a] == right_types_[b]; }

private:
    const Structure* a_;
    const Structure* b_;
    TupleSpace left_space_;
    TupleSpace right_space_;
    std::vector<Quantifier> registry_;
    std::vector<std::vector<std::vector<TupleSet>>> left_witnesses_;
    std::vector<std::vector<std::vector<TupleSet>>> right_witnesses_;
    std::vector<std::vector<bool>> left_types_;
    std::vector<std::vector<bool>> right_types_;
};

/// Agreement on every atom R(y1..yl) with variables from x1..xk.
bool atom_equiv(const Structure& a, const Assignment& alpha, const Structure& b, const Assignment& beta);

/// Stratified relations ~^0 ⊇ ~^1 ⊇ ... up to the computed bound.
struct BisimRelation {
    static constexpr int kInfinite = std::numeric_limits<int>::max();

    std::vector<PairRelation> levels;
    /// Least r with ~^{r+1} = ~^r, or -1 if not reached within the bound.
    int stabilization = -1;

    bool stabilized() const { return stabilization >= 0; }
    int max_level() const { return static_cast<int>(levels.size()) - 1; }
    /// ~^r; beyond the computed bound only after stabilization.
    const PairRelation& at(int r) const;
    bool contains(TupleCode a, TupleCode b, int r) const { return at(r).contains(a, b); }
    /// The stabilized relation (the unbounded game's winning region).
    const PairRelation& stable() const;
    /// -1 if not atom-equivalent, kInfinite if in every computed level of a
    /// stabilized relation, else the largest r with the pair in ~^r.
    int level(TupleCode a, TupleCode b) const;
};

enum class Exec { Serial, Parallel };

PairRelation atom_relation(const GameArena& arena);

/// One refinement step: ~^{r+1} from ~^r. Parallel runs the rows under OpenMP.
PairRelation refine_step(const GameArena& arena, const PairRelation& prev, Exec exec = Exec::Parallel);

/// ~^0 .. ~^q (stops early once stable).
BisimRelation bisim_rank(const GameArena& arena, int q, Exec exec = Exec::Parallel);
/// Iterates to the greatest fixed point.
BisimRelation bisim(const GameArena& arena, Exec exec = Exec::Parallel);

/// Winning region of the unbounded game by a worklist algorithm that removes
/// losing pairs one at a time; independent of refine_step.
PairRelation greatest_fixed_point(const GameArena& arena);

/// A Player-1 witness move.
struct WitnessMove {
    Side side;
    std::size_t quantifier;  // registry index
    TupleSet witness;
};

/// Player 2's certified responses. A position with `remaining` rounds to go
/// is in the region when it lies in ~^remaining (the stable relation for the
/// unbounded game, remaining = kInfinite); every response keeps the next
/// position in ~^(remaining-1).
class Strategy {
public:
    Strategy(const GameArena& arena, const BisimRelation& rel, int rounds);

    int rounds() const { return rounds_; }
    bool in_region(TupleCode a, TupleCode b) const { return in_region(a, b, rounds_); }
    bool in_region(TupleCode a, TupleCode b, int remaining) const;

    /// Response witness on the opposite side; throws "no_winning_strategy".
    TupleSet respond(TupleCode a, TupleCode b, const WitnessMove& move) const {
        return respond(a, b, move, rounds_);
    }
    TupleSet respond(TupleCode a, TupleCode b, const WitnessMove& move, int remaining) const;

    /// Response tuple inside Player 1's witness (on move.side) to a challenge
    /// `delta` taken from Player 2's witness.
    TupleCode respond_challenge(TupleCode a, TupleCode b, const WitnessMove& move, TupleCode delta) const {
        return respond_challenge(a, b, move, delta, rounds_);
    }
    TupleCode respond_challenge(TupleCode a, TupleCode b, const WitnessMove& move, TupleCode delta,
                                int remaining) const;

    /// Table over the region, or over the positions reachable from `start`.
    /// Player-1 moves are enumerated over minimal witnesses.
    nlohmann::ordered_json to_json(std::optional<std::pair<TupleCode, TupleCode>> start = std::nullopt) const;

private:
    const PairRelation& target(int remaining) const;

    const GameArena* arena_;
    const BisimRelation* rel_;
    int rounds_;
};

Strategy extract_strategy(const GameArena& arena, const BisimRelation& rel, int rounds);

class IllegalMove : public Error {
public:
    IllegalMove(std::string code, const std::string& message) : Error(std::move(code), message) {}
};

/// One interactive play. Player 1 moves; the engine answers as Player 2.
struct GameState {
    enum class Phase { Witness, Challenge, Over };

    TupleCode alpha = 0;
    TupleCode beta = 0;
    std::optional<int> rounds;  // bound for the q-round game
    int played = 0;
    Phase phase = Phase::Witness;

    // Pending round (Phase::Challenge).
    std::optional<WitnessMove> pending;
    TupleSet response;

    std::string loser;               // "Player 1" / "Player 2" once over
    std::string status;
    bool engine_forced = false;      // Player 1 can force a win from the start
};

/// Status text for a position: "Player 2 safe" or "Player 1 forced win in r round(s)".
std::string position_status(const BisimRelation& rel, TupleCode a, TupleCode b, std::optional<int> remaining);

GameState game_start(const GameArena& arena, const BisimRelation& rel, TupleCode a, TupleCode b,
                     std::optional<int> rounds);

/// Record of an applied half-round: Player 1's move and the engine's answer.
struct StepResult {
    GameState state;
    nlohmann::ordered_json player1;
    nlohmann::ordered_json engine;
};

/// Applies a witness move (phase Witness) and the engine's witness response.
StepResult game_step(const GameArena& arena, const BisimRelation& rel, const GameState& state,
                     const WitnessMove& move);
/// Applies a challenge (phase Challenge) and the engine's tuple response.
StepResult game_step(const GameArena& arena, const BisimRelation& rel, const GameState& state,
                     TupleCode challenge);

} // namespace kql
