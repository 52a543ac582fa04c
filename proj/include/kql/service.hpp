#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>

#include <json.hpp>

#include <kql/game.hpp>
#include <kql/structure.hpp>

namespace httplib {
class Server;
}

namespace kql {

/// HTTP status for an error code: 404 unknown session, 409 illegal move,
/// 422 validation, 400 malformed body, 500 otherwise.
int http_status(const std::string& code);

/// One interactive game. The engine plays Player 2.
class Session {
public:
    /// request: {left, right, k, alpha, beta, quantifiers, rounds?}
    Session(std::string id, nlohmann::ordered_json request);
    Session(const Session&) = delete;
    Session& operator=(const Session&) = delete;

    const std::string& id() const { return id_; }
    std::mutex& mutex() const { return mutex_; }

    /// {id, status, relationSummary}
    nlohmann::ordered_json summary() const;
    nlohmann::ordered_json to_json() const;

    /// {side, quantifier, witness} or {challenge}; appends Player 1's move and
    /// the engine's response to the history.
    void apply(const nlohmann::ordered_json& move);

    /// Minimal witnesses at the current position.
    nlohmann::ordered_json witnesses(const std::string& side, const std::string& quantifier) const;

    const GameState& state() const { return state_; }
    const GameArena& arena() const { return *arena_; }
    const BisimRelation& relation() const { return rel_; }

    /// {id, request, moves, status}; restore() replays the moves.
    nlohmann::ordered_json snapshot() const;
    static std::unique_ptr<Session> restore(const nlohmann::ordered_json& snapshot);

private:
    std::string id_;
    nlohmann::ordered_json request_;
    Structure left_;
    Structure right_;
    std::unique_ptr<GameArena> arena_;
    BisimRelation rel_;
    GameState start_;
    GameState state_;
    nlohmann::ordered_json history_ = nlohmann::ordered_json::array();
    nlohmann::ordered_json moves_ = nlohmann::ordered_json::array();
    mutable std::mutex mutex_;
};

/// Sessions by id; mutations serialized per session. With a state directory,
/// every session is snapshotted to DIR/<id>.json and reloaded on start.
class SessionStore {
public:
    explicit SessionStore(std::optional<std::string> state_dir = std::nullopt);

    nlohmann::ordered_json create(const nlohmann::ordered_json& request);
    nlohmann::ordered_json get(const std::string& id) const;
    nlohmann::ordered_json move(const std::string& id, const nlohmann::ordered_json& move);
    nlohmann::ordered_json witnesses(const std::string& id, const std::string& side,
                                     const std::string& quantifier) const;
    std::size_t size() const;

private:
    std::shared_ptr<Session> find(const std::string& id) const;
    void persist(const Session& s) const;

    std::optional<std::string> dir_;
    mutable std::shared_mutex map_mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::atomic<std::uint64_t> next_{1};
};

/// Registers the /api/v1 routes; `static_dir` (optional) is served at /.
void mount_api(httplib::Server& server, SessionStore& store, const std::string& static_dir = "");

} // namespace kql
