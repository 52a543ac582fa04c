#include <kql/service.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include <httplib.h>

#include <kql/error.hpp>

namespace kql {

using json = nlohmann::ordered_json;

namespace {

constexpr std::size_t kMaxSessionPairs = std::size_t{1} << 22;

Structure structure_field(const json& request, const char* key) {
    if (!request.contains(key)) throw ValidationError("missing_field", std::string("request needs '") + key + "'");
    const json& v = request[key];
    if (v.is_string()) return load_structure(v.get<std::string>());
    if (v.is_object()) return load_structure(v.dump());
    throw ValidationError(std::string("'") + key + "' must be a structure document");
}

// "a,b" or ["a","b"].
Assignment tuple_value(const Structure& s, const json& v, int k) {
    if (v.is_string()) return parse_assignment(s, v.get<std::string>(), k);
    if (v.is_array()) {
        std::string text;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_string()) throw ValidationError("tuple entries must be element names");
            text += (i ? "," : "") + v[i].get<std::string>();
        }
        return parse_assignment(s, text, k);
    }
    throw ValidationError("a tuple is a string \"a,b\" or an array of element names");
}

std::vector<Quantifier> quantifier_field(const json& request, const Signature& sig) {
    std::vector<Quantifier> out;
    if (!request.contains("quantifiers")) {
        for (const auto& [name, arity] : sig.relations())
            if (arity == 2) out.push_back(Quantifier::diamond(name));
        if (out.empty()) out.push_back(Quantifier::some());
        return out;
    }
    const json& v = request["quantifiers"];
    if (v.is_string()) return parse_quantifier_list(v.get<std::string>());
    if (!v.is_array()) throw ValidationError("'quantifiers' must be a list");
    for (const auto& q : v) {
        if (!q.is_string()) throw ValidationError("quantifiers are strings such as \"dia[R]\"");
        out.push_back(Quantifier::parse(q.get<std::string>()));
    }
    return out;
}

std::string phase_name(GameState::Phase p) {
    switch (p) {
    case GameState::Phase::Witness: return "witness";
    case GameState::Phase::Challenge: return "challenge";
    case GameState::Phase::Over: return "over";
    }
    return "";
}

json witness_json(const Structure& s, const TupleSpace& space, const TupleSet& w) {
    json out = json::array();
    w.for_each([&](TupleCode c) { out.push_back(format_assignment(s, space.decode(c))); });
    return out;
}

json error_body(const std::string& code, const std::string& message) {
    return json{{"error", {{"code", code}, {"message", message}}}};
}

} // namespace

int http_status(const std::string& code) {
    if (code == "unknown_session") return 404;
    if (code == "game_over" || code == "wrong_turn" || code == "unknown_quantifier" || code == "not_a_witness" ||
        code == "not_in_witness")
        return 409;
    if (code == "bad_request") return 400;
    if (code == "internal") return 500;
    return 422;
}

Session::Session(std::string id, json request)
    : id_(std::move(id)), request_(std::move(request)) {
    if (!request_.is_object()) throw ValidationError("session request must be a JSON object");
    left_ = structure_field(request_, "left");
    right_ = structure_field(request_, "right");
    if (!(left_.signature() == right_.signature()))
        throw SignatureMismatch("left and right structures have different signatures");
    if (!request_.contains("k") || !request_["k"].is_number_integer())
        throw ValidationError("missing_field", "request needs an integer 'k'");
    const int k = request_["k"].get<int>();
    if (k < 1) throw ValidationError("k must be >= 1");
    auto registry = quantifier_field(request_, left_.signature());
    TupleSpace sa(left_.size(), k), sb(right_.size(), k);
    if (sa.size() * sb.size() > kMaxSessionPairs)
        throw SizeGuardError("session game has more than " + std::to_string(kMaxSessionPairs) + " positions");
    std::optional<int> rounds;
    if (request_.contains("rounds") && !request_["rounds"].is_null()) {
        if (!request_["rounds"].is_number_integer() || request_["rounds"].get<int>() < 0)
            throw ValidationError("'rounds' must be a non-negative integer");
        rounds = request_["rounds"].get<int>();
    }
    if (!request_.contains("alpha") || !request_.contains("beta"))
        throw ValidationError("missing_field", "request needs 'alpha' and 'beta'");
    TupleCode a = sa.encode(tuple_value(left_, request_["alpha"], k));
    TupleCode b = sb.encode(tuple_value(right_, request_["beta"], k));

    arena_ = std::make_unique<GameArena>(left_, right_, k, std::move(registry));
    rel_ = bisim(*arena_);
    start_ = game_start(*arena_, rel_, a, b, rounds);
    state_ = start_;
}

json Session::summary() const {
    const auto& st = start_;
    int lv = rel_.level(st.alpha, st.beta);
    json rs;
    rs["levels"] = rel_.max_level() + 1;
    rs["stabilization"] = rel_.stabilization;
    rs["stablePairs"] = rel_.stable().count();
    rs["positions"] = arena_->left_space().size() * arena_->right_space().size();
    rs["startLevel"] = lv == BisimRelation::kInfinite ? json("inf") : json(lv);
    rs["player1Forced"] = st.engine_forced;
    return json{{"id", id_}, {"status", state_.status}, {"relationSummary", rs}};
}

json Session::to_json() const {
    json out = summary();
    out["k"] = arena_->k();
    out["quantifiers"] = json::array();
    for (const auto& q : arena_->registry()) out["quantifiers"].push_back(q.to_string());
    out["mode"] = start_.rounds ? "bounded" : "unbounded";
    out["rounds"] = start_.rounds ? json(*start_.rounds) : json(nullptr);
    out["left"] = json::parse(serialize_structure(left_));
    out["right"] = json::parse(serialize_structure(right_));
    json pos;
    pos["alpha"] = format_assignment(left_, arena_->left_space().decode(state_.alpha));
    pos["beta"] = format_assignment(right_, arena_->right_space().decode(state_.beta));
    pos["phase"] = phase_name(state_.phase);
    pos["round"] = state_.played;
    if (state_.pending) {
        const auto& m = *state_.pending;
        Side other = m.side == Side::Left ? Side::Right : Side::Left;
        pos["pending"] = {{"side", side_name(m.side)},
                          {"quantifier", arena_->registry()[m.quantifier].to_string()},
                          {"witness", witness_json(arena_->structure(m.side), arena_->space(m.side), m.witness)},
                          {"responseSide", side_name(other)},
                          {"response", witness_json(arena_->structure(other), arena_->space(other), state_.response)}};
    }
    out["position"] = pos;
    out["over"] = state_.phase == GameState::Phase::Over;
    out["loser"] = state_.loser.empty() ? json(nullptr) : json(state_.loser);
    out["history"] = history_;
    return out;
}

void Session::apply(const json& move) {
    if (!move.is_object()) throw ValidationError("bad_request", "move must be a JSON object");
    if (state_.phase == GameState::Phase::Over) throw IllegalMove("game_over", "the game is over");
    StepResult res;
    if (move.contains("challenge")) {
        if (!state_.pending) throw IllegalMove("wrong_turn", "Player 1 must declare a witness first");
        Side side = state_.pending->side == Side::Left ? Side::Right : Side::Left;
        TupleCode c = arena_->space(side).encode(tuple_value(arena_->structure(side), move["challenge"], arena_->k()));
        res = game_step(*arena_, rel_, state_, c);
    } else {
        if (!move.contains("side") || !move.contains("quantifier") || !move.contains("witness"))
            throw ValidationError("missing_field", "move needs {side, quantifier, witness} or {challenge}");
        if (!move["side"].is_string() || !move["quantifier"].is_string() || !move["witness"].is_array())
            throw ValidationError("move fields have the wrong type");
        Side side = parse_side(move["side"].get<std::string>());
        auto qi = arena_->quantifier_index(Quantifier::parse(move["quantifier"].get<std::string>()));
        if (!qi) throw IllegalMove("unknown_quantifier", "quantifier is not in the session registry");
        TupleSet w = arena_->space(side).empty_set();
        for (const auto& t : move["witness"])
            w.insert(arena_->space(side).encode(tuple_value(arena_->structure(side), t, arena_->k())));
        res = game_step(*arena_, rel_, state_, WitnessMove{side, *qi, w});
    }
    state_ = std::move(res.state);
    json p1{{"player", "Player 1"}}, eng{{"player", "engine"}};
    p1.update(res.player1);
    eng.update(res.engine);
    history_.push_back(std::move(p1));
    history_.push_back(std::move(eng));
    moves_.push_back(move);
}

json Session::witnesses(const std::string& side_text, const std::string& quantifier) const {
    Side side = parse_side(side_text);
    auto qi = arena_->quantifier_index(Quantifier::parse(quantifier));
    if (!qi) throw IllegalMove("unknown_quantifier", "quantifier '" + quantifier + "' is not in the session registry");
    TupleCode at = side == Side::Left ? state_.alpha : state_.beta;
    json out = json::array();
    for (const auto& w : arena_->witnesses(side, *qi, at))
        out.push_back(witness_json(arena_->structure(side), arena_->space(side), w));
    return out;
}

json Session::snapshot() const {
    return json{{"id", id_}, {"request", request_}, {"moves", moves_}, {"status", state_.status}};
}

std::unique_ptr<Session> Session::restore(const json& snapshot) {
    auto s = std::make_unique<Session>(snapshot.at("id").get<std::string>(), snapshot.at("request"));
    for (const auto& m : snapshot.at("moves")) s->apply(m);
    if (snapshot.contains("status") && snapshot["status"] != s->state_.status)
        throw ValidationError("replay_mismatch", "replayed status differs from the snapshot");
    return s;
}

SessionStore::SessionStore(std::optional<std::string> state_dir) : dir_(std::move(state_dir)) {
    if (!dir_) return;
    std::filesystem::create_directories(*dir_);
    std::uint64_t top = 0;
    for (const auto& entry : std::filesystem::directory_iterator(*dir_)) {
        if (entry.path().extension() != ".json") continue;
        try {
            auto snap = json::parse(read_text_file(entry.path().string()));
            auto s = Session::restore(snap);
            const std::string& id = s->id();
            if (id.size() > 1 && id[0] == 's') top = std::max<std::uint64_t>(top, std::stoull(id.substr(1)));
            sessions_[id] = std::move(s);
        } catch (const std::exception& e) {
            std::cerr << "skipping snapshot " << entry.path() << ": " << e.what() << "\n";
        }
    }
    next_ = top + 1;
}

json SessionStore::create(const json& request) {
    std::string id = "s" + std::to_string(next_++);
    auto s = std::make_shared<Session>(id, request);
    json out = s->summary();
    persist(*s);
    std::unique_lock lock(map_mutex_);
    sessions_[id] = std::move(s);
    return out;
}

std::shared_ptr<Session> SessionStore::find(const std::string& id) const {
    std::shared_lock lock(map_mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error("unknown_session", "no session '" + id + "'");
    return it->second;
}

json SessionStore::get(const std::string& id) const {
    auto s = find(id);
    std::lock_guard lock(s->mutex());
    return s->to_json();
}

json SessionStore::move(const std::string& id, const json& move) {
    auto s = find(id);
    std::lock_guard lock(s->mutex());
    s->apply(move);
    persist(*s);
    return s->to_json();
}

json SessionStore::witnesses(const std::string& id, const std::string& side, const std::string& quantifier) const {
    auto s = find(id);
    std::lock_guard lock(s->mutex());
    return s->witnesses(side, quantifier);
}

std::size_t SessionStore::size() const {
    std::shared_lock lock(map_mutex_);
    return sessions_.size();
}

void SessionStore::persist(const Session& s) const {
    if (!dir_) return;
    auto path = std::filesystem::path(*dir_) / (s.id() + ".json");
    auto tmp = path;
    tmp += ".tmp";
    std::ofstream(tmp) << s.snapshot().dump(2) << "\n";
    std::filesystem::rename(tmp, path);
}

void mount_api(httplib::Server& server, SessionStore& store, const std::string& static_dir) {
    auto reply = [](httplib::Response& res, const std::function<json()>& body) {
        res.set_header("Access-Control-Allow-Origin", "*");
        try {
            res.set_content(body().dump(), "application/json");
        } catch (const Error& e) {
            res.status = http_status(e.code());
            res.set_content(error_body(e.code(), e.what()).dump(), "application/json");
        } catch (const json::exception& e) {
            res.status = 400;
            res.set_content(error_body("bad_request", e.what()).dump(), "application/json");
        } catch (const std::exception& e) {
            res.status = 500;
            res.set_content(error_body("internal", e.what()).dump(), "application/json");
        }
    };
    auto parse_body = [](const httplib::Request& req) {
        try {
            return json::parse(req.body);
        } catch (const json::exception& e) {
            throw Error("bad_request", std::string("malformed JSON body: ") + e.what());
        }
    };

    server.Post("/api/v1/session", [&store, reply, parse_body](const httplib::Request& req, httplib::Response& res) {
        reply(res, [&] {
            res.status = 201;
            return store.create(parse_body(req));
        });
    });
    server.Get(R"(/api/v1/session/([^/]+))", [&store, reply](const httplib::Request& req, httplib::Response& res) {
        reply(res, [&] { return store.get(req.matches[1]); });
    });
    server.Post(R"(/api/v1/session/([^/]+)/move)",
                [&store, reply, parse_body](const httplib::Request& req, httplib::Response& res) {
                    reply(res, [&] { return store.move(req.matches[1], parse_body(req)); });
                });
    server.Get(R"(/api/v1/session/([^/]+)/witnesses)",
               [&store, reply](const httplib::Request& req, httplib::Response& res) {
                   reply(res, [&] {
                       if (!req.has_param("side") || !req.has_param("quantifier"))
                           throw ValidationError("missing_field", "witnesses needs ?side=...&quantifier=...");
                       return store.witnesses(req.matches[1], req.get_param_value("side"),
                                              req.get_param_value("quantifier"));
                   });
               });
    server.Options(R"(/api/v1/.*)", [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Origin", "*");
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.status = 204;
    });
    if (!static_dir.empty() && !server.set_mount_point("/", static_dir))
        throw ValidationError("static directory '" + static_dir + "' does not exist");
}

} // namespace kql
