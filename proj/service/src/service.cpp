#include "tamex/service.hpp"

#include <charconv>

#include "tamex/json_io.hpp"
#include "tamex/runtime_io.hpp"
#include "tamex/slicing.hpp"

namespace tamex::service {

using nlohmann::json;

namespace {

// Service-level failures that are not runtime errors.
struct HttpError {
    int status;
    std::string code;
    std::string message;
};

Response reply(int status, const json& body) { return {status, body.dump(2) + "\n"}; }

Response error_reply(int status, const std::string& code, const std::string& message) {
    return reply(status, {{"code", code}, {"message", message}});
}

json parse_body(const std::string& body) {
    if (body.empty()) return json::object();
    try {
        return parse_json_document(body);
    } catch (const SyntaxError& e) {
        throw HttpError{400, "SyntaxError", e.what()};
    }
}

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> parts;
    std::size_t i = 0;
    while (i < path.size()) {
        while (i < path.size() && path[i] == '/') ++i;
        std::size_t j = path.find('/', i);
        if (j == std::string::npos) j = path.size();
        if (j > i) parts.push_back(path.substr(i, j - i));
        i = j;
    }
    return parts;
}

std::int64_t int_param(const Request& r, const std::string& key, std::int64_t fallback) {
    auto it = r.query.find(key);
    if (it == r.query.end() || it->second.empty()) return fallback;
    std::int64_t v = 0;
    const char* b = it->second.data();
    const char* e = b + it->second.size();
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e) throw HttpError{400, "BadRequest", "'" + key + "' must be an integer"};
    return v;
}

std::string step_report(const Session& s, std::size_t taken_before, std::size_t applied) {
    json taken = json::array();
    for (std::size_t i = taken_before; i < s.taken().size(); ++i) taken.push_back(taken_to_json(s.taken()[i]));
    json need = nullptr;
    if (auto occ = s.needs_explanation()) need = occurrence_to_json(*occ);
    json report = {{"session", s.id()},
                   {"applied", applied},
                   {"time", s.now()},
                   {"taken", taken},
                   {"flags",
                    {{"novel_situation", s.flags().novel_situation},
                     {"model_update_needed", s.flags().model_update_needed}}},
                   {"belief", belief_to_json(s.automaton(), s.belief())},
                   {"needs_explanation", need}};
    return report.dump(2) + "\n";
}

}  // namespace

Service::Service(const std::filesystem::path& data_dir) {
    if (!std::filesystem::is_directory(data_dir)) return;
    std::vector<std::filesystem::path> dirs;
    for (const auto& entry : std::filesystem::directory_iterator(data_dir))
        if (entry.is_directory() && std::filesystem::exists(entry.path() / "bundle.json")) dirs.push_back(entry.path());
    std::sort(dirs.begin(), dirs.end());
    for (const auto& d : dirs) add_bundle(load_bundle(d));
}

void Service::add_bundle(Bundle bundle) {
    std::unique_lock lock(mutex_);
    if (bundles_.count(bundle.name)) throw Error("artifact '" + bundle.name + "' already exists");
    std::string name = bundle.name;
    bundles_.emplace(std::move(name), std::make_shared<const Bundle>(std::move(bundle)));
}

std::size_t Service::session_count() const {
    std::shared_lock lock(mutex_);
    return sessions_.size();
}

std::shared_ptr<const Bundle> Service::find_bundle(const std::string& name) const {
    std::shared_lock lock(mutex_);
    auto it = bundles_.find(name);
    return it == bundles_.end() ? nullptr : it->second;
}

std::shared_ptr<Service::Slot> Service::find_session(const std::string& id) const {
    std::shared_lock lock(mutex_);
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
}

Response Service::handle(const Request& request) {
    try {
        const auto parts = split_path(request.path);
        const auto& m = request.method;
        if (parts.size() == 1 && parts[0] == "artifacts") {
            if (m == "GET") return list_artifacts();
            if (m == "POST") return upload_artifact(request);
            return error_reply(405, "MethodNotAllowed", m + " " + request.path);
        }
        if (!parts.empty() && parts[0] == "sessions") {
            if (parts.size() == 1) {
                if (m == "POST") return create_session(request);
                return error_reply(405, "MethodNotAllowed", m + " " + request.path);
            }
            auto slot = find_session(parts[1]);
            if (!slot) return error_reply(404, "UnknownSession", "no session '" + parts[1] + "'");
            std::lock_guard lock(slot->mutex);
            const std::string tail = parts.size() > 2 ? parts[2] : "";
            if (parts.size() > 3) return error_reply(404, "NotFound", request.path);
            if (tail.empty() && m == "GET") return session_summary(*slot);
            if (tail == "snapshot" && m == "GET") return {200, slot->session.snapshot()};
            if (tail == "events" && m == "POST") return post_events(*slot, request);
            if (tail == "explanations" && m == "GET") return get_explanation(*slot, request);
            if (tail == "feedback" && m == "POST") return post_feedback(*slot, request);
            if (tail == "model" && m == "GET") return get_model(*slot, request);
            if (tail == "lookahead" && m == "GET") return get_lookahead(*slot, request);
        }
        return error_reply(404, "NotFound", request.method + " " + request.path);
    } catch (const HttpError& e) {
        return error_reply(e.status, e.code, e.message);
    } catch (const NotObserved& e) {
        return error_reply(422, "NotObserved", e.what());
    } catch (const HiddenForExplainee& e) {
        return error_reply(403, "HiddenForExplainee", e.what());
    } catch (const TimestampRegression& e) {
        return error_reply(409, "TimestampRegression", e.what());
    } catch (const NothingMoreToReveal& e) {
        return error_reply(409, "NothingMoreToReveal", e.what());
    } catch (const NovelSituationFrozen& e) {
        return error_reply(409, "NovelSituationFrozen", e.what());
    } catch (const UnknownNode& e) {
        return error_reply(404, "UnknownNode", e.what());
    } catch (const InvalidEvent& e) {
        return error_reply(400, "InvalidEvent", e.what());
    } catch (const SyntaxError& e) {
        return error_reply(400, "SyntaxError", e.what());
    } catch (const ProvenanceMismatch& e) {
        return error_reply(400, "ProvenanceMismatch", e.what());
    } catch (const Error& e) {
        return error_reply(400, "InvalidRequest", e.what());
    } catch (const std::exception& e) {
        return error_reply(500, "InternalError", e.what());
    }
}

Response Service::create_session(const Request& r) {
    const json body = parse_body(r.body);
    if (!body.is_object() || !body.contains("bundle") || !body["bundle"].is_string())
        throw HttpError{400, "BadRequest", "session request needs a string 'bundle'"};
    auto bundle = find_bundle(body["bundle"].get<std::string>());
    if (!bundle) throw HttpError{404, "UnknownArtifact", "no artifact '" + body["bundle"].get<std::string>() + "'"};

    ExplaineeProfile profile;
    if (body.contains("profile") && body["profile"].is_object()) {
        profile = parse_profile(body["profile"].dump());
    } else if (body.contains("profile") && body["profile"].is_string()) {
        const auto* p = bundle->find_profile(body["profile"].get<std::string>());
        if (!p) throw HttpError{404, "UnknownArtifact", "no profile '" + body["profile"].get<std::string>() + "'"};
        profile = *p;
    } else {
        throw HttpError{400, "BadRequest", "session request needs a 'profile' name or object"};
    }

    AnalyseConfig analyse = bundle->analyse;
    if (body.contains("analyse")) {
        if (!body["analyse"].is_object()) throw HttpError{400, "BadRequest", "'analyse' must be an object"};
        analyse = analyse_from_json(body["analyse"]);
    }
    SessionOptions options;
    if (body.contains("options") && body["options"].is_object())
        options.reveal_purpose_hidden = body["options"].value("reveal_purpose_hidden", false);

    PipelineResult stages = run_pipeline(*bundle, profile);
    std::string id;
    {
        std::unique_lock lock(mutex_);
        id = "s" + std::to_string(next_id_++);
    }
    try {
        Session session = Session::create(stages.em4, bundle->model, profile, analyse, options, id);
        auto slot = std::make_shared<Slot>(bundle->name, std::move(stages), std::move(session));
        std::unique_lock lock(mutex_);
        sessions_.emplace(id, std::move(slot));
    } catch (const UnknownNode& e) {
        throw HttpError{400, "BadRequest", e.what()};
    }
    json out = {{"id", id}, {"bundle", bundle->name}, {"explainee", profile.id},
                {"analyse", analyse_to_json(analyse)}};
    return reply(201, out);
}

Response Service::session_summary(Slot& slot) {
    const Session& s = slot.session;
    json out = {{"id", s.id()},
                {"bundle", slot.bundle},
                {"explainee", s.explainee()},
                {"time", s.now()},
                {"events", s.trace().size()},
                {"taken", s.taken().size()},
                {"flags",
                 {{"novel_situation", s.flags().novel_situation},
                  {"model_update_needed", s.flags().model_update_needed}}},
                {"belief", belief_to_json(s.automaton(), s.belief())},
                {"visibility", visibility_to_json(s.visibility())}};
    return reply(200, out);
}

Response Service::post_events(Slot& slot, const Request& r) {
    json body = parse_body(r.body);
    if (body.is_object() && body.contains("events")) body = body["events"];
    if (body.is_object() && body.empty()) body = json::array();
    if (!body.is_array()) throw HttpError{400, "BadRequest", "events must be a list"};
    std::vector<Event> events;
    for (const auto& e : body) events.push_back(event_from_json(e));

    // A batch is applied atomically: on error the session is left untouched.
    Session working = slot.session;
    const std::size_t before = working.taken().size();
    for (const auto& e : events) working.step(e);
    slot.session = std::move(working);
    return {200, step_report(slot.session, before, events.size())};
}

Response Service::get_explanation(Slot& slot, const Request& r) {
    auto it = r.query.find("observable");
    if (it == r.query.end() || it->second.empty())
        throw HttpError{400, "BadRequest", "query parameter 'observable' is required"};
    const auto selector = parse_observable_selector(it->second);
    const std::int64_t occurrence = int_param(r, "occurrence", 0);
    if (occurrence < 0) throw HttpError{400, "BadRequest", "'occurrence' must be >= 0"};
    ExplanationPath path = slot.session.build_explanation(selector, static_cast<std::size_t>(occurrence));
    if (auto v = r.query.find("verbosity"); v != r.query.end() && !v->second.empty())
        render_explanation(path, parse_verbosity(v->second));
    return reply(200, path_to_json(path));
}

Response Service::post_feedback(Slot& slot, const Request& r) {
    const Feedback feedback = feedback_from_json(parse_body(r.body));
    VisibilitySummary summary = slot.session.apply_feedback(feedback);
    json out = visibility_to_json(summary);
    out["outcome"] = slot.session.feedback_log().back().outcome;
    return reply(200, out);
}

Response Service::get_model(Slot& slot, const Request& r) {
    auto it = r.query.find("stage");
    const Stage stage = it == r.query.end() || it->second.empty() ? Stage::EM5 : parse_stage(it->second);
    const ExplanationModel* em = nullptr;
    switch (stage) {
        case Stage::EM1:
            em = &slot.stages.em1;
            break;
        case Stage::EM2:
            em = &slot.stages.em2;
            break;
        case Stage::EM3:
            em = &slot.stages.em3;
            break;
        case Stage::EM4:
            em = &slot.stages.em4;
            break;
        case Stage::EM5:
            em = &slot.session.em5();
            break;
    }
    json out = {{"stage", to_string(stage)},
                {"visible", em_to_json(visible_view(*em))},
                {"overlay", em_to_json(slot.session.em5())},
                {"visibility", visibility_to_json(slot.session.visibility())}};
    return reply(200, out);
}

Response Service::get_lookahead(Slot& slot, const Request& r) {
    const std::int64_t horizon = int_param(r, "horizon", 10);
    if (horizon < 0) throw HttpError{400, "BadRequest", "'horizon' must be >= 0"};
    auto entries = slot.session.lookahead(horizon);
    return reply(200, lookahead_to_json(entries, slot.session.now(), horizon));
}

Response Service::list_artifacts() {
    json list = json::array();
    std::shared_lock lock(mutex_);
    for (const auto& [name, b] : bundles_) list.push_back(bundle_summary(*b));
    return reply(200, {{"artifacts", list}});
}

Response Service::upload_artifact(const Request& r) {
    Bundle bundle = bundle_from_json(parse_body(r.body));
    if (find_bundle(bundle.name)) throw HttpError{409, "DuplicateArtifact", "artifact '" + bundle.name + "' exists"};
    json summary = bundle_summary(bundle);
    try {
        add_bundle(std::move(bundle));
    } catch (const Error& e) {
        throw HttpError{409, "DuplicateArtifact", e.what()};
    }
    return reply(201, summary);
}

}  // namespace tamex::service
