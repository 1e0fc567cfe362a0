#include "tamex/runtime_io.hpp"

#include <sstream>

#include "tamex/json_io.hpp"

namespace tamex {

using nlohmann::json;

namespace {

std::string reason_kind_name(ReasonKind k) {
    switch (k) {
        case ReasonKind::Guard:
            return "guard";
        case ReasonKind::Invariant:
            return "invariant";
        case ReasonKind::Reception:
            return "reception";
    }
    return "guard";
}

ObservableKey key_from_text(const std::string& text) {
    auto sel = parse_observable_selector(text);
    if (!sel.kind) throw SyntaxError(0, "observable '" + text + "' needs a kind prefix such as ctrl:");
    return {*sel.kind, sel.name};
}

json reason_to_json(const ReasonInstance& r) {
    json j = {{"element_id", r.element_id}, {"kind", reason_kind_name(r.kind)}, {"text", r.text},
              {"display", r.display},       {"values", r.values},                {"holds", r.holds},
              {"visible", r.visible}};
    if (r.annotation) j["snippet"] = r.annotation->snippet;
    return j;
}

}  // namespace

json event_to_json(const Event& e) {
    json j = {{"t", e.timestamp}};
    switch (e.kind) {
        case Event::Kind::EnvUpdate:
            j["kind"] = "env";
            j["pred"] = e.name;
            j["val"] = e.flag;
            break;
        case Event::Kind::Broadcast:
            j["kind"] = "broadcast";
            j["chan"] = e.name;
            j["val"] = e.value;
            break;
        case Event::Kind::TimeAdvance:
            j["kind"] = "advance";
            j["delta"] = e.value;
            break;
        case Event::Kind::ActionObserved:
            j["kind"] = "observed";
            j["observable"] = selector_text({e.observable_kind, e.name});
            break;
    }
    return j;
}

Event event_from_json(const json& j) {
    if (!j.is_object()) throw SyntaxError(0, "an event must be a JSON object");
    try {
        const std::int64_t t = j.at("t").get<std::int64_t>();
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "env") return Event::env(t, j.at("pred").get<std::string>(), j.at("val").get<bool>());
        if (kind == "broadcast")
            return Event::broadcast(t, j.at("chan").get<std::string>(), j.at("val").get<std::int64_t>());
        if (kind == "advance") return Event::advance(t, j.at("delta").get<std::int64_t>());
        if (kind == "observed") return Event::observed(t, key_from_text(j.at("observable").get<std::string>()));
        throw SyntaxError(0, "unknown event kind '" + kind + "'");
    } catch (const json::exception& e) {
        throw SyntaxError(0, std::string("malformed event: ") + e.what());
    }
}

std::vector<Event> parse_trace(std::string_view text) {
    std::vector<Event> out;
    std::istringstream in{std::string(text)};
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        try {
            json j = json::parse(line);
            out.push_back(event_from_json(j));
        } catch (const json::parse_error& e) {
            throw SyntaxError(number, e.what());
        } catch (const SyntaxError& e) {
            throw SyntaxError(number, e.what());
        }
        if (out.size() == 1 && out.front().timestamp != 0)
            throw SyntaxError(number, "the first event of a trace must be at time 0");
        if (out.size() > 1 && out.back().timestamp < out[out.size() - 2].timestamp)
            throw SyntaxError(number, "timestamps must not decrease");
    }
    return out;
}

std::string serialize_trace(const std::vector<Event>& events) {
    std::string out;
    for (const auto& e : events) out += event_to_json(e).dump() + "\n";
    return out;
}

json taken_to_json(const TakenTransition& t) {
    json emitted = json::array();
    for (const auto& e : t.emitted) {
        json o = {{"observable", selector_text(e.key)}, {"display", display_name(e.key)}};
        if (e.payload) o["payload"] = *e.payload;
        emitted.push_back(o);
    }
    return {{"t", t.timestamp}, {"transition", t.transition}, {"valuation", t.valuation}, {"emitted", emitted}};
}

TakenTransition taken_from_json(const json& j) {
    TakenTransition t;
    t.timestamp = j.at("t").get<std::int64_t>();
    t.transition = j.at("transition").get<std::string>();
    t.valuation = j.at("valuation").get<std::map<std::string, std::int64_t>>();
    for (const auto& e : j.at("emitted")) {
        EmittedObservable o{key_from_text(e.at("observable").get<std::string>()), std::nullopt};
        if (e.contains("payload")) o.payload = e["payload"].get<std::int64_t>();
        t.emitted.push_back(o);
    }
    return t;
}

json configuration_to_json(const TimedAutomaton& ta, const Configuration& c) {
    json clocks = json::object(), vars = json::object();
    for (std::size_t i = 0; i < ta.clocks.size() && i < c.clocks.size(); ++i) clocks[ta.clocks[i]] = c.clocks[i];
    for (std::size_t i = 0; i < ta.variables.size() && i < c.variables.size(); ++i)
        vars[ta.variables[i].name] = c.variables[i];
    json j = {{"location", c.location}, {"clocks", clocks}, {"variables", vars}};
    if (const Location* l = ta.find_location(c.location)) j["phase"] = l->name;
    return j;
}

Configuration configuration_from_json(const TimedAutomaton& ta, const json& j) {
    Configuration c = initial_configuration(ta);
    c.location = j.at("location").get<std::string>();
    const auto& clocks = j.at("clocks");
    for (std::size_t i = 0; i < ta.clocks.size(); ++i) c.clocks[i] = clocks.at(ta.clocks[i]).get<std::int64_t>();
    const auto& vars = j.at("variables");
    for (std::size_t i = 0; i < ta.variables.size(); ++i)
        c.variables[i] = vars.at(ta.variables[i].name).get<std::int64_t>();
    return c;
}

json belief_to_json(const TimedAutomaton& ta, const BeliefState& b) {
    json configs = json::array();
    for (const auto& c : b.configurations) configs.push_back(configuration_to_json(ta, c));
    return {{"time", b.time}, {"configurations", configs}};
}

json analyse_to_json(const AnalyseConfig& a) {
    json triggers = json::array();
    for (const auto& t : a.triggers) triggers.push_back(to_string(t));
    return {{"triggers", triggers}, {"always_on", a.always_on}};
}

AnalyseConfig analyse_from_json(const json& j) {
    AnalyseConfig a;
    for (const auto& t : j.value("triggers", json::array())) a.triggers.push_back(parse_observable_selector(t.get<std::string>()));
    a.always_on = j.value("always_on", false);
    return a;
}

json feedback_record_to_json(const FeedbackRecord& f) {
    json j = {{"t", f.time}, {"kind", f.kind}, {"outcome", f.outcome}};
    if (!f.target.empty()) j["target"] = f.target;
    if (f.helpful) j["helpful"] = *f.helpful;
    return j;
}

FeedbackRecord feedback_record_from_json(const json& j) {
    FeedbackRecord f;
    f.time = j.at("t").get<std::int64_t>();
    f.kind = j.at("kind").get<std::string>();
    f.outcome = j.value("outcome", std::string());
    f.target = j.value("target", std::string());
    if (j.contains("helpful")) f.helpful = j["helpful"].get<bool>();
    return f;
}

Feedback feedback_from_json(const json& j) {
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
        throw SyntaxError(0, "feedback needs a string 'kind'");
    const auto kind = j["kind"].get<std::string>();
    auto target = [&j]() {
        if (!j.contains("target") || !j["target"].is_string())
            throw SyntaxError(0, "feedback of this kind needs a string 'target'");
        return parse_observable_selector(j["target"].get<std::string>());
    };
    if (kind == "helpful") {
        if (!j.contains("value") || !j["value"].is_boolean()) throw SyntaxError(0, "helpful feedback needs a boolean 'value'");
        return Feedback::rating(j["value"].get<bool>());
    }
    if (kind == "more_detail") return Feedback::more_detail(target());
    if (kind == "hide_branch") return Feedback::hide_branch(target());
    throw SyntaxError(0, "unknown feedback kind '" + kind + "'");
}

json occurrence_to_json(const Occurrence& o) {
    return {{"observable", selector_text(o.observable)},
            {"display", display_name(o.observable)},
            {"t", o.timestamp},
            {"transition", o.transition},
            {"taken_index", o.taken_index}};
}

json path_to_json(const ExplanationPath& p) {
    json reasons = json::array();
    for (const auto& r : p.reasons) reasons.push_back(reason_to_json(r));
    json chain = json::array();
    for (const auto& s : p.back_chain) {
        json obs = json::array();
        for (const auto& k : s.observables) obs.push_back(selector_text(k));
        json rs = json::array();
        for (const auto& r : s.reasons) rs.push_back(reason_to_json(r));
        chain.push_back({{"t", s.timestamp}, {"transition", s.transition}, {"observables", obs}, {"reasons", rs}});
    }
    json j = {{"observable", selector_text(p.observable)},
              {"display", display_name(p.observable)},
              {"occurrence", {{"t", p.timestamp}, {"transition", p.transition}}},
              {"cause_group", p.cause_group},
              {"reasons", reasons},
              {"back_chain", chain},
              {"rendered_how", p.rendered_how},
              {"rendered_why", p.rendered_why},
              {"rendered", p.rendered}};
    if (p.how_annotation) j["snippet"] = p.how_annotation->snippet;
    return j;
}

json lookahead_to_json(const std::vector<LookaheadEntry>& entries, std::int64_t now, std::int64_t horizon) {
    json list = json::array();
    for (const auto& e : entries)
        list.push_back({{"observable", selector_text(e.observable)},
                        {"display", display_name(e.observable)},
                        {"earliest", e.earliest},
                        {"offset", e.earliest - now},
                        {"witness", e.witness}});
    return {{"now", now},
            {"horizon", horizon},
            {"assumptions", "environment predicates frozen at their current values; no further broadcasts"},
            {"entries", list}};
}

json visibility_to_json(const VisibilitySummary& v) {
    return {{"visible_nodes", v.visible_nodes},
            {"visible_groups", v.visible_groups},
            {"visible_reasons", v.visible_reasons},
            {"reveal_depth", v.reveal_depth}};
}

}  // namespace tamex
