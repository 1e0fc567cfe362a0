#include "tamex/model_io.hpp"

#include <cstdio>
#include <set>

#include <json.hpp>

#include "tamex/error.hpp"

namespace tamex {

using nlohmann::json;

namespace {

int line_of_offset(std::string_view text, std::size_t offset) {
    offset = std::min(offset, text.size());
    int line = 1;
    for (std::size_t i = 0; i < offset; ++i)
        if (text[i] == '\n') ++line;
    return line;
}

// Best-effort source line for an element: first occurrence of the quoted token.
int line_of(std::string_view text, std::string_view token) {
    if (token.empty()) return 0;
    std::string quoted = "\"" + std::string(token) + "\"";
    auto pos = text.find(quoted);
    if (pos == std::string_view::npos) return 0;
    return line_of_offset(text, pos);
}

class ModelReader {
public:
    explicit ModelReader(std::string_view text) : text_(text) {}

    TimedAutomaton read() {
        json doc;
        try {
            doc = json::parse(text_);
        } catch (const json::parse_error& e) {
            throw SyntaxError(line_of_offset(text_, e.byte == 0 ? 0 : e.byte - 1), "malformed JSON");
        }
        if (!doc.is_object()) throw SyntaxError(1, "model document must be a JSON object");

        TimedAutomaton ta;
        ta.name = required_string(doc, "name", "model");
        for (const auto& c : array(doc, "clocks")) ta.clocks.push_back(as_string(c, "clock"));
        for (const auto& v : array(doc, "variables")) ta.variables.push_back(variable(v));
        for (const auto& c : array(doc, "channels")) ta.channels.push_back(channel(c));
        for (const auto& p : array(doc, "env_predicates")) ta.env_predicates.push_back(env_predicate(p));
        for (const auto& c : array(doc, "constants")) ta.constants.push_back(constant(c));
        for (const auto& l : array(doc, "locations")) ta.locations.push_back(location(l));
        for (const auto& t : array(doc, "transitions")) ta.transitions.push_back(transition(t));
        if (doc.contains("initial_location") && doc["initial_location"].is_string())
            ta.initial_location = doc["initial_location"].get<std::string>();
        if (doc.contains("engine")) {
            const auto& engine = doc["engine"];
            if (!engine.is_object()) fail("engine", "'engine' must be an object");
            for (const auto& w : array(engine, "waiting_rules")) {
                WaitingRule rule;
                rule.location = required_string(w, "location", "waiting rule");
                rule.variable = required_string(w, "var", "waiting rule");
                rule.increment = w.value("increment", std::int64_t{1});
                ta.waiting_rules.push_back(std::move(rule));
            }
        }
        return ta;
    }

private:
    [[noreturn]] void fail(std::string_view near, const std::string& message) const {
        throw SyntaxError(line_of(text_, near), message);
    }

    const json& array(const json& obj, const char* key) const {
        static const json empty = json::array();
        if (!obj.contains(key)) return empty;
        const auto& a = obj.at(key);
        if (!a.is_array()) fail(key, std::string("'") + key + "' must be an array");
        return a;
    }

    std::string as_string(const json& j, const char* what) const {
        if (!j.is_string()) fail(what, std::string(what) + " must be a string");
        return j.get<std::string>();
    }

    std::string required_string(const json& obj, const char* key, const char* what) const {
        if (!obj.is_object() || !obj.contains(key) || !obj.at(key).is_string())
            fail(key, std::string(what) + " requires string field '" + key + "'");
        return obj.at(key).get<std::string>();
    }

    std::int64_t integer(const json& j, std::string_view near) const {
        if (j.is_boolean()) return j.get<bool>() ? 1 : 0;
        if (!j.is_number_integer()) fail(near, "expected an integer");
        return j.get<std::int64_t>();
    }

    Expr expr(const json& j, std::string_view near) const {
        if (j.is_number_integer()) return Expr::literal(j.get<std::int64_t>());
        if (!j.is_string()) fail(near, "expected an expression string");
        try {
            return parse_expr(j.get<std::string>());
        } catch (const SyntaxError& e) {
            throw SyntaxError(line_of(text_, j.get<std::string>()), e.what());
        }
    }

    Comparison comparison(const json& j, std::string_view near) const {
        if (!j.is_string()) fail(near, "expected a comparison string");
        try {
            return parse_comparison(j.get<std::string>());
        } catch (const SyntaxError& e) {
            throw SyntaxError(line_of(text_, j.get<std::string>()), e.what());
        }
    }

    VariableDecl variable(const json& v) const {
        VariableDecl d;
        d.name = required_string(v, "name", "variable");
        auto domain = v.value("domain", std::string("int"));
        if (domain == "int")
            d.domain = Domain::Int;
        else if (domain == "bool")
            d.domain = Domain::Bool;
        else
            fail(d.name, "unknown variable domain '" + domain + "'");
        if (v.contains("init")) d.initial = integer(v["init"], d.name);
        return d;
    }

    ChannelDecl channel(const json& c) const {
        if (c.is_string()) return {c.get<std::string>(), 1};
        ChannelDecl d;
        d.name = required_string(c, "name", "channel");
        d.arity = static_cast<int>(c.value("arity", 1));
        return d;
    }

    EnvPredicateDecl env_predicate(const json& p) const {
        if (p.is_string()) return {p.get<std::string>(), ""};
        EnvPredicateDecl d;
        d.name = required_string(p, "name", "env predicate");
        d.display = p.value("display", std::string());
        return d;
    }

    ConstantDecl constant(const json& c) const {
        ConstantDecl d;
        d.name = required_string(c, "name", "constant");
        if (!c.contains("value")) fail(d.name, "constant '" + d.name + "' has no value");
        d.value = integer(c["value"], d.name);
        return d;
    }

    ClockConstraint clock_constraint(const json& a, std::string_view near) const {
        ClockConstraint cc;
        cc.clock = required_string(a, "clock", "clock constraint");
        try {
            cc.rel = parse_relation(required_string(a, "rel", "clock constraint"));
        } catch (const SyntaxError& e) {
            fail(near, e.what());
        }
        if (!a.contains("bound")) fail(near, "clock constraint requires 'bound'");
        cc.bound = expr(a["bound"], near);
        if (!cc.bound.is_literal() && !cc.bound.is_symbol())
            fail(near, "clock bound must be a literal or a constant");
        return cc;
    }

    GuardAtom guard_atom(const json& a, std::string_view near) const {
        auto kind = required_string(a, "kind", "guard atom");
        if (kind == "clock") return clock_constraint(a, near);
        if (kind == "env") {
            EnvCondition env;
            env.predicate = required_string(a, "pred", "env guard");
            env.negated = a.value("negated", false);
            return env;
        }
        if (kind == "data") {
            if (!a.contains("expr")) fail(near, "data guard requires 'expr'");
            return VarComparison{comparison(a["expr"], near)};
        }
        fail(near, "unknown guard kind '" + kind + "'");
    }

    Location location(const json& l) const {
        Location loc;
        loc.id = required_string(l, "id", "location");
        loc.name = l.value("name", loc.id);
        if (l.contains("invariant")) {
            const auto& inv = l["invariant"];
            if (inv.is_string() && inv.get<std::string>() == "true") return loc;
            for (const auto& a : array(l, "invariant")) {
                if (required_string(a, "kind", "invariant atom") != "clock")
                    fail(loc.id, "invariants may only contain clock constraints");
                loc.invariant.push_back(clock_constraint(a, loc.id));
            }
        }
        return loc;
    }

    Sync sync(const json& s, std::string_view near) const {
        auto kind = required_string(s, "kind", "sync");
        if (kind == "output") {
            OutputSync out;
            out.channel = required_string(s, "chan", "output sync");
            if (s.contains("payload")) out.payload = expr(s["payload"], near);
            return out;
        }
        if (kind == "input") {
            InputSync in;
            in.channel = required_string(s, "chan", "input sync");
            in.variable = required_string(s, "var", "input sync");
            if (!s.contains("guard")) fail(near, "input sync requires a reception guard");
            const auto& g = s["guard"];
            if (g.is_object()) {
                if (g.value("kind", std::string()) != "recv_guard")
                    fail(near, "reception guard must have kind 'recv_guard'");
                if (!g.contains("expr")) fail(near, "reception guard requires 'expr'");
                in.predicate = comparison(g["expr"], near);
            } else {
                in.predicate = comparison(g, near);
            }
            return in;
        }
        fail(near, "unknown sync kind '" + kind + "'");
    }

    Action action(const json& a, std::string_view near) const {
        auto kind = required_string(a, "kind", "action");
        if (kind == "ctrl") return ControllerAction{required_string(a, "name", "controller action")};
        if (kind == "update") {
            VarUpdate up;
            up.variable = required_string(a, "var", "update");
            if (!a.contains("expr")) fail(near, "update requires 'expr'");
            up.value = expr(a["expr"], near);
            return up;
        }
        if (kind == "reset") return ClockReset{required_string(a, "clock", "reset")};
        fail(near, "unknown action kind '" + kind + "'");
    }

    Transition transition(const json& t) const {
        Transition tr;
        tr.id = required_string(t, "id", "transition");
        tr.source = required_string(t, "source", "transition");
        tr.target = required_string(t, "target", "transition");
        if (t.contains("guard")) {
            const auto& g = t["guard"];
            if (g.is_string()) {
                if (g.get<std::string>() != "true") fail(tr.id, "a string guard must be \"true\"");
            } else {
                for (const auto& a : array(t, "guard")) tr.guard.push_back(guard_atom(a, tr.id));
            }
        }
        if (t.contains("sync") && !t["sync"].is_null()) tr.sync = sync(t["sync"], tr.id);
        for (const auto& a : array(t, "actions")) tr.actions.push_back(action(a, tr.id));
        return tr;
    }

    std::string_view text_;
};

json bound_json(const Expr& bound) {
    if (bound.is_literal()) return bound.value;
    return to_string(bound);
}

json clock_json(const ClockConstraint& cc) {
    return {{"kind", "clock"}, {"clock", cc.clock}, {"rel", to_string(cc.rel)}, {"bound", bound_json(cc.bound)}};
}

json model_json(const TimedAutomaton& ta) {
    json doc = json::object();
    doc["name"] = ta.name;
    doc["clocks"] = ta.clocks;
    doc["variables"] = json::array();
    for (const auto& v : ta.variables)
        doc["variables"].push_back(
            {{"name", v.name}, {"domain", v.domain == Domain::Int ? "int" : "bool"}, {"init", v.initial}});
    doc["channels"] = json::array();
    for (const auto& c : ta.channels) doc["channels"].push_back({{"name", c.name}, {"arity", c.arity}});
    doc["env_predicates"] = json::array();
    for (const auto& p : ta.env_predicates) {
        json e = {{"name", p.name}};
        if (!p.display.empty()) e["display"] = p.display;
        doc["env_predicates"].push_back(e);
    }
    doc["constants"] = json::array();
    for (const auto& c : ta.constants) doc["constants"].push_back({{"name", c.name}, {"value", c.value}});
    doc["locations"] = json::array();
    for (const auto& l : ta.locations) {
        json inv = json::array();
        for (const auto& cc : l.invariant) inv.push_back(clock_json(cc));
        doc["locations"].push_back({{"id", l.id}, {"name", l.name}, {"invariant", inv}});
    }
    doc["transitions"] = json::array();
    for (const auto& t : ta.transitions) {
        json tj = {{"id", t.id}, {"source", t.source}, {"target", t.target}};
        if (t.guard.empty()) {
            tj["guard"] = "true";
        } else {
            json g = json::array();
            for (const auto& a : t.guard) {
                if (const auto* cc = std::get_if<ClockConstraint>(&a))
                    g.push_back(clock_json(*cc));
                else if (const auto* env = std::get_if<EnvCondition>(&a))
                    g.push_back({{"kind", "env"}, {"pred", env->predicate}, {"negated", env->negated}});
                else
                    g.push_back({{"kind", "data"}, {"expr", to_string(std::get<VarComparison>(a).comparison)}});
            }
            tj["guard"] = g;
        }
        if (const auto* out = t.output())
            tj["sync"] = {{"kind", "output"}, {"chan", out->channel}, {"payload", to_string(out->payload)}};
        else if (const auto* in = t.input())
            tj["sync"] = {{"kind", "input"},
                          {"chan", in->channel},
                          {"var", in->variable},
                          {"guard", {{"kind", "recv_guard"}, {"expr", to_string(in->predicate)}}}};
        json acts = json::array();
        for (const auto& a : t.actions) {
            if (const auto* c = std::get_if<ControllerAction>(&a))
                acts.push_back({{"kind", "ctrl"}, {"name", c->name}});
            else if (const auto* u = std::get_if<VarUpdate>(&a))
                acts.push_back({{"kind", "update"}, {"var", u->variable}, {"expr", to_string(u->value)}});
            else
                acts.push_back({{"kind", "reset"}, {"clock", std::get<ClockReset>(a).clock}});
        }
        tj["actions"] = acts;
        doc["transitions"].push_back(tj);
    }
    doc["initial_location"] = ta.initial_location;
    if (!ta.waiting_rules.empty()) {
        json rules = json::array();
        for (const auto& w : ta.waiting_rules)
            rules.push_back({{"location", w.location}, {"var", w.variable}, {"increment", w.increment}});
        doc["engine"] = {{"waiting_rules", rules}};
    }
    return doc;
}

}  // namespace

void check_model(const TimedAutomaton& ta) {
    std::set<std::string> symbols;
    auto declare = [&symbols](const std::string& n) {
        if (!symbols.insert(n).second) throw DuplicateId(n);
    };
    for (const auto& c : ta.clocks) declare(c);
    for (const auto& v : ta.variables) declare(v.name);
    for (const auto& c : ta.channels) declare(c.name);
    for (const auto& p : ta.env_predicates) declare(p.name);
    for (const auto& c : ta.constants) declare(c.name);

    std::set<std::string> location_ids;
    for (const auto& l : ta.locations)
        if (!location_ids.insert(l.id).second) throw DuplicateId(l.id);
    std::set<std::string> transition_ids;
    for (const auto& t : ta.transitions)
        if (!transition_ids.insert(t.id).second) throw DuplicateId(t.id);

    if (ta.locations.empty() || !ta.find_location(ta.initial_location)) throw MissingInitialLocation();

    auto require_clock = [&ta](const std::string& c, const std::string& site) {
        if (!ta.is_clock(c)) throw UndeclaredSymbol(c, site);
    };
    auto require_data = [&ta](const Expr& e, const std::string& site, bool allow_variables) {
        std::set<std::string> used;
        collect_symbols(e, used);
        for (const auto& s : used) {
            if (ta.find_constant(s)) continue;
            if (allow_variables && ta.find_variable(s)) continue;
            throw UndeclaredSymbol(s, site);
        }
    };
    auto check_clock_constraint = [&](const ClockConstraint& cc, const std::string& site) {
        require_clock(cc.clock, site);
        require_data(cc.bound, site, false);
    };

    for (const auto& l : ta.locations)
        for (const auto& cc : l.invariant) check_clock_constraint(cc, "invariant of location " + l.id);

    for (const auto& t : ta.transitions) {
        const std::string site = "transition " + t.id;
        if (!ta.find_location(t.source)) throw UndeclaredSymbol(t.source, site);
        if (!ta.find_location(t.target)) throw UndeclaredSymbol(t.target, site);
        for (const auto& g : t.guard) {
            if (const auto* cc = std::get_if<ClockConstraint>(&g)) {
                check_clock_constraint(*cc, site);
            } else if (const auto* env = std::get_if<EnvCondition>(&g)) {
                if (!ta.find_env_predicate(env->predicate)) throw UndeclaredSymbol(env->predicate, site);
            } else {
                const auto& cmp = std::get<VarComparison>(g).comparison;
                require_data(cmp.lhs, site, true);
                require_data(cmp.rhs, site, true);
            }
        }
        if (const auto* out = t.output()) {
            if (!ta.find_channel(out->channel)) throw UndeclaredSymbol(out->channel, site);
            require_data(out->payload, site, true);
        } else if (const auto* in = t.input()) {
            if (!ta.find_channel(in->channel)) throw UndeclaredSymbol(in->channel, site);
            if (!ta.find_variable(in->variable)) throw UndeclaredSymbol(in->variable, site);
            require_data(in->predicate.lhs, site, true);
            require_data(in->predicate.rhs, site, true);
        }
        for (const auto& a : t.actions) {
            if (const auto* u = std::get_if<VarUpdate>(&a)) {
                if (!ta.find_variable(u->variable)) throw UndeclaredSymbol(u->variable, site);
                require_data(u->value, site, true);
            } else if (const auto* r = std::get_if<ClockReset>(&a)) {
                require_clock(r->clock, site);
            }
        }
    }
    for (const auto& w : ta.waiting_rules) {
        if (!ta.find_location(w.location)) throw UndeclaredSymbol(w.location, "waiting rule");
        if (!ta.find_variable(w.variable)) throw UndeclaredSymbol(w.variable, "waiting rule");
    }
}

TimedAutomaton parse_model(std::string_view source_text) {
    TimedAutomaton ta = ModelReader(source_text).read();
    check_model(ta);
    return ta;
}

std::string serialize_model(const TimedAutomaton& ta) { return model_json(ta).dump(2) + "\n"; }

std::string model_digest(const TimedAutomaton& ta) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : model_json(ta).dump()) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace tamex
