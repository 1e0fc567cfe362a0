#include "tamex/runtime.hpp"

#include <algorithm>
#include <unordered_map>

#include "tamex/annotation.hpp"
#include "tamex/extraction.hpp"
#include "tamex/json_io.hpp"
#include "tamex/model_io.hpp"
#include "tamex/runtime_io.hpp"

namespace tamex {

using nlohmann::json;

Event Event::env(std::int64_t t, std::string pred, bool value) {
    Event e;
    e.timestamp = t;
    e.kind = Kind::EnvUpdate;
    e.name = std::move(pred);
    e.flag = value;
    return e;
}

Event Event::broadcast(std::int64_t t, std::string chan, std::int64_t payload) {
    Event e;
    e.timestamp = t;
    e.kind = Kind::Broadcast;
    e.name = std::move(chan);
    e.value = payload;
    return e;
}

Event Event::advance(std::int64_t t, std::int64_t delta) {
    Event e;
    e.timestamp = t;
    e.kind = Kind::TimeAdvance;
    e.value = delta;
    return e;
}

Event Event::observed(std::int64_t t, ObservableKey key) {
    Event e;
    e.timestamp = t;
    e.kind = Kind::ActionObserved;
    e.name = std::move(key.name);
    e.observable_kind = key.kind;
    return e;
}

Feedback Feedback::rating(bool helpful) {
    Feedback f;
    f.kind = Kind::Helpful;
    f.helpful = helpful;
    return f;
}

Feedback Feedback::more_detail(ObservableSelector target) {
    Feedback f;
    f.kind = Kind::MoreDetail;
    f.target = std::move(target);
    return f;
}

Feedback Feedback::hide_branch(ObservableSelector target) {
    Feedback f;
    f.kind = Kind::HideBranch;
    f.target = std::move(target);
    return f;
}

Configuration initial_configuration(const TimedAutomaton& ta) {
    Configuration c;
    c.location = ta.initial_location;
    c.clocks.assign(ta.clocks.size(), 0);
    for (const auto& v : ta.variables) c.variables.push_back(v.initial);
    return c;
}

namespace {

Resolver map_resolver(const std::map<std::string, std::int64_t>& valuation) {
    return [&valuation](std::string_view name) -> std::int64_t {
        auto it = valuation.find(std::string(name));
        if (it == valuation.end()) throw Error("no recorded value for '" + std::string(name) + "'");
        return it->second;
    };
}

}  // namespace

bool atom_holds(const GuardAtom& atom, const std::map<std::string, std::int64_t>& valuation) {
    auto resolve = map_resolver(valuation);
    if (const auto* cc = std::get_if<ClockConstraint>(&atom))
        return holds(cc->rel, resolve(cc->clock), evaluate(cc->bound, resolve));
    if (const auto* env = std::get_if<EnvCondition>(&atom)) return (resolve(env->predicate) != 0) != env->negated;
    return evaluate(std::get<VarComparison>(atom).comparison, resolve);
}

namespace {

using Env = std::vector<char>;

struct Fired {
    Configuration next;
    TakenTransition record;
};

// Compiled view of an automaton for fast stepping.
class Engine {
public:
    Engine(const TimedAutomaton& ta, const ExtractionConfig& config) : ta_(ta), config_(config) {
        for (std::size_t i = 0; i < ta.clocks.size(); ++i) slots_[ta.clocks[i]] = {Slot::Clock, i, 0};
        for (std::size_t i = 0; i < ta.variables.size(); ++i) slots_[ta.variables[i].name] = {Slot::Var, i, 0};
        for (const auto& c : ta.constants) slots_[c.name] = {Slot::Const, 0, c.value};
        for (std::size_t i = 0; i < ta.env_predicates.size(); ++i)
            slots_[ta.env_predicates[i].name] = {Slot::Env, i, 0};
        for (const auto& t : ta.transitions) outgoing_[t.source].push_back(&t);
        for (const auto& l : ta.locations) invariants_[l.id] = &l.invariant;
        for (const auto& r : ta.waiting_rules) rules_[r.location].push_back(&r);
        cap_ = ta.max_clock_bound() + 1;
    }

    Env environment(const std::map<std::string, bool>& env) const {
        Env out(ta_.env_predicates.size(), 0);
        for (std::size_t i = 0; i < out.size(); ++i) {
            auto it = env.find(ta_.env_predicates[i].name);
            out[i] = it != env.end() && it->second;
        }
        return out;
    }

    std::optional<Fired> fire(const Transition& t, const Configuration& c, const Env& env, std::int64_t now,
                              std::optional<std::int64_t> payload) const {
        Configuration work = c;
        if (const auto* in = t.input()) work.variables[slots_.at(in->variable).index] = *payload;
        auto resolve = resolver(work, env);
        for (const auto& atom : t.guard)
            if (!holds_atom(atom, resolve)) return std::nullopt;
        if (const auto* in = t.input())
            if (!evaluate(in->predicate, resolve)) return std::nullopt;

        Fired f;
        f.record.timestamp = now;
        f.record.transition = t.id;
        f.record.valuation = valuation(work, env);
        std::optional<std::int64_t> out_payload;
        if (const auto* out = t.output()) out_payload = evaluate(out->payload, resolve);
        for (const auto& [key, source] : transition_observables(t, config_))
            f.record.emitted.push_back(
                {key, key.kind == ObservableKind::CommOutput ? out_payload : std::optional<std::int64_t>{}});

        for (const auto& a : t.actions) {
            if (const auto* u = std::get_if<VarUpdate>(&a)) {
                std::int64_t v = evaluate(u->value, resolver(work, env));
                work.variables[slots_.at(u->variable).index] = v;
            } else if (const auto* r = std::get_if<ClockReset>(&a)) {
                work.clocks[slots_.at(r->clock).index] = 0;
            }
        }
        work.location = t.target;
        if (!invariant_holds(work, env)) return std::nullopt;
        f.next = std::move(work);
        return f;
    }

    // Enabled internal transitions of `c`, in declaration order.
    std::vector<Fired> settle(const Configuration& c, const Env& env, std::int64_t now) const {
        std::vector<Fired> out;
        for (const Transition* t : outgoing(c.location)) {
            if (t->input()) continue;
            if (auto f = fire(*t, c, env, now, std::nullopt)) out.push_back(std::move(*f));
        }
        return out;
    }

    std::vector<Fired> receive(const Configuration& c, const Env& env, std::int64_t now, const std::string& channel,
                               std::int64_t payload) const {
        std::vector<Fired> out;
        for (const Transition* t : outgoing(c.location)) {
            const auto* in = t->input();
            if (!in || in->channel != channel) continue;
            if (auto f = fire(*t, c, env, now, payload)) out.push_back(std::move(*f));
        }
        return out;
    }

    // One unit of elapsed time; nullopt when the location invariant breaks.
    std::optional<Configuration> elapse(const Configuration& c, const Env& env) const {
        Configuration next = c;
        for (auto& v : next.clocks) v = std::min(v + 1, cap_);
        if (auto it = rules_.find(c.location); it != rules_.end())
            for (const WaitingRule* r : it->second) next.variables[slots_.at(r->variable).index] += r->increment;
        if (!invariant_holds(next, env)) return std::nullopt;
        return next;
    }

    bool invariant_holds(const Configuration& c, const Env& env) const {
        auto it = invariants_.find(c.location);
        if (it == invariants_.end()) return true;
        auto resolve = resolver(c, env);
        for (const auto& cc : *it->second)
            if (!holds(cc.rel, resolve(cc.clock), evaluate(cc.bound, resolve))) return false;
        return true;
    }

    const TimedAutomaton& automaton() const noexcept { return ta_; }

private:
    struct Slot {
        enum Kind { Clock, Var, Const, Env } kind;
        std::size_t index;
        std::int64_t value;
    };

    const std::vector<const Transition*>& outgoing(const std::string& location) const {
        static const std::vector<const Transition*> none;
        auto it = outgoing_.find(location);
        return it == outgoing_.end() ? none : it->second;
    }

    Resolver resolver(const Configuration& c, const Env& env) const {
        return [this, &c, &env](std::string_view name) -> std::int64_t {
            auto it = slots_.find(std::string(name));
            if (it == slots_.end()) throw UndeclaredSymbol(std::string(name), "run-time evaluation");
            const Slot& s = it->second;
            switch (s.kind) {
                case Slot::Clock:
                    return c.clocks[s.index];
                case Slot::Var:
                    return c.variables[s.index];
                case Slot::Const:
                    return s.value;
                case Slot::Env:
                    return env[s.index];
            }
            return 0;
        };
    }

    static bool holds_atom(const GuardAtom& atom, const Resolver& resolve) {
        if (const auto* cc = std::get_if<ClockConstraint>(&atom))
            return holds(cc->rel, resolve(cc->clock), evaluate(cc->bound, resolve));
        if (const auto* e = std::get_if<EnvCondition>(&atom)) return (resolve(e->predicate) != 0) != e->negated;
        return evaluate(std::get<VarComparison>(atom).comparison, resolve);
    }

    std::map<std::string, std::int64_t> valuation(const Configuration& c, const Env& env) const {
        std::map<std::string, std::int64_t> out;
        for (std::size_t i = 0; i < ta_.clocks.size(); ++i) out[ta_.clocks[i]] = c.clocks[i];
        for (std::size_t i = 0; i < ta_.variables.size(); ++i) out[ta_.variables[i].name] = c.variables[i];
        for (const auto& k : ta_.constants) out[k.name] = k.value;
        for (std::size_t i = 0; i < ta_.env_predicates.size(); ++i) out[ta_.env_predicates[i].name] = env[i];
        return out;
    }

    const TimedAutomaton& ta_;
    ExtractionConfig config_;
    std::unordered_map<std::string, Slot> slots_;
    std::unordered_map<std::string, std::vector<const Transition*>> outgoing_;
    std::unordered_map<std::string, const std::vector<ClockConstraint>*> invariants_;
    std::unordered_map<std::string, std::vector<const WaitingRule*>> rules_;
    std::int64_t cap_ = 1;
};

using Entry = Session::Entry;

void add_unique(std::vector<TakenTransition>& taken, std::size_t from, TakenTransition record) {
    for (std::size_t i = from; i < taken.size(); ++i)
        if (taken[i] == record) return;
    taken.push_back(std::move(record));
}

Entry successor(const Entry& from, Fired& f) {
    Entry e{std::move(f.next), from.emitted_now};
    for (const auto& em : f.record.emitted) e.emitted_now.insert(em.key);
    return e;
}

void normalize(std::vector<Entry>& entries) {
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return a.config < b.config; });
    std::vector<Entry> out;
    for (auto& e : entries) {
        if (!out.empty() && out.back().config == e.config)
            out.back().emitted_now.insert(e.emitted_now.begin(), e.emitted_now.end());
        else
            out.push_back(std::move(e));
    }
    entries = std::move(out);
}

// One settle round over the entries flagged eligible.
std::vector<Entry> settle_round(const Engine& engine, std::vector<Entry> entries, const std::vector<char>& eligible,
                                const Env& env, std::int64_t now, std::vector<TakenTransition>& taken) {
    const std::size_t mark = taken.size();
    std::vector<Entry> out;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (!eligible[i]) {
            out.push_back(std::move(entries[i]));
            continue;
        }
        auto fired = engine.settle(entries[i].config, env, now);
        if (fired.empty()) {
            out.push_back(std::move(entries[i]));
            continue;
        }
        for (auto& f : fired) {
            out.push_back(successor(entries[i], f));
            add_unique(taken, mark, std::move(f.record));
        }
    }
    normalize(out);
    return out;
}

std::vector<Entry> settle_all(const Engine& engine, std::vector<Entry> entries, const Env& env, std::int64_t now,
                              std::vector<TakenTransition>& taken) {
    std::vector<char> eligible(entries.size(), 1);
    return settle_round(engine, std::move(entries), eligible, env, now, taken);
}

std::vector<Entry> tick(const Engine& engine, const std::vector<Entry>& entries, const Env& env, std::int64_t now,
                        std::vector<TakenTransition>& taken) {
    std::vector<Entry> moved;
    for (const auto& e : entries)
        if (auto next = engine.elapse(e.config, env)) moved.push_back({std::move(*next), {}});
    normalize(moved);
    return settle_all(engine, std::move(moved), env, now, taken);
}

ReasonInstance instantiate(const ReasonAtom& reason, const std::map<std::string, std::int64_t>& valuation,
                           bool visible) {
    ReasonInstance r;
    r.element_id = reason.element_id;
    r.kind = reason.kind;
    r.atom = reason.atom;
    r.text = reason.text;
    r.display = reason.display;
    r.visible = visible && reason.overlay.visible();
    r.annotation = reason.annotation;
    auto resolve = map_resolver(valuation);
    std::set<std::string> symbols;
    if (const auto* cc = std::get_if<ClockConstraint>(&reason.atom)) {
        symbols.insert(cc->clock);
        collect_symbols(cc->bound, symbols);
        r.lhs_value = resolve(cc->clock);
        r.rhs_value = evaluate(cc->bound, resolve);
    } else if (const auto* env = std::get_if<EnvCondition>(&reason.atom)) {
        symbols.insert(env->predicate);
        r.lhs_value = resolve(env->predicate);
        r.rhs_value = env->negated ? 0 : 1;
    } else {
        const auto& cmp = std::get<VarComparison>(reason.atom).comparison;
        collect_symbols(cmp, symbols);
        r.lhs_value = evaluate(cmp.lhs, resolve);
        r.rhs_value = evaluate(cmp.rhs, resolve);
    }
    for (const auto& s : symbols) r.values[s] = resolve(s);
    r.holds = atom_holds(reason.atom, valuation);
    return r;
}

std::size_t reveal_stage(ObservableNode& node, Stage stage) {
    std::size_t n = 0;
    auto clear = [&n, stage](Overlay& o) {
        if (o.hidden_by == stage) {
            o.hidden_by.reset();
            ++n;
        }
    };
    ElementVisitor v;
    v.node = [&](ObservableNode& x) { clear(x.overlay); };
    v.group = [&](CauseGroup& x) { clear(x.overlay); };
    v.reason = [&](ReasonAtom& x) { clear(x.overlay); };
    v.link = [&](BackLink& x) { clear(x.overlay); };
    visit_node(node, v);
    return n;
}

std::size_t count_hidden(ObservableNode node, Stage stage) { return reveal_stage(node, stage); }

}  // namespace

Session Session::create(const ExplanationModel& em4, const TimedAutomaton& ta, const ExplaineeProfile& profile,
                        const AnalyseConfig& analyse, SessionOptions options, std::string id) {
    if (em4.stage != Stage::EM4)
        throw StageMismatch("a session is deployed from EM4, got " + to_string(em4.stage));
    if (em4.provenance.model_name != ta.name)
        throw ProvenanceMismatch("explanation model was extracted from '" + em4.provenance.model_name +
                                 "', not '" + ta.name + "'");
    if (!em4.provenance.model_digest.empty() && em4.provenance.model_digest != model_digest(ta))
        throw ProvenanceMismatch("automaton '" + ta.name + "' changed since extraction (digest " +
                                 em4.provenance.model_digest + " vs " + model_digest(ta) + ")");
    Session s;
    s.id_ = std::move(id);
    s.ta_ = ta;
    s.profile_ = profile;
    s.analyse_ = analyse;
    s.options_ = options;
    s.em5_ = em4;
    s.em5_.stage = Stage::EM5;
    for (const auto& trigger : analyse.triggers)
        if (!s.resolve(trigger)) throw UnknownNode("trigger '" + to_string(trigger) + "' matches no observable");
    for (const auto& p : ta.env_predicates) s.env_[p.name] = false;
    s.belief_.push_back({initial_configuration(ta), {}});
    return s;
}

const ObservableNode* Session::resolve(const ObservableSelector& sel) const {
    for (const auto& n : em5_.roots)
        if (sel.matches(n.observable.key)) return &n;
    return nullptr;
}

ObservableNode* Session::resolve(const ObservableSelector& sel) {
    for (auto& n : em5_.roots)
        if (sel.matches(n.observable.key)) return &n;
    return nullptr;
}

BeliefState Session::belief() const {
    BeliefState b;
    b.time = now_;
    for (const auto& e : belief_) b.configurations.push_back(e.config);
    return b;
}

void Session::advance_to(std::int64_t t) {
    Engine engine(ta_, em5_.provenance.config);
    Env env = engine.environment(env_);
    while (now_ < t && !belief_.empty()) {
        ++now_;
        belief_ = tick(engine, belief_, env, now_, taken_);
    }
    now_ = t;
}

void Session::step(const Event& event) {
    if (event.timestamp < now_)
        throw TimestampRegression("event at " + std::to_string(event.timestamp) + " precedes current time " +
                                  std::to_string(now_));
    if (trace_.empty() && event.timestamp != 0) throw InvalidEvent("the first event of a trace must be at time 0");
    switch (event.kind) {
        case Event::Kind::EnvUpdate:
            if (!ta_.find_env_predicate(event.name))
                throw InvalidEvent("undeclared environment predicate '" + event.name + "'");
            break;
        case Event::Kind::Broadcast:
            if (!ta_.find_channel(event.name)) throw InvalidEvent("undeclared channel '" + event.name + "'");
            break;
        case Event::Kind::TimeAdvance:
            if (event.value < 1) throw InvalidEvent("time advances need delta >= 1");
            break;
        case Event::Kind::ActionObserved:
            break;
    }
    trace_.push_back(event);
    const std::int64_t end =
        event.kind == Event::Kind::TimeAdvance ? event.timestamp + event.value : event.timestamp;
    if (flags_.novel_situation) {
        if (event.kind == Event::Kind::EnvUpdate) env_[event.name] = event.flag;
        now_ = end;
        return;
    }

    const auto saved_belief = belief_;
    const std::size_t saved_taken = taken_.size();
    Engine engine(ta_, em5_.provenance.config);

    advance_to(event.timestamp);
    if (event.kind == Event::Kind::EnvUpdate) env_[event.name] = event.flag;
    const Env env = engine.environment(env_);
    switch (event.kind) {
        case Event::Kind::EnvUpdate:
            if (!belief_.empty()) belief_ = settle_all(engine, std::move(belief_), env, now_, taken_);
            break;
        case Event::Kind::TimeAdvance:
            advance_to(end);
            break;
        case Event::Kind::Broadcast: {
            const std::size_t mark = taken_.size();
            std::vector<Entry> next;
            std::vector<char> eligible;
            for (const auto& e : belief_) {
                auto fired = engine.receive(e.config, env, now_, event.name, event.value);
                if (fired.empty()) {
                    next.push_back(e);
                    eligible.push_back(1);
                }
                for (auto& f : fired) {
                    next.push_back(successor(e, f));
                    eligible.push_back(0);
                    add_unique(taken_, mark, std::move(f.record));
                }
            }
            belief_ = settle_round(engine, std::move(next), eligible, env, now_, taken_);
            break;
        }
        case Event::Kind::ActionObserved: {
            const ObservableKey key{event.observable_kind, event.name};
            const auto known = enumerate_observables(ta_, em5_.provenance.config);
            const bool declared =
                std::any_of(known.begin(), known.end(), [&key](const Observable& o) { return o.key == key; });
            std::vector<Entry> kept;
            if (declared)
                for (const auto& e : belief_)
                    if (e.emitted_now.count(key)) kept.push_back(e);
            belief_ = std::move(kept);
            break;
        }
    }

    if (belief_.empty()) {
        flags_.novel_situation = true;
        flags_.model_update_needed = true;
        belief_ = saved_belief;
        taken_.resize(saved_taken);
    }
    now_ = end;
}

std::optional<Occurrence> Session::needs_explanation() const {
    if (!analyse_.always_on && analyse_.triggers.empty()) return std::nullopt;
    for (std::size_t i = taken_.size(); i-- > 0;) {
        const auto& record = taken_[i];
        for (auto it = record.emitted.rbegin(); it != record.emitted.rend(); ++it) {
            const ObservableNode* node = em5_.find_node(it->key);
            if (!node || !node->overlay.visible()) continue;
            bool wanted = analyse_.always_on ||
                          std::any_of(analyse_.triggers.begin(), analyse_.triggers.end(),
                                      [&it](const ObservableSelector& s) { return s.matches(it->key); });
            if (wanted) return Occurrence{it->key, record.timestamp, record.transition, i};
        }
    }
    return std::nullopt;
}

ExplanationPath Session::build_explanation(const ObservableSelector& observable, std::size_t occurrence) const {
    const ObservableNode* node = resolve(observable);
    if (!node) throw NotObserved("'" + to_string(observable) + "' is not an observable of this model");
    if (!node->overlay.visible())
        throw HiddenForExplainee(display_name(node->observable.key) + " is hidden for explainee '" + profile_.id + "'");

    const ObservableKey& key = node->observable.key;
    std::vector<std::size_t> hits;
    for (std::size_t i = taken_.size(); i-- > 0;)
        for (const auto& e : taken_[i].emitted)
            if (e.key == key) {
                hits.push_back(i);
                break;
            }
    if (occurrence >= hits.size())
        throw NotObserved(display_name(key) + " occurred " + std::to_string(hits.size()) + " time(s); occurrence " +
                          std::to_string(occurrence) + " requested");

    const std::size_t index = hits[occurrence];
    const TakenTransition& record = taken_[index];
    auto group = std::find_if(node->cause_groups.begin(), node->cause_groups.end(),
                              [&record](const CauseGroup& g) { return g.transition == record.transition; });
    if (group == node->cause_groups.end())
        throw Error("no cause group for transition '" + record.transition + "' under " + display_name(key));
    if (!group->overlay.visible())
        throw HiddenForExplainee("the cause via " + record.transition + " is hidden for explainee '" + profile_.id +
                                 "'");

    ExplanationPath path;
    path.observable = key;
    path.timestamp = record.timestamp;
    path.transition = record.transition;
    path.cause_group = group->element_id;
    path.how_annotation = node->annotation;
    for (const auto& r : group->reasons) path.reasons.push_back(instantiate(r, record.valuation, true));

    const int depth = std::min(node->reveal_depth, em5_.provenance.config.chain_depth);
    const std::vector<BackLink>* links = &group->back_chain;
    std::size_t current = index;
    for (int d = 0; d < depth; ++d) {
        const Transition* t = ta_.find_transition(taken_[current].transition);
        if (!t) break;
        const BackLink* link = nullptr;
        std::size_t prior = 0;
        for (std::size_t j = current; j-- > 0 && !link;) {
            const Transition* p = ta_.find_transition(taken_[j].transition);
            if (!p || p->target != t->source) continue;
            for (const auto& l : *links)
                if (l.transition == p->id) {
                    link = &l;
                    prior = j;
                    break;
                }
        }
        if (!link || !link->overlay.visible()) break;
        ChainStep step;
        step.transition = link->transition;
        step.timestamp = taken_[prior].timestamp;
        step.observables = link->observables;
        if (!link->observables.empty())
            if (const ObservableNode* n = em5_.find_node(link->observables.front()); n && n->overlay.visible())
                step.how_annotation = n->annotation;
        for (const auto& r : link->reasons) step.reasons.push_back(instantiate(r, taken_[prior].valuation, true));
        path.back_chain.push_back(std::move(step));
        links = &link->children;
        current = prior;
    }
    render_explanation(path, profile_.verbosity);
    return path;
}

std::vector<LookaheadEntry> Session::lookahead(std::int64_t horizon) const {
    if (flags_.novel_situation) throw NovelSituationFrozen();
    if (horizon < 0) throw InvalidEvent("lookahead horizon must be >= 0");
    Engine engine(ta_, em5_.provenance.config);
    const Env env = engine.environment(env_);

    // Frontier keyed by configuration; each keeps its lexicographically smallest witness.
    std::map<Configuration, std::vector<std::string>> frontier;
    for (const auto& e : belief_) frontier.emplace(e.config, std::vector<std::string>{});

    std::map<ObservableKey, LookaheadEntry> found;
    for (std::int64_t step = 1; step <= horizon && !frontier.empty(); ++step) {
        const std::int64_t t = now_ + step;
        std::map<Configuration, std::vector<std::string>> next;
        std::map<ObservableKey, std::vector<std::string>> seen_now;
        auto keep = [](auto& m, const auto& k, const std::vector<std::string>& w) {
            auto [it, inserted] = m.emplace(k, w);
            if (!inserted && w < it->second) it->second = w;
        };
        for (const auto& [config, witness] : frontier) {
            auto moved = engine.elapse(config, env);
            if (!moved) continue;
            auto fired = engine.settle(*moved, env, t);
            if (fired.empty()) {
                keep(next, *moved, witness);
                continue;
            }
            for (auto& f : fired) {
                auto w = witness;
                w.push_back(f.record.transition);
                for (const auto& em : f.record.emitted) keep(seen_now, em.key, w);
                keep(next, f.next, w);
            }
        }
        for (const auto& [key, w] : seen_now) {
            const ObservableNode* node = em5_.find_node(key);
            if (!node || !node->overlay.visible() || found.count(key)) continue;
            found[key] = LookaheadEntry{key, t, w};
        }
        frontier = std::move(next);
    }

    std::vector<LookaheadEntry> out;
    for (const auto& n : em5_.roots)
        if (auto it = found.find(n.observable.key); it != found.end()) out.push_back(it->second);
    std::stable_sort(out.begin(), out.end(),
                     [](const LookaheadEntry& a, const LookaheadEntry& b) { return a.earliest < b.earliest; });
    return out;
}

namespace {

// Deepest visible back-chain link below a visible node.
int chain_extent(const ObservableNode& node) {
    std::function<int(const BackLink&)> depth = [&depth](const BackLink& l) {
        if (!l.overlay.visible()) return 0;
        int d = 0;
        for (const auto& c : l.children) d = std::max(d, depth(c));
        return 1 + d;
    };
    int out = 0;
    if (!node.overlay.visible()) return 0;
    for (const auto& g : node.cause_groups)
        if (g.overlay.visible())
            for (const auto& l : g.back_chain) out = std::max(out, depth(l));
    return out;
}

}  // namespace

VisibilitySummary Session::apply_feedback(const Feedback& feedback) {
    FeedbackRecord rec;
    rec.time = now_;
    if (feedback.kind == Feedback::Kind::Helpful) {
        rec.kind = "helpful";
        rec.helpful = feedback.helpful;
        rec.outcome = "recorded";
        feedback_.push_back(rec);
        return visibility();
    }
    if (!feedback.target) throw UnknownNode("feedback needs a target observable");
    ObservableNode* node = resolve(*feedback.target);
    if (!node) throw UnknownNode("'" + to_string(*feedback.target) + "' matches no observable");
    rec.target = selector_text(node->observable.key);

    if (feedback.kind == Feedback::Kind::HideBranch) {
        rec.kind = "hide_branch";
        node->overlay.user_hidden = true;
        rec.outcome = "hidden";
        feedback_.push_back(rec);
        return visibility();
    }

    rec.kind = "more_detail";
    if (node->overlay.user_hidden) {
        node->overlay.user_hidden = false;
        rec.outcome = "unhidden";
        feedback_.push_back(rec);
        return visibility();
    }
    std::vector<Stage> stages{Stage::EM3};
    if (options_.reveal_purpose_hidden) stages.push_back(Stage::EM2);
    for (Stage stage : stages) {
        if (count_hidden(*node, stage) == 0) continue;
        std::size_t n = reveal_stage(*node, stage);
        ++node->reveal_depth;
        if (em5_.provenance.annotations) apply_annotations(em5_, *em5_.provenance.annotations, nullptr);
        rec.outcome = "revealed " + std::to_string(n) + " element(s) hidden at " + to_string(stage);
        feedback_.push_back(rec);
        return visibility();
    }
    // Nothing hidden: show one more step of the back chain instead.
    if (node->reveal_depth < chain_extent(*node)) {
        ++node->reveal_depth;
        rec.outcome = "back chain deepened to " + std::to_string(node->reveal_depth);
        feedback_.push_back(rec);
        return visibility();
    }
    throw NothingMoreToReveal("nothing more to reveal under " + display_name(node->observable.key));
}

VisibilitySummary Session::visibility() const {
    VisibilitySummary s;
    std::function<void(const BackLink&)> link = [&](const BackLink& l) {
        if (!l.overlay.visible()) return;
        for (const auto& r : l.reasons) s.visible_reasons += r.overlay.visible();
        for (const auto& c : l.children) link(c);
    };
    for (const auto& n : em5_.roots) {
        s.reveal_depth[n.element_id] = n.reveal_depth;
        if (!n.overlay.visible()) continue;
        ++s.visible_nodes;
        for (const auto& g : n.cause_groups) {
            if (!g.overlay.visible()) continue;
            ++s.visible_groups;
            for (const auto& r : g.reasons) s.visible_reasons += r.overlay.visible();
            for (const auto& l : g.back_chain) link(l);
        }
    }
    return s;
}

std::string Session::snapshot() const {
    json j;
    j["format"] = "tamex-session/1";
    j["id"] = id_;
    j["model"] = json::parse(serialize_model(ta_));
    j["em5"] = em_to_json(em5_);
    j["profile"] = json::parse(serialize_profile(profile_));
    j["analyse"] = analyse_to_json(analyse_);
    j["options"] = {{"reveal_purpose_hidden", options_.reveal_purpose_hidden}};
    j["trace"] = json::array();
    for (const auto& e : trace_) j["trace"].push_back(event_to_json(e));
    j["taken"] = json::array();
    for (const auto& t : taken_) j["taken"].push_back(taken_to_json(t));
    j["belief"] = json::array();
    for (const auto& e : belief_) {
        json entry = configuration_to_json(ta_, e.config);
        entry["emitted_now"] = json::array();
        for (const auto& k : e.emitted_now) entry["emitted_now"].push_back(selector_text(k));
        j["belief"].push_back(entry);
    }
    j["env"] = env_;
    j["now"] = now_;
    j["flags"] = {{"novel_situation", flags_.novel_situation}, {"model_update_needed", flags_.model_update_needed}};
    j["feedback"] = json::array();
    for (const auto& f : feedback_) j["feedback"].push_back(feedback_record_to_json(f));
    return j.dump(2) + "\n";
}

Session Session::restore(std::string_view snapshot) {
    json j = parse_json_document(snapshot);
    if (j.value("format", std::string()) != "tamex-session/1") throw SyntaxError(1, "not a session snapshot");
    try {
        Session s;
        s.id_ = j.at("id").get<std::string>();
        s.ta_ = parse_model(j.at("model").dump());
        s.em5_ = em_from_json(j.at("em5"));
        s.profile_ = parse_profile(j.at("profile").dump());
        s.analyse_ = analyse_from_json(j.at("analyse"));
        s.options_.reveal_purpose_hidden = j.at("options").value("reveal_purpose_hidden", false);
        for (const auto& e : j.at("trace")) s.trace_.push_back(event_from_json(e));
        for (const auto& t : j.at("taken")) s.taken_.push_back(taken_from_json(t));
        for (const auto& b : j.at("belief")) {
            Entry e{configuration_from_json(s.ta_, b), {}};
            for (const auto& k : b.value("emitted_now", json::array())) {
                auto sel = parse_observable_selector(k.get<std::string>());
                e.emitted_now.insert({sel.kind.value_or(ObservableKind::ControllerAction), sel.name});
            }
            s.belief_.push_back(std::move(e));
        }
        s.env_ = j.at("env").get<std::map<std::string, bool>>();
        s.now_ = j.at("now").get<std::int64_t>();
        s.flags_.novel_situation = j.at("flags").value("novel_situation", false);
        s.flags_.model_update_needed = j.at("flags").value("model_update_needed", false);
        for (const auto& f : j.at("feedback")) s.feedback_.push_back(feedback_record_from_json(f));
        return s;
    } catch (const json::exception& e) {
        throw SyntaxError(0, std::string("malformed session snapshot: ") + e.what());
    }
}

}  // namespace tamex
