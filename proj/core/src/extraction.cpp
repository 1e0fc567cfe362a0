#include "tamex/extraction.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "tamex/model_io.hpp"

namespace tamex {

std::string node_element_id(const ObservableKey& key) { return "obs/" + kind_tag(key.kind) + "/" + key.name; }

std::vector<std::pair<ObservableKey, std::string>> transition_observables(const Transition& t,
                                                                          const ExtractionConfig& config) {
    std::vector<std::pair<ObservableKey, std::string>> out;
    auto add = [&out](ObservableKey key, std::string source) {
        auto dup = std::find_if(out.begin(), out.end(), [&key](const auto& p) { return p.first == key; });
        if (dup == out.end()) out.emplace_back(std::move(key), std::move(source));
    };
    if (const auto* o = t.output()) add({ObservableKind::CommOutput, o->channel}, t.id + "/sync");
    for (std::size_t i = 0; i < t.actions.size(); ++i) {
        const auto& a = t.actions[i];
        const std::string source = t.id + "/action/" + std::to_string(i);
        if (const auto* c = std::get_if<ControllerAction>(&a))
            add({ObservableKind::ControllerAction, c->name}, source);
        else if (const auto* u = std::get_if<VarUpdate>(&a))
            add({ObservableKind::VarUpdate, u->variable}, source);
        else if (config.include_clock_resets)
            add({ObservableKind::ClockReset, std::get<ClockReset>(a).clock}, source);
    }
    return out;
}

std::vector<Observable> enumerate_observables(const TimedAutomaton& ta, const ExtractionConfig& config) {
    std::vector<Observable> out;
    for (const auto& t : ta.transitions) {
        for (auto& [key, source] : transition_observables(t, config)) {
            auto it = std::find_if(out.begin(), out.end(), [&](const Observable& o) { return o.key == key; });
            if (it == out.end()) {
                out.push_back({key, {source}});
            } else {
                it->sources.push_back(source);
            }
        }
    }
    return out;
}

namespace {

std::vector<std::string> referenced_constants(const TimedAutomaton& ta, const GuardAtom& atom) {
    std::set<std::string> symbols;
    if (const auto* cc = std::get_if<ClockConstraint>(&atom))
        collect_symbols(cc->bound, symbols);
    else if (const auto* vc = std::get_if<VarComparison>(&atom))
        collect_symbols(vc->comparison, symbols);
    std::vector<std::string> out;
    for (const auto& s : symbols)
        if (ta.find_constant(s)) out.push_back(s);
    return out;
}

}  // namespace

std::vector<ReasonAtom> transition_reasons(const TimedAutomaton& ta, const Transition& t,
                                           const std::string& id_prefix) {
    std::vector<ReasonAtom> out;
    for (std::size_t i = 0; i < t.guard.size(); ++i) {
        ReasonAtom r;
        r.element_id = id_prefix + "/g" + std::to_string(i);
        r.kind = ReasonKind::Guard;
        r.transition = t.id;
        r.atom = t.guard[i];
        r.text = atom_text(ta, r.atom, Notation::Ascii);
        r.display = atom_text(ta, r.atom, Notation::Unicode);
        r.constants = referenced_constants(ta, r.atom);
        out.push_back(std::move(r));
    }
    if (const auto* loc = ta.find_location(t.source)) {
        for (std::size_t i = 0; i < loc->invariant.size(); ++i) {
            ReasonAtom r;
            r.element_id = id_prefix + "/i" + std::to_string(i);
            r.kind = ReasonKind::Invariant;
            r.location = loc->id;
            r.atom = loc->invariant[i];
            r.text = atom_text(ta, r.atom, Notation::Ascii);
            r.display = atom_text(ta, r.atom, Notation::Unicode);
            r.constants = referenced_constants(ta, r.atom);
            out.push_back(std::move(r));
        }
    }
    if (const auto* in = t.input()) {
        ReasonAtom r;
        r.element_id = id_prefix + "/rx";
        r.kind = ReasonKind::Reception;
        r.transition = t.id;
        r.atom = VarComparison{in->predicate};
        r.channel = in->channel;
        r.bound_variable = in->variable;
        r.text = to_string(in->predicate, Notation::Ascii);
        r.constants = referenced_constants(ta, r.atom);
        r.display = to_string(in->predicate, Notation::Unicode);
        out.push_back(std::move(r));
    }
    return out;
}

namespace {

void extend_backwards(const TimedAutomaton& ta, std::vector<std::size_t>& path, std::set<std::string>& sources,
                      int remaining, std::vector<std::vector<std::size_t>>& out) {
    out.push_back(path);
    if (remaining == 0) return;
    const auto& head = ta.transitions[path.front()];
    for (std::size_t i = 0; i < ta.transitions.size(); ++i) {
        const auto& pred = ta.transitions[i];
        if (pred.target != head.source || sources.count(pred.source)) continue;
        path.insert(path.begin(), i);
        sources.insert(pred.source);
        extend_backwards(ta, path, sources, remaining - 1, out);
        sources.erase(pred.source);
        path.erase(path.begin());
    }
}

void build_links(const TimedAutomaton& ta, const ExtractionConfig& config,
                 const std::vector<std::vector<std::size_t>>& paths, std::size_t level,
                 const std::string& id_prefix, std::vector<BackLink>& out) {
    // Paths here all share the same suffix; group them by the transition
    // `level` steps before the end.
    std::map<std::size_t, std::vector<std::vector<std::size_t>>> by_pred;
    std::vector<std::size_t> order;
    for (const auto& p : paths) {
        if (p.size() <= level) continue;
        const std::size_t pred = p[p.size() - 1 - level];
        if (!by_pred.count(pred)) order.push_back(pred);
        by_pred[pred].push_back(p);
    }
    for (std::size_t pred : order) {
        const auto& t = ta.transitions[pred];
        BackLink link;
        link.element_id = id_prefix + "/bc/" + t.id;
        link.transition = t.id;
        link.source_location = t.source;
        link.distance = static_cast<int>(level);
        for (const auto& [key, source] : transition_observables(t, config)) {
            link.observables.push_back(key);
            link.cause_groups.push_back(node_element_id(key) + "/" + t.id);
        }
        link.reasons = transition_reasons(ta, t, link.element_id);
        build_links(ta, config, by_pred[pred], level + 1, link.element_id, link.children);
        out.push_back(std::move(link));
    }
}

}  // namespace

std::vector<std::vector<std::string>> backward_paths(const TimedAutomaton& ta, const std::string& from_transition,
                                                     int depth) {
    std::vector<std::vector<std::string>> result;
    auto idx = ta.transition_index(from_transition);
    if (!idx || depth < 0) return result;
    std::vector<std::vector<std::size_t>> raw;
    std::vector<std::size_t> path{*idx};
    std::set<std::string> sources{ta.transitions[*idx].source};
    extend_backwards(ta, path, sources, depth, raw);
    std::sort(raw.begin(), raw.end());
    for (const auto& p : raw) {
        std::vector<std::string> ids;
        for (auto i : p) ids.push_back(ta.transitions[i].id);
        result.push_back(std::move(ids));
    }
    return result;
}

StageResult extract_em1(const TimedAutomaton& ta, const ExtractionConfig& config) {
    StageResult result;
    auto& em = result.em;
    em.stage = Stage::EM1;
    em.provenance.model_name = ta.name;
    em.provenance.model_digest = model_digest(ta);
    em.provenance.config = config;

    for (const auto& obs : enumerate_observables(ta, config)) {
        ObservableNode node;
        node.element_id = node_element_id(obs.key);
        node.observable = obs;
        for (std::size_t ti = 0; ti < ta.transitions.size(); ++ti) {
            const auto& t = ta.transitions[ti];
            for (const auto& [key, source] : transition_observables(t, config)) {
                if (key != obs.key) continue;
                CauseGroup group;
                group.element_id = node.element_id + "/" + t.id;
                group.transition = t.id;
                group.source_element = source;
                group.reasons = transition_reasons(ta, t, group.element_id);
                if (config.chain_depth > 0) {
                    std::vector<std::vector<std::size_t>> raw;
                    std::vector<std::size_t> path{ti};
                    std::set<std::string> sources{t.source};
                    extend_backwards(ta, path, sources, config.chain_depth, raw);
                    std::sort(raw.begin(), raw.end());
                    build_links(ta, config, raw, 1, group.element_id, group.back_chain);
                }
                node.cause_groups.push_back(std::move(group));
            }
        }
        em.roots.push_back(std::move(node));
    }
    if (em.roots.empty())
        result.warnings.push_back({"NoObservables", "model " + ta.name + " yields an empty explanation model"});
    return result;
}

}  // namespace tamex
