#include "tamex/slicing.hpp"

#include <algorithm>

#include "tamex/error.hpp"
#include "tamex/json_io.hpp"

namespace tamex {

using nlohmann::json;

ObservableSelector parse_observable_selector(std::string_view text) {
    ObservableSelector sel;
    auto colon = text.find(':');
    if (colon == std::string_view::npos) {
        sel.name = std::string(text);
    } else {
        sel.kind = parse_kind_tag(text.substr(0, colon));
        sel.name = std::string(text.substr(colon + 1));
    }
    // Accept display spellings as well: "abort()", "prio!".
    if (sel.name.size() > 2 && sel.name.substr(sel.name.size() - 2) == "()") sel.name.resize(sel.name.size() - 2);
    if (!sel.name.empty() && sel.name.back() == '!') sel.name.pop_back();
    if (sel.name.empty()) throw SyntaxError(0, "empty observable selector");
    return sel;
}

std::string to_string(const ObservableSelector& sel) {
    return sel.kind ? kind_tag(*sel.kind) + ":" + sel.name : sel.name;
}

std::string to_string(ExplaineeType type) {
    switch (type) {
        case ExplaineeType::EndUser:
            return "end_user";
        case ExplaineeType::Engineer:
            return "engineer";
        case ExplaineeType::System:
            return "system";
        case ExplaineeType::Custom:
            return "custom";
    }
    return "custom";
}

std::string to_string(Verbosity verbosity) { return verbosity == Verbosity::Brief ? "brief" : "detailed"; }

Verbosity parse_verbosity(std::string_view text) {
    if (text == "brief") return Verbosity::Brief;
    if (text == "detailed") return Verbosity::Detailed;
    throw SyntaxError(0, "unknown verbosity '" + std::string(text) + "'");
}

namespace {

std::vector<ObservableSelector> selectors_from_json(const json& doc) {
    std::vector<ObservableSelector> out;
    if (!doc.contains("observables")) return out;
    const auto& arr = doc.at("observables");
    if (!arr.is_array()) throw SyntaxError(0, "'observables' must be a list");
    for (const auto& s : arr) {
        if (s.is_string()) {
            out.push_back(parse_observable_selector(s.get<std::string>()));
        } else if (s.is_object() && s.contains("name")) {
            ObservableSelector sel;
            sel.name = s.at("name").get<std::string>();
            if (s.contains("kind")) sel.kind = parse_kind_tag(s.at("kind").get<std::string>());
            out.push_back(std::move(sel));
        } else {
            throw SyntaxError(0, "observable selectors are strings or {kind, name} objects");
        }
    }
    return out;
}

json selectors_to_json(const std::vector<ObservableSelector>& sels) {
    json arr = json::array();
    for (const auto& s : sels) arr.push_back(to_string(s));
    return arr;
}

ExplaineeType parse_type(std::string_view t) {
    if (t == "end_user") return ExplaineeType::EndUser;
    if (t == "engineer") return ExplaineeType::Engineer;
    if (t == "system") return ExplaineeType::System;
    if (t == "custom") return ExplaineeType::Custom;
    throw SyntaxError(0, "unknown explainee type '" + std::string(t) + "'");
}

SuppressedKind parse_suppressed(std::string_view t) {
    if (t == "var_update_nodes") return SuppressedKind::VarUpdateNodes;
    if (t == "clock_reset_nodes") return SuppressedKind::ClockResetNodes;
    if (t == "internal_comparisons") return SuppressedKind::InternalComparisons;
    throw SyntaxError(0, "unknown suppressed kind '" + std::string(t) + "'");
}

std::string suppressed_tag(SuppressedKind k) {
    switch (k) {
        case SuppressedKind::VarUpdateNodes:
            return "var_update_nodes";
        case SuppressedKind::ClockResetNodes:
            return "clock_reset_nodes";
        case SuppressedKind::InternalComparisons:
            return "internal_comparisons";
    }
    return "?";
}

void hide_link(BackLink& link, Stage stage) {
    if (!link.overlay.hidden_by) link.overlay.hidden_by = stage;
    for (auto& r : link.reasons)
        if (!r.overlay.hidden_by) r.overlay.hidden_by = stage;
    for (auto& c : link.children) hide_link(c, stage);
}

bool any_visible(const ExplanationModel& em) {
    return std::any_of(em.roots.begin(), em.roots.end(),
                       [](const ObservableNode& n) { return n.overlay.visible(); });
}

void warn_unresolved(const ExplanationModel& em, const std::vector<ObservableSelector>& sels,
                     std::vector<Warning>& warnings) {
    for (const auto& s : sels) {
        bool resolved = std::any_of(em.roots.begin(), em.roots.end(),
                                    [&s](const ObservableNode& n) { return s.matches(n.observable.key); });
        if (!resolved) warnings.push_back({"UnresolvedSelector", "selector '" + to_string(s) + "' matches no observable"});
    }
}

bool matches_any(const std::vector<ObservableSelector>& sels, const ObservableKey& key) {
    return std::any_of(sels.begin(), sels.end(), [&key](const ObservableSelector& s) { return s.matches(key); });
}

void hide_internal_reasons(std::vector<ReasonAtom>& reasons) {
    for (auto& r : reasons)
        if (!r.overlay.hidden_by && is_internal_comparison(r)) r.overlay.hidden_by = Stage::EM3;
}

void hide_internal_in_link(BackLink& link) {
    hide_internal_reasons(link.reasons);
    for (auto& c : link.children) hide_internal_in_link(c);
}

template <typename T>
void strip(std::vector<T>& items) {
    items.erase(std::remove_if(items.begin(), items.end(), [](const T& t) { return !t.overlay.visible(); }),
                items.end());
    for (auto& t : items) t.overlay = Overlay{};
}

void strip_link(BackLink& link) {
    strip(link.reasons);
    strip(link.children);
    for (auto& c : link.children) strip_link(c);
}

}  // namespace

ExplanationPurpose parse_purpose(std::string_view text) {
    auto doc = parse_json_document(text);
    if (!doc.is_object()) throw SyntaxError(1, "purpose document must be an object");
    ExplanationPurpose p;
    p.name = doc.value("name", std::string("unnamed purpose"));
    p.relevant_observables = selectors_from_json(doc);
    return p;
}

std::string serialize_purpose(const ExplanationPurpose& purpose) {
    return json{{"name", purpose.name}, {"observables", selectors_to_json(purpose.relevant_observables)}}.dump(2) +
           "\n";
}

ExplaineeProfile parse_profile(std::string_view text) {
    auto doc = parse_json_document(text);
    if (!doc.is_object()) throw SyntaxError(1, "profile document must be an object");
    ExplaineeProfile p;
    if (!doc.contains("id") || !doc["id"].is_string()) throw SyntaxError(0, "profile requires string 'id'");
    p.id = doc["id"].get<std::string>();
    p.type = parse_type(doc.value("type", std::string("custom")));
    p.relevant_observables = selectors_from_json(doc);
    for (const auto& s : doc.value("suppress", json::array())) p.suppressed.insert(parse_suppressed(s.get<std::string>()));
    p.verbosity = parse_verbosity(doc.value("verbosity", std::string("brief")));
    return p;
}

std::string serialize_profile(const ExplaineeProfile& profile) {
    json sup = json::array();
    for (auto k : profile.suppressed) sup.push_back(suppressed_tag(k));
    return json{{"id", profile.id},
                {"type", to_string(profile.type)},
                {"observables", selectors_to_json(profile.relevant_observables)},
                {"suppress", sup},
                {"verbosity", to_string(profile.verbosity)}}
               .dump(2) +
           "\n";
}

bool is_internal_comparison(const ReasonAtom& reason) {
    if (!std::holds_alternative<VarComparison>(reason.atom)) return false;
    return reason.constants.empty();
}

void hide_subtree(ObservableNode& node, Stage stage) {
    if (!node.overlay.hidden_by) node.overlay.hidden_by = stage;
    for (auto& g : node.cause_groups) {
        if (!g.overlay.hidden_by) g.overlay.hidden_by = stage;
        for (auto& r : g.reasons)
            if (!r.overlay.hidden_by) r.overlay.hidden_by = stage;
        for (auto& link : g.back_chain) hide_link(link, stage);
    }
}

StageResult slice_by_purpose(const ExplanationModel& em, const ExplanationPurpose& purpose) {
    if (em.stage != Stage::EM1)
        throw StageMismatch("purpose slicing expects EM1, got " + to_string(em.stage));
    StageResult result{em, {}};
    warn_unresolved(em, purpose.relevant_observables, result.warnings);
    for (auto& node : result.em.roots)
        if (!matches_any(purpose.relevant_observables, node.observable.key)) hide_subtree(node, Stage::EM2);
    result.em.stage = Stage::EM2;
    result.em.provenance.purpose = purpose.name;
    if (!any_visible(result.em))
        result.warnings.push_back({"EmptySliceWarning", "purpose '" + purpose.name + "' hides every node"});
    return result;
}

StageResult slice_by_profile(const ExplanationModel& em, const ExplaineeProfile& profile) {
    if (em.stage != Stage::EM2)
        throw StageMismatch("profile slicing expects EM2, got " + to_string(em.stage));
    StageResult result{em, {}};
    warn_unresolved(em, profile.relevant_observables, result.warnings);
    const bool drop_updates = profile.suppressed.count(SuppressedKind::VarUpdateNodes) > 0;
    const bool drop_resets = profile.suppressed.count(SuppressedKind::ClockResetNodes) > 0;
    const bool drop_internal = profile.suppressed.count(SuppressedKind::InternalComparisons) > 0;

    for (auto& node : result.em.roots) {
        const auto& key = node.observable.key;
        bool hide = !matches_any(profile.relevant_observables, key);
        hide = hide || (drop_updates && key.kind == ObservableKind::VarUpdate);
        hide = hide || (drop_resets && key.kind == ObservableKind::ClockReset);
        if (hide) {
            hide_subtree(node, Stage::EM3);
            continue;
        }
        if (!drop_internal) continue;
        for (auto& g : node.cause_groups) {
            hide_internal_reasons(g.reasons);
            for (auto& link : g.back_chain) hide_internal_in_link(link);
        }
    }
    result.em.stage = Stage::EM3;
    result.em.provenance.profile = profile.id;
    if (!any_visible(result.em))
        result.warnings.push_back({"EmptySliceWarning", "profile '" + profile.id + "' hides every node"});
    return result;
}

ExplanationModel visible_view(const ExplanationModel& em) {
    ExplanationModel out = em;
    strip(out.roots);
    for (auto& node : out.roots) {
        strip(node.cause_groups);
        for (auto& g : node.cause_groups) {
            strip(g.reasons);
            strip(g.back_chain);
            for (auto& link : g.back_chain) strip_link(link);
        }
    }
    return out;
}

ExplanationModel unhide_all(const ExplanationModel& em) {
    ExplanationModel out = em;
    ElementVisitor clear;
    clear.node = [](ObservableNode& n) { n.overlay = Overlay{}; };
    clear.group = [](CauseGroup& g) { g.overlay = Overlay{}; };
    clear.reason = [](ReasonAtom& r) { r.overlay = Overlay{}; };
    clear.link = [](BackLink& l) { l.overlay = Overlay{}; };
    visit_elements(out, clear);
    return out;
}

}  // namespace tamex
