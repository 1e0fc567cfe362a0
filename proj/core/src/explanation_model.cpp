#include "tamex/explanation_model.hpp"

#include <algorithm>

#include "tamex/error.hpp"

namespace tamex {

std::string to_string(Stage stage) { return "EM" + std::to_string(static_cast<int>(stage)); }

Stage parse_stage(std::string_view text) {
    if (text.size() == 3 && text.substr(0, 2) == "EM" && text[2] >= '1' && text[2] <= '5')
        return static_cast<Stage>(text[2] - '0');
    throw SyntaxError(0, "unknown stage '" + std::string(text) + "'");
}

std::string kind_tag(ObservableKind kind) {
    switch (kind) {
        case ObservableKind::CommOutput:
            return "output";
        case ObservableKind::ControllerAction:
            return "ctrl";
        case ObservableKind::VarUpdate:
            return "update";
        case ObservableKind::ClockReset:
            return "reset";
    }
    return "?";
}

ObservableKind parse_kind_tag(std::string_view tag) {
    if (tag == "output") return ObservableKind::CommOutput;
    if (tag == "ctrl") return ObservableKind::ControllerAction;
    if (tag == "update") return ObservableKind::VarUpdate;
    if (tag == "reset") return ObservableKind::ClockReset;
    throw SyntaxError(0, "unknown observable kind '" + std::string(tag) + "'");
}

std::string display_name(const ObservableKey& key) {
    switch (key.kind) {
        case ObservableKind::CommOutput:
            return key.name + "!";
        case ObservableKind::ControllerAction:
            return key.name + "()";
        case ObservableKind::VarUpdate:
            return key.name;
        case ObservableKind::ClockReset:
            return key.name + " := 0";
    }
    return key.name;
}

std::string selector_text(const ObservableKey& key) { return kind_tag(key.kind) + ":" + key.name; }

const ObservableNode* ExplanationModel::find_node(const ObservableKey& key) const noexcept {
    auto it = std::find_if(roots.begin(), roots.end(),
                           [&key](const ObservableNode& n) { return n.observable.key == key; });
    return it == roots.end() ? nullptr : &*it;
}

ObservableNode* ExplanationModel::find_node(const ObservableKey& key) noexcept {
    return const_cast<ObservableNode*>(std::as_const(*this).find_node(key));
}

namespace {

void visit_link(BackLink& link, const ElementVisitor& v) {
    if (v.link) v.link(link);
    if (v.reason)
        for (auto& r : link.reasons) v.reason(r);
    for (auto& child : link.children) visit_link(child, v);
}

void link_visibility(const BackLink& link, bool parent_visible,
                     std::vector<std::pair<std::string, bool>>& out) {
    const bool vis = parent_visible && link.overlay.visible();
    out.emplace_back(link.element_id, vis);
    for (const auto& r : link.reasons) out.emplace_back(r.element_id, vis && r.overlay.visible());
    for (const auto& c : link.children) link_visibility(c, vis, out);
}

}  // namespace

void visit_node(ObservableNode& node, const ElementVisitor& v) {
    if (v.node) v.node(node);
    for (auto& g : node.cause_groups) {
        if (v.group) v.group(g);
        if (v.reason)
            for (auto& r : g.reasons) v.reason(r);
        for (auto& link : g.back_chain) visit_link(link, v);
    }
}

void visit_elements(ExplanationModel& em, const ElementVisitor& v) {
    for (auto& node : em.roots) visit_node(node, v);
}

std::vector<std::pair<std::string, bool>> element_visibility(const ExplanationModel& em) {
    std::vector<std::pair<std::string, bool>> out;
    for (const auto& node : em.roots) {
        const bool nv = node.overlay.visible();
        out.emplace_back(node.element_id, nv);
        for (const auto& g : node.cause_groups) {
            const bool gv = nv && g.overlay.visible();
            out.emplace_back(g.element_id, gv);
            for (const auto& r : g.reasons) out.emplace_back(r.element_id, gv && r.overlay.visible());
            for (const auto& link : g.back_chain) link_visibility(link, gv, out);
        }
    }
    return out;
}

}  // namespace tamex
