#include "tamex/annotation.hpp"

#include <algorithm>

#include "tamex/json_io.hpp"

namespace tamex {

using nlohmann::json;

AnnotationBase load_annotations(std::string_view document) {
    auto doc = parse_json_document(document);
    if (doc.is_object() && doc.contains("entries")) doc = doc["entries"];
    if (doc.is_null()) return {};
    AnnotationBase base = annotations_from_json(doc);
    for (std::size_t i = 0; i < base.entries.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (base.entries[i].selector == base.entries[j].selector)
                throw DuplicateSelector("duplicate annotation selector " +
                                        selector_to_json(base.entries[i].selector).dump());
    return base;
}

std::string serialize_annotations(const AnnotationBase& base) { return annotations_to_json(base).dump(2) + "\n"; }

bool selector_matches(const AnnotationSelector& sel, const ReasonAtom& reason) {
    using K = AnnotationSelector::Kind;
    switch (sel.kind) {
        case K::Clock: {
            const auto* cc = std::get_if<ClockConstraint>(&reason.atom);
            if (!cc) return false;
            if (sel.clock && *sel.clock != cc->clock) return false;
            if (sel.rel && *sel.rel != cc->rel) return false;
            if (sel.bound && *sel.bound != to_string(cc->bound)) return false;
            return true;
        }
        case K::Env: {
            const auto* env = std::get_if<EnvCondition>(&reason.atom);
            if (!env) return false;
            if (sel.pred && *sel.pred != env->predicate) return false;
            if (sel.negated && *sel.negated != env->negated) return false;
            return true;
        }
        case K::Data:
            return reason.kind != ReasonKind::Reception && std::holds_alternative<VarComparison>(reason.atom) &&
                   sel.expr && *sel.expr == reason.text;
        case K::Reception:
            if (reason.kind != ReasonKind::Reception) return false;
            if (sel.channel && *sel.channel != reason.channel) return false;
            if (sel.expr && *sel.expr != reason.text) return false;
            return true;
        case K::Constant:
            return sel.name && std::find(reason.constants.begin(), reason.constants.end(), *sel.name) !=
                                   reason.constants.end();
        case K::Observable:
        case K::Transition:
            return false;
    }
    return false;
}

bool selector_matches(const AnnotationSelector& sel, const ObservableNode& node) {
    if (sel.kind != AnnotationSelector::Kind::Observable || !sel.name) return false;
    const auto& key = node.observable.key;
    return key.name == *sel.name && (!sel.observable_kind || *sel.observable_kind == key.kind);
}

bool selector_matches(const AnnotationSelector& sel, const CauseGroup& group) {
    return sel.kind == AnnotationSelector::Kind::Transition && sel.name && *sel.name == group.transition;
}

namespace {

class Annotator {
public:
    Annotator(const AnnotationBase& base, std::vector<Warning>* warnings) : base_(base), warnings_(warnings) {}

    void node(ObservableNode& n) {
        if (!n.overlay.visible()) return;
        n.annotation = pick(n, n.element_id);
        count(n.annotation, n.element_id, display_name(n.observable.key));
        for (auto& g : n.cause_groups) {
            if (!g.overlay.visible()) continue;
            g.annotation = pick(g, g.element_id);
            reasons(g.reasons);
            for (auto& link : g.back_chain) this->link(link);
        }
    }

    CoverageReport report;

private:
    template <typename Element>
    std::optional<Annotation> pick(const Element& e, const std::string& id) {
        std::optional<Annotation> chosen;
        std::size_t matches = 0;
        for (const auto& entry : base_.entries) {
            if (!selector_matches(entry.selector, e)) continue;
            if (++matches == 1) chosen = Annotation{entry.snippet, entry.rule};
        }
        if (matches > 1 && warnings_)
            warnings_->push_back({"MultipleMatch", id + " matches " + std::to_string(matches) +
                                                       " annotation entries; the first one is used"});
        return chosen;
    }

    void count(const std::optional<Annotation>& a, const std::string& id, const std::string& text) {
        if (a)
            ++report.annotated;
        else
            report.unannotated.emplace_back(id, text);
    }

    void reasons(std::vector<ReasonAtom>& rs) {
        for (auto& r : rs) {
            if (!r.overlay.visible()) continue;
            r.annotation = pick(r, r.element_id);
            count(r.annotation, r.element_id, r.text);
        }
    }

    void link(BackLink& l) {
        if (!l.overlay.visible()) return;
        reasons(l.reasons);
        for (auto& c : l.children) link(c);
    }

    const AnnotationBase& base_;
    std::vector<Warning>* warnings_;
};

}  // namespace

CoverageReport apply_annotations(ExplanationModel& em, const AnnotationBase& base, std::vector<Warning>* warnings) {
    Annotator a(base, warnings);
    for (auto& n : em.roots) a.node(n);
    return a.report;
}

AnnotateResult annotate(const ExplanationModel& em, const AnnotationBase& base) {
    if (em.stage != Stage::EM3) throw StageMismatch("annotation expects EM3, got " + to_string(em.stage));
    AnnotateResult result{em, {}, {}};
    result.coverage = apply_annotations(result.em, base, &result.warnings);
    result.em.stage = Stage::EM4;
    result.em.provenance.annotations = base;
    return result;
}

std::string coverage_to_json(const CoverageReport& report) {
    json un = json::array();
    for (const auto& [id, text] : report.unannotated) un.push_back({{"element_id", id}, {"text", text}});
    return json{{"annotated", report.annotated}, {"unannotated", un}}.dump(2) + "\n";
}

}  // namespace tamex
