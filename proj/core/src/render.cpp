#include <algorithm>

#include "tamex/runtime.hpp"

namespace tamex {

namespace {

std::string kind_summary(const ReasonInstance& r) {
    if (r.kind == ReasonKind::Reception) return "a message was received";
    if (std::holds_alternative<ClockConstraint>(r.atom)) return "a timing condition was met";
    if (std::holds_alternative<EnvCondition>(r.atom)) return "an environment condition held";
    return "a data condition held";
}

std::string side(const Expr& e, std::int64_t value) {
    if (e.is_literal()) return std::to_string(e.value);
    return to_string(e, Notation::Unicode) + " = " + std::to_string(value);
}

std::string valued(const ReasonInstance& r) {
    if (const auto* cc = std::get_if<ClockConstraint>(&r.atom))
        return cc->clock + " = " + std::to_string(r.lhs_value) + " " + to_string(cc->rel, Notation::Unicode) + " " +
               side(cc->bound, r.rhs_value);
    if (std::holds_alternative<EnvCondition>(r.atom)) {
        std::string plain = r.display;
        const std::string neg = "¬";
        if (plain.rfind(neg, 0) == 0) plain = plain.substr(neg.size());
        return plain + " = " + (r.lhs_value ? "true" : "false");
    }
    const auto& c = std::get<VarComparison>(r.atom).comparison;
    return side(c.lhs, r.lhs_value) + " " + to_string(c.rel, Notation::Unicode) + " " + side(c.rhs, r.rhs_value);
}

std::string default_how(const ObservableKey& key) {
    switch (key.kind) {
        case ObservableKind::CommOutput:
            return display_name(key) + " was sent";
        case ObservableKind::ControllerAction:
            return display_name(key) + " was performed";
        case ObservableKind::VarUpdate:
            return key.name + " was updated";
        case ObservableKind::ClockReset:
            return key.name + " was reset";
    }
    return display_name(key);
}

void push_unique(std::vector<std::string>& out, std::string s) {
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(std::move(s));
}

std::vector<std::string> why_clauses(const std::vector<ReasonInstance>& reasons, Verbosity verbosity) {
    std::vector<std::string> out;
    if (verbosity == Verbosity::Detailed) {
        for (const auto& r : reasons)
            if (r.visible) push_unique(out, render_reason(r, verbosity));
        return out;
    }
    for (const auto& r : reasons)
        if (r.visible && (r.annotation || r.kind != ReasonKind::Invariant)) push_unique(out, render_reason(r, verbosity));
    if (out.empty())
        for (const auto& r : reasons)
            if (r.visible) push_unique(out, render_reason(r, verbosity));
    return out;
}

std::string join_and(const std::vector<std::string>& parts) {
    if (parts.empty()) return "its preconditions held";
    std::string out = parts.front();
    for (std::size_t i = 1; i < parts.size(); ++i) out += " and " + parts[i];
    return out;
}

}  // namespace

std::string render_reason(const ReasonInstance& reason, Verbosity verbosity) {
    if (verbosity == Verbosity::Brief) return reason.annotation ? reason.annotation->snippet : kind_summary(reason);
    if (reason.annotation) return reason.annotation->snippet + " (" + valued(reason) + ")";
    return valued(reason);
}

void render_explanation(ExplanationPath& path, Verbosity verbosity) {
    path.rendered_how = path.how_annotation ? path.how_annotation->snippet : default_how(path.observable);
    if (verbosity == Verbosity::Detailed)
        path.rendered_how += " at t = " + std::to_string(path.timestamp) + " via " + path.transition;
    path.rendered_why = why_clauses(path.reasons, verbosity);
    path.rendered = path.rendered_how + ", because " + join_and(path.rendered_why);
    for (const auto& step : path.back_chain) {
        std::string how;
        if (step.how_annotation)
            how = step.how_annotation->snippet;
        else if (!step.observables.empty())
            how = default_how(step.observables.front());
        else
            how = step.transition + " was taken";
        if (verbosity == Verbosity::Detailed) how += " at t = " + std::to_string(step.timestamp);
        path.rendered += "; before that, " + how + ", because " + join_and(why_clauses(step.reasons, verbosity));
    }
}

}  // namespace tamex
