#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tamex/error.hpp"
#include "tamex/explanation_model.hpp"

namespace tamex {

// Parses the annotation format, a JSON list of {selector, snippet, rule?}.
// Throws SyntaxError, or DuplicateSelector when two entries share a selector.
AnnotationBase load_annotations(std::string_view document);
std::string serialize_annotations(const AnnotationBase& base);

struct CoverageReport {
    std::size_t annotated = 0;
    std::vector<std::pair<std::string, std::string>> unannotated;  // element id, atom text
};

struct AnnotateResult {
    ExplanationModel em;
    CoverageReport coverage;
    std::vector<Warning> warnings;  // MultipleMatch
};

bool selector_matches(const AnnotationSelector& sel, const ReasonAtom& reason);
bool selector_matches(const AnnotationSelector& sel, const ObservableNode& node);
bool selector_matches(const AnnotationSelector& sel, const CauseGroup& group);

// EM3 -> EM4. Only visible elements are annotated; the first matching entry in
// declaration order wins. Structure and visibility are left untouched.
AnnotateResult annotate(const ExplanationModel& em, const AnnotationBase& base);

// Same matching on a model of any stage, in place. Used after run-time reveals.
CoverageReport apply_annotations(ExplanationModel& em, const AnnotationBase& base, std::vector<Warning>* warnings);

std::string coverage_to_json(const CoverageReport& report);

}  // namespace tamex
