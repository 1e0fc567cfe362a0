#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "tamex/explanation_model.hpp"

namespace tamex {

// Shared explanation-model format used by every stage, the CLI and the service.
nlohmann::json em_to_json(const ExplanationModel& em);
ExplanationModel em_from_json(const nlohmann::json& doc);

std::string serialize_em(const ExplanationModel& em);
ExplanationModel parse_em(std::string_view text);

nlohmann::json guard_atom_to_json(const GuardAtom& atom);
nlohmann::json selector_to_json(const AnnotationSelector& sel);
AnnotationSelector selector_from_json(const nlohmann::json& j);
nlohmann::json annotations_to_json(const AnnotationBase& base);
// No duplicate check here; see load_annotations.
AnnotationBase annotations_from_json(const nlohmann::json& j);

// Parses text, mapping JSON syntax errors to SyntaxError with a line number.
nlohmann::json parse_json_document(std::string_view text);

}  // namespace tamex
