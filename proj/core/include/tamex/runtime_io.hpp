#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tamex/runtime.hpp"

namespace tamex {

// Trace format: JSON-lines, one event per line.
//   {"t":0,"kind":"env","pred":"cr_ahead","val":true}
//   {"t":6,"kind":"broadcast","chan":"prio","val":100}
//   {"t":0,"kind":"advance","delta":5}
//   {"t":6,"kind":"observed","observable":"ctrl:abort"}
// Blank lines and lines starting with '#' are skipped.
nlohmann::json event_to_json(const Event& e);
Event event_from_json(const nlohmann::json& j);
std::vector<Event> parse_trace(std::string_view text);
std::string serialize_trace(const std::vector<Event>& events);

nlohmann::json taken_to_json(const TakenTransition& t);
TakenTransition taken_from_json(const nlohmann::json& j);

nlohmann::json configuration_to_json(const TimedAutomaton& ta, const Configuration& c);
Configuration configuration_from_json(const TimedAutomaton& ta, const nlohmann::json& j);
nlohmann::json belief_to_json(const TimedAutomaton& ta, const BeliefState& b);

nlohmann::json analyse_to_json(const AnalyseConfig& a);
AnalyseConfig analyse_from_json(const nlohmann::json& j);

nlohmann::json feedback_record_to_json(const FeedbackRecord& f);
FeedbackRecord feedback_record_from_json(const nlohmann::json& j);
// {"kind":"helpful","value":true} | {"kind":"more_detail","target":"abort"} | {"kind":"hide_branch","target":"start"}
Feedback feedback_from_json(const nlohmann::json& j);

nlohmann::json occurrence_to_json(const Occurrence& o);
nlohmann::json path_to_json(const ExplanationPath& p);
nlohmann::json lookahead_to_json(const std::vector<LookaheadEntry>& entries, std::int64_t now, std::int64_t horizon);
nlohmann::json visibility_to_json(const VisibilitySummary& v);

}  // namespace tamex
