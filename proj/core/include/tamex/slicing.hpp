#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tamex/explanation_model.hpp"
#include "tamex/extraction.hpp"

namespace tamex {

// Matches observables by name, optionally restricted to one kind.
// Text form: "abort" or "ctrl:abort".
struct ObservableSelector {
    std::optional<ObservableKind> kind;
    std::string name;

    bool matches(const ObservableKey& key) const noexcept {
        return key.name == name && (!kind || *kind == key.kind);
    }
    bool operator==(const ObservableSelector&) const = default;
};

ObservableSelector parse_observable_selector(std::string_view text);
std::string to_string(const ObservableSelector& sel);

struct ExplanationPurpose {
    std::string name;
    std::vector<ObservableSelector> relevant_observables;
};

enum class ExplaineeType { EndUser, Engineer, System, Custom };
enum class SuppressedKind { VarUpdateNodes, ClockResetNodes, InternalComparisons };
enum class Verbosity { Brief, Detailed };

std::string to_string(ExplaineeType type);
std::string to_string(Verbosity verbosity);
Verbosity parse_verbosity(std::string_view text);

struct ExplaineeProfile {
    std::string id;
    ExplaineeType type = ExplaineeType::Custom;
    std::vector<ObservableSelector> relevant_observables;
    std::set<SuppressedKind> suppressed;
    Verbosity verbosity = Verbosity::Brief;
};

ExplanationPurpose parse_purpose(std::string_view text);
std::string serialize_purpose(const ExplanationPurpose& purpose);
ExplaineeProfile parse_profile(std::string_view text);
std::string serialize_profile(const ExplaineeProfile& profile);

// True for data comparisons and reception predicates that mention no named
// constant, i.e. comparisons among internal variables only (pc >= pE).
bool is_internal_comparison(const ReasonAtom& reason);

// EM1 -> EM2. Nodes matching no purpose selector are hidden (stage tag EM2)
// together with everything below them. Throws StageMismatch on other stages.
StageResult slice_by_purpose(const ExplanationModel& em, const ExplanationPurpose& purpose);

// EM2 -> EM3. Additionally hides nodes outside the profile, nodes of
// suppressed kinds and, if requested, internal comparison reasons.
StageResult slice_by_profile(const ExplanationModel& em, const ExplaineeProfile& profile);

// Copy without hidden elements and with every overlay flag cleared.
ExplanationModel visible_view(const ExplanationModel& em);

// Clears hidden_by and user_hidden on every element.
ExplanationModel unhide_all(const ExplanationModel& em);

// Marks an element subtree hidden by `stage`, leaving earlier marks intact.
void hide_subtree(ObservableNode& node, Stage stage);

}  // namespace tamex
