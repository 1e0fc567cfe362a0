#pragma once

#include <string>
#include <vector>

#include "tamex/error.hpp"
#include "tamex/explanation_model.hpp"
#include "tamex/model.hpp"

namespace tamex {

struct StageResult {
    ExplanationModel em;
    std::vector<Warning> warnings;
};

// Observables emitted by one transition, in emission order (sync output first,
// then actions), paired with the automaton element that produces each one.
std::vector<std::pair<ObservableKey, std::string>> transition_observables(const Transition& t,
                                                                          const ExtractionConfig& config);

// One Observable per distinct (kind, name), ordered by first occurrence in
// transition declaration order. Clock resets only when the config asks for them.
std::vector<Observable> enumerate_observables(const TimedAutomaton& ta, const ExtractionConfig& config);

// Reason atoms of a transition: its guard atoms, then the invariant atoms of
// its source location, then the reception predicate of a guarded input.
std::vector<ReasonAtom> transition_reasons(const TimedAutomaton& ta, const Transition& t,
                                           const std::string& id_prefix);

// All loop-free predecessor sequences t_k..t_1,from with at most depth
// predecessors. No location occurs twice as a source within a sequence.
// Sorted lexicographically by transition declaration index.
std::vector<std::vector<std::string>> backward_paths(const TimedAutomaton& ta, const std::string& from_transition,
                                                     int depth);

// Builds EM1. Emits a NoObservables warning when the model has nothing to explain.
StageResult extract_em1(const TimedAutomaton& ta, const ExtractionConfig& config = {});

std::string node_element_id(const ObservableKey& key);

}  // namespace tamex
