#pragma once

#include <string>
#include <string_view>

#include "tamex/model.hpp"

namespace tamex {

// Parses a model-format (JSON) document. The result satisfies referential
// closure: every symbol used in a guard, invariant, sync or action is declared.
// Throws SyntaxError, UndeclaredSymbol, DuplicateId or MissingInitialLocation.
TimedAutomaton parse_model(std::string_view source_text);

// Canonical document; an empty guard is written as the literal "true".
std::string serialize_model(const TimedAutomaton& ta);

// Stable 64-bit FNV-1a digest of the canonical serialization, hex encoded.
std::string model_digest(const TimedAutomaton& ta);

// Re-checks referential closure and id uniqueness on an in-memory automaton.
void check_model(const TimedAutomaton& ta);

}  // namespace tamex
