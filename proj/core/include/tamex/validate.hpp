#pragma once

#include <string>
#include <vector>

#include "tamex/model.hpp"

namespace tamex {

struct Diagnostic {
    enum class Kind { Unreachable, Deadlock };

    Kind kind = Kind::Unreachable;
    std::string element;  // location id
    std::string message;

    bool operator==(const Diagnostic&) const = default;
};

std::string to_string(Diagnostic::Kind kind);

// Structural completeness warnings; an empty list means the model is clean.
//  - Unreachable: no transition path from the initial location.
//  - Deadlock: the location has an upper-bound invariant but no exit that
//    could ever be enabled (no outgoing transitions, or every outgoing
//    transition needs a clock lower bound beyond the invariant's upper bound).
std::vector<Diagnostic> validate_model(const TimedAutomaton& ta);

}  // namespace tamex
