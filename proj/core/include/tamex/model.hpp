#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tamex/expr.hpp"

namespace tamex {

enum class Domain { Int, Bool };

struct VariableDecl {
    std::string name;
    Domain domain = Domain::Int;
    std::int64_t initial = 0;

    bool operator==(const VariableDecl&) const = default;
};

struct ChannelDecl {
    std::string name;
    int arity = 1;

    bool operator==(const ChannelDecl&) const = default;
};

// A boolean supplied by the environment, e.g. path_coll. `display` is the
// spelling used in explanations ("path_coll(E)").
struct EnvPredicateDecl {
    std::string name;
    std::string display;

    bool operator==(const EnvPredicateDecl&) const = default;
};

struct ConstantDecl {
    std::string name;
    std::int64_t value = 0;

    bool operator==(const ConstantDecl&) const = default;
};

// clock `rel` bound; the bound is an integer literal or a constant symbol.
struct ClockConstraint {
    std::string clock;
    Relation rel = Relation::LessEqual;
    Expr bound;

    bool operator==(const ClockConstraint&) const = default;
};

struct EnvCondition {
    std::string predicate;
    bool negated = false;

    bool operator==(const EnvCondition&) const = default;
};

struct VarComparison {
    Comparison comparison;

    bool operator==(const VarComparison&) const = default;
};

using GuardAtom = std::variant<ClockConstraint, EnvCondition, VarComparison>;

struct OutputSync {
    std::string channel;
    Expr payload;

    bool operator==(const OutputSync&) const = default;
};

// chan?[variable] : predicate. The received payload is bound to `variable`
// before the predicate is evaluated.
struct InputSync {
    std::string channel;
    std::string variable;
    Comparison predicate;

    bool operator==(const InputSync&) const = default;
};

using Sync = std::variant<OutputSync, InputSync>;

struct ControllerAction {
    std::string name;

    bool operator==(const ControllerAction&) const = default;
};

struct VarUpdate {
    std::string variable;
    Expr value;

    bool operator==(const VarUpdate&) const = default;
};

struct ClockReset {
    std::string clock;

    bool operator==(const ClockReset&) const = default;
};

using Action = std::variant<ControllerAction, VarUpdate, ClockReset>;

struct Location {
    std::string id;
    std::string name;
    std::vector<ClockConstraint> invariant;

    bool operator==(const Location&) const = default;
};

struct Transition {
    std::string id;
    std::string source;
    std::string target;
    std::vector<GuardAtom> guard;
    std::optional<Sync> sync;
    std::vector<Action> actions;

    const InputSync* input() const noexcept {
        return sync ? std::get_if<InputSync>(&*sync) : nullptr;
    }
    const OutputSync* output() const noexcept {
        return sync ? std::get_if<OutputSync>(&*sync) : nullptr;
    }

    bool operator==(const Transition&) const = default;
};

// Engine-side rule: while a configuration stays in `location`, `variable`
// grows by `increment` per elapsed time unit (the waiting priority).
struct WaitingRule {
    std::string location;
    std::string variable;
    std::int64_t increment = 1;

    bool operator==(const WaitingRule&) const = default;
};

struct TimedAutomaton {
    std::string name;
    std::vector<std::string> clocks;
    std::vector<VariableDecl> variables;
    std::vector<ChannelDecl> channels;
    std::vector<EnvPredicateDecl> env_predicates;
    std::vector<ConstantDecl> constants;
    std::vector<Location> locations;
    std::vector<Transition> transitions;
    std::string initial_location;
    std::vector<WaitingRule> waiting_rules;

    const Location* find_location(std::string_view id) const noexcept;
    const Transition* find_transition(std::string_view id) const noexcept;
    std::optional<std::size_t> transition_index(std::string_view id) const noexcept;
    const VariableDecl* find_variable(std::string_view n) const noexcept;
    const ConstantDecl* find_constant(std::string_view n) const noexcept;
    const EnvPredicateDecl* find_env_predicate(std::string_view n) const noexcept;
    const ChannelDecl* find_channel(std::string_view n) const noexcept;
    bool is_clock(std::string_view n) const noexcept;

    // Largest value any clock is compared against, over guards and invariants.
    std::int64_t max_clock_bound() const;

    bool operator==(const TimedAutomaton&) const = default;
};

// Canonical text of a guard or invariant atom. Env predicates use their
// display spelling when the automaton declares one.
std::string atom_text(const TimedAutomaton& ta, const GuardAtom& atom, Notation notation);
std::string atom_text(const ClockConstraint& cc, Notation notation);
std::string env_display(const TimedAutomaton& ta, std::string_view predicate);

}  // namespace tamex
