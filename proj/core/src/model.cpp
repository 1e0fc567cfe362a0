#include "tamex/model.hpp"

#include <algorithm>

namespace tamex {

namespace {

template <typename T>
const T* find_named(const std::vector<T>& items, std::string_view n) noexcept {
    auto it = std::find_if(items.begin(), items.end(), [n](const T& t) { return t.name == n; });
    return it == items.end() ? nullptr : &*it;
}

}  // namespace

const Location* TimedAutomaton::find_location(std::string_view id) const noexcept {
    auto it = std::find_if(locations.begin(), locations.end(),
                           [id](const Location& l) { return l.id == id; });
    return it == locations.end() ? nullptr : &*it;
}

const Transition* TimedAutomaton::find_transition(std::string_view id) const noexcept {
    auto idx = transition_index(id);
    return idx ? &transitions[*idx] : nullptr;
}

std::optional<std::size_t> TimedAutomaton::transition_index(std::string_view id) const noexcept {
    for (std::size_t i = 0; i < transitions.size(); ++i)
        if (transitions[i].id == id) return i;
    return std::nullopt;
}

const VariableDecl* TimedAutomaton::find_variable(std::string_view n) const noexcept {
    return find_named(variables, n);
}

const ConstantDecl* TimedAutomaton::find_constant(std::string_view n) const noexcept {
    return find_named(constants, n);
}

const EnvPredicateDecl* TimedAutomaton::find_env_predicate(std::string_view n) const noexcept {
    return find_named(env_predicates, n);
}

const ChannelDecl* TimedAutomaton::find_channel(std::string_view n) const noexcept {
    return find_named(channels, n);
}

bool TimedAutomaton::is_clock(std::string_view n) const noexcept {
    return std::find(clocks.begin(), clocks.end(), n) != clocks.end();
}

std::int64_t TimedAutomaton::max_clock_bound() const {
    std::int64_t best = 0;
    auto resolve = [this](std::string_view n) -> std::int64_t {
        const auto* c = find_constant(n);
        return c ? c->value : 0;
    };
    auto visit = [&](const ClockConstraint& cc) { best = std::max(best, evaluate(cc.bound, resolve)); };
    for (const auto& loc : locations)
        for (const auto& cc : loc.invariant) visit(cc);
    for (const auto& t : transitions)
        for (const auto& g : t.guard)
            if (const auto* cc = std::get_if<ClockConstraint>(&g)) visit(*cc);
    return best;
}

std::string env_display(const TimedAutomaton& ta, std::string_view predicate) {
    const auto* decl = ta.find_env_predicate(predicate);
    if (decl && !decl->display.empty()) return decl->display;
    return std::string(predicate) + "()";
}

std::string atom_text(const ClockConstraint& cc, Notation notation) {
    return cc.clock + " " + to_string(cc.rel, notation) + " " + to_string(cc.bound, notation);
}

std::string atom_text(const TimedAutomaton& ta, const GuardAtom& atom, Notation notation) {
    if (const auto* cc = std::get_if<ClockConstraint>(&atom)) return atom_text(*cc, notation);
    if (const auto* env = std::get_if<EnvCondition>(&atom)) {
        std::string text = env_display(ta, env->predicate);
        if (env->negated) text = (notation == Notation::Unicode ? "¬" : "!") + text;
        return text;
    }
    return to_string(std::get<VarComparison>(atom).comparison, notation);
}

}  // namespace tamex
