#include "tamex/validate.hpp"

#include <deque>
#include <limits>
#include <map>
#include <set>

namespace tamex {

std::string to_string(Diagnostic::Kind kind) {
    return kind == Diagnostic::Kind::Unreachable ? "UnreachableWarning" : "DeadlockWarning";
}

namespace {

std::int64_t constant_value(const TimedAutomaton& ta, const Expr& e) {
    return evaluate(e, [&ta](std::string_view n) -> std::int64_t {
        const auto* c = ta.find_constant(n);
        return c ? c->value : 0;
    });
}

// Tightest upper bound per clock in an invariant.
std::map<std::string, std::int64_t> upper_bounds(const TimedAutomaton& ta, const Location& loc) {
    std::map<std::string, std::int64_t> ub;
    for (const auto& cc : loc.invariant) {
        std::int64_t b = constant_value(ta, cc.bound);
        if (cc.rel == Relation::Less) b -= 1;
        if (cc.rel != Relation::Less && cc.rel != Relation::LessEqual && cc.rel != Relation::Equal) continue;
        auto [it, fresh] = ub.emplace(cc.clock, b);
        if (!fresh) it->second = std::min(it->second, b);
    }
    return ub;
}

bool can_ever_fire(const TimedAutomaton& ta, const Transition& t,
                   const std::map<std::string, std::int64_t>& ub) {
    for (const auto& g : t.guard) {
        const auto* cc = std::get_if<ClockConstraint>(&g);
        if (!cc) continue;
        auto it = ub.find(cc->clock);
        if (it == ub.end()) continue;
        std::int64_t lower = constant_value(ta, cc->bound);
        if (cc->rel == Relation::Greater) lower += 1;
        if (cc->rel == Relation::Greater || cc->rel == Relation::GreaterEqual || cc->rel == Relation::Equal)
            if (lower > it->second) return false;
    }
    return true;
}

}  // namespace

std::vector<Diagnostic> validate_model(const TimedAutomaton& ta) {
    std::vector<Diagnostic> out;

    std::set<std::string> reached{ta.initial_location};
    std::deque<std::string> frontier{ta.initial_location};
    while (!frontier.empty()) {
        auto loc = frontier.front();
        frontier.pop_front();
        for (const auto& t : ta.transitions)
            if (t.source == loc && reached.insert(t.target).second) frontier.push_back(t.target);
    }

    for (const auto& loc : ta.locations) {
        if (!reached.count(loc.id))
            out.push_back({Diagnostic::Kind::Unreachable, loc.id,
                           "location " + loc.id + " is unreachable from " + ta.initial_location});
        auto ub = upper_bounds(ta, loc);
        if (ub.empty()) continue;
        bool exit = false;
        for (const auto& t : ta.transitions)
            if (t.source == loc.id && can_ever_fire(ta, t, ub)) exit = true;
        if (!exit)
            out.push_back({Diagnostic::Kind::Deadlock, loc.id,
                           "location " + loc.id + " has an upper-bound invariant but no enabled exit"});
    }
    return out;
}

}  // namespace tamex
