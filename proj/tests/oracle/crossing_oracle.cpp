#include "crossing_oracle.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace oracle {

CrossingSim::CrossingSim() { belief_[State{}] = {}; }

bool CrossingSim::invariant_ok(const State& s) {
    switch (s.loc) {
        case 1:
            return s.x <= kTw;
        case 2:
            return s.x <= kTp;
        case 3:
            return s.x <= kTd;
        default:
            return true;
    }
}

bool CrossingSim::reception_holds(const State& s, std::int64_t payload) {
    if (s.loc == 1) return payload >= s.pE;
    if (s.loc == 2) return payload >= s.pE + kS;
    return false;
}

std::vector<CrossingSim::Move> CrossingSim::internal_moves(const State& s) const {
    std::vector<Move> out;
    auto add = [&](State n, const char* id, std::vector<std::string> obs) {
        if (invariant_ok(n)) out.push_back({n, id, std::move(obs), s});
    };
    if (s.loc == 0 && cr_) {
        State n = s;
        n.loc = 1;
        n.x = 0;
        add(n, "q0_q1", {"output:prio"});
    }
    if (s.loc == 1 && coll_) {
        State n = s;
        n.loc = 0;
        n.count_a += 1;
        add(n, "q1_q0_coll", {"ctrl:abort", "update:count_a"});
    }
    if (s.loc == 1 && s.x >= kTw && !coll_) {
        State n = s;
        n.loc = 2;
        n.x = 0;
        add(n, "q1_q2", {"ctrl:prepare"});
    }
    if (s.loc == 2 && s.x >= kTp && !coll_) {
        State n = s;
        n.loc = 3;
        n.count_m += 1;
        n.x = 0;
        add(n, "q2_q3", {"ctrl:start", "update:count_m"});
    }
    if (s.loc == 3 && s.x >= kTd) {
        State n = s;
        n.loc = 0;
        add(n, "q3_q0", {"ctrl:finish"});
    }
    return out;
}

void CrossingSim::settle(Belief& b, const std::set<State>& frozen) {
    Belief out;
    for (const auto& [s, emitted] : b) {
        auto moves = frozen.count(s) ? std::vector<Move>{} : internal_moves(s);
        if (moves.empty()) {
            out[s].insert(emitted.begin(), emitted.end());
            continue;
        }
        for (const auto& m : moves) {
            auto& slot = out[m.next];
            slot.insert(emitted.begin(), emitted.end());
            for (const auto& o : m.observables) {
                slot.insert(o);
                log_.push_back({now_, m.transition, o, m.before});
            }
        }
    }
    b = std::move(out);
}

void CrossingSim::tick() {
    ++now_;
    Belief next;
    for (const auto& [s, emitted] : belief_) {
        State n = s;
        n.x = std::min(n.x + 1, kClockCap);
        if (n.loc == 1) n.pE += 1;
        if (invariant_ok(n)) next[n];
    }
    settle(next, {});
    belief_ = std::move(next);
}

void CrossingSim::apply(const tamex::Event& e) {
    if (novel_) {
        if (e.kind == tamex::Event::Kind::EnvUpdate) (e.name == "cr_ahead" ? cr_ : coll_) = e.flag;
        now_ = e.kind == tamex::Event::Kind::TimeAdvance ? e.timestamp + e.value : e.timestamp;
        return;
    }
    const Belief saved = belief_;
    const std::size_t saved_log = log_.size();
    while (now_ < e.timestamp && !belief_.empty()) tick();
    now_ = e.timestamp;
    switch (e.kind) {
        case tamex::Event::Kind::EnvUpdate:
            (e.name == "cr_ahead" ? cr_ : coll_) = e.flag;
            settle(belief_, {});
            break;
        case tamex::Event::Kind::TimeAdvance:
            for (std::int64_t i = 0; i < e.value && !belief_.empty(); ++i) tick();
            now_ = e.timestamp + e.value;
            break;
        case tamex::Event::Kind::Broadcast: {
            Belief next;
            std::set<State> received;
            for (const auto& [s, emitted] : belief_) {
                if (!reception_holds(s, e.value)) {
                    next[s].insert(emitted.begin(), emitted.end());
                    continue;
                }
                State before = s;
                before.pc = e.value;
                State n = before;
                n.loc = 0;
                n.count_a += 1;
                const char* id = s.loc == 1 ? "q1_q0_prio" : "q2_q0";
                log_.push_back({now_, id, "ctrl:abort", before});
                log_.push_back({now_, id, "update:count_a", before});
                auto& slot = next[n];
                slot.insert(emitted.begin(), emitted.end());
                slot.insert("ctrl:abort");
                slot.insert("update:count_a");
                received.insert(n);
            }
            // Receivers do not move again in the same round. A receiver that
            // coincides with a non-receiver would be ambiguous; the crossing
            // model never produces that because receivers land in q0 with a
            // bumped abort counter.
            settle(next, received);
            belief_ = std::move(next);
            break;
        }
        case tamex::Event::Kind::ActionObserved: {
            const std::string key = tamex::selector_text({e.observable_kind, e.name});
            static const std::set<std::string> known{"output:prio",   "ctrl:abort",     "ctrl:prepare",
                                                     "ctrl:start",    "ctrl:finish",    "update:count_m",
                                                     "update:count_a"};
            Belief kept;
            if (known.count(key))
                for (const auto& [s, emitted] : belief_)
                    if (emitted.count(key)) kept[s] = emitted;
            belief_ = std::move(kept);
            break;
        }
    }
    if (belief_.empty()) {
        novel_ = true;
        belief_ = saved;
        log_.resize(saved_log);
    }
}

std::set<State> CrossingSim::belief() const {
    std::set<State> out;
    for (const auto& [s, e] : belief_) out.insert(s);
    return out;
}

std::set<std::string> CrossingSim::emitted_now() const {
    std::set<std::string> out;
    for (const auto& [s, e] : belief_) out.insert(e.begin(), e.end());
    return out;
}

std::map<std::string, std::int64_t> CrossingSim::earliest(std::int64_t horizon) const {
    // Plain breadth-first search over (state, time) on a scratch copy.
    CrossingSim scratch = *this;
    scratch.log_.clear();
    for (std::int64_t i = 0; i < horizon && !scratch.belief_.empty(); ++i) scratch.tick();
    std::map<std::string, std::int64_t> out;
    for (const auto& em : scratch.log_)
        if (!out.count(em.observable)) out[em.observable] = em.t;
    return out;
}

State to_state(const tamex::TimedAutomaton& ta, const tamex::Configuration& c) {
    State s;
    s.loc = c.location.size() == 2 && c.location[0] == 'q' ? c.location[1] - '0' : -1;
    s.x = c.clocks.at(0);
    for (std::size_t i = 0; i < ta.variables.size(); ++i) {
        const auto& n = ta.variables[i].name;
        const auto v = c.variables.at(i);
        if (n == "pE")
            s.pE = v;
        else if (n == "pc")
            s.pc = v;
        else if (n == "count_m")
            s.count_m = v;
        else if (n == "count_a")
            s.count_a = v;
        else
            throw std::logic_error("unexpected variable " + n);
    }
    return s;
}

std::set<State> to_states(const tamex::TimedAutomaton& ta, const tamex::BeliefState& b) {
    std::set<State> out;
    for (const auto& c : b.configurations) out.insert(to_state(ta, c));
    return out;
}

std::string describe(const State& s) {
    return "(q" + std::to_string(s.loc) + ", x=" + std::to_string(s.x) + ", pE=" + std::to_string(s.pE) +
           ", pc=" + std::to_string(s.pc) + ", count_m=" + std::to_string(s.count_m) +
           ", count_a=" + std::to_string(s.count_a) + ")";
}

}  // namespace oracle
