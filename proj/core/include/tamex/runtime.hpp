#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tamex/error.hpp"
#include "tamex/explanation_model.hpp"
#include "tamex/model.hpp"
#include "tamex/slicing.hpp"

namespace tamex {

// Discrete-time run-time semantics
// --------------------------------
// Time advances in unit ticks. A tick first lets time elapse (clocks grow by
// one, capped at max_clock_bound() + 1; waiting rules bump their variable;
// configurations that would violate their location invariant are dropped),
// then runs a settle round. In a settle round every configuration takes each
// enabled internal transition (no input sync) eagerly; several enabled
// transitions branch the belief, none leaves the configuration in place. At
// most one discrete step per configuration happens per round.
//
// Events are applied at their timestamp: an event at t > now first advances
// time to t. EnvUpdate then runs a settle round. Broadcast forces every
// configuration whose guarded input on that channel is satisfied to take it;
// the others get a settle round. ActionObserved keeps only configurations
// that emitted the observable at the current instant.

struct Event {
    enum class Kind { EnvUpdate, Broadcast, TimeAdvance, ActionObserved };

    std::int64_t timestamp = 0;
    Kind kind = Kind::TimeAdvance;
    std::string name;        // predicate, channel, or observable name
    bool flag = false;       // EnvUpdate value
    std::int64_t value = 0;  // Broadcast payload or TimeAdvance delta
    ObservableKind observable_kind = ObservableKind::ControllerAction;

    static Event env(std::int64_t t, std::string pred, bool value);
    static Event broadcast(std::int64_t t, std::string chan, std::int64_t payload);
    static Event advance(std::int64_t t, std::int64_t delta);
    static Event observed(std::int64_t t, ObservableKey key);

    bool operator==(const Event&) const = default;
};

struct Configuration {
    std::string location;
    std::vector<std::int64_t> clocks;     // in TimedAutomaton::clocks order
    std::vector<std::int64_t> variables;  // in TimedAutomaton::variables order

    auto operator<=>(const Configuration&) const = default;
    bool operator==(const Configuration&) const = default;
};

struct BeliefState {
    std::vector<Configuration> configurations;  // sorted, no duplicates
    std::int64_t time = 0;

    bool operator==(const BeliefState&) const = default;
};

struct EmittedObservable {
    ObservableKey key;
    std::optional<std::int64_t> payload;  // output payload

    bool operator==(const EmittedObservable&) const = default;
};

struct TakenTransition {
    std::int64_t timestamp = 0;
    std::string transition;
    // Every clock, variable, constant and env predicate (0/1) at the moment
    // the transition fired, before its actions; a received payload is already
    // bound to the input variable.
    std::map<std::string, std::int64_t> valuation;
    std::vector<EmittedObservable> emitted;

    bool operator==(const TakenTransition&) const = default;
};

struct AnalyseConfig {
    std::vector<ObservableSelector> triggers;
    bool always_on = false;
};

struct SessionOptions {
    // Lets MoreDetail reveal content the purpose slice (EM2) hid.
    bool reveal_purpose_hidden = false;
};

struct SessionFlags {
    bool novel_situation = false;
    bool model_update_needed = false;

    bool operator==(const SessionFlags&) const = default;
};

struct Occurrence {
    ObservableKey observable;
    std::int64_t timestamp = 0;
    std::string transition;
    std::size_t taken_index = 0;

    bool operator==(const Occurrence&) const = default;
};

struct ReasonInstance {
    std::string element_id;
    ReasonKind kind = ReasonKind::Guard;
    GuardAtom atom;
    std::string text;
    std::string display;
    std::map<std::string, std::int64_t> values;  // symbols the atom mentions
    std::int64_t lhs_value = 0;
    std::int64_t rhs_value = 0;
    bool holds = false;
    bool visible = true;
    std::optional<Annotation> annotation;
};

struct ChainStep {
    std::string transition;
    std::int64_t timestamp = 0;
    std::vector<ObservableKey> observables;
    std::optional<Annotation> how_annotation;  // of the first observable, if visible
    std::vector<ReasonInstance> reasons;
};

struct ExplanationPath {
    ObservableKey observable;
    std::int64_t timestamp = 0;
    std::string transition;
    std::string cause_group;
    std::optional<Annotation> how_annotation;
    std::vector<ReasonInstance> reasons;
    std::vector<ChainStep> back_chain;
    std::string rendered_how;
    std::vector<std::string> rendered_why;
    std::string rendered;
};

struct LookaheadEntry {
    ObservableKey observable;
    std::int64_t earliest = 0;
    std::vector<std::string> witness;  // transitions from the current belief

    bool operator==(const LookaheadEntry&) const = default;
};

struct Feedback {
    enum class Kind { Helpful, MoreDetail, HideBranch };

    Kind kind = Kind::Helpful;
    bool helpful = false;
    std::optional<ObservableSelector> target;

    static Feedback rating(bool helpful);
    static Feedback more_detail(ObservableSelector target);
    static Feedback hide_branch(ObservableSelector target);
};

struct FeedbackRecord {
    std::int64_t time = 0;
    std::string kind;  // helpful | more_detail | hide_branch
    std::string target;
    std::optional<bool> helpful;
    std::string outcome;

    bool operator==(const FeedbackRecord&) const = default;
};

struct VisibilitySummary {
    std::size_t visible_nodes = 0;
    std::size_t visible_groups = 0;
    std::size_t visible_reasons = 0;
    std::map<std::string, int> reveal_depth;  // node element id -> depth
};

// Renders "<how>, because <why> and <why>". Annotated atoms use their
// snippets. Unannotated atoms are summarised by kind under Brief and spelled
// out with values under Detailed. Brief leaves out unannotated invariants
// unless nothing else would be said.
void render_explanation(ExplanationPath& path, Verbosity verbosity);
std::string render_reason(const ReasonInstance& reason, Verbosity verbosity);

class Session {
public:
    // Deploys EM5 from EM4 for one explainee. Throws ProvenanceMismatch when
    // the model does not belong to the automaton, StageMismatch when the
    // input is not EM4, UnknownNode for unresolvable triggers.
    static Session create(const ExplanationModel& em4, const TimedAutomaton& ta, const ExplaineeProfile& profile,
                          const AnalyseConfig& analyse, SessionOptions options = {}, std::string id = "session");

    // Applies one event. Throws TimestampRegression or InvalidEvent.
    void step(const Event& event);

    std::optional<Occurrence> needs_explanation() const;

    // Occurrence 0 is the latest. Throws NotObserved or HiddenForExplainee.
    ExplanationPath build_explanation(const ObservableSelector& observable, std::size_t occurrence = 0) const;

    // Earliest time of each visible observable within `horizon` ticks, with the
    // environment frozen and no further broadcasts. Throws NovelSituationFrozen.
    std::vector<LookaheadEntry> lookahead(std::int64_t horizon) const;

    // Throws UnknownNode or NothingMoreToReveal.
    VisibilitySummary apply_feedback(const Feedback& feedback);
    VisibilitySummary visibility() const;

    const std::string& id() const noexcept { return id_; }
    const std::string& explainee() const noexcept { return profile_.id; }
    const ExplaineeProfile& profile() const noexcept { return profile_; }
    const AnalyseConfig& analyse() const noexcept { return analyse_; }
    const TimedAutomaton& automaton() const noexcept { return ta_; }
    const ExplanationModel& em5() const noexcept { return em5_; }
    const std::vector<Event>& trace() const noexcept { return trace_; }
    const std::vector<TakenTransition>& taken() const noexcept { return taken_; }
    BeliefState belief() const;
    std::int64_t now() const noexcept { return now_; }
    const SessionFlags& flags() const noexcept { return flags_; }
    const std::vector<FeedbackRecord>& feedback_log() const noexcept { return feedback_; }
    const std::map<std::string, bool>& environment() const noexcept { return env_; }

    std::string snapshot() const;
    static Session restore(std::string_view snapshot);

    struct Entry {
        Configuration config;
        std::set<ObservableKey> emitted_now;

        bool operator==(const Entry&) const = default;
    };

private:
    Session() = default;

    const ObservableNode* resolve(const ObservableSelector& sel) const;
    ObservableNode* resolve(const ObservableSelector& sel);
    void advance_to(std::int64_t t);

    std::string id_;
    TimedAutomaton ta_;
    ExplaineeProfile profile_;
    AnalyseConfig analyse_;
    SessionOptions options_;
    ExplanationModel em5_;
    std::vector<Event> trace_;
    std::vector<TakenTransition> taken_;
    std::vector<Entry> belief_;
    std::map<std::string, bool> env_;
    std::int64_t now_ = 0;
    SessionFlags flags_;
    std::vector<FeedbackRecord> feedback_;
};

// Initial configuration: initial location, clocks at 0, declared initial values.
Configuration initial_configuration(const TimedAutomaton& ta);

// Re-evaluates a reason atom against a recorded valuation.
bool atom_holds(const GuardAtom& atom, const std::map<std::string, std::int64_t>& valuation);

}  // namespace tamex
