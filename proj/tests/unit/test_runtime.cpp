#include <gtest/gtest.h>

#include <json.hpp>

#include "oracle/crossing_oracle.hpp"
#include "support/fixtures.hpp"
#include "tamex/error.hpp"
#include "tamex/runtime.hpp"

using namespace tamex;
using fixtures::abort_sel;
using fixtures::start_sel;

namespace {

const TimedAutomaton& ta() { return fixtures::crossing().model; }

std::vector<std::string> transitions(const Session& s) {
    std::vector<std::string> out;
    for (const auto& t : s.taken()) out.push_back(std::to_string(t.timestamp) + ":" + t.transition);
    return out;
}

oracle::State only(const Session& s) {
    const auto b = oracle::to_states(ta(), s.belief());
    EXPECT_EQ(b.size(), 1u);
    return *b.begin();
}

}  // namespace

TEST(Runtime, InitialConfiguration) {
    const auto c = initial_configuration(ta());
    EXPECT_EQ(c.location, "q0");
    EXPECT_EQ(c.clocks, std::vector<std::int64_t>{0});
    EXPECT_EQ(c.variables, (std::vector<std::int64_t>{0, 0, 0, 0}));
    Session s = fixtures::session(fixtures::enduser());
    EXPECT_EQ(s.now(), 0);
    EXPECT_EQ(s.belief().configurations, std::vector<Configuration>{c});
    EXPECT_FALSE(s.environment().at("cr_ahead"));
    EXPECT_FALSE(s.environment().at("path_coll"));
}

TEST(Runtime, ClearTraceRunsTheManoeuvre) {
    Session s = fixtures::replay("clear", fixtures::engineer());
    EXPECT_EQ(transitions(s),
              (std::vector<std::string>{"0:q0_q1", "5:q1_q2", "7:q2_q3", "11:q3_q0", "12:q0_q1"}));
    EXPECT_EQ(s.now(), 12);
    const auto st = only(s);
    EXPECT_EQ(st.loc, 1);
    EXPECT_EQ(st.count_m, 1);
    EXPECT_EQ(st.pE, 5);
    // prio! carries the waiting priority as payload.
    ASSERT_TRUE(s.taken()[0].emitted[0].payload);
    EXPECT_EQ(*s.taken()[0].emitted[0].payload, 0);
    EXPECT_EQ(*s.taken()[4].emitted[0].payload, 5);
}

TEST(Runtime, CollisionAbortsFromCrossingAhead) {
    Session s = fixtures::replay("collision", fixtures::engineer());
    ASSERT_GE(s.taken().size(), 2u);
    const auto& abort = s.taken()[1];
    EXPECT_EQ(abort.transition, "q1_q0_coll");
    EXPECT_EQ(abort.timestamp, 2);
    EXPECT_EQ(abort.valuation.at("x"), 2);
    EXPECT_EQ(abort.valuation.at("path_coll"), 1);
    const auto la = s.lookahead(10);
    ASSERT_FALSE(la.empty());
    EXPECT_EQ(selector_text(la[0].observable), "ctrl:abort");
    EXPECT_EQ(la[0].earliest, 4);
}

TEST(Runtime, EmergencyBroadcastForcesAbort) {
    Session s = fixtures::replay("emergency", fixtures::enduser());
    const auto& t = s.taken().back();
    EXPECT_EQ(t.transition, "q2_q0");
    EXPECT_EQ(t.timestamp, 6);
    EXPECT_EQ(t.valuation.at("pc"), 100);
    EXPECT_EQ(t.valuation.at("pE"), 5);
    EXPECT_EQ(t.valuation.at("x"), 1);
    const auto need = s.needs_explanation();
    ASSERT_TRUE(need);
    EXPECT_EQ(need->transition, "q2_q0");
    EXPECT_EQ(only(s).count_a, 1);
}

TEST(Runtime, WeakBroadcastIsIgnoredInPending) {
    Session s = fixtures::session(fixtures::engineer());
    s.step(Event::env(0, "cr_ahead", true));
    s.step(Event::advance(0, 5));
    s.step(Event::broadcast(6, "prio", 54));  // needs pc >= pE + s = 55
    EXPECT_EQ(only(s).loc, 2);
    s.step(Event::advance(6, 1));
    EXPECT_EQ(transitions(s).back(), "7:q2_q3");
}

TEST(Runtime, ReceptionInCrossingAhead) {
    Session s = fixtures::session(fixtures::engineer());
    s.step(Event::env(0, "cr_ahead", true));
    s.step(Event::broadcast(3, "prio", 2));  // pE = 3 by now
    EXPECT_EQ(only(s).loc, 1);
    s.step(Event::broadcast(3, "prio", 3));
    EXPECT_EQ(transitions(s).back(), "3:q1_q0_prio");
    EXPECT_EQ(s.taken().back().valuation.at("pc"), 3);
}

TEST(Runtime, ObservedActionFiltersBelief) {
    Session s = fixtures::replay("emergency", fixtures::enduser());
    s.step(Event::observed(6, {ObservableKind::ControllerAction, "abort"}));
    EXPECT_FALSE(s.flags().novel_situation);
    s.step(Event::observed(6, {ObservableKind::ControllerAction, "start"}));
    EXPECT_TRUE(s.flags().novel_situation);
    EXPECT_TRUE(s.flags().model_update_needed);
}

TEST(Runtime, EventValidation) {
    Session s = fixtures::session(fixtures::enduser());
    EXPECT_THROW(s.step(Event::advance(1, 1)), InvalidEvent);  // first event must be at 0
    s.step(Event::advance(0, 4));
    EXPECT_THROW(s.step(Event::env(3, "cr_ahead", true)), TimestampRegression);
    EXPECT_THROW(s.step(Event::env(4, "raining", true)), InvalidEvent);
    EXPECT_THROW(s.step(Event::broadcast(4, "nowhere", 1)), InvalidEvent);
    EXPECT_THROW(s.step(Event::advance(4, 0)), InvalidEvent);
    EXPECT_EQ(s.now(), 4);
    EXPECT_EQ(s.trace().size(), 1u);
}

TEST(Runtime, CreateChecksInputs) {
    const auto st = fixtures::stages(fixtures::enduser());
    EXPECT_THROW(Session::create(st.em3, ta(), fixtures::enduser(), {}), StageMismatch);
    TimedAutomaton other = ta();
    other.constants[0].value = 9;
    EXPECT_THROW(Session::create(st.em4, other, fixtures::enduser(), {}), ProvenanceMismatch);
    AnalyseConfig bad;
    bad.triggers = {{ObservableKind::ControllerAction, "honk"}};
    EXPECT_THROW(Session::create(st.em4, ta(), fixtures::enduser(), bad), UnknownNode);
}

TEST(Runtime, NeedsExplanationFollowsTriggers) {
    Session s = fixtures::replay("clear", fixtures::enduser());
    EXPECT_FALSE(s.needs_explanation());
    AnalyseConfig always;
    always.always_on = true;
    Session t = fixtures::session(fixtures::enduser(), always);
    for (const auto& e : fixtures::crossing().traces.at("clear")) t.step(e);
    const auto need = t.needs_explanation();
    ASSERT_TRUE(need);
    EXPECT_EQ(need->observable.name, "start");  // latest visible occurrence
}

TEST(Runtime, BuildExplanationSelectsOccurrences) {
    Session s = fixtures::session(fixtures::engineer());
    s.step(Event::env(0, "cr_ahead", true));
    s.step(Event::advance(0, 20));
    const auto latest = s.build_explanation(start_sel());
    const auto first = s.build_explanation(start_sel(), 1);
    EXPECT_EQ(first.timestamp, 7);
    EXPECT_GT(latest.timestamp, first.timestamp);
    EXPECT_THROW(s.build_explanation(start_sel(), 5), NotObserved);
    EXPECT_THROW(s.build_explanation(abort_sel()), NotObserved);
    EXPECT_THROW(s.build_explanation({std::nullopt, "honk"}), NotObserved);
}

TEST(Runtime, HiddenObservablesAreNotExplained) {
    Session s = fixtures::replay("emergency", fixtures::enduser());
    EXPECT_THROW(s.build_explanation({ObservableKind::CommOutput, "prio"}), HiddenForExplainee);
}

TEST(Runtime, ReasonsCarryValues) {
    Session s = fixtures::replay("clear", fixtures::engineer());
    const auto p = s.build_explanation(start_sel());
    EXPECT_EQ(p.transition, "q2_q3");
    EXPECT_EQ(p.cause_group, "obs/ctrl/start/q2_q3");
    ASSERT_EQ(p.reasons.size(), 3u);
    EXPECT_EQ(p.reasons[0].values.at("x"), 2);
    EXPECT_EQ(p.reasons[0].values.at("t_p"), 2);
    EXPECT_EQ(p.reasons[0].lhs_value, 2);
    for (const auto& r : p.reasons) EXPECT_TRUE(r.holds) << r.text;
    EXPECT_TRUE(p.back_chain.empty());
}

TEST(Runtime, RevealExtendsBackChain) {
    Session s = fixtures::replay("clear", fixtures::enduser());
    s.apply_feedback(Feedback::more_detail(start_sel()));
    const auto p = s.build_explanation(start_sel());
    ASSERT_EQ(p.back_chain.size(), 1u);
    EXPECT_EQ(p.back_chain[0].transition, "q1_q2");
    EXPECT_EQ(p.back_chain[0].timestamp, 5);
    EXPECT_NE(p.rendered.find("; before that,"), std::string::npos) << p.rendered;
    EXPECT_EQ(s.feedback_log().back().outcome, "back chain deepened to 1");
    EXPECT_THROW(s.apply_feedback(Feedback::more_detail(start_sel())), NothingMoreToReveal);
}

TEST(Runtime, LookaheadFromCrossingAhead) {
    Session s = fixtures::session(fixtures::engineer());
    s.step(Event::env(0, "cr_ahead", true));
    s.step(Event::advance(0, 2));
    const auto la = s.lookahead(10);
    std::map<std::string, std::int64_t> got;
    for (const auto& e : la) got[selector_text(e.observable)] = e.earliest;
    EXPECT_EQ(got.at("ctrl:prepare"), 5);
    EXPECT_EQ(got.at("ctrl:start"), 7);
    EXPECT_EQ(got.at("ctrl:finish"), 11);
    EXPECT_EQ(got.at("output:prio"), 12);  // back in q0 at 11, re-entry on the next round
    EXPECT_EQ(la[0].witness, std::vector<std::string>{"q1_q2"});
    EXPECT_TRUE(s.lookahead(0).empty());
    EXPECT_THROW(s.lookahead(-1), InvalidEvent);
}

TEST(Runtime, SnapshotRoundTrip) {
    Session s = fixtures::replay("emergency", fixtures::enduser());
    s.apply_feedback(Feedback::more_detail(abort_sel()));
    s.apply_feedback(Feedback::rating(true));
    const auto text = s.snapshot();
    EXPECT_EQ(nlohmann::json::parse(text)["format"], "tamex-session/1");
    Session r = Session::restore(text);
    EXPECT_EQ(r.snapshot(), text);
    EXPECT_EQ(r.belief(), s.belief());
    EXPECT_EQ(r.taken(), s.taken());
    EXPECT_EQ(r.em5(), s.em5());
    EXPECT_EQ(r.feedback_log(), s.feedback_log());
    r.step(Event::advance(6, 3));
    s.step(Event::advance(6, 3));
    EXPECT_EQ(r.snapshot(), s.snapshot());
    EXPECT_THROW(Session::restore("{}"), Error);
}

TEST(Runtime, AtomHolds) {
    const auto& t = *ta().find_transition("q2_q0");
    const GuardAtom rx = VarComparison{t.input()->predicate};
    EXPECT_TRUE(atom_holds(rx, {{"pc", 55}, {"pE", 5}, {"s", 50}}));
    EXPECT_FALSE(atom_holds(rx, {{"pc", 54}, {"pE", 5}, {"s", 50}}));
    EXPECT_TRUE(atom_holds(EnvCondition{"path_coll", true}, {{"path_coll", 0}}));
    EXPECT_FALSE(atom_holds(EnvCondition{"path_coll", false}, {{"path_coll", 0}}));
}

TEST(Feedback, LogAndOutcomes) {
    Session s = fixtures::replay("emergency", fixtures::enduser());
    s.apply_feedback(Feedback::rating(false));
    s.apply_feedback(Feedback::more_detail(abort_sel()));
    s.apply_feedback(Feedback::hide_branch(start_sel()));
    s.apply_feedback(Feedback::more_detail(start_sel()));
    EXPECT_THROW(s.apply_feedback(Feedback::more_detail(abort_sel())), NothingMoreToReveal);
    EXPECT_THROW(s.apply_feedback(Feedback::more_detail({std::nullopt, "honk"})), UnknownNode);
    const auto& log = s.feedback_log();
    ASSERT_EQ(log.size(), 4u);
    EXPECT_EQ(log[0].kind, "helpful");
    EXPECT_EQ(log[0].helpful, false);
    EXPECT_EQ(log[1].kind, "more_detail");
    EXPECT_EQ(log[3].outcome, "unhidden");
    EXPECT_EQ(log[1].time, 6);
}

TEST(Feedback, RevealDepthIsPerNode) {
    Session s = fixtures::replay("emergency", fixtures::enduser());
    s.apply_feedback(Feedback::more_detail(abort_sel()));
    const auto v = s.visibility();
    EXPECT_EQ(v.reveal_depth.at("obs/ctrl/abort"), 1);
    EXPECT_EQ(v.reveal_depth.at("obs/ctrl/start"), 0);
}

TEST(Feedback, SessionsAreIsolated) {
    Session a = fixtures::replay("emergency", fixtures::enduser());
    Session b = fixtures::replay("emergency", fixtures::enduser());
    a.apply_feedback(Feedback::hide_branch(abort_sel()));
    EXPECT_THROW(a.build_explanation(abort_sel()), HiddenForExplainee);
    EXPECT_NO_THROW(b.build_explanation(abort_sel()));
}
