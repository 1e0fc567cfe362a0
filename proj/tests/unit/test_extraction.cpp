#include <gtest/gtest.h>

#include <algorithm>

#include "support/fixtures.hpp"
#include "tamex/extraction.hpp"
#include "tamex/json_io.hpp"
#include "tamex/model_io.hpp"

using namespace tamex;

namespace {

const TimedAutomaton& ta() { return fixtures::crossing().model; }

std::vector<std::string> group_transitions(const ObservableNode& n) {
    std::vector<std::string> out;
    for (const auto& g : n.cause_groups) out.push_back(g.transition);
    return out;
}

}  // namespace

TEST(Extraction, TransitionObservablesInEmissionOrder) {
    const auto obs = transition_observables(*ta().find_transition("q2_q3"), {});
    ASSERT_EQ(obs.size(), 2u);
    EXPECT_EQ(display_name(obs[0].first), "start()");
    EXPECT_EQ(display_name(obs[1].first), "count_m");
    ExtractionConfig with_resets;
    with_resets.include_clock_resets = true;
    const auto all = transition_observables(*ta().find_transition("q2_q3"), with_resets);
    ASSERT_EQ(all.size(), 3u);
    EXPECT_EQ(selector_text(all[2].first), "reset:x");
}

TEST(Extraction, EnumeratesObservablesOnce) {
    const auto obs = enumerate_observables(ta(), {});
    std::vector<std::string> names;
    for (const auto& o : obs) names.push_back(selector_text(o.key));
    EXPECT_EQ(names, (std::vector<std::string>{"output:prio", "ctrl:abort", "update:count_a", "ctrl:prepare",
                                               "ctrl:start", "update:count_m", "ctrl:finish"}));
    EXPECT_EQ(obs[1].sources.size(), 3u);
}

TEST(Extraction, AbortHasThreeDisjuncts) {
    const auto em = extract_em1(ta()).em;
    const auto* abort = em.find_node({ObservableKind::ControllerAction, "abort"});
    ASSERT_NE(abort, nullptr);
    EXPECT_EQ(group_transitions(*abort), (std::vector<std::string>{"q1_q0_prio", "q1_q0_coll", "q2_q0"}));
}

TEST(Extraction, ReasonsAreGuardsInvariantsAndReception) {
    const auto reasons = transition_reasons(ta(), *ta().find_transition("q2_q0"), "p");
    ASSERT_EQ(reasons.size(), 2u);
    EXPECT_EQ(reasons[0].kind, ReasonKind::Invariant);
    EXPECT_EQ(reasons[0].location, "q2");
    EXPECT_EQ(reasons[0].display, "x ≤ t_p");
    EXPECT_EQ(reasons[1].kind, ReasonKind::Reception);
    EXPECT_EQ(reasons[1].text, "pc >= pE + s");
    EXPECT_EQ(reasons[1].display, "pc ≥ pE + s");
    EXPECT_EQ(reasons[1].channel, "prio");
    EXPECT_EQ(reasons[1].bound_variable, "pc");
    EXPECT_EQ(reasons[1].constants, std::vector<std::string>{"s"});
    EXPECT_EQ(reasons[1].element_id, "p/rx");
}

TEST(Extraction, BackwardPathsAreLoopFree) {
    using Paths = std::vector<std::vector<std::string>>;
    EXPECT_EQ(backward_paths(ta(), "q2_q3", 0), (Paths{{"q2_q3"}}));
    EXPECT_EQ(backward_paths(ta(), "q2_q3", 1), (Paths{{"q1_q2", "q2_q3"}, {"q2_q3"}}));
    EXPECT_EQ(backward_paths(ta(), "q2_q3", 2), (Paths{{"q0_q1", "q1_q2", "q2_q3"}, {"q1_q2", "q2_q3"}, {"q2_q3"}}));
    // From q0_q1 every entry into q0 is a predecessor; none reuses a source location.
    for (const auto& p : backward_paths(ta(), "q0_q1", 3)) {
        std::set<std::string> sources;
        for (const auto& id : p) EXPECT_TRUE(sources.insert(ta().find_transition(id)->source).second);
    }
}

TEST(Extraction, BackChainCopiesPredecessorReasons) {
    const auto em = extract_em1(ta()).em;
    const auto* start = em.find_node({ObservableKind::ControllerAction, "start"});
    ASSERT_EQ(start->cause_groups[0].back_chain.size(), 1u);
    const auto& link = start->cause_groups[0].back_chain[0];
    EXPECT_EQ(link.transition, "q1_q2");
    EXPECT_EQ(link.element_id, "obs/ctrl/start/q2_q3/bc/q1_q2");
    EXPECT_EQ(link.observables, (std::vector<ObservableKey>{{ObservableKind::ControllerAction, "prepare"}}));
    std::vector<std::string> texts;
    for (const auto& r : link.reasons) texts.push_back(r.text);
    EXPECT_EQ(texts, (std::vector<std::string>{"x >= t_w", "!path_coll(E)", "x <= t_w"}));
}

TEST(Extraction, ChainDepthControlsNesting) {
    ExtractionConfig deep;
    deep.chain_depth = 2;
    const auto em = extract_em1(ta(), deep).em;
    const auto& link = em.find_node({ObservableKind::ControllerAction, "start"})->cause_groups[0].back_chain[0];
    ASSERT_EQ(link.children.size(), 1u);
    EXPECT_EQ(link.children[0].transition, "q0_q1");
    EXPECT_EQ(link.children[0].distance, 2);
    ExtractionConfig none;
    none.chain_depth = 0;
    EXPECT_TRUE(extract_em1(ta(), none).em.find_node({ObservableKind::ControllerAction, "start"})
                    ->cause_groups[0].back_chain.empty());
}

TEST(Extraction, ProvenanceAndStage) {
    const auto em = extract_em1(ta()).em;
    EXPECT_EQ(em.stage, Stage::EM1);
    EXPECT_EQ(em.provenance.model_name, "crossing_controller");
    EXPECT_EQ(em.provenance.model_digest, model_digest(ta()));
    for (const auto& [id, vis] : element_visibility(em)) EXPECT_TRUE(vis) << id;
}

TEST(Extraction, EmptyModelWarns) {
    TimedAutomaton t;
    t.name = "idle";
    t.clocks = {"c"};
    t.locations = {{"l0", "IDLE", {}}};
    t.initial_location = "l0";
    const auto r = extract_em1(t);
    EXPECT_TRUE(r.em.roots.empty());
    ASSERT_EQ(r.warnings.size(), 1u);
    EXPECT_EQ(r.warnings[0].code, "NoObservables");
}

TEST(Extraction, IsDeterministic) {
    EXPECT_EQ(serialize_em(extract_em1(ta()).em), serialize_em(extract_em1(parse_model(serialize_model(ta()))).em));
}

TEST(JsonIo, ModelRoundTrips) {
    const auto a = fixtures::stages(fixtures::enduser()), b = fixtures::stages(fixtures::engineer());
    for (const auto* em : {&a.em4, &b.em3}) {
        const auto text = serialize_em(*em);
        EXPECT_EQ(parse_em(text), *em);
        EXPECT_EQ(serialize_em(parse_em(text)), text);
    }
}

TEST(JsonIo, RejectsUnknownFormat) {
    EXPECT_THROW(parse_em(R"({"format":"other/1","stage":"EM1","roots":[]})"), Error);
    EXPECT_THROW(parse_em("{"), SyntaxError);
}
