#pragma once

#include <compare>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tamex/model.hpp"

namespace tamex {

enum class Stage { EM1 = 1, EM2, EM3, EM4, EM5 };

std::string to_string(Stage stage);
Stage parse_stage(std::string_view text);

enum class ObservableKind { CommOutput, ControllerAction, VarUpdate, ClockReset };

struct ObservableKey {
    ObservableKind kind = ObservableKind::ControllerAction;
    std::string name;

    auto operator<=>(const ObservableKey&) const = default;
    bool operator==(const ObservableKey&) const = default;
};

// "prio!", "abort()", "count_m", "x := 0"
std::string display_name(const ObservableKey& key);
// "output:prio", "ctrl:abort", "update:count_m", "reset:x"
std::string selector_text(const ObservableKey& key);
std::string kind_tag(ObservableKind kind);
ObservableKind parse_kind_tag(std::string_view tag);

struct Observable {
    ObservableKey key;
    // One automaton element per occurrence, e.g. "q0_q1/sync", "q2_q3/action/1".
    std::vector<std::string> sources;

    bool operator==(const Observable&) const = default;
};

// Hide overlay shared by every element. `hidden_by` records the slicing stage
// that hid the element; `user_hidden` is the per-explainee flag set at run time.
struct Overlay {
    std::optional<Stage> hidden_by;
    bool user_hidden = false;

    bool visible() const noexcept { return !hidden_by && !user_hidden; }
    bool operator==(const Overlay&) const = default;
};

struct Annotation {
    std::string snippet;
    std::string rule;

    bool operator==(const Annotation&) const = default;
};

enum class ReasonKind { Guard, Invariant, Reception };

struct ReasonAtom {
    std::string element_id;
    ReasonKind kind = ReasonKind::Guard;
    std::string transition;  // guard / reception: owning transition
    std::string location;    // invariant: the transition's source location
    GuardAtom atom;          // reception predicates are stored as VarComparison
    std::string channel;     // reception only
    std::string bound_variable;  // reception only
    std::string text;        // canonical ASCII spelling
    std::string display;     // Unicode spelling for explanations
    std::vector<std::string> constants;  // named constants the atom mentions
    Overlay overlay;
    std::optional<Annotation> annotation;

    bool operator==(const ReasonAtom&) const = default;
};

// One step back along a loop-free predecessor path. Reasons are copied so the
// chain stays self-contained when the predecessor's own node is hidden.
struct BackLink {
    std::string element_id;
    std::string transition;
    std::string source_location;
    int distance = 1;
    std::vector<ObservableKey> observables;
    std::vector<std::string> cause_groups;  // element ids of the predecessor's groups
    std::vector<ReasonAtom> reasons;
    std::vector<BackLink> children;
    Overlay overlay;

    bool operator==(const BackLink&) const = default;
};

struct CauseGroup {
    std::string element_id;
    std::string transition;
    std::string source_element;
    std::vector<ReasonAtom> reasons;  // AND
    std::vector<BackLink> back_chain;
    Overlay overlay;
    std::optional<Annotation> annotation;

    bool operator==(const CauseGroup&) const = default;
};

struct ObservableNode {
    std::string element_id;
    Observable observable;
    std::vector<CauseGroup> cause_groups;  // OR
    Overlay overlay;
    std::optional<Annotation> annotation;
    int reveal_depth = 0;  // EM5 only

    bool operator==(const ObservableNode&) const = default;
};

struct ExtractionConfig {
    bool include_clock_resets = false;
    int chain_depth = 1;

    bool operator==(const ExtractionConfig&) const = default;
};

// Annotation base entries are kept in the provenance of EM4 and later so a
// run-time reveal can re-annotate against the same base.
struct AnnotationSelector {
    enum class Kind { Clock, Env, Data, Reception, Observable, Constant, Transition };

    Kind kind = Kind::Observable;
    std::optional<std::string> clock;
    std::optional<Relation> rel;
    std::optional<std::string> bound;
    std::optional<std::string> pred;
    std::optional<bool> negated;
    std::optional<std::string> expr;  // canonical ASCII comparison text
    std::optional<std::string> channel;
    std::optional<std::string> name;  // observable / constant / transition id
    std::optional<ObservableKind> observable_kind;

    bool operator==(const AnnotationSelector&) const = default;
};

struct AnnotationEntry {
    AnnotationSelector selector;
    std::string snippet;
    std::string rule;

    bool operator==(const AnnotationEntry&) const = default;
};

struct AnnotationBase {
    std::vector<AnnotationEntry> entries;

    bool operator==(const AnnotationBase&) const = default;
};

struct Provenance {
    std::string model_name;
    std::string model_digest;
    ExtractionConfig config;
    std::string purpose;
    std::string profile;
    std::optional<AnnotationBase> annotations;

    bool operator==(const Provenance&) const = default;
};

struct ExplanationModel {
    Stage stage = Stage::EM1;
    std::vector<ObservableNode> roots;
    Provenance provenance;

    const ObservableNode* find_node(const ObservableKey& key) const noexcept;
    ObservableNode* find_node(const ObservableKey& key) noexcept;

    bool operator==(const ExplanationModel&) const = default;
};

// Element visitors in document order (node, its groups, each group's reasons,
// then its back chain depth first).
struct ElementVisitor {
    std::function<void(ObservableNode&)> node;
    std::function<void(CauseGroup&)> group;
    std::function<void(ReasonAtom&)> reason;
    std::function<void(BackLink&)> link;
};
void visit_node(ObservableNode& node, const ElementVisitor& v);
void visit_elements(ExplanationModel& em, const ElementVisitor& v);

// Every element id with its effective visibility: an element is visible only if
// it and all of its ancestors are visible.
std::vector<std::pair<std::string, bool>> element_visibility(const ExplanationModel& em);

}  // namespace tamex
