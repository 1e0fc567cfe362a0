#include "tamex/json_io.hpp"

#include "tamex/error.hpp"

namespace tamex {

using nlohmann::json;

nlohmann::json parse_json_document(std::string_view text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        int line = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i)
            if (text[i] == '\n') ++line;
        throw SyntaxError(line, "malformed JSON");
    }
}

namespace {

[[noreturn]] void bad(const std::string& msg) { throw SyntaxError(0, msg); }

const json& field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) bad(std::string("missing field '") + key + "'");
    return j.at(key);
}

std::string str(const json& j, const char* key) {
    const auto& f = field(j, key);
    if (!f.is_string()) bad(std::string("field '") + key + "' must be a string");
    return f.get<std::string>();
}

std::string opt_str(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return {};
    return str(j, key);
}

std::string reason_kind_tag(ReasonKind k) {
    switch (k) {
        case ReasonKind::Guard:
            return "guard";
        case ReasonKind::Invariant:
            return "invariant";
        case ReasonKind::Reception:
            return "reception";
    }
    return "?";
}

ReasonKind parse_reason_kind(std::string_view s) {
    if (s == "guard") return ReasonKind::Guard;
    if (s == "invariant") return ReasonKind::Invariant;
    if (s == "reception") return ReasonKind::Reception;
    bad("unknown reason kind '" + std::string(s) + "'");
}

json key_to_json(const ObservableKey& k) { return {{"kind", kind_tag(k.kind)}, {"name", k.name}}; }

ObservableKey key_from_json(const json& j) { return {parse_kind_tag(str(j, "kind")), str(j, "name")}; }

void overlay_to_json(const Overlay& o, json& j) {
    j["hidden"] = !o.visible();
    if (o.hidden_by) j["hidden_by"] = to_string(*o.hidden_by);
    if (o.user_hidden) j["user_hidden"] = true;
}

Overlay overlay_from_json(const json& j) {
    Overlay o;
    if (j.contains("hidden_by")) o.hidden_by = parse_stage(str(j, "hidden_by"));
    o.user_hidden = j.value("user_hidden", false);
    // A bare "hidden": true without a stage is treated as a user-level hide.
    if (j.value("hidden", false) && !o.hidden_by && !o.user_hidden) o.user_hidden = true;
    return o;
}

void annotation_to_json(const std::optional<Annotation>& a, json& j) {
    if (!a) return;
    json aj = {{"snippet", a->snippet}};
    if (!a->rule.empty()) aj["rule"] = a->rule;
    j["annotation"] = aj;
}

std::optional<Annotation> annotation_from_json(const json& j) {
    if (!j.contains("annotation")) return std::nullopt;
    const auto& a = j.at("annotation");
    return Annotation{str(a, "snippet"), opt_str(a, "rule")};
}

GuardAtom guard_atom_from_json(const json& j) {
    auto kind = str(j, "kind");
    if (kind == "clock") {
        ClockConstraint cc;
        cc.clock = str(j, "clock");
        cc.rel = parse_relation(str(j, "rel"));
        const auto& b = field(j, "bound");
        cc.bound = b.is_number_integer() ? Expr::literal(b.get<std::int64_t>()) : parse_expr(b.get<std::string>());
        return cc;
    }
    if (kind == "env") return EnvCondition{str(j, "pred"), j.value("negated", false)};
    if (kind == "data" || kind == "recv_guard") return VarComparison{parse_comparison(str(j, "expr"))};
    bad("unknown atom kind '" + kind + "'");
}

json reason_to_json(const ReasonAtom& r) {
    json j = {{"element_id", r.element_id}, {"kind", reason_kind_tag(r.kind)}};
    if (r.kind == ReasonKind::Invariant)
        j["location"] = r.location;
    else
        j["transition"] = r.transition;
    if (r.kind == ReasonKind::Reception) {
        j["atom"] = {{"kind", "recv_guard"},
                     {"chan", r.channel},
                     {"var", r.bound_variable},
                     {"expr", to_string(std::get<VarComparison>(r.atom).comparison)}};
    } else {
        j["atom"] = guard_atom_to_json(r.atom);
    }
    j["text"] = r.text;
    j["display"] = r.display;
    j["constants"] = r.constants;
    overlay_to_json(r.overlay, j);
    annotation_to_json(r.annotation, j);
    return j;
}

ReasonAtom reason_from_json(const json& j) {
    ReasonAtom r;
    r.element_id = str(j, "element_id");
    r.kind = parse_reason_kind(str(j, "kind"));
    r.transition = opt_str(j, "transition");
    r.location = opt_str(j, "location");
    const auto& atom = field(j, "atom");
    r.atom = guard_atom_from_json(atom);
    if (r.kind == ReasonKind::Reception) {
        r.channel = str(atom, "chan");
        r.bound_variable = str(atom, "var");
    }
    r.text = str(j, "text");
    r.display = str(j, "display");
    for (const auto& c : j.value("constants", json::array())) r.constants.push_back(c.get<std::string>());
    r.overlay = overlay_from_json(j);
    r.annotation = annotation_from_json(j);
    return r;
}

json link_to_json(const BackLink& l) {
    json j = {{"element_id", l.element_id},
              {"transition", l.transition},
              {"source_location", l.source_location},
              {"distance", l.distance}};
    j["observables"] = json::array();
    for (const auto& k : l.observables) j["observables"].push_back(key_to_json(k));
    j["cause_groups"] = l.cause_groups;
    j["reasons"] = json::array();
    for (const auto& r : l.reasons) j["reasons"].push_back(reason_to_json(r));
    j["children"] = json::array();
    for (const auto& c : l.children) j["children"].push_back(link_to_json(c));
    overlay_to_json(l.overlay, j);
    return j;
}

BackLink link_from_json(const json& j) {
    BackLink l;
    l.element_id = str(j, "element_id");
    l.transition = str(j, "transition");
    l.source_location = str(j, "source_location");
    l.distance = j.value("distance", 1);
    for (const auto& k : j.value("observables", json::array())) l.observables.push_back(key_from_json(k));
    for (const auto& g : j.value("cause_groups", json::array())) l.cause_groups.push_back(g.get<std::string>());
    for (const auto& r : j.value("reasons", json::array())) l.reasons.push_back(reason_from_json(r));
    for (const auto& c : j.value("children", json::array())) l.children.push_back(link_from_json(c));
    l.overlay = overlay_from_json(j);
    return l;
}

json group_to_json(const CauseGroup& g) {
    json j = {{"element_id", g.element_id}, {"transition", g.transition}, {"source_element", g.source_element}};
    overlay_to_json(g.overlay, j);
    annotation_to_json(g.annotation, j);
    j["reasons"] = json::array();
    for (const auto& r : g.reasons) j["reasons"].push_back(reason_to_json(r));
    j["back_chain"] = json::array();
    for (const auto& l : g.back_chain) j["back_chain"].push_back(link_to_json(l));
    return j;
}

CauseGroup group_from_json(const json& j) {
    CauseGroup g;
    g.element_id = str(j, "element_id");
    g.transition = str(j, "transition");
    g.source_element = opt_str(j, "source_element");
    g.overlay = overlay_from_json(j);
    g.annotation = annotation_from_json(j);
    for (const auto& r : j.value("reasons", json::array())) g.reasons.push_back(reason_from_json(r));
    for (const auto& l : j.value("back_chain", json::array())) g.back_chain.push_back(link_from_json(l));
    return g;
}

json node_to_json(const ObservableNode& n) {
    json j = {{"element_id", n.element_id}};
    json obs = key_to_json(n.observable.key);
    obs["display"] = display_name(n.observable.key);
    obs["sources"] = n.observable.sources;
    j["observable"] = obs;
    overlay_to_json(n.overlay, j);
    annotation_to_json(n.annotation, j);
    if (n.reveal_depth > 0) j["reveal_depth"] = n.reveal_depth;
    j["cause_groups"] = json::array();
    for (const auto& g : n.cause_groups) j["cause_groups"].push_back(group_to_json(g));
    return j;
}

ObservableNode node_from_json(const json& j) {
    ObservableNode n;
    n.element_id = str(j, "element_id");
    const auto& obs = field(j, "observable");
    n.observable.key = key_from_json(obs);
    for (const auto& s : obs.value("sources", json::array())) n.observable.sources.push_back(s.get<std::string>());
    n.overlay = overlay_from_json(j);
    n.annotation = annotation_from_json(j);
    n.reveal_depth = j.value("reveal_depth", 0);
    for (const auto& g : j.value("cause_groups", json::array())) n.cause_groups.push_back(group_from_json(g));
    return n;
}

std::string selector_kind_tag(AnnotationSelector::Kind k) {
    switch (k) {
        case AnnotationSelector::Kind::Clock:
            return "clock";
        case AnnotationSelector::Kind::Env:
            return "env";
        case AnnotationSelector::Kind::Data:
            return "data";
        case AnnotationSelector::Kind::Reception:
            return "reception";
        case AnnotationSelector::Kind::Observable:
            return "observable";
        case AnnotationSelector::Kind::Constant:
            return "constant";
        case AnnotationSelector::Kind::Transition:
            return "transition";
    }
    return "?";
}

}  // namespace

json guard_atom_to_json(const GuardAtom& atom) {
    if (const auto* cc = std::get_if<ClockConstraint>(&atom)) {
        json b = cc->bound.is_literal() ? json(cc->bound.value) : json(to_string(cc->bound));
        return {{"kind", "clock"}, {"clock", cc->clock}, {"rel", to_string(cc->rel)}, {"bound", b}};
    }
    if (const auto* env = std::get_if<EnvCondition>(&atom))
        return {{"kind", "env"}, {"pred", env->predicate}, {"negated", env->negated}};
    return {{"kind", "data"}, {"expr", to_string(std::get<VarComparison>(atom).comparison)}};
}

json selector_to_json(const AnnotationSelector& s) {
    json j = {{"kind", selector_kind_tag(s.kind)}};
    if (s.clock) j["clock"] = *s.clock;
    if (s.rel) j["rel"] = to_string(*s.rel);
    if (s.bound) j["bound"] = *s.bound;
    if (s.pred) j["pred"] = *s.pred;
    if (s.negated) j["negated"] = *s.negated;
    if (s.expr) j["expr"] = *s.expr;
    if (s.channel) j["chan"] = *s.channel;
    if (s.name) j["name"] = *s.name;
    if (s.observable_kind) j["observable_kind"] = kind_tag(*s.observable_kind);
    return j;
}

AnnotationSelector selector_from_json(const json& j) {
    if (!j.is_object()) bad("selector must be an object");
    AnnotationSelector s;
    auto kind = str(j, "kind");
    using K = AnnotationSelector::Kind;
    if (kind == "clock")
        s.kind = K::Clock;
    else if (kind == "env")
        s.kind = K::Env;
    else if (kind == "data")
        s.kind = K::Data;
    else if (kind == "reception" || kind == "recv_guard")
        s.kind = K::Reception;
    else if (kind == "observable")
        s.kind = K::Observable;
    else if (kind == "constant")
        s.kind = K::Constant;
    else if (kind == "transition")
        s.kind = K::Transition;
    else
        bad("unknown selector kind '" + kind + "'");

    if (j.contains("clock")) s.clock = str(j, "clock");
    if (j.contains("rel")) s.rel = parse_relation(str(j, "rel"));
    if (j.contains("bound")) {
        const auto& b = j.at("bound");
        s.bound = b.is_number_integer() ? std::to_string(b.get<std::int64_t>()) : to_string(parse_expr(str(j, "bound")));
    }
    if (j.contains("pred")) s.pred = str(j, "pred");
    if (j.contains("negated")) s.negated = j.at("negated").get<bool>();
    if (j.contains("expr")) s.expr = to_string(parse_comparison(str(j, "expr")));
    if (j.contains("chan")) s.channel = str(j, "chan");
    if (j.contains("name")) s.name = str(j, "name");
    if (j.contains("observable_kind")) s.observable_kind = parse_kind_tag(str(j, "observable_kind"));

    if ((s.kind == K::Observable || s.kind == K::Constant || s.kind == K::Transition) && !s.name)
        bad("selector of kind '" + kind + "' requires 'name'");
    if (s.kind == K::Data && !s.expr) bad("data selector requires 'expr'");
    return s;
}

json annotations_to_json(const AnnotationBase& base) {
    json arr = json::array();
    for (const auto& e : base.entries) {
        json j = {{"selector", selector_to_json(e.selector)}, {"snippet", e.snippet}};
        if (!e.rule.empty()) j["rule"] = e.rule;
        arr.push_back(j);
    }
    return arr;
}

AnnotationBase annotations_from_json(const json& j) {
    if (!j.is_array()) bad("annotation document must be a JSON list");
    AnnotationBase base;
    for (const auto& e : j) {
        AnnotationEntry entry;
        entry.selector = selector_from_json(field(e, "selector"));
        entry.snippet = str(e, "snippet");
        if (entry.snippet.empty()) bad("annotation snippets must be non-empty");
        entry.rule = opt_str(e, "rule");
        base.entries.push_back(std::move(entry));
    }
    return base;
}

json em_to_json(const ExplanationModel& em) {
    json prov = {{"model", em.provenance.model_name},
                 {"model_digest", em.provenance.model_digest},
                 {"extraction",
                  {{"include_clock_resets", em.provenance.config.include_clock_resets},
                   {"chain_depth", em.provenance.config.chain_depth}}}};
    if (!em.provenance.purpose.empty()) prov["purpose"] = em.provenance.purpose;
    if (!em.provenance.profile.empty()) prov["profile"] = em.provenance.profile;
    if (em.provenance.annotations) prov["annotations"] = annotations_to_json(*em.provenance.annotations);

    json doc = {{"format", "tamex-em/1"}, {"stage", to_string(em.stage)}, {"provenance", prov}};
    doc["roots"] = json::array();
    for (const auto& n : em.roots) doc["roots"].push_back(node_to_json(n));
    return doc;
}

ExplanationModel em_from_json(const json& doc) {
    ExplanationModel em;
    try {
        em.stage = parse_stage(str(doc, "stage"));
        const auto& prov = field(doc, "provenance");
        em.provenance.model_name = str(prov, "model");
        em.provenance.model_digest = opt_str(prov, "model_digest");
        if (prov.contains("extraction")) {
            const auto& ex = prov.at("extraction");
            em.provenance.config.include_clock_resets = ex.value("include_clock_resets", false);
            em.provenance.config.chain_depth = ex.value("chain_depth", 1);
        }
        em.provenance.purpose = opt_str(prov, "purpose");
        em.provenance.profile = opt_str(prov, "profile");
        if (prov.contains("annotations")) em.provenance.annotations = annotations_from_json(prov.at("annotations"));
        for (const auto& n : field(doc, "roots")) em.roots.push_back(node_from_json(n));
    } catch (const json::exception& e) {
        bad(std::string("malformed explanation model: ") + e.what());
    }
    return em;
}

std::string serialize_em(const ExplanationModel& em) { return em_to_json(em).dump(2) + "\n"; }

ExplanationModel parse_em(std::string_view text) { return em_from_json(parse_json_document(text)); }

}  // namespace tamex
