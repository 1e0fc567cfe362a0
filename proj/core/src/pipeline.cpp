#include "tamex/pipeline.hpp"

#include <fstream>
#include <sstream>

#include "tamex/json_io.hpp"
#include "tamex/model_io.hpp"
#include "tamex/runtime_io.hpp"

namespace tamex {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const ExplaineeProfile* Bundle::find_profile(std::string_view id) const noexcept {
    for (const auto& p : profiles)
        if (p.id == id) return &p;
    return nullptr;
}

namespace {

ExtractionConfig extraction_from_json(const json& j) {
    ExtractionConfig c;
    c.include_clock_resets = j.value("include_clock_resets", false);
    c.chain_depth = j.value("chain_depth", 1);
    return c;
}

}  // namespace

Bundle load_bundle(const std::filesystem::path& dir) {
    const json manifest = parse_json_document(read_file(dir / "bundle.json"));
    auto file = [&dir](const json& name) { return read_file(dir / name.get<std::string>()); };
    Bundle b;
    b.name = manifest.value("name", dir.filename().string());
    b.model = parse_model(file(manifest.at("model")));
    b.extraction = extraction_from_json(manifest.value("extraction", json::object()));
    b.purpose = parse_purpose(file(manifest.at("purpose")));
    for (const auto& p : manifest.value("profiles", json::array())) b.profiles.push_back(parse_profile(file(p)));
    if (manifest.contains("annotations")) b.annotations = load_annotations(file(manifest["annotations"]));
    b.analyse = analyse_from_json(manifest.value("analyse", json::object()));
    const json traces = manifest.value("traces", json::object());
    for (const auto& [name, path] : traces.items()) b.traces[name] = parse_trace(file(path));
    return b;
}

Bundle bundle_from_json(const json& doc) {
    if (!doc.is_object()) throw SyntaxError(1, "artifact upload must be a JSON object");
    if (!doc.contains("name") || !doc["name"].is_string()) throw SyntaxError(0, "artifact upload needs a 'name'");
    if (!doc.contains("model")) throw SyntaxError(0, "artifact upload needs a 'model'");
    Bundle b;
    b.name = doc["name"].get<std::string>();
    b.model = parse_model(doc["model"].dump());
    b.extraction = extraction_from_json(doc.value("extraction", json::object()));
    if (doc.contains("purpose")) {
        b.purpose = parse_purpose(doc["purpose"].dump());
    } else {
        b.purpose.name = "everything";
        for (const auto& o : enumerate_observables(b.model, b.extraction)) b.purpose.relevant_observables.push_back({o.key.kind, o.key.name});
    }
    for (const auto& p : doc.value("profiles", json::array())) b.profiles.push_back(parse_profile(p.dump()));
    if (doc.contains("annotations")) b.annotations = load_annotations(doc["annotations"].dump());
    b.analyse = analyse_from_json(doc.value("analyse", json::object()));
    const json traces = doc.value("traces", json::object());
    for (const auto& [name, events] : traces.items())
        for (const auto& e : events) b.traces[name].push_back(event_from_json(e));
    return b;
}

json bundle_summary(const Bundle& b) {
    json profiles = json::array();
    for (const auto& p : b.profiles) profiles.push_back(p.id);
    json traces = json::array();
    for (const auto& [name, events] : b.traces) traces.push_back(name);
    return {{"name", b.name},
            {"model", b.model.name},
            {"digest", model_digest(b.model)},
            {"purpose", b.purpose.name},
            {"profiles", profiles},
            {"annotations", b.annotations.entries.size()},
            {"analyse", analyse_to_json(b.analyse)},
            {"traces", traces}};
}

PipelineResult run_pipeline(const TimedAutomaton& ta, const ExtractionConfig& config,
                            const ExplanationPurpose& purpose, const ExplaineeProfile& profile,
                            const AnnotationBase& annotations) {
    PipelineResult r;
    auto append = [&r](std::vector<Warning>& w) { r.warnings.insert(r.warnings.end(), w.begin(), w.end()); };
    auto s1 = extract_em1(ta, config);
    append(s1.warnings);
    r.em1 = std::move(s1.em);
    auto s2 = slice_by_purpose(r.em1, purpose);
    append(s2.warnings);
    r.em2 = std::move(s2.em);
    auto s3 = slice_by_profile(r.em2, profile);
    append(s3.warnings);
    r.em3 = std::move(s3.em);
    auto s4 = annotate(r.em3, annotations);
    append(s4.warnings);
    r.em4 = std::move(s4.em);
    r.coverage = std::move(s4.coverage);
    return r;
}

PipelineResult run_pipeline(const Bundle& bundle, const ExplaineeProfile& profile) {
    return run_pipeline(bundle.model, bundle.extraction, bundle.purpose, profile, bundle.annotations);
}

}  // namespace tamex
