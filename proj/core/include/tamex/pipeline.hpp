#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "tamex/annotation.hpp"
#include "tamex/extraction.hpp"
#include "tamex/model.hpp"
#include "tamex/runtime.hpp"
#include "tamex/slicing.hpp"

namespace tamex {

// Everything needed to go from an automaton to a deployable EM4.
struct Bundle {
    std::string name;
    TimedAutomaton model;
    ExtractionConfig extraction;
    ExplanationPurpose purpose;
    std::vector<ExplaineeProfile> profiles;
    AnnotationBase annotations;
    AnalyseConfig analyse;
    std::map<std::string, std::vector<Event>> traces;

    const ExplaineeProfile* find_profile(std::string_view id) const noexcept;
};

// Reads <dir>/bundle.json and the files it names.
Bundle load_bundle(const std::filesystem::path& dir);

// Inline form used for uploads: the same keys with documents embedded
// instead of file names; traces are lists of event objects.
Bundle bundle_from_json(const nlohmann::json& doc);
nlohmann::json bundle_summary(const Bundle& b);

struct PipelineResult {
    ExplanationModel em1, em2, em3, em4;
    CoverageReport coverage;
    std::vector<Warning> warnings;
};

// EM1 -> EM4 for one profile.
PipelineResult run_pipeline(const TimedAutomaton& ta, const ExtractionConfig& config,
                            const ExplanationPurpose& purpose, const ExplaineeProfile& profile,
                            const AnnotationBase& annotations);
PipelineResult run_pipeline(const Bundle& bundle, const ExplaineeProfile& profile);

std::string read_file(const std::filesystem::path& path);

}  // namespace tamex
