#pragma once

#include <filesystem>
#include <string>

#include "tamex/pipeline.hpp"
#include "tamex/runtime.hpp"

namespace fixtures {

std::filesystem::path data_dir();
std::filesystem::path golden_dir();
std::filesystem::path cli_path();

const tamex::Bundle& crossing();
const tamex::ExplaineeProfile& enduser();
const tamex::ExplaineeProfile& engineer();

tamex::PipelineResult stages(const tamex::ExplaineeProfile& profile);
tamex::Session session(const tamex::ExplaineeProfile& profile, tamex::AnalyseConfig analyse = crossing().analyse,
                       tamex::SessionOptions options = {});

// Session after replaying a bundled trace.
tamex::Session replay(const std::string& trace, const tamex::ExplaineeProfile& profile);

const tamex::ObservableSelector& abort_sel();
const tamex::ObservableSelector& start_sel();

// Golden comparison; with TAMEX_UPDATE_GOLDEN=1 the file is rewritten instead.
bool matches_golden(const std::string& name, const std::string& actual, std::string* diff = nullptr);

}  // namespace fixtures
