#include "fixtures.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace fixtures {

using namespace tamex;

std::filesystem::path data_dir() { return TAMEX_TEST_DATA_DIR; }
std::filesystem::path golden_dir() { return TAMEX_TEST_GOLDEN_DIR; }
std::filesystem::path cli_path() { return TAMEX_TEST_CLI_PATH; }

const Bundle& crossing() {
    static const Bundle b = load_bundle(data_dir() / "crossing");
    return b;
}

const ExplaineeProfile& enduser() { return *crossing().find_profile("enduser"); }
const ExplaineeProfile& engineer() { return *crossing().find_profile("engineer"); }

PipelineResult stages(const ExplaineeProfile& profile) { return run_pipeline(crossing(), profile); }

Session session(const ExplaineeProfile& profile, AnalyseConfig analyse, SessionOptions options) {
    return Session::create(stages(profile).em4, crossing().model, profile, analyse, options);
}

Session replay(const std::string& trace, const ExplaineeProfile& profile) {
    Session s = session(profile);
    for (const auto& e : crossing().traces.at(trace)) s.step(e);
    return s;
}

const ObservableSelector& abort_sel() {
    static const ObservableSelector s{ObservableKind::ControllerAction, "abort"};
    return s;
}

const ObservableSelector& start_sel() {
    static const ObservableSelector s{ObservableKind::ControllerAction, "start"};
    return s;
}

bool matches_golden(const std::string& name, const std::string& actual, std::string* diff) {
    const auto path = golden_dir() / name;
    const char* update = std::getenv("TAMEX_UPDATE_GOLDEN");
    if (update && std::string(update) == "1") {
        std::ofstream(path, std::ios::binary) << actual;
        return true;
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        if (diff) *diff = "missing golden file " + path.string();
        return false;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string expected = ss.str();
    if (expected == actual) return true;
    if (diff) {
        std::istringstream a(expected), b(actual);
        std::string la, lb;
        int line = 1;
        while (true) {
            bool ha = static_cast<bool>(std::getline(a, la));
            bool hb = static_cast<bool>(std::getline(b, lb));
            if (!ha && !hb) break;
            if (!ha || !hb || la != lb) {
                *diff = name + ":" + std::to_string(line) + ": expected `" + (ha ? la : "<eof>") + "`, got `" +
                        (hb ? lb : "<eof>") + "`";
                break;
            }
            ++line;
        }
    }
    return false;
}

}  // namespace fixtures
