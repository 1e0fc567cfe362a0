#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "support/fixtures.hpp"
#include "tamex/json_io.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
    int status;
    std::string out;
};

Run cli(const std::string& args) {
    const std::string cmd = "\"" + fixtures::cli_path().string() + "\" " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return {-1, ""};
    std::string out;
    std::array<char, 4096> buf{};
    while (std::size_t n = fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
    const int rc = pclose(pipe);
    return {WIFEXITED(rc) ? WEXITSTATUS(rc) : -1, out};
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

fs::path data(const std::string& name) { return fixtures::data_dir() / "crossing" / name; }

class CliTest : public ::testing::Test {
protected:
    fs::path dir;
    void SetUp() override {
        dir = fs::temp_directory_path() / ("tamex-cli-" + std::to_string(std::random_device{}()));
        fs::create_directories(dir);
    }
    void TearDown() override {
        std::error_code ec;
        fs::remove_all(dir, ec);
    }
    void write(const std::string& name, const std::string& text) { std::ofstream(dir / name) << text; }

    // Runs the pipeline for a profile and returns the EM4 path.
    fs::path em4(const std::string& profile) {
        EXPECT_EQ(cli("extract " + q(data("crossing.json")) + " -o " + q(dir / "em1.json")).status, 0);
        EXPECT_EQ(cli("slice " + q(dir / "em1.json") + " --purpose " + q(data("purpose.json")) + " -o " +
                      q(dir / "em2.json"))
                      .status,
                  0);
        EXPECT_EQ(cli("tailor " + q(dir / "em2.json") + " --profile " + q(data(profile + ".json")) + " -o " +
                      q(dir / "em3.json"))
                      .status,
                  0);
        const auto out = dir / ("em4-" + profile + ".json");
        EXPECT_EQ(cli("annotate " + q(dir / "em3.json") + " --annotations " + q(data("annotations.json")) + " -o " +
                      q(out))
                      .status,
                  0);
        return out;
    }
};

}  // namespace

TEST_F(CliTest, ChainMatchesLibrary) {
    const auto path = em4("enduser");
    std::ifstream in(path);
    std::string text((std::istreambuf_iterator<char>(in)), {});
    EXPECT_EQ(text, tamex::serialize_em(fixtures::stages(fixtures::enduser()).em4));
}

TEST_F(CliTest, PipesThroughStdout) {
    const auto r = cli("extract " + q(data("crossing.json")) + " | \"" + fixtures::cli_path().string() +
                       "\" slice - --purpose " + q(data("purpose.json")));
    EXPECT_EQ(r.status, 0);
    EXPECT_EQ(r.out, tamex::serialize_em(fixtures::stages(fixtures::enduser()).em2));
}

TEST_F(CliTest, ExplainEmergency) {
    const auto path = em4("enduser");
    const auto r = cli("explain --em " + q(path) + " --model " + q(data("crossing.json")) + " --profile " +
                       q(data("enduser.json")) + " --trace " + q(data("traces/emergency.jsonl")));
    EXPECT_EQ(r.status, 0);
    EXPECT_EQ(r.out, "The manoeuvre was aborted, because an emergency vehicle has the right of way\n");
}

TEST_F(CliTest, ExplainHiddenIsUserError) {
    const auto path = em4("enduser");
    const auto r = cli("explain --em " + q(path) + " --model " + q(data("crossing.json")) + " --profile " +
                       q(data("enduser.json")) + " --trace " + q(data("traces/emergency.jsonl")) +
                       " --observable output:prio");
    EXPECT_EQ(r.status, 1);
}

TEST_F(CliTest, ExtractValidateAndResets) {
    const auto r = cli("extract --include-clock-resets --chain-depth 2 --validate " + q(data("crossing.json")));
    ASSERT_EQ(r.status, 0);
    const auto em = tamex::parse_em(r.out);
    EXPECT_NE(em.find_node({tamex::ObservableKind::ClockReset, "x"}), nullptr);
    EXPECT_EQ(em.provenance.config.chain_depth, 2);
}

TEST_F(CliTest, ExitCodes) {
    EXPECT_EQ(cli("extract " + q(dir / "missing.json")).status, 1);
    write("broken.json", "{\"name\": ");
    EXPECT_EQ(cli("extract " + q(dir / "broken.json")).status, 1);
    EXPECT_EQ(cli("tailor " + q(dir / "broken.json") + " --profile " + q(data("enduser.json"))).status, 1);
    EXPECT_EQ(cli("frobnicate").status, 1);
    EXPECT_EQ(cli("extract").status, 1);
    // Stage order is enforced.
    cli("extract " + q(data("crossing.json")) + " -o " + q(dir / "em1.json"));
    EXPECT_EQ(cli("annotate " + q(dir / "em1.json") + " --annotations " + q(data("annotations.json"))).status, 1);
    EXPECT_EQ(cli("--help").status, 0);
}

TEST_F(CliTest, AnnotateReportsCoverage) {
    em4("enduser");
    const auto r = cli("annotate " + q(dir / "em3.json") + " --annotations " + q(data("annotations.json")) +
                       " -o " + q(dir / "x.json") + " --coverage " + q(dir / "coverage.json"));
    ASSERT_EQ(r.status, 0);
    std::ifstream in(dir / "coverage.json");
    std::string text((std::istreambuf_iterator<char>(in)), {});
    EXPECT_NE(text.find("\"annotated\": 12"), std::string::npos) << text;
}

TEST_F(CliTest, SimulatePrintsOneLinePerEvent) {
    const auto r = cli("simulate --model " + q(data("crossing.json")) + " --trace " +
                       q(data("traces/collision.jsonl")) + " --horizon 5");
    ASSERT_EQ(r.status, 0);
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 4);
    EXPECT_NE(r.out.find("\"lookahead\""), std::string::npos);
}

TEST_F(CliTest, Deterministic) {
    const auto a = cli("extract " + q(data("crossing.json")));
    const auto b = cli("extract " + q(data("crossing.json")));
    EXPECT_EQ(a.out, b.out);
    const auto path = em4("engineer");
    const std::string args = "explain --json --em " + q(path) + " --model " + q(data("crossing.json")) +
                             " --profile " + q(data("engineer.json")) + " --trace " + q(data("traces/clear.jsonl")) +
                             " --observable start";
    EXPECT_EQ(cli(args).out, cli(args).out);
}
