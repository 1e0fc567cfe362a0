// tamex: command-line front end for extraction, slicing, annotation and
// run-time explanation. Exit codes: 0 ok, 1 user error, 2 internal error.

#include <csignal>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "tamex/annotation.hpp"
#include "tamex/extraction.hpp"
#include "tamex/json_io.hpp"
#include "tamex/model_io.hpp"
#include "tamex/pipeline.hpp"
#include "tamex/runtime_io.hpp"
#include "tamex/service.hpp"
#include "tamex/slicing.hpp"
#include "tamex/validate.hpp"

namespace {

using namespace tamex;
using nlohmann::json;

std::string slurp(const std::string& path) {
    if (path == "-") {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        return ss.str();
    }
    return read_file(path);
}

void emit(const std::string& out, const std::string& text) {
    if (out.empty() || out == "-") {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) throw Error("cannot write " + out);
    f << text;
}

void report(const std::vector<Warning>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w.code << ": " << w.message << "\n";
}

std::vector<ObservableSelector> selectors(const std::string& csv) {
    std::vector<ObservableSelector> out;
    std::size_t i = 0;
    while (i <= csv.size() && !csv.empty()) {
        std::size_t j = csv.find(',', i);
        if (j == std::string::npos) j = csv.size();
        if (j > i) out.push_back(parse_observable_selector(csv.substr(i, j - i)));
        i = j + 1;
    }
    return out;
}

std::string model_text(const ExplanationModel& em, bool visible) {
    return serialize_em(visible ? visible_view(em) : em);
}

// Profile that keeps every observable, for runs without a tailored model.
ExplaineeProfile everything_profile(const TimedAutomaton& ta, const ExtractionConfig& config) {
    ExplaineeProfile p;
    p.id = "all";
    p.type = ExplaineeType::Engineer;
    p.verbosity = Verbosity::Detailed;
    for (const auto& o : enumerate_observables(ta, config)) p.relevant_observables.push_back({o.key.kind, o.key.name});
    return p;
}

service::HttpServer* active_server = nullptr;

void on_signal(int) {
    if (active_server) active_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Explanation models for timed automata"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "tamex 0.1.0");

    std::string out = "-";
    bool visible = false;

    // extract
    auto* extract = app.add_subcommand("extract", "Extract EM1 from a timed automaton");
    std::string model_path;
    ExtractionConfig config;
    bool validate = false;
    extract->add_option("model", model_path, "Model document (JSON)")->required();
    extract->add_flag("--include-clock-resets", config.include_clock_resets, "Treat clock resets as observables");
    extract->add_option("--chain-depth", config.chain_depth, "Back-chain depth")->check(CLI::NonNegativeNumber);
    extract->add_flag("--validate", validate, "Report unreachable and deadlocked locations on stderr");
    extract->add_option("-o,--out", out, "Output file, '-' for stdout");

    // slice
    auto* slice = app.add_subcommand("slice", "Purpose slice: EM1 -> EM2");
    std::string em_path, purpose_path;
    slice->add_option("em", em_path, "EM1 document")->required();
    slice->add_option("--purpose", purpose_path, "Purpose document")->required();
    slice->add_option("-o,--out", out, "Output file, '-' for stdout");
    slice->add_flag("--visible", visible, "Write only the visible view");

    // tailor
    auto* tailor = app.add_subcommand("tailor", "Explainee slice: EM2 -> EM3");
    std::string profile_path;
    tailor->add_option("em", em_path, "EM2 document")->required();
    tailor->add_option("--profile", profile_path, "Explainee profile")->required();
    tailor->add_option("-o,--out", out, "Output file, '-' for stdout");
    tailor->add_flag("--visible", visible, "Write only the visible view");

    // annotate
    auto* annotate_cmd = app.add_subcommand("annotate", "Attach snippets: EM3 -> EM4");
    std::string annotations_path, coverage_path;
    annotate_cmd->add_option("em", em_path, "EM3 document")->required();
    annotate_cmd->add_option("--annotations", annotations_path, "Annotation base")->required();
    annotate_cmd->add_option("--coverage", coverage_path, "Write the coverage report here ('-' for stderr)");
    annotate_cmd->add_option("-o,--out", out, "Output file, '-' for stdout");
    annotate_cmd->add_flag("--visible", visible, "Write only the visible view");

    // explain
    auto* explain = app.add_subcommand("explain", "Replay a trace and explain an observable");
    std::string trace_path, observable, triggers, explain_triggers = "ctrl:abort", verbosity;
    std::size_t occurrence = 0;
    bool always_on = false, as_json = false;
    explain->add_option("--em", em_path, "EM4 document")->required();
    explain->add_option("--model", model_path, "Model document")->required();
    explain->add_option("--profile", profile_path, "Explainee profile")->required();
    explain->add_option("--trace", trace_path, "Event trace (JSON lines)")->required();
    explain->add_option("--observable", observable, "Observable to explain; default: the latest explanation need");
    explain->add_option("--occurrence", occurrence, "Occurrence index, 0 is the latest");
    explain->add_option("--triggers", explain_triggers, "Comma separated trigger observables")->capture_default_str();
    explain->add_flag("--always-on", always_on, "Every visible observable triggers");
    explain->add_option("--verbosity", verbosity, "brief or detailed; default from the profile");
    explain->add_flag("--json", as_json, "Print the explanation path as JSON");
    explain->add_option("-o,--out", out, "Output file, '-' for stdout");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Replay a trace and print step reports");
    std::int64_t horizon = -1;
    simulate->add_option("--model", model_path, "Model document")->required();
    simulate->add_option("--trace", trace_path, "Event trace (JSON lines)")->required();
    simulate->add_option("--em", em_path, "EM4 document; default: extract everything");
    simulate->add_option("--profile", profile_path, "Explainee profile (with --em)");
    simulate->add_option("--triggers", triggers, "Comma separated trigger observables");
    simulate->add_option("--horizon", horizon, "Also print a lookahead with this horizon");
    simulate->add_option("-o,--out", out, "Output file, '-' for stdout");

    // serve
    auto* serve = app.add_subcommand("serve", "Run the HTTP service");
    std::string data_dir = TAMEX_DEFAULT_DATA_DIR, host = "127.0.0.1";
    int port = 8080;
    serve->add_option("--data", data_dir, "Directory of artifact bundles");
    serve->add_option("--host", host, "Bind address");
    serve->add_option("--port", port, "Port, 0 picks a free one");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (*extract) {
            TimedAutomaton ta = parse_model(slurp(model_path));
            if (validate)
                for (const auto& d : validate_model(ta))
                    std::cerr << "warning: " << to_string(d.kind) << ": " << d.message << "\n";
            auto r = extract_em1(ta, config);
            report(r.warnings);
            emit(out, serialize_em(r.em));
        } else if (*slice) {
            auto r = slice_by_purpose(parse_em(slurp(em_path)), parse_purpose(slurp(purpose_path)));
            report(r.warnings);
            emit(out, model_text(r.em, visible));
        } else if (*tailor) {
            auto r = slice_by_profile(parse_em(slurp(em_path)), parse_profile(slurp(profile_path)));
            report(r.warnings);
            emit(out, model_text(r.em, visible));
        } else if (*annotate_cmd) {
            auto r = annotate(parse_em(slurp(em_path)), load_annotations(slurp(annotations_path)));
            report(r.warnings);
            if (coverage_path == "-")
                std::cerr << coverage_to_json(r.coverage);
            else if (!coverage_path.empty())
                emit(coverage_path, coverage_to_json(r.coverage));
            emit(out, model_text(r.em, visible));
        } else if (*explain) {
            TimedAutomaton ta = parse_model(slurp(model_path));
            AnalyseConfig analyse{selectors(explain_triggers), always_on};
            Session s = Session::create(parse_em(slurp(em_path)), ta, parse_profile(slurp(profile_path)), analyse);
            for (const auto& e : parse_trace(slurp(trace_path))) s.step(e);
            ObservableSelector target;
            if (!observable.empty()) {
                target = parse_observable_selector(observable);
            } else if (auto need = s.needs_explanation()) {
                target = {need->observable.kind, need->observable.name};
            } else {
                std::cerr << "no explanation need after the trace; pass --observable\n";
                return 1;
            }
            ExplanationPath path = s.build_explanation(target, occurrence);
            if (!verbosity.empty()) render_explanation(path, parse_verbosity(verbosity));
            emit(out, as_json ? path_to_json(path).dump(2) + "\n" : path.rendered + "\n");
        } else if (*simulate) {
            TimedAutomaton ta = parse_model(slurp(model_path));
            ExplanationModel em4;
            ExplaineeProfile profile;
            if (!em_path.empty()) {
                if (profile_path.empty()) throw Error("--em needs --profile");
                em4 = parse_em(slurp(em_path));
                profile = parse_profile(slurp(profile_path));
            } else {
                ExtractionConfig all;
                profile = everything_profile(ta, all);
                ExplanationPurpose purpose{"everything", profile.relevant_observables};
                em4 = run_pipeline(ta, all, purpose, profile, {}).em4;
            }
            Session s = Session::create(em4, ta, profile, AnalyseConfig{selectors(triggers), false});
            std::string text;
            for (const auto& e : parse_trace(slurp(trace_path))) {
                const std::size_t before = s.taken().size();
                s.step(e);
                json taken = json::array();
                for (std::size_t i = before; i < s.taken().size(); ++i) taken.push_back(taken_to_json(s.taken()[i]));
                json need = nullptr;
                if (auto occ = s.needs_explanation()) need = occurrence_to_json(*occ);
                json line = {{"event", event_to_json(e)},
                             {"time", s.now()},
                             {"taken", taken},
                             {"belief", belief_to_json(ta, s.belief())["configurations"]},
                             {"novel_situation", s.flags().novel_situation},
                             {"needs_explanation", need}};
                text += line.dump() + "\n";
            }
            if (horizon >= 0) text += json{{"lookahead", lookahead_to_json(s.lookahead(horizon), s.now(), horizon)}}.dump() + "\n";
            emit(out, text);
        } else if (*serve) {
            service::Service svc(data_dir);
            service::HttpServer server(svc);
            const int bound = server.bind(host, port);
            if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
            std::cerr << "listening on http://" << host << ":" << bound << "\n";
            active_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            server.run();
            active_server = nullptr;
        }
    } catch (const SyntaxError& e) {
        std::cerr << "error: SyntaxError: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
