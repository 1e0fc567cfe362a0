#include <benchmark/benchmark.h>

#include "tamex/pipeline.hpp"
#include "tamex/runtime.hpp"

namespace {

using namespace tamex;

const Bundle& crossing() {
    static const Bundle b = load_bundle(TAMEX_DATA_DIR "/crossing");
    return b;
}

void BM_ExtractEM1(benchmark::State& state) {
    ExtractionConfig config;
    config.chain_depth = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(extract_em1(crossing().model, config));
}
BENCHMARK(BM_ExtractEM1)->Arg(1)->Arg(2)->Arg(3);

void BM_Pipeline(benchmark::State& state) {
    const auto& b = crossing();
    for (auto _ : state) benchmark::DoNotOptimize(run_pipeline(b, b.profiles.front()));
}
BENCHMARK(BM_Pipeline);

void BM_ReplayEmergency(benchmark::State& state) {
    const auto& b = crossing();
    const auto em4 = run_pipeline(b, b.profiles.front()).em4;
    for (auto _ : state) {
        Session s = Session::create(em4, b.model, b.profiles.front(), b.analyse);
        for (const auto& e : b.traces.at("emergency")) s.step(e);
        benchmark::DoNotOptimize(s.build_explanation({ObservableKind::ControllerAction, "abort"}));
    }
}
BENCHMARK(BM_ReplayEmergency);

void BM_Lookahead(benchmark::State& state) {
    const auto& b = crossing();
    const auto em4 = run_pipeline(b, *b.find_profile("engineer")).em4;
    Session s = Session::create(em4, b.model, *b.find_profile("engineer"), b.analyse);
    s.step(Event::env(0, "cr_ahead", true));
    for (auto _ : state) benchmark::DoNotOptimize(s.lookahead(state.range(0)));
}
BENCHMARK(BM_Lookahead)->Arg(10)->Arg(30)->Arg(100);

}  // namespace

BENCHMARK_MAIN();
