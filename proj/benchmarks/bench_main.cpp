#include <benchmark/benchmark.h>

#include "awpi/analysis.hpp"
#include "awpi/integrators.hpp"

using namespace awpi;

namespace {

const PiParams kP{1.0, 20.0, -1.0, 1.0};

ScenarioConfig ramp(Method m) {
  ScenarioConfig c{.name = "ramp", .params = kP, .signal = SignalSpec{TriangularRamp{0.0005, 2.0, 6.0, 1.0}}};
  c.method = m;
  c.initial_output = -0.1445;
  c.t_end = 6.0;
  return c;
}

SimState within_state() { return SimState{0.0, 0.1, 0.3, 0.3, 0.2, LimiterState::within()}; }

void BM_StepEpm(benchmark::State& st) {
  const SimState s = within_state();
  for (auto _ : st) benchmark::DoNotOptimize(step_epm(kP, s, 0.25, 1e-3));
}
BENCHMARK(BM_StepEpm);

void BM_StepElm(benchmark::State& st) {
  const SimState s = within_state();
  for (auto _ : st) benchmark::DoNotOptimize(step_elm(kP, s, 0.25, 1e-3));
}
BENCHMARK(BM_StepElm);

void BM_StepItm(benchmark::State& st) {
  const SimState s = within_state();
  const ItmSettings settings{};
  for (auto _ : st) benchmark::DoNotOptimize(step_itm(kP, s, 0.25, 1e-3, settings));
}
BENCHMARK(BM_StepItm);

// A step that toggles on every pass and exhausts the iteration budget.
void BM_StepItmDeadlocked(benchmark::State& st) {
  const double u = 0.29;
  const double delta = 0.5 * 1e-3 * kP.ki() * u;
  SimState s{0.0, 1.0 - (u + delta / 2), 1.0, 1.0, u + delta / 2, LimiterState::upper()};
  const ItmSettings settings{};
  for (auto _ : st) benchmark::DoNotOptimize(step_itm(kP, s, u, 1e-3, settings));
}
BENCHMARK(BM_StepItmDeadlocked);

void BM_Simulate(benchmark::State& st) {
  const auto c = ramp(static_cast<Method>(st.range(0)));
  std::size_t records = 0;
  for (auto _ : st) {
    const auto log = simulate(c);
    records = log.records.size();
    benchmark::DoNotOptimize(log);
  }
  st.counters["records"] = static_cast<double>(records);
  st.SetItemsProcessed(static_cast<std::int64_t>(records) * st.iterations());
  st.SetLabel(std::string(to_string(c.method)));
}
BENCHMARK(BM_Simulate)->Arg(0)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_ChatterThreshold(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(chattering_threshold_epm(kP, 1e-3, -1e-3, 0.2915, 10));
}
BENCHMARK(BM_ChatterThreshold);

}  // namespace
BENCHMARK_MAIN();
