#include <benchmark/benchmark.h>

#include <cmath>

#include "shmtwin/dsp.hpp"
#include "shmtwin/modal.hpp"
#include "shmtwin/synth.hpp"

using namespace shmtwin;

static void BM_DesignDecimator(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(dsp::design_decimator(dsp::DecimatorSpec{}));
}
BENCHMARK(BM_DesignDecimator)->Unit(benchmark::kMillisecond);

static void BM_SynthStructure(benchmark::State& state) {
  const auto m = synth::structure_preset("NO_DAMAGE");
  for (auto _ : state) benchmark::DoNotOptimize(synth::synth_structure_response(m, 10.0, 25600.0, 1));
  state.SetItemsProcessed(state.iterations() * 256000);
}
BENCHMARK(BM_SynthStructure)->Unit(benchmark::kMillisecond);

// Ten seconds of 12-bit codes through the default six-stage chain.
static void BM_RunChain(benchmark::State& state) {
  const auto stages = dsp::design_decimator(dsp::DecimatorSpec{});
  const synth::AdcSpec adc;
  const synth::SensorSpec sensor;
  const auto accel = synth::synth_structure_response(synth::structure_preset("NO_DAMAGE"), 10.0, adc.f_os_hz, 2);
  const auto codes = synth::quantize(synth::apply_sensor(accel, sensor, 3), adc);
  const auto scale = dsp::OutputScale::from(adc, sensor);
  for (auto _ : state) benchmark::DoNotOptimize(dsp::run_chain(codes, stages, scale));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(codes.size()));
}
BENCHMARK(BM_RunChain)->Unit(benchmark::kMillisecond);

static void BM_ComputeSpectrum(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(0.1 * static_cast<double>(i));
  for (auto _ : state) benchmark::DoNotOptimize(modal::compute_spectrum(x, 100.0));
}
BENCHMARK(BM_ComputeSpectrum)->Arg(6000)->Arg(18000)->Arg(120000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
