#include <vector>

#include <benchmark/benchmark.h>

#include "quadamp/coupled_modes.hpp"
#include "quadamp/noise.hpp"
#include "quadamp/stability.hpp"
#include "quadamp/tuning.hpp"

namespace {

using namespace quadamp;

ModeSet device() {
  auto mode = [](Mode m, double f_ghz, double k_mhz, double ext_mhz) {
    const double tp = 2.0 * kPi;
    return ModeParams{m, tp * f_ghz * 1e9, tp * k_mhz * 1e6, tp * ext_mhz * 1e6};
  };
  return make_modes(mode(Mode::a, 6.876, 83, 82.17), mode(Mode::b, 7.932, 15, 13.5),
                    mode(Mode::c, 10.782, 45, 44.55));
}

const PumpSet kPumps = PumpSet::canonical(1.0, 1.0, 0.5, 2.275, kPi / 2);

void BM_Simulate(benchmark::State& st) {
  const ModeSet modes = device();
  const DetuningVector d = DetuningVector::resonant(modes, 2.0 * kPi * 1e6);
  for (auto _ : st) benchmark::DoNotOptimize(simulate(modes, kPumps, d));
}
BENCHMARK(BM_Simulate);

void BM_ClosedForm(benchmark::State& st) {
  const ModeSet modes = device();
  const DetuningVector d = DetuningVector::resonant(modes, 2.0 * kPi * 1e6);
  for (auto _ : st) benchmark::DoNotOptimize(closed_form_scattering(modes, kPumps, d));
}
BENCHMARK(BM_ClosedForm);

void BM_Sweep(benchmark::State& st) {
  const ModeSet modes = device();
  std::vector<double> grid(static_cast<std::size_t>(st.range(0)));
  for (std::size_t k = 0; k < grid.size(); ++k)
    grid[k] = 2.0 * kPi * 1e6 * (-20.0 + 40.0 * static_cast<double>(k) / (grid.size() - 1));
  for (auto _ : st) benchmark::DoNotOptimize(sweep_scattering(modes, kPumps, grid));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_Sweep)->Arg(101)->Arg(401)->Arg(1601);

void BM_NoiseReport(benchmark::State& st) {
  const ModeSet modes = device();
  for (auto _ : st) benchmark::DoNotOptimize(noise_report(modes, kPumps, ChainNoise{}));
}
BENCHMARK(BM_NoiseReport);

void BM_CharacteristicRoots(benchmark::State& st) {
  const ModeSet modes = device();
  for (auto _ : st) benchmark::DoNotOptimize(characteristic_roots(modes, kPumps));
}
BENCHMARK(BM_CharacteristicRoots);

void BM_RouthCoefficients(benchmark::State& st) {
  const ModeSet modes = device();
  for (auto _ : st) benchmark::DoNotOptimize(routh_coefficients(modes, 1.0, 2.275, 0.3));
}
BENCHMARK(BM_RouthCoefficients);

void BM_ProgramDevice(benchmark::State& st) {
  const ModeSet modes = device();
  for (auto _ : st) benchmark::DoNotOptimize(program_device(modes, TuningTargets{24.0, 0.8, 1}));
}
BENCHMARK(BM_ProgramDevice)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
