#include <benchmark/benchmark.h>

#include "critcycle/fock_oracle.hpp"
#include "critcycle/metrology.hpp"
#include "critcycle/propagator.hpp"

namespace {

using namespace critcycle;

void BM_Evolve(benchmark::State& state) {
  const ProtocolSchedule schedule{8.0, 1.0, static_cast<int>(state.range(0))};
  const NoiseParams noise{0.5 / 16.0, 2.0};
  for (auto _ : state) {
    Trajectory traj = evolve(vacuum_state(), schedule, 1.0, noise);
    benchmark::DoNotOptimize(traj.states.back());
  }
  state.SetItemsProcessed(state.iterations() * 2 * schedule.cycles * default_steps_per_half_cycle(8.0, 1.0));
}
BENCHMARK(BM_Evolve)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_QfiFrequency(benchmark::State& state) {
  const ProtocolSchedule schedule{8.0, 1.0, 10};
  for (auto _ : state) {
    QfiResult q = qfi_frequency(vacuum_state(), schedule, 1.0, {});
    benchmark::DoNotOptimize(q.qfi.back());
  }
}
BENCHMARK(BM_QfiFrequency)->Unit(benchmark::kMillisecond);

void BM_FockCycle(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const ProtocolSchedule schedule{8.0, 1.0, 1};
  FockEvolveOptions opt;
  opt.steps_per_half_cycle = 2000;
  opt.check_tail = false;
  for (auto _ : state) {
    FockState f = evolve_fock(fock_vacuum(dim), schedule, 1.0, {}, opt);
    benchmark::DoNotOptimize(f.dim());
  }
}
BENCHMARK(BM_FockCycle)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_FockLindbladCycle(benchmark::State& state) {
  const ProtocolSchedule schedule{8.0, 1.0, 1};
  FockEvolveOptions opt;
  opt.steps_per_half_cycle = 500;
  opt.check_tail = false;
  for (auto _ : state) {
    FockState f = evolve_fock(fock_thermal(64, 0.5), schedule, 1.0, {0.1, 0.5}, opt);
    benchmark::DoNotOptimize(f.dim());
  }
}
BENCHMARK(BM_FockLindbladCycle)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
