#include <benchmark/benchmark.h>

#include "reluiqc/certify.h"
#include "reluiqc/cones.h"
#include "reluiqc/dynamics.h"

namespace reluiqc {
namespace {

void BM_HinfNorm(benchmark::State& state) {
  const RnnModel model = RnnModel::Example(0.0, 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(HinfNorm(model));
}
BENCHMARK(BM_HinfNorm)->Unit(benchmark::kMillisecond);

void BM_RunTest(benchmark::State& state) {
  const RnnModel model = RnnModel::Example(1.0, 1.4);
  const auto test = static_cast<TestId>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(RunTest(model, test).margin);
  state.SetLabel(to_string(test));
}
BENCHMARK(BM_RunTest)
    ->Arg(static_cast<int>(TestId::kSSG))
    ->Arg(static_cast<int>(TestId::kL2pSSG))
    ->Arg(static_cast<int>(TestId::kSsgZfPol))
    ->Arg(static_cast<int>(TestId::kSsgZfPolCop))
    ->Unit(benchmark::kMillisecond);

void BM_HornCopositivity(benchmark::State& state) {
  Eigen::MatrixXd h(5, 5);
  h << 1, -1, 1, 1, -1, -1, 1, -1, 1, 1, 1, -1, 1, -1, 1, 1, 1, -1, 1, -1, -1, 1, 1, -1, 1;
  const SymMatrix horn(h);
  for (auto _ : state) benchmark::DoNotOptimize(CheckCopositivity(horn, static_cast<int>(state.range(0))).status);
}
BENCHMARK(BM_HornCopositivity)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace reluiqc

BENCHMARK_MAIN();
