// Serial reference versus OpenMP kernels on alpha* with the one-sided
// observable.

#include <benchmark/benchmark.h>

#include "logcascade/birkhoff.hpp"
#include "logcascade/cascade_sim.hpp"
#include "logcascade/contfrac.hpp"
#include "logcascade/lemma_lab.hpp"
#include "logcascade/observable.hpp"

using namespace logcascade;

namespace {

const contfrac::ConvergentTable& table() {
  static const auto t = contfrac::convergents(contfrac::parse_quotients("1,100:repeat", 8));
  return t;
}

Exec exec_of(const benchmark::State& state) { return state.range(0) ? Exec::Parallel : Exec::Serial; }

void BM_RigidSum(benchmark::State& state) {
  const auto phi = make_one_sided_phi();
  const auto x = parse_position("0.3");
  for (auto _ : state) benchmark::DoNotOptimize(rigid_sum(phi, table(), x, 7, exec_of(state)).value);
  state.SetItemsProcessed(state.iterations() * table().q_small(7));
}

void BM_RationalSum(benchmark::State& state) {
  const auto bar = truncate(make_one_sided_phi(), table().q(7));
  const auto x = parse_position("0.3");
  for (auto _ : state) benchmark::DoNotOptimize(rational_sum(bar, x, exec_of(state)).value);
  state.SetItemsProcessed(state.iterations() * table().q_small(7));
}

void BM_RigidBatch(benchmark::State& state) {
  const auto phi = make_one_sided_phi();
  std::vector<Fixed> xs;
  for (int s = 0; s < 64; ++s) xs.push_back(cell_point(phi.x0(), 17, table().q_small(5), (s + 0.5) / 64));
  for (auto _ : state) benchmark::DoNotOptimize(rigid_batch(phi, table(), xs, 5, true, exec_of(state)).size());
  state.SetItemsProcessed(state.iterations() * xs.size() * table().q_small(5));
}

void BM_Escape(benchmark::State& state) {
  const auto phi = make_one_sided_phi();
  EscapeOptions opt;
  opt.exec = exec_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(escape_of_mass(phi, table(), {3, 5}, {2.0}, 2000, opt).size());
}

}  // namespace

BENCHMARK(BM_RigidSum)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RationalSum)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RigidBatch)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Escape)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
