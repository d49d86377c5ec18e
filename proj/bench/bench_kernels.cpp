// Serial against OpenMP timings for the exhaustive kernels. The argument
// selects the path: 0 serial, 1 parallel.

#include <benchmark/benchmark.h>

#include "tarski/bim.hpp"
#include "tarski/core.hpp"
#include "tarski/grpd.hpp"
#include "tarski/thompson.hpp"
#include "tarski/wobble.hpp"

using namespace tarski;

namespace {

Exec exec_of(const benchmark::State& state) { return state.range(0) == 0 ? Exec::Serial : Exec::Parallel; }

const FiniteInverseMonoid& i4() {
  static const auto m = symmetric_inverse_monoid(4);
  return m;
}

void BM_VerifyInverseMonoid(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(verify_inverse_monoid(i4(), exec_of(state)));
  state.counters["pairs"] = static_cast<double>(i4().size() * i4().size());
}

void BM_GreenClassify(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(green_classify(i4(), exec_of(state)));
}

void BM_VerifyEmbedding(benchmark::State& state) {
  auto cp2 = BimInstance::polycyclic(2);
  VEmbedding h(cp2.generators[0], cp2.generators[1]);
  auto set = enumerate_v(2, 3);
  for (auto _ : state) benchmark::DoNotOptimize(verify_embedding(h, set, exec_of(state)));
  state.counters["elements"] = static_cast<double>(set.size());
}

void BM_SupramenabilityScan(benchmark::State& state) {
  ScanFamily f;
  f.kind = MetricKind::Grid;
  for (auto _ : state) benchmark::DoNotOptimize(supramenability_scan(f, 2, 12, Rational(1), false, exec_of(state)));
}

void BM_KoopmanTightness(benchmark::State& state) {
  FiniteGroupoid g(7, {{0, 1, 2, 3}, {4, 5, 6}});
  std::vector<Rational> mu(7, Rational(1, 7));
  for (auto _ : state) benchmark::DoNotOptimize(koopman_tightness(g, mu, exec_of(state)));
}

}  // namespace

BENCHMARK(BM_VerifyInverseMonoid)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GreenClassify)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_VerifyEmbedding)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SupramenabilityScan)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KoopmanTightness)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
