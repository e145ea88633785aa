#include <benchmark/benchmark.h>

#include "hct/harness.hpp"
#include "hct/problems.hpp"

using namespace hct;

namespace {

ExperimentData bench_data() {
  ExperimentConfig cfg;
  return prepare_data(cfg);
}

void BM_SslAlmIterationFairness(benchmark::State& state) {
  const ExperimentData data = bench_data();
  const NetworkSpec net;
  const FairnessProblem problem(net, data.train, FairnessSpec{}, 16, 1);
  SslAlmState st = ssl_alm_init(init_network(net, 1), 4);
  const SslAlmConfig cfg;
  std::uint64_t sample = 0;
  for (auto _ : state) st = ssl_alm_iterate(std::move(st), problem, sample, cfg);
  benchmark::DoNotOptimize(st.x.data());
}
BENCHMARK(BM_SslAlmIterationFairness);

void BM_SswIterationFairness(benchmark::State& state) {
  const ExperimentData data = bench_data();
  const NetworkSpec net;
  const FairnessProblem problem(net, data.train, FairnessSpec{}, 16, 1);
  const SswConfig cfg;
  SswState st = ssw_init(init_network(net, 1), cfg);
  std::uint64_t sample = 0;
  for (auto _ : state) benchmark::DoNotOptimize(ssw_iterate(st, problem, sample, cfg));
}
BENCHMARK(BM_SswIterationFairness);

void BM_AdamStep(benchmark::State& state) {
  const NetworkSpec net;
  AdamState st = adam_init(init_network(net, 1));
  const Vector grad = Vector::Constant(st.x.size(), 1e-3);
  for (auto _ : state) st = adam_step(std::move(st), grad);
  benchmark::DoNotOptimize(st.x.data());
}
BENCHMARK(BM_AdamStep);

void BM_SslAlmIterationQp(benchmark::State& state) {
  const AnalyticProblem qp = make_qp_linear(10, 0.01, 1);
  SslAlmState st = ssl_alm_init(Vector::Zero(10), 1);
  const SslAlmConfig cfg;
  std::uint64_t sample = 0;
  for (auto _ : state) st = ssl_alm_iterate(std::move(st), qp, sample, cfg);
  benchmark::DoNotOptimize(st.x.data());
}
BENCHMARK(BM_SslAlmIterationQp);

void BM_Aggregate(benchmark::State& state) {
  std::vector<std::vector<TraceRecord>> runs(5);
  for (std::size_t r = 0; r < runs.size(); ++r) {
    for (int i = 0; i < 3000; ++i) {
      TraceRecord rec;
      rec.wall_time = 0.02 * i + 0.001 * static_cast<double>(r);
      rec.train_constraints = Vector::Constant(4, 0.01 * i);
      rec.test_constraints = rec.train_constraints;
      rec.hard_gaps_train = Vector::Constant(2, 0.1);
      rec.hard_gaps_test = rec.hard_gaps_train;
      runs[r].push_back(rec);
    }
  }
  for (auto _ : state) benchmark::DoNotOptimize(aggregate(runs));
}
BENCHMARK(BM_Aggregate);

}  // namespace
