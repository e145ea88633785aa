#include <benchmark/benchmark.h>

#include "hct/data.hpp"
#include "hct/objectives.hpp"

using namespace hct;

namespace {

struct Fixture {
  NetworkSpec net;
  Dataset data;
  GroupedBatch batch;
  Vector params;

  explicit Fixture(std::size_t per_group) {
    data = make_synthetic(SyntheticSpec{});
    batch = balanced_minibatch(data, per_group, 1, 0);
    params = init_network(net, 1);
  }
};

void BM_Forward(benchmark::State& state) {
  const Fixture f(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(forward(f.net, f.params, f.batch.features));
  state.SetItemsProcessed(state.iterations() * f.batch.size());
}
BENCHMARK(BM_Forward)->Arg(16)->Arg(64);

void BM_BceGradient(benchmark::State& state) {
  const Fixture f(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(bce_parameter_gradient(f.net, f.params, f.batch));
  state.SetItemsProcessed(state.iterations() * f.batch.size());
}
BENCHMARK(BM_BceGradient)->Arg(16)->Arg(64);

void BM_FairnessJacobian(benchmark::State& state) {
  const Fixture f(static_cast<std::size_t>(state.range(0)));
  const FairnessSpec spec;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fairness_constraint_sample(f.net, f.params, f.batch, spec, true));
  }
  state.SetItemsProcessed(state.iterations() * f.batch.size());
}
BENCHMARK(BM_FairnessJacobian)->Arg(16)->Arg(64);

void BM_BalancedBatch(benchmark::State& state) {
  const Dataset data = make_synthetic(SyntheticSpec{});
  const BalancedSampler sampler(data, static_cast<std::size_t>(state.range(0)));
  std::uint64_t step = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sampler.batch(1, step++));
}
BENCHMARK(BM_BalancedBatch)->Arg(16)->Arg(64);

}  // namespace
