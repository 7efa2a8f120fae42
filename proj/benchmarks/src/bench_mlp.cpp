#include <benchmark/benchmark.h>

#include "pourl/mlp.hpp"
#include "pourl/rng.hpp"

namespace {

std::vector<pourl::Transition> make_batch(std::size_t size) {
  pourl::Rng rng(11);
  std::vector<pourl::Transition> batch;
  for (std::size_t i = 0; i < size; ++i) {
    pourl::Transition t;
    t.s = {rng.uniform01() * 3.0, rng.uniform01() * 3.0};
    t.s_next = {rng.uniform01() * 3.0, rng.uniform01() * 3.0};
    t.a = rng.uniform_index(4);
    t.r = rng.uniform01() - 0.5;
    t.terminal = rng.uniform_index(8) == 0;
    batch.push_back(std::move(t));
  }
  return batch;
}

void BM_Forward(benchmark::State& state) {
  const pourl::NetworkParams params = pourl::init_params(2, {32, 32}, 4, 7);
  const pourl::EnvState x{1.0, 2.0};
  for (auto _ : state) {
    std::vector<double> q = pourl::forward(params, x);
    benchmark::DoNotOptimize(q);
  }
}
BENCHMARK(BM_Forward);

void BM_LossAndGradients(benchmark::State& state) {
  const pourl::NetworkParams prediction = pourl::init_params(2, {32, 32}, 4, 7);
  const pourl::NetworkParams target = pourl::init_params(2, {32, 32}, 4, 8);
  const std::vector<pourl::Transition> batch = make_batch(32);
  for (auto _ : state) {
    pourl::LossAndGrads out = pourl::loss_and_gradients(prediction, target, batch, 0.9);
    benchmark::DoNotOptimize(out);
  }
}
BENCHMARK(BM_LossAndGradients);

void BM_SgdStep(benchmark::State& state) {
  pourl::NetworkParams params = pourl::init_params(2, {32, 32}, 4, 7);
  const pourl::NetworkParams target = pourl::init_params(2, {32, 32}, 4, 8);
  const std::vector<pourl::Transition> batch = make_batch(32);
  const pourl::LossAndGrads out = pourl::loss_and_gradients(params, target, batch, 0.9);
  for (auto _ : state) {
    pourl::sgd_step(params, out.grads, 1e-9);
    benchmark::DoNotOptimize(params);
  }
}
BENCHMARK(BM_SgdStep);

}  // namespace
