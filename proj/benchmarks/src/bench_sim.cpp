#include <benchmark/benchmark.h>

#include "pourl/dqn.hpp"
#include "pourl/environment.hpp"
#include "pourl/netsim.hpp"

namespace {

void BM_MineOneBlock(benchmark::State& state) {
  const pourl::GridWorld world{pourl::GridWorldConfig{}};
  pourl::LearningConfig learning;
  learning.seed = 3;
  pourl::AgentState agent = pourl::make_agent(world, learning);
  pourl::Chain chain;
  chain.blocks.push_back(pourl::make_genesis(world));
  for (auto _ : state) {
    pourl::Block block = pourl::mine_one_block(agent, world, chain.tip(), {}, 0);
    benchmark::DoNotOptimize(block);
    pourl::append_block(chain, std::move(block), world);
  }
}
BENCHMARK(BM_MineOneBlock);

void BM_SmallSimulation(benchmark::State& state) {
  const pourl::GridWorld world{pourl::GridWorldConfig{}};
  pourl::LearningConfig learning;
  learning.batch_size = 4;
  learning.hidden_sizes = {8};
  pourl::SimConfig config;
  config.node_count = 3;
  config.seed = 5;
  config.max_blocks = 30;
  for (auto _ : state) {
    pourl::SimReport report = pourl::run_simulation(config, world, learning);
    benchmark::DoNotOptimize(report);
  }
}
BENCHMARK(BM_SmallSimulation);

}  // namespace
