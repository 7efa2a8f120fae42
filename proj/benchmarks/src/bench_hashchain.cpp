#include <benchmark/benchmark.h>

#include "pourl/environment.hpp"
#include "pourl/hashchain.hpp"

namespace {

// Walking into the top border forever: an arbitrarily long valid chain that
// never ends an episode.
pourl::Chain grid_chain(const pourl::GridWorld& world, int blocks) {
  pourl::Chain chain;
  chain.blocks.push_back(pourl::make_genesis(world));
  for (int i = 0; i < blocks; ++i) {
    const pourl::Block& tip = chain.tip();
    const pourl::StepResult result = world.step(tip.state, 0);
    pourl::Block block;
    block.height = tip.height + 1;
    block.state = result.next_state;
    block.action = 0;
    block.reward = result.reward;
    block.prev_hash = pourl::hash_block(tip);
    block.author = 1;
    pourl::append_block(chain, std::move(block), world);
  }
  return chain;
}

void BM_CanonicalBytes(benchmark::State& state) {
  const pourl::GridWorld world{pourl::GridWorldConfig{}};
  const pourl::Chain chain = grid_chain(world, 1);
  for (auto _ : state) {
    std::vector<std::uint8_t> bytes = pourl::canonical_bytes(chain.tip());
    benchmark::DoNotOptimize(bytes);
  }
}
BENCHMARK(BM_CanonicalBytes);

void BM_HashBlock(benchmark::State& state) {
  const pourl::GridWorld world{pourl::GridWorldConfig{}};
  const pourl::Chain chain = grid_chain(world, 1);
  for (auto _ : state) {
    pourl::BlockHash digest = pourl::hash_block(chain.tip());
    benchmark::DoNotOptimize(digest);
  }
}
BENCHMARK(BM_HashBlock);

void BM_ValidateChain(benchmark::State& state) {
  const pourl::GridWorld world{pourl::GridWorldConfig{}};
  const pourl::Chain chain = grid_chain(world, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto failure = pourl::validate_chain(chain, world);
    benchmark::DoNotOptimize(failure);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ValidateChain)->Arg(50)->Arg(200)->Arg(800)->Complexity(benchmark::oN);

}  // namespace
