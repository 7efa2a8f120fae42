#pragma once

#include <cstdint>
#include <unordered_set>
#include <vector>

#include "pourl/environment.hpp"
#include "pourl/mlp.hpp"
#include "pourl/rng.hpp"

namespace pourl {

struct LearningConfig {
  double alpha = 0.01;                        // SGD step size
  double gamma = 0.9;                         // discount
  double epsilon = 0.1;                       // exploration rate (fixed)
  std::uint32_t sync_interval_C = 50;         // copy prediction -> target every C iterations
  std::uint32_t batch_size = 32;
  std::uint32_t buffer_capacity = 10000;
  std::vector<std::uint32_t> hidden_sizes{32, 32};
  std::uint64_t seed = 0;
};

// Ring buffer of transitions; eviction is oldest-first once full.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return ring_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::uint64_t total_pushed() const { return total_pushed_; }

  // index 0 is the oldest transition currently held
  const Transition& at(std::size_t index) const;

 private:
  std::size_t capacity_;
  std::vector<Transition> ring_;
  std::size_t next_ = 0;  // slot the next push overwrites once full
  std::uint64_t total_pushed_ = 0;
};

// Everything a mining node keeps in memory and never synchronizes with
// peers: both networks, the replay buffer, and its private random stream.
struct AgentState {
  NetworkParams prediction;  // Q(.; theta), trained
  NetworkParams target;      // Q(.; theta'), frozen between syncs
  ReplayBuffer replay;
  std::uint64_t iteration_count = 0;  // completed training iterations
  Rng rng;
  LearningConfig config;
  // Digests of blocks whose transitions are already in the replay buffer
  // (own mined blocks and previously adopted ones), so reorgs never insert
  // duplicates.
  std::unordered_set<std::string> seen_blocks;
};

AgentState make_agent(const Oracle& oracle, const LearningConfig& config);

// Epsilon-greedy: draws u ~ U[0,1); explores uniformly when u < epsilon,
// otherwise takes the argmax of forward(prediction, state) with ties broken
// by the lowest action id. Always consumes exactly one uniform draw, plus one
// more when exploring.
ActionId select_action(AgentState& agent, const EnvState& state);

// One proof-of-work iteration: select an action from the tip state (or the
// initial state when the tip ended an episode), step the oracle, build the
// block, store the transition, take one SGD step on a uniformly sampled
// batch once the buffer holds batch_size transitions, and sync the target
// network every C iterations. The returned block always passes append_block
// against the given tip.
Block mine_one_block(AgentState& agent, const Oracle& oracle, const Block& tip,
                     std::vector<std::uint8_t> payload, std::uint32_t author);

// After adopting `chain`, appends each of its transitions (oldest first) that
// this agent has not already contributed or ingested, respecting capacity.
// Precondition: the chain was validated by the caller (adoption validates).
void rebuild_replay_from_chain(AgentState& agent, const Chain& chain, const Oracle& oracle);

// Tabular Q-learning update, the reference the network path is tested
// against:  q(s,a) += alpha * (r + gamma * max_a' q(s',a') - q(s,a)),
// with the max term dropped when the transition is terminal.
// Throws std::out_of_range for states outside the table.
void tabular_q_update(QValueTable& table, const EnvState& s, ActionId a, double r,
                      const EnvState& s_next, bool terminal, double alpha, double gamma);

}  // namespace pourl
