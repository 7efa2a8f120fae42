#include "pourl/dqn.hpp"

#include <stdexcept>
#include <utility>

#include "pourl/hashchain.hpp"
#include "pourl/sha256.hpp"

namespace pourl {
namespace {

std::string block_key(const Block& block) { return to_hex(hash_block(block)); }

void train_step(AgentState& agent) {
  const std::uint32_t batch_size = agent.config.batch_size;
  if (agent.replay.size() < batch_size) return;  // warm-up: not enough experience yet

  std::vector<Transition> batch;
  batch.reserve(batch_size);
  const auto population = static_cast<std::uint32_t>(agent.replay.size());
  for (std::uint32_t i = 0; i < batch_size; ++i) {
    batch.push_back(agent.replay.at(agent.rng.uniform_index(population)));
  }
  const LossAndGrads step =
      loss_and_gradients(agent.prediction, agent.target, batch, agent.config.gamma);
  sgd_step(agent.prediction, step.grads, agent.config.alpha);
}

}  // namespace

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay buffer capacity must be positive");
  ring_.reserve(capacity);
}

void ReplayBuffer::push(Transition t) {
  if (ring_.size() < capacity_) {
    ring_.push_back(std::move(t));
  } else {
    ring_[next_] = std::move(t);
    next_ = (next_ + 1) % capacity_;
  }
  ++total_pushed_;
}

const Transition& ReplayBuffer::at(std::size_t index) const {
  if (index >= ring_.size()) throw std::out_of_range("replay buffer index out of range");
  if (ring_.size() < capacity_) return ring_[index];
  return ring_[(next_ + index) % capacity_];
}

AgentState make_agent(const Oracle& oracle, const LearningConfig& config) {
  if (config.batch_size == 0 || config.sync_interval_C == 0) {
    throw std::invalid_argument("batch size and sync interval must be positive");
  }
  if (!(config.epsilon >= 0.0 && config.epsilon <= 1.0)) {
    throw std::invalid_argument("epsilon must lie in [0, 1]");
  }
  if (!(config.alpha > 0.0) || !(config.gamma > 0.0 && config.gamma < 1.0)) {
    throw std::invalid_argument("alpha must be positive and gamma must lie in (0, 1)");
  }
  NetworkParams prediction = init_params(oracle.state_dim(), config.hidden_sizes,
                                         oracle.action_count(), Rng::derive(config.seed, 0));
  NetworkParams target = copy_params(prediction);
  return AgentState{std::move(prediction),
                    std::move(target),
                    ReplayBuffer(config.buffer_capacity),
                    0,
                    Rng(Rng::derive(config.seed, 1)),
                    config,
                    {}};
}

ActionId select_action(AgentState& agent, const EnvState& state) {
  const auto action_count = agent.prediction.output_dim();
  const double u = agent.rng.uniform01();
  if (u < agent.config.epsilon) return agent.rng.uniform_index(action_count);

  const std::vector<double> q = forward(agent.prediction, state);
  ActionId best = 0;
  for (ActionId a = 1; a < action_count; ++a) {
    if (q[a] > q[best]) best = a;
  }
  return best;
}

Block mine_one_block(AgentState& agent, const Oracle& oracle, const Block& tip,
                     std::vector<std::uint8_t> payload, std::uint32_t author) {
  // Episodes chain through the ledger: a terminal tip state means the next
  // block starts a fresh episode from the initial state.
  const EnvState source =
      oracle.is_terminal_state(tip.state) ? oracle.initial_state() : tip.state;

  const ActionId action = select_action(agent, source);
  const StepResult step = oracle.step(source, action);

  Block block;
  block.height = tip.height + 1;
  block.state = step.next_state;
  block.action = action;
  block.reward = step.reward;
  block.payload = std::move(payload);
  block.prev_hash = hash_block(tip);
  block.author = author;

  agent.seen_blocks.insert(block_key(block));
  agent.replay.push(Transition{source, action, step.reward, step.next_state, step.terminal});
  train_step(agent);

  ++agent.iteration_count;
  if (agent.iteration_count % agent.config.sync_interval_C == 0) {
    agent.target = copy_params(agent.prediction);
  }
  return block;
}

void rebuild_replay_from_chain(AgentState& agent, const Chain& chain, const Oracle& oracle) {
  for (std::size_t i = 1; i < chain.blocks.size(); ++i) {
    const Block& block = chain.blocks[i];
    std::string key = block_key(block);
    if (agent.seen_blocks.contains(key)) continue;

    const Block& prev = chain.blocks[i - 1];
    const EnvState source =
        oracle.is_terminal_state(prev.state) ? oracle.initial_state() : prev.state;
    agent.replay.push(Transition{source, block.action, block.reward, block.state,
                                 oracle.is_terminal_state(block.state)});
    agent.seen_blocks.insert(std::move(key));
  }
}

void tabular_q_update(QValueTable& table, const EnvState& s, ActionId a, double r,
                      const EnvState& s_next, bool terminal, double alpha, double gamma) {
  std::vector<double>& row = table.at(s);
  if (a >= row.size()) throw std::out_of_range("tabular update: action outside the table");
  double target = r;
  if (!terminal) {
    const std::vector<double>& next_row = table.at(s_next);
    double best = next_row[0];
    for (double q : next_row) {
      if (q > best) best = q;
    }
    target += gamma * best;
  }
  row[a] += alpha * (target - row[a]);
}

}  // namespace pourl
