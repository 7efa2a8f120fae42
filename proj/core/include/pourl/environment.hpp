#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pourl/hashchain.hpp"

namespace pourl {

struct StepResult {
  EnvState next_state;
  double reward = 0.0;
  bool terminal = false;
};

// The shared deterministic MDP all nodes mine against. Determinism is
// load-bearing: chain validation recomputes every transition and compares it
// bit for bit, so step() must be a pure function of (state, action).
class Oracle {
 public:
  virtual ~Oracle() = default;

  virtual std::size_t state_dim() const = 0;
  virtual std::uint32_t action_count() const = 0;
  virtual EnvState initial_state() const = 0;
  virtual std::string name() const = 0;

  // Preconditions: state is valid for this oracle and action < action_count.
  // Violations throw std::out_of_range / std::invalid_argument; callers on
  // untrusted inputs use verify_transition, which never throws.
  virtual StepResult step(const EnvState& state, ActionId action) const = 0;

  // True when an episode ends in this state; the next transition then starts
  // from initial_state() (episode chaining keeps the chain unbroken).
  virtual bool is_terminal_state(const EnvState& state) const = 0;
};

// True iff step(oracle, s, a) equals `claimed` exactly: bitwise on each state
// entry and the reward, equal terminal flag. Malformed (s, a) returns false.
bool verify_transition(const Oracle& oracle, const EnvState& s, ActionId a,
                       const StepResult& claimed);

struct GridWorldConfig {
  std::uint32_t width = 4;
  std::uint32_t height = 4;
  std::uint32_t start_x = 0;
  std::uint32_t start_y = 0;
  std::uint32_t goal_x = 3;
  std::uint32_t goal_y = 3;
  double step_reward = -0.04;
  double goal_reward = 1.0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> walls;
};

// Deterministic gridworld. States are [x, y] as doubles; actions 0..3 move
// up (y+1), right (x+1), down (y-1), left (x-1). Moves into borders or walls
// leave the state unchanged and still cost step_reward; entering the goal
// yields goal_reward and ends the episode.
class GridWorld final : public Oracle {
 public:
  explicit GridWorld(GridWorldConfig config);  // throws std::invalid_argument

  std::size_t state_dim() const override { return 2; }
  std::uint32_t action_count() const override { return 4; }
  EnvState initial_state() const override;
  std::string name() const override { return "gridworld"; }
  StepResult step(const EnvState& state, ActionId action) const override;
  bool is_terminal_state(const EnvState& state) const override;

  const GridWorldConfig& config() const { return config_; }

  // All non-wall cells as states, row-major from (0,0); includes the goal.
  std::vector<EnvState> all_states() const;

 private:
  bool is_wall(std::uint32_t x, std::uint32_t y) const;
  bool in_grid(const EnvState& state) const;

  GridWorldConfig config_;
  std::vector<std::uint8_t> wall_mask_;  // width*height cells
};

// Exact-lookup table of Q-values over an enumerated finite state set. Keys
// are the bit patterns of the state entries, so lookup matches the bitwise
// equality used everywhere else.
class QValueTable {
 public:
  QValueTable(const std::vector<EnvState>& states, std::uint32_t action_count);

  bool contains(const EnvState& state) const;
  std::vector<double>& at(const EnvState& state);              // throws std::out_of_range
  const std::vector<double>& at(const EnvState& state) const;  // throws std::out_of_range

  std::uint32_t action_count() const { return action_count_; }
  const std::vector<EnvState>& states() const { return states_; }

 private:
  std::vector<EnvState> states_;
  std::uint32_t action_count_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<double>> values_;
};

// Brute-force dynamic programming to the optimal Q*. Sweeps until the
// sup-norm change is below tolerance; throws std::runtime_error if the sweep
// cap is hit (which signals a broken configuration, not slow convergence).
QValueTable value_iteration_oracle(const GridWorld& world, double gamma, double tolerance);

// max_{s,a} |a(s,a) - b(s,a)| over the states of `a` (both tables must cover
// the same state set).
double sup_norm_distance(const QValueTable& a, const QValueTable& b);

}  // namespace pourl
