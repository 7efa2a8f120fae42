#include "pourl/environment.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace pourl {
namespace {

std::string state_key(const EnvState& state) {
  std::string key(state.size() * 8, '\0');
  for (std::size_t i = 0; i < state.size(); ++i) {
    const auto bits = std::bit_cast<std::uint64_t>(state[i]);
    std::memcpy(key.data() + i * 8, &bits, 8);
  }
  return key;
}

bool bitwise_equal(const EnvState& a, const EnvState& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
  }
  return true;
}

}  // namespace

bool verify_transition(const Oracle& oracle, const EnvState& s, ActionId a,
                       const StepResult& claimed) {
  if (a >= oracle.action_count()) return false;
  StepResult actual;
  try {
    actual = oracle.step(s, a);
  } catch (const std::exception&) {
    return false;  // invalid source state: nothing can legitimately claim it
  }
  return bitwise_equal(actual.next_state, claimed.next_state) &&
         std::bit_cast<std::uint64_t>(actual.reward) ==
             std::bit_cast<std::uint64_t>(claimed.reward) &&
         actual.terminal == claimed.terminal;
}

GridWorld::GridWorld(GridWorldConfig config) : config_(std::move(config)) {
  if (config_.width == 0 || config_.height == 0) {
    throw std::invalid_argument("gridworld dimensions must be positive");
  }
  if (config_.start_x >= config_.width || config_.start_y >= config_.height ||
      config_.goal_x >= config_.width || config_.goal_y >= config_.height) {
    throw std::invalid_argument("gridworld start/goal outside the grid");
  }
  if (config_.start_x == config_.goal_x && config_.start_y == config_.goal_y) {
    throw std::invalid_argument("gridworld start equals goal");
  }
  if (!std::isfinite(config_.step_reward) || !std::isfinite(config_.goal_reward)) {
    throw std::invalid_argument("gridworld rewards must be finite");
  }
  wall_mask_.assign(std::size_t{config_.width} * config_.height, 0);
  for (const auto& [x, y] : config_.walls) {
    if (x >= config_.width || y >= config_.height) {
      throw std::invalid_argument("gridworld wall outside the grid");
    }
    wall_mask_[std::size_t{y} * config_.width + x] = 1;
  }
  if (is_wall(config_.start_x, config_.start_y) || is_wall(config_.goal_x, config_.goal_y)) {
    throw std::invalid_argument("gridworld start/goal may not be walls");
  }
}

bool GridWorld::is_wall(std::uint32_t x, std::uint32_t y) const {
  return wall_mask_[std::size_t{y} * config_.width + x] != 0;
}

bool GridWorld::in_grid(const EnvState& state) const {
  if (state.size() != 2) return false;
  const double x = state[0];
  const double y = state[1];
  // valid states are exact integer cell coordinates of non-wall cells
  if (!(x >= 0 && y >= 0) || std::floor(x) != x || std::floor(y) != y) return false;
  if (x >= config_.width || y >= config_.height) return false;
  return !is_wall(static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y));
}

EnvState GridWorld::initial_state() const {
  return {static_cast<double>(config_.start_x), static_cast<double>(config_.start_y)};
}

StepResult GridWorld::step(const EnvState& state, ActionId action) const {
  if (!in_grid(state)) throw std::invalid_argument("gridworld: invalid state");
  if (action >= action_count()) throw std::out_of_range("gridworld: invalid action");
  if (is_terminal_state(state)) {
    throw std::invalid_argument("gridworld: cannot step from the goal state");
  }

  auto x = static_cast<std::int64_t>(state[0]);
  auto y = static_cast<std::int64_t>(state[1]);
  std::int64_t nx = x;
  std::int64_t ny = y;
  switch (action) {
    case 0: ny = y + 1; break;  // up
    case 1: nx = x + 1; break;  // right
    case 2: ny = y - 1; break;  // down
    case 3: nx = x - 1; break;  // left
    default: break;
  }
  const bool blocked = nx < 0 || ny < 0 || nx >= config_.width || ny >= config_.height ||
                       is_wall(static_cast<std::uint32_t>(nx), static_cast<std::uint32_t>(ny));
  if (blocked) {
    nx = x;
    ny = y;
  }

  StepResult result;
  result.next_state = {static_cast<double>(nx), static_cast<double>(ny)};
  result.terminal = nx == config_.goal_x && ny == config_.goal_y;
  result.reward = result.terminal ? config_.goal_reward : config_.step_reward;
  return result;
}

bool GridWorld::is_terminal_state(const EnvState& state) const {
  return state.size() == 2 && state[0] == static_cast<double>(config_.goal_x) &&
         state[1] == static_cast<double>(config_.goal_y);
}

std::vector<EnvState> GridWorld::all_states() const {
  std::vector<EnvState> states;
  states.reserve(std::size_t{config_.width} * config_.height);
  for (std::uint32_t y = 0; y < config_.height; ++y) {
    for (std::uint32_t x = 0; x < config_.width; ++x) {
      if (!is_wall(x, y)) {
        states.push_back({static_cast<double>(x), static_cast<double>(y)});
      }
    }
  }
  return states;
}

QValueTable::QValueTable(const std::vector<EnvState>& states, std::uint32_t action_count)
    : states_(states), action_count_(action_count) {
  values_.assign(states_.size(), std::vector<double>(action_count_, 0.0));
  for (std::size_t i = 0; i < states_.size(); ++i) index_.emplace(state_key(states_[i]), i);
}

bool QValueTable::contains(const EnvState& state) const {
  return index_.contains(state_key(state));
}

std::vector<double>& QValueTable::at(const EnvState& state) {
  const auto it = index_.find(state_key(state));
  if (it == index_.end()) throw std::out_of_range("state not in Q table");
  return values_[it->second];
}

const std::vector<double>& QValueTable::at(const EnvState& state) const {
  const auto it = index_.find(state_key(state));
  if (it == index_.end()) throw std::out_of_range("state not in Q table");
  return values_[it->second];
}

QValueTable value_iteration_oracle(const GridWorld& world, double gamma, double tolerance) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must be in (0,1)");
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");

  QValueTable table(world.all_states(), world.action_count());
  constexpr int kSweepCap = 1000000;
  for (int sweep = 0; sweep < kSweepCap; ++sweep) {
    double max_change = 0.0;
    for (const EnvState& s : table.states()) {
      if (world.is_terminal_state(s)) continue;  // no actions are taken from the goal
      auto& row = table.at(s);
      for (ActionId a = 0; a < world.action_count(); ++a) {
        const StepResult r = world.step(s, a);
        const double bootstrap =
            r.terminal ? 0.0 : *std::max_element(table.at(r.next_state).begin(),
                                                 table.at(r.next_state).end());
        const double updated = r.reward + gamma * bootstrap;
        max_change = std::max(max_change, std::abs(updated - row[a]));
        row[a] = updated;
      }
    }
    if (max_change < tolerance) return table;
  }
  throw std::runtime_error("value iteration did not converge; check the configuration");
}

double sup_norm_distance(const QValueTable& a, const QValueTable& b) {
  double worst = 0.0;
  for (const EnvState& s : a.states()) {
    const auto& ra = a.at(s);
    const auto& rb = b.at(s);
    for (std::size_t i = 0; i < ra.size(); ++i) {
      worst = std::max(worst, std::abs(ra[i] - rb[i]));
    }
  }
  return worst;
}

}  // namespace pourl
