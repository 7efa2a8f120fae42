#pragma once

// Shared test fixtures: a scripted-reward oracle so fork-choice cases can be
// staged with exact reward values, a chain builder, and the extended-precision
// finite-difference reference behind the gradient checks.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pourl/environment.hpp"
#include "pourl/hashchain.hpp"
#include "pourl/mlp.hpp"
#include "pourl/rng.hpp"

namespace testutil {

// Deterministic oracle whose reward is a script lookup by (step index,
// action). The state is just the step counter, so equal-length chains can
// differ in actions and rewards while both stay valid -- which is what the
// consensus tie-break cases need. Episodes never end.
class SeqOracle final : public pourl::Oracle {
 public:
  // rewards[t][a] = reward of taking action a from state [t]
  explicit SeqOracle(std::vector<std::vector<double>> rewards) : rewards_(std::move(rewards)) {
    for (const auto& row : rewards_) {
      if (row.size() != rewards_.front().size()) {
        throw std::invalid_argument("reward script rows must agree on the action count");
      }
    }
  }

  std::size_t state_dim() const override { return 1; }
  std::uint32_t action_count() const override {
    return static_cast<std::uint32_t>(rewards_.empty() ? 0 : rewards_.front().size());
  }
  pourl::EnvState initial_state() const override { return {0.0}; }
  std::string name() const override { return "seq"; }

  pourl::StepResult step(const pourl::EnvState& state, pourl::ActionId action) const override {
    if (state.size() != 1) throw std::invalid_argument("seq oracle states are [t]");
    const auto t = static_cast<std::size_t>(state[0]);
    if (t >= rewards_.size()) throw std::out_of_range("ran past the reward script");
    if (action >= action_count()) throw std::invalid_argument("action outside the script");
    return {{state[0] + 1.0}, rewards_[t][action], false};
  }

  bool is_terminal_state(const pourl::EnvState&) const override { return false; }

 private:
  std::vector<std::vector<double>> rewards_;
};

// Genesis plus one block per listed action, every append validated.
inline pourl::Chain make_chain(const pourl::Oracle& oracle,
                               const std::vector<pourl::ActionId>& actions,
                               std::uint32_t author = 0) {
  pourl::Chain chain;
  chain.blocks.push_back(pourl::make_genesis(oracle));
  for (pourl::ActionId action : actions) {
    const pourl::Block& tip = chain.tip();
    const pourl::EnvState source =
        oracle.is_terminal_state(tip.state) ? oracle.initial_state() : tip.state;
    const pourl::StepResult result = oracle.step(source, action);
    pourl::Block block;
    block.height = tip.height + 1;
    block.state = result.next_state;
    block.action = action;
    block.reward = result.reward;
    block.prev_hash = pourl::hash_block(tip);
    block.author = author;
    if (pourl::append_block(chain, std::move(block), oracle)) {
      throw std::logic_error("test chain construction produced an invalid block");
    }
  }
  return chain;
}

// ---- extended-precision gradient reference ----
//
// Restricted to any single parameter (all others held fixed), the loss of a
// ReLU network is piecewise quadratic, so central differences carry zero
// truncation error away from the kinks and the step can be chosen wide
// enough (1e-3) that rounding noise in the long-double evaluations stays
// around 1e-14 absolute -- inside a 1e-5 relative tolerance even at the
// |g| > 1e-8 cutoff. Cases where a hidden preactivation sits within 0.05 of
// its kink are rejected and redrawn: a 1e-3 step perturbs any preactivation
// by at most ~1.4e-2 at these widths, so surviving cases cannot cross one.

inline std::vector<long double> ref_forward(const pourl::NetworkParams& net,
                                            const pourl::EnvState& x,
                                            std::vector<long double>* hidden_preacts = nullptr) {
  std::vector<long double> act(x.begin(), x.end());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const pourl::Layer& layer = net.layers[l];
    std::vector<long double> next(layer.out, 0.0L);
    for (std::uint32_t i = 0; i < layer.out; ++i) {
      long double acc = layer.biases[i];
      for (std::uint32_t j = 0; j < layer.in; ++j) {
        acc += static_cast<long double>(layer.weights[std::size_t{i} * layer.in + j]) * act[j];
      }
      next[i] = acc;
    }
    if (l + 1 < net.layers.size()) {
      if (hidden_preacts) hidden_preacts->insert(hidden_preacts->end(), next.begin(), next.end());
      for (long double& v : next) v = v > 0.0L ? v : 0.0L;
    }
    act = std::move(next);
  }
  return act;
}

inline long double ref_loss(const pourl::NetworkParams& prediction,
                            const pourl::NetworkParams& target,
                            const std::vector<pourl::Transition>& batch, double gamma) {
  long double loss = 0.0L;
  for (const pourl::Transition& t : batch) {
    long double y = t.r;
    if (!t.terminal) {
      const std::vector<long double> q = ref_forward(target, t.s_next);
      long double best = q.front();
      for (long double v : q) best = v > best ? v : best;
      y += static_cast<long double>(gamma) * best;
    }
    const long double residual = y - ref_forward(prediction, t.s)[t.a];
    loss += residual * residual;
  }
  return loss / static_cast<long double>(batch.size());
}

inline bool kink_safe(const pourl::NetworkParams& prediction,
                      const std::vector<pourl::Transition>& batch, double margin) {
  for (const pourl::Transition& t : batch) {
    std::vector<long double> preacts;
    ref_forward(prediction, t.s, &preacts);
    for (long double z : preacts) {
      if (std::fabs(static_cast<double>(z)) < margin) return false;
    }
  }
  return true;
}

struct FdReport {
  double worst_rel = 0.0;
  std::size_t checked = 0;
  double loss_gap = 0.0;  // |library loss - reference loss|
};

// Central differences of ref_loss against the library's analytic gradients,
// coordinate by coordinate, skipping |g| <= cutoff.
inline FdReport fd_compare(pourl::NetworkParams prediction, const pourl::NetworkParams& target,
                           const std::vector<pourl::Transition>& batch, double gamma,
                           double cutoff) {
  const pourl::LossAndGrads out = pourl::loss_and_gradients(prediction, target, batch, gamma);
  FdReport report;
  report.loss_gap = std::fabs(
      out.loss - static_cast<double>(ref_loss(prediction, target, batch, gamma)));
  const double h = 1e-3;
  for (std::size_t l = 0; l < prediction.layers.size(); ++l) {
    const auto sweep = [&](std::vector<double>& coords, const std::vector<double>& grads) {
      for (std::size_t i = 0; i < coords.size(); ++i) {
        const double g = grads[i];
        if (std::fabs(g) <= cutoff) continue;
        const double old = coords[i];
        const double hi = old + h;
        const double lo = old - h;
        coords[i] = hi;
        const long double up = ref_loss(prediction, target, batch, gamma);
        coords[i] = lo;
        const long double down = ref_loss(prediction, target, batch, gamma);
        coords[i] = old;
        // divide by the representable step actually taken, not by 2h
        const long double fd =
            (up - down) / (static_cast<long double>(hi) - static_cast<long double>(lo));
        const double rel = static_cast<double>(
            fabsl(fd - static_cast<long double>(g)) / fabsl(static_cast<long double>(g)));
        if (rel > report.worst_rel) report.worst_rel = rel;
        ++report.checked;
      }
    };
    sweep(prediction.layers[l].weights, out.grads.layers[l].weights);
    sweep(prediction.layers[l].biases, out.grads.layers[l].biases);
  }
  return report;
}

struct GradCase {
  pourl::NetworkParams prediction;
  pourl::NetworkParams target;
  std::vector<pourl::Transition> batch;
};

// Random net (dims <= 8, depth <= 3 layers) and batch (size <= 4), redrawn
// until every hidden preactivation clears the kink margin.
inline GradCase draw_grad_case(pourl::Rng& rng) {
  for (int attempt = 0; attempt < 20000; ++attempt) {
    const std::uint32_t input = 1 + rng.uniform_index(8);
    const std::uint32_t output = 1 + rng.uniform_index(8);
    const std::uint32_t depth = 1 + rng.uniform_index(3);
    std::vector<std::uint32_t> hidden;
    for (std::uint32_t l = 0; l + 1 < depth; ++l) hidden.push_back(1 + rng.uniform_index(8));
    GradCase c;
    c.prediction = pourl::init_params(input, hidden, output, rng.next_u64());
    c.target = pourl::init_params(input, hidden, output, rng.next_u64());
    const std::size_t batch_size = 1 + rng.uniform_index(4);
    for (std::size_t i = 0; i < batch_size; ++i) {
      pourl::Transition t;
      for (std::uint32_t d = 0; d < input; ++d) t.s.push_back(rng.uniform01() * 4.0 - 2.0);
      for (std::uint32_t d = 0; d < input; ++d) t.s_next.push_back(rng.uniform01() * 4.0 - 2.0);
      t.a = rng.uniform_index(output);
      t.r = rng.uniform01() * 2.0 - 1.0;
      t.terminal = rng.uniform_index(4) == 0;
      c.batch.push_back(std::move(t));
    }
    if (kink_safe(c.prediction, c.batch, 0.05)) return c;
  }
  throw std::runtime_error("could not draw a kink-safe gradient case");
}

}  // namespace testutil
