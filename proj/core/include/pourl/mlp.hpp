#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pourl/hashchain.hpp"

namespace pourl {

struct Layer {
  std::uint32_t in = 0;
  std::uint32_t out = 0;
  std::vector<double> weights;  // row-major: out rows, in columns
  std::vector<double> biases;   // out entries
};

// Plain MLP: affine + ReLU per hidden layer, affine output. Parameters are
// value types; copying NetworkParams is exactly the target-network sync.
struct NetworkParams {
  std::vector<Layer> layers;

  std::uint32_t input_dim() const { return layers.empty() ? 0 : layers.front().in; }
  std::uint32_t output_dim() const { return layers.empty() ? 0 : layers.back().out; }
};

// Uniform Glorot-style init: weights from +-sqrt(6/(fan_in+fan_out)), biases
// zero. Draw order is fixed (layer by layer, row-major), so a seed pins the
// parameters bit for bit.
NetworkParams init_params(std::uint32_t input_dim, const std::vector<std::uint32_t>& hidden_sizes,
                          std::uint32_t output_dim, std::uint64_t seed);

// Q-values for every action. Throws std::invalid_argument on a dimension
// mismatch.
std::vector<double> forward(const NetworkParams& params, const EnvState& input);

// One replay-buffer entry: (S_t, A_t, R_{t+1}, S_{t+1}, episode-end flag).
// Defined here because it is the batch element of the loss contract below.
struct Transition {
  EnvState s;
  ActionId a = 0;
  double r = 0.0;
  EnvState s_next;
  bool terminal = false;
};

struct LossAndGrads {
  double loss = 0.0;
  NetworkParams grads;  // same shapes as the prediction parameters
};

// Mean over the batch of (y - Q(s, a; prediction))^2 where
// y = r + gamma * max_a' Q(s', a'; target), or y = r alone for terminal
// transitions. Gradients are the exact analytic gradients of that mean with
// respect to the prediction parameters only; the target network is a frozen
// constant. Throws std::invalid_argument on an empty batch or shape mismatch.
LossAndGrads loss_and_gradients(const NetworkParams& prediction, const NetworkParams& target,
                                const std::vector<Transition>& batch, double gamma);

// params -= alpha * grads, in place. Throws std::invalid_argument on shape
// mismatch.
void sgd_step(NetworkParams& params, const NetworkParams& grads, double alpha);

// Deep, independent copy (the type has value semantics; the named function
// exists so call sites read as the target-network sync they are).
NetworkParams copy_params(const NetworkParams& params);

// Snapshot format: "QNET" magic, u32 version, u32 layer count, then per layer
// u32 in, u32 out, weights row-major and biases as little-endian f64.
void save_params(std::ostream& out, const NetworkParams& params);
std::optional<NetworkParams> load_params(std::istream& in);
bool save_params_file(const std::string& path, const NetworkParams& params);
std::optional<NetworkParams> load_params_file(const std::string& path);

}  // namespace pourl
