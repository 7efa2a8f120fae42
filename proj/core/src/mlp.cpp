#include "pourl/mlp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "pourl/rng.hpp"

namespace pourl {
namespace {

constexpr char kMagic[4] = {'Q', 'N', 'E', 'T'};
constexpr std::uint32_t kSnapshotVersion = 1;

void check_shapes_match(const NetworkParams& a, const NetworkParams& b) {
  bool ok = a.layers.size() == b.layers.size();
  for (std::size_t i = 0; ok && i < a.layers.size(); ++i) {
    ok = a.layers[i].in == b.layers[i].in && a.layers[i].out == b.layers[i].out;
  }
  if (!ok) throw std::invalid_argument("network parameter shapes do not match");
}

// Affine + ReLU stack keeping pre-activations and activations per layer,
// which is everything backpropagation needs.
struct ForwardTrace {
  std::vector<std::vector<double>> activations;     // [0] = input, [L] = output
  std::vector<std::vector<double>> preactivations;  // z per layer
};

ForwardTrace forward_trace(const NetworkParams& params, const EnvState& input) {
  if (params.layers.empty() || input.size() != params.input_dim()) {
    throw std::invalid_argument("forward: input dimension mismatch");
  }
  ForwardTrace trace;
  trace.activations.push_back(input);
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const Layer& layer = params.layers[l];
    const auto& x = trace.activations.back();
    if (x.size() != layer.in) throw std::invalid_argument("forward: layer dimension mismatch");
    std::vector<double> z(layer.out);
    for (std::uint32_t row = 0; row < layer.out; ++row) {
      double acc = layer.biases[row];
      const double* w = layer.weights.data() + std::size_t{row} * layer.in;
      for (std::uint32_t col = 0; col < layer.in; ++col) acc += w[col] * x[col];
      z[row] = acc;
    }
    trace.preactivations.push_back(z);
    const bool hidden = l + 1 < params.layers.size();
    if (hidden) {
      for (auto& v : z) v = v > 0.0 ? v : 0.0;
    }
    trace.activations.push_back(std::move(z));
  }
  return trace;
}

void put_u32(std::ostream& out, std::uint32_t v) {
  std::uint8_t bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<std::uint8_t>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), 4);
}

void put_f64(std::ostream& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  std::uint8_t bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<std::uint8_t>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

bool take_u32(std::istream& in, std::uint32_t& v) {
  std::uint8_t bytes[4];
  if (!in.read(reinterpret_cast<char*>(bytes), 4)) return false;
  v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | bytes[i];
  return true;
}

bool take_f64(std::istream& in, double& v) {
  std::uint8_t bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) return false;
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = (bits << 8) | bytes[i];
  v = std::bit_cast<double>(bits);
  return true;
}

}  // namespace

NetworkParams init_params(std::uint32_t input_dim, const std::vector<std::uint32_t>& hidden_sizes,
                          std::uint32_t output_dim, std::uint64_t seed) {
  if (input_dim == 0 || output_dim == 0) {
    throw std::invalid_argument("init_params: dimensions must be positive");
  }
  for (std::uint32_t h : hidden_sizes) {
    if (h == 0) throw std::invalid_argument("init_params: hidden sizes must be positive");
  }

  Rng rng(seed);
  NetworkParams params;
  std::uint32_t in = input_dim;
  for (std::size_t l = 0; l <= hidden_sizes.size(); ++l) {
    const std::uint32_t out = l < hidden_sizes.size() ? hidden_sizes[l] : output_dim;
    Layer layer;
    layer.in = in;
    layer.out = out;
    const double bound = std::sqrt(6.0 / (static_cast<double>(in) + static_cast<double>(out)));
    layer.weights.resize(std::size_t{out} * in);
    for (auto& w : layer.weights) w = (2.0 * rng.uniform01() - 1.0) * bound;
    layer.biases.assign(out, 0.0);
    params.layers.push_back(std::move(layer));
    in = out;
  }
  return params;
}

std::vector<double> forward(const NetworkParams& params, const EnvState& input) {
  return forward_trace(params, input).activations.back();
}

LossAndGrads loss_and_gradients(const NetworkParams& prediction, const NetworkParams& target,
                                const std::vector<Transition>& batch, double gamma) {
  if (batch.empty()) throw std::invalid_argument("loss_and_gradients: empty batch");
  if (prediction.input_dim() != target.input_dim() ||
      prediction.output_dim() != target.output_dim()) {
    throw std::invalid_argument("loss_and_gradients: prediction/target dimension mismatch");
  }

  LossAndGrads result;
  result.grads.layers.reserve(prediction.layers.size());
  for (const Layer& layer : prediction.layers) {
    Layer zero;
    zero.in = layer.in;
    zero.out = layer.out;
    zero.weights.assign(layer.weights.size(), 0.0);
    zero.biases.assign(layer.biases.size(), 0.0);
    result.grads.layers.push_back(std::move(zero));
  }

  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  const std::size_t depth = prediction.layers.size();

  for (const Transition& t : batch) {
    if (t.a >= prediction.output_dim()) {
      throw std::invalid_argument("loss_and_gradients: action outside the output layer");
    }
    const ForwardTrace trace = forward_trace(prediction, t.s);
    const double predicted = trace.activations.back()[t.a];

    double y = t.r;
    if (!t.terminal) {
      const auto target_q = forward(target, t.s_next);
      y += gamma * *std::max_element(target_q.begin(), target_q.end());
    }
    const double residual = y - predicted;
    result.loss += residual * residual * inv_batch;

    // Output-layer error hits only the taken action's unit; everything below
    // is plain backprop through the affine/ReLU stack.
    std::vector<double> delta(prediction.output_dim(), 0.0);
    delta[t.a] = -2.0 * residual * inv_batch;
    for (std::size_t l = depth; l-- > 0;) {
      Layer& grad = result.grads.layers[l];
      const Layer& layer = prediction.layers[l];
      const auto& x = trace.activations[l];
      for (std::uint32_t row = 0; row < layer.out; ++row) {
        const double d = delta[row];
        if (d == 0.0) continue;
        double* grow = grad.weights.data() + std::size_t{row} * layer.in;
        for (std::uint32_t col = 0; col < layer.in; ++col) grow[col] += d * x[col];
        grad.biases[row] += d;
      }
      if (l == 0) break;
      std::vector<double> below(layer.in, 0.0);
      for (std::uint32_t row = 0; row < layer.out; ++row) {
        const double d = delta[row];
        if (d == 0.0) continue;
        const double* w = layer.weights.data() + std::size_t{row} * layer.in;
        for (std::uint32_t col = 0; col < layer.in; ++col) below[col] += w[col] * d;
      }
      const auto& z = trace.preactivations[l - 1];
      for (std::uint32_t col = 0; col < layer.in; ++col) {
        if (z[col] <= 0.0) below[col] = 0.0;  // ReLU gate
      }
      delta = std::move(below);
    }
  }
  return result;
}

void sgd_step(NetworkParams& params, const NetworkParams& grads, double alpha) {
  check_shapes_match(params, grads);
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    Layer& layer = params.layers[l];
    const Layer& grad = grads.layers[l];
    for (std::size_t i = 0; i < layer.weights.size(); ++i) layer.weights[i] -= alpha * grad.weights[i];
    for (std::size_t i = 0; i < layer.biases.size(); ++i) layer.biases[i] -= alpha * grad.biases[i];
  }
}

NetworkParams copy_params(const NetworkParams& params) { return params; }

void save_params(std::ostream& out, const NetworkParams& params) {
  out.write(kMagic, sizeof(kMagic));
  put_u32(out, kSnapshotVersion);
  put_u32(out, static_cast<std::uint32_t>(params.layers.size()));
  for (const Layer& layer : params.layers) {
    put_u32(out, layer.in);
    put_u32(out, layer.out);
    for (double w : layer.weights) put_f64(out, w);
    for (double b : layer.biases) put_f64(out, b);
  }
}

std::optional<NetworkParams> load_params(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) return std::nullopt;
  std::uint32_t version = 0;
  std::uint32_t layer_count = 0;
  if (!take_u32(in, version) || version != kSnapshotVersion) return std::nullopt;
  if (!take_u32(in, layer_count) || layer_count > 1024) return std::nullopt;

  NetworkParams params;
  for (std::uint32_t l = 0; l < layer_count; ++l) {
    Layer layer;
    if (!take_u32(in, layer.in) || !take_u32(in, layer.out)) return std::nullopt;
    if (layer.in == 0 || layer.out == 0 || std::uint64_t{layer.in} * layer.out > (1u << 24)) {
      return std::nullopt;
    }
    layer.weights.resize(std::size_t{layer.out} * layer.in);
    for (auto& w : layer.weights) {
      if (!take_f64(in, w)) return std::nullopt;
    }
    layer.biases.resize(layer.out);
    for (auto& b : layer.biases) {
      if (!take_f64(in, b)) return std::nullopt;
    }
    params.layers.push_back(std::move(layer));
  }
  in.peek();
  if (!in.eof()) return std::nullopt;
  return params;
}

bool save_params_file(const std::string& path, const NetworkParams& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return false;
  save_params(out, params);
  return static_cast<bool>(out);
}

std::optional<NetworkParams> load_params_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  return load_params(in);
}

}  // namespace pourl
