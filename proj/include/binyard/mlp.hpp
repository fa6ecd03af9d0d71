#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "binyard/rng.hpp"

namespace binyard {

/// Fully connected net: tanh on every hidden layer, linear output.
struct MlpSpec {
  int input_dim = 1;
  std::vector<int> hidden_layers{64, 64};
  int output_dim = 1;

  void validate() const;
  /// Widths including input and output: {input, h1, ..., output}.
  std::vector<int> widths() const;
  std::size_t param_count() const;

  bool operator==(const MlpSpec&) const = default;
};

/// Flat parameters plus a gradient array of the same length. Layer l stores
/// its weight matrix (out x in, row-major) followed by its bias vector.
struct ParamSet {
  std::vector<double> values;
  std::vector<double> grads;

  explicit ParamSet(std::size_t n = 0) : values(n, 0.0), grads(n, 0.0) {}
  std::size_t size() const { return values.size(); }
  void zero_grad();
};

/// Activations recorded by a forward pass, consumed by backward.
struct ForwardCache {
  std::vector<std::vector<double>> activations;  // [0] = input, back() = output
  bool recorded = false;
};

struct Network {
  MlpSpec spec;
  ParamSet params;

  Network() = default;
  explicit Network(MlpSpec s);
};

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases; the output
/// layer is further multiplied by `output_scale`.
void init_params(const MlpSpec& spec, ParamSet& params, Rng& rng, double output_scale = 1.0);

std::vector<double> forward(const MlpSpec& spec, const ParamSet& params, std::span<const double> input);

/// Forward pass that records activations. Returns a view of the output held in `cache`.
std::span<const double> forward(const MlpSpec& spec, const ParamSet& params, std::span<const double> input,
                                ForwardCache& cache);

/// Adds d<output, output_grad>/d(params) to `params.grads`. Requires a
/// recorded cache from the same spec.
void backward(const MlpSpec& spec, ParamSet& params, const ForwardCache& cache, std::span<const double> output_grad);

/// Order-sensitive 64-bit hash of the parameter bits (FNV-1a).
std::uint64_t checksum(std::span<const double> values);

}  // namespace binyard
