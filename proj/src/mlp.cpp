#include "binyard/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>

#include "binyard/kernels.hpp"

namespace binyard {

void MlpSpec::validate() const {
  if (input_dim < 1 || output_dim < 1) throw std::invalid_argument("mlp spec: dims must be >= 1");
  for (int h : hidden_layers)
    if (h < 1) throw std::invalid_argument("mlp spec: hidden widths must be >= 1");
}

std::vector<int> MlpSpec::widths() const {
  std::vector<int> w;
  w.push_back(input_dim);
  w.insert(w.end(), hidden_layers.begin(), hidden_layers.end());
  w.push_back(output_dim);
  return w;
}

std::size_t MlpSpec::param_count() const {
  const auto w = widths();
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < w.size(); ++l) n += static_cast<std::size_t>(w[l + 1]) * (w[l] + 1);
  return n;
}

void ParamSet::zero_grad() { std::fill(grads.begin(), grads.end(), 0.0); }

Network::Network(MlpSpec s) : spec(std::move(s)), params(spec.param_count()) { spec.validate(); }

void init_params(const MlpSpec& spec, ParamSet& params, Rng& rng, double output_scale) {
  spec.validate();
  const auto w = spec.widths();
  params.values.assign(spec.param_count(), 0.0);
  params.grads.assign(spec.param_count(), 0.0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < w.size(); ++l) {
    const std::size_t in = w[l], out = w[l + 1];
    const double scale = (1.0 / std::sqrt(static_cast<double>(in))) * (l + 2 == w.size() ? output_scale : 1.0);
    for (std::size_t k = 0; k < out * (in + 1); ++k) params.values[off + k] = scale * u(rng);
    off += out * (in + 1);
  }
}

namespace {

void check_shapes(const MlpSpec& spec, const ParamSet& params, std::size_t input_size) {
  if (input_size != static_cast<std::size_t>(spec.input_dim))
    throw std::invalid_argument("mlp forward: input has " + std::to_string(input_size) + " entries, expected " +
                                std::to_string(spec.input_dim));
  if (params.values.size() != spec.param_count())
    throw std::invalid_argument("mlp forward: parameter count does not match spec");
}

}  // namespace

std::span<const double> forward(const MlpSpec& spec, const ParamSet& params, std::span<const double> input,
                                ForwardCache& cache) {
  check_shapes(spec, params, input.size());
  const auto w = spec.widths();
  const auto& k = kernels::active();
  const std::size_t layers = w.size() - 1;
  cache.activations.resize(w.size());
  cache.activations[0].assign(input.begin(), input.end());
  std::size_t off = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = w[l], out = w[l + 1];
    auto& y = cache.activations[l + 1];
    y.resize(out);
    const double* weights = params.values.data() + off;
    const double* bias = weights + out * in;
    k.matvec(weights, bias, cache.activations[l].data(), y.data(), out, in);
    if (l + 1 < layers)
      for (double& v : y) v = std::tanh(v);
    off += out * (in + 1);
  }
  cache.recorded = true;
  return cache.activations.back();
}

std::vector<double> forward(const MlpSpec& spec, const ParamSet& params, std::span<const double> input) {
  ForwardCache cache;
  auto out = forward(spec, params, input, cache);
  return {out.begin(), out.end()};
}

void backward(const MlpSpec& spec, ParamSet& params, const ForwardCache& cache, std::span<const double> output_grad) {
  const auto w = spec.widths();
  if (!cache.recorded || cache.activations.size() != w.size())
    throw std::logic_error("mlp backward: no recorded forward pass for this spec");
  if (output_grad.size() != static_cast<std::size_t>(spec.output_dim))
    throw std::invalid_argument("mlp backward: output gradient has wrong length");
  if (params.grads.size() != params.values.size()) throw std::logic_error("mlp backward: gradient array size mismatch");

  const auto& k = kernels::active();
  const std::size_t layers = w.size() - 1;

  std::vector<std::size_t> offsets(layers);
  for (std::size_t l = 0, off = 0; l < layers; ++l) {
    offsets[l] = off;
    off += static_cast<std::size_t>(w[l + 1]) * (w[l] + 1);
  }

  // delta = dL/d(pre-activation) of the current layer
  std::vector<double> delta(output_grad.begin(), output_grad.end());
  std::vector<double> upstream;
  for (std::size_t l = layers; l-- > 0;) {
    const std::size_t in = w[l], out = w[l + 1];
    const double* weights = params.values.data() + offsets[l];
    double* gw = params.grads.data() + offsets[l];
    double* gb = gw + out * in;
    const auto& x = cache.activations[l];
    k.outer_acc(delta.data(), x.data(), gw, out, in);
    for (std::size_t r = 0; r < out; ++r) gb[r] += delta[r];
    if (l == 0) break;
    upstream.assign(in, 0.0);
    k.matvec_t(weights, delta.data(), upstream.data(), out, in);
    // x is tanh output of layer l-1: d tanh = 1 - x^2
    for (std::size_t c = 0; c < in; ++c) upstream[c] *= (1.0 - x[c] * x[c]);
    delta.swap(upstream);
  }
}

std::uint64_t checksum(std::span<const double> values) {
  std::uint64_t h = 1469598103934665603ULL;
  for (double v : values) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xFF;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

}  // namespace binyard
