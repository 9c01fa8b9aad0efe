#ifndef PERSONA_PONG_MLP_H_
#define PERSONA_PONG_MLP_H_

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "persona_pong/errors.h"
#include "persona_pong/rng.h"

namespace persona_pong {

// Fully connected network with rectifier hidden layers and a linear output.
// Parameters live in one flat array, layer by layer: weights row-major
// (out x in), then biases.
template <typename Real>
class Mlp {
 public:
  // Activations of one forward pass, kept for the backward pass.
  struct Workspace {
    std::vector<std::vector<Real>> activations;  // [0] is the input
    std::vector<Real> delta;
    std::vector<Real> delta_next;

    std::span<const Real> output() const { return activations.back(); }
  };

  Mlp() = default;

  explicit Mlp(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
    if (sizes_.size() < 2) throw ArgumentError("an MLP needs >= 2 layers");
    size_t count = 0;
    for (size_t l = 0; l + 1 < sizes_.size(); ++l) {
      if (sizes_[l] <= 0 || sizes_[l + 1] <= 0) {
        throw ArgumentError("layer sizes must be positive");
      }
      offsets_.push_back(count);
      count += static_cast<size_t>(sizes_[l]) * sizes_[l + 1] + sizes_[l + 1];
    }
    params_.assign(count, Real(0));
  }

  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
  void InitUniform(SplitMix64& rng) {
    for (int l = 0; l < num_layers(); ++l) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(sizes_[l]));
      auto block = LayerParams(l);
      for (Real& p : block) p = static_cast<Real>(rng.Uniform(-bound, bound));
    }
  }

  const std::vector<int>& layer_sizes() const { return sizes_; }
  int num_layers() const { return static_cast<int>(sizes_.size()) - 1; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  size_t parameter_count() const { return params_.size(); }

  std::span<Real> parameters() { return params_; }
  std::span<const Real> parameters() const { return params_; }

  // Weights then biases of layer l.
  std::span<Real> LayerParams(int l) {
    return std::span<Real>(params_).subspan(offsets_[l], LayerSize(l));
  }

  template <typename In>
  std::span<const Real> Forward(std::span<const In> input,
                                Workspace& ws) const {
    if (static_cast<int>(input.size()) != input_size()) {
      throw ArgumentError("input has " + std::to_string(input.size()) +
                          " features, network expects " +
                          std::to_string(input_size()));
    }
    ws.activations.resize(sizes_.size());
    ws.activations[0].assign(input.begin(), input.end());
    for (int l = 0; l < num_layers(); ++l) {
      const int in = sizes_[l];
      const int out = sizes_[l + 1];
      const Real* w = params_.data() + offsets_[l];
      const Real* b = w + static_cast<size_t>(in) * out;
      const Real* x = ws.activations[l].data();
      auto& y = ws.activations[l + 1];
      y.resize(out);
      const bool hidden = l + 1 < num_layers();
      for (int o = 0; o < out; ++o) {
        const Real* row = w + static_cast<size_t>(o) * in;
        Real z = b[o];
        for (int i = 0; i < in; ++i) z += row[i] * x[i];
        y[o] = hidden ? std::max(z, Real(0)) : z;
      }
    }
    return ws.activations.back();
  }

  template <typename In>
  std::vector<Real> Forward(std::span<const In> input) const {
    Workspace ws;
    auto out = Forward(input, ws);
    return {out.begin(), out.end()};
  }

  // Accumulates d(loss)/d(params) into `grad` given d(loss)/d(output) for the
  // forward pass recorded in `ws`.
  void Backward(Workspace& ws, std::span<const Real> grad_output,
                std::span<Real> grad) const {
    ws.delta.assign(grad_output.begin(), grad_output.end());
    for (int l = num_layers() - 1; l >= 0; --l) {
      const int in = sizes_[l];
      const int out = sizes_[l + 1];
      const Real* w = params_.data() + offsets_[l];
      Real* gw = grad.data() + offsets_[l];
      Real* gb = gw + static_cast<size_t>(in) * out;
      const Real* x = ws.activations[l].data();
      for (int o = 0; o < out; ++o) {
        const Real d = ws.delta[o];
        if (d == Real(0)) continue;
        gb[o] += d;
        Real* grow = gw + static_cast<size_t>(o) * in;
        for (int i = 0; i < in; ++i) grow[i] += d * x[i];
      }
      if (l == 0) break;
      ws.delta_next.assign(in, Real(0));
      for (int o = 0; o < out; ++o) {
        const Real d = ws.delta[o];
        if (d == Real(0)) continue;
        const Real* row = w + static_cast<size_t>(o) * in;
        for (int i = 0; i < in; ++i) ws.delta_next[i] += d * row[i];
      }
      // Rectifier derivative: the hidden activation is positive iff active.
      for (int i = 0; i < in; ++i) {
        if (!(x[i] > Real(0))) ws.delta_next[i] = Real(0);
      }
      std::swap(ws.delta, ws.delta_next);
    }
  }

  friend bool operator==(const Mlp&, const Mlp&) = default;

 private:
  size_t LayerSize(int l) const {
    return static_cast<size_t>(sizes_[l]) * sizes_[l + 1] + sizes_[l + 1];
  }

  std::vector<int> sizes_;
  std::vector<size_t> offsets_;
  std::vector<Real> params_;
};

using QFunction = Mlp<float>;

}  // namespace persona_pong

#endif  // PERSONA_PONG_MLP_H_
