#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mfood/rng.hpp"
#include "mfood/tensor.hpp"

namespace mfood {

// Activation record of one Mlp::forward call.
struct MlpCache {
  std::uint64_t owner = 0;
  // activations[0] is the input; activations[l + 1] is the output of layer l
  // (tanh-activated for hidden layers, linear for the last one).
  std::vector<Tensor> activations;
};

// Fully connected network: tanh hidden layers, identity output layer.
// Weights are stored [out, in] row-major; y = x W^T + b.
class Mlp {
 public:
  Mlp() = default;

  // widths = {n_in, hidden..., n_out}. Weights and biases are drawn uniformly
  // from [-1/sqrt(fan_in), 1/sqrt(fan_in)]; with zero_final the output layer
  // starts at exactly zero.
  Mlp(std::vector<std::size_t> widths, Rng& rng, bool zero_final);

  Mlp(const Mlp& other);
  Mlp& operator=(const Mlp& other);
  Mlp(Mlp&&) noexcept = default;
  Mlp& operator=(Mlp&&) noexcept = default;

  const std::vector<std::size_t>& widths() const noexcept { return widths_; }
  std::size_t num_layers() const noexcept { return weights_.size(); }
  std::size_t input_width() const { return widths_.front(); }
  std::size_t output_width() const { return widths_.back(); }

  Tensor& weight(std::size_t layer) { return weights_[layer]; }
  const Tensor& weight(std::size_t layer) const { return weights_[layer]; }
  std::vector<double>& bias(std::size_t layer) { return biases_[layer]; }
  const std::vector<double>& bias(std::size_t layer) const { return biases_[layer]; }
  const Tensor& weight_grad(std::size_t layer) const { return weight_grads_[layer]; }
  const std::vector<double>& bias_grad(std::size_t layer) const { return bias_grads_[layer]; }

  // Throws ConfigError when x is not [batch, input_width()].
  Tensor forward(const Tensor& x, MlpCache* cache = nullptr) const;

  // Accumulates parameter gradients for cotangent dy and returns dL/dx.
  // Throws InternalError for a cache produced by another network or shape.
  Tensor backward(const MlpCache& cache, const Tensor& dy);

  std::vector<ParamRef> parameters();
  void zero_grad();

 private:
  std::uint64_t id_ = 0;
  std::vector<std::size_t> widths_;
  std::vector<Tensor> weights_;
  std::vector<std::vector<double>> biases_;
  std::vector<Tensor> weight_grads_;
  std::vector<std::vector<double>> bias_grads_;
};

}  // namespace mfood
