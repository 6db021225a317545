#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "mfood/mlp.hpp"
#include "mfood/rng.hpp"
#include "mfood/tensor.hpp"

namespace mfood {

// Per-layer record of a forward or inverse evaluation, sufficient for the
// matching backward pass.
struct LayerTape {
  Tensor input;
  Tensor output;
  MlpCache conditioner;
  Tensor log_scale;  // clamped log-scales of a coupling layer, [batch, n_transformed]
};

struct FlowTape {
  std::vector<LayerTape> layers;
};

// z = x * exp(log_scale) + bias, per dimension.
class ActNorm {
 public:
  explicit ActNorm(std::size_t dim);

  std::size_t dim() const noexcept { return log_scale_.size(); }
  bool initialized() const noexcept { return initialized_; }
  void set_initialized(bool v) noexcept { initialized_ = v; }

  // Data-dependent init: the output on `batch` gets per-dimension zero mean and unit variance.
  void initialize(const Tensor& batch);

  std::vector<double>& log_scale() noexcept { return log_scale_; }
  const std::vector<double>& log_scale() const noexcept { return log_scale_; }
  std::vector<double>& bias() noexcept { return bias_; }
  const std::vector<double>& bias() const noexcept { return bias_; }

  Tensor forward(const Tensor& x, std::span<double> logdet, LayerTape* tape) const;
  Tensor inverse(const Tensor& z, LayerTape* tape) const;
  Tensor backward_forward(const LayerTape& tape, const Tensor& dz, std::span<const double> dlogdet);
  Tensor backward_inverse(const LayerTape& tape, const Tensor& dx);

  std::vector<ParamRef> parameters();
  void zero_grad();

 private:
  std::vector<double> log_scale_, bias_;
  std::vector<double> log_scale_grad_, bias_grad_;
  bool initialized_ = false;
};

// Dense invertible map z = W x with W = P L U: P a fixed permutation, L unit
// lower-triangular, U upper-triangular with diagonal sign * exp(log_diag).
class InvLinear {
 public:
  // Identity permutation when rng is null.
  InvLinear(std::size_t dim, Rng* rng);

  std::size_t dim() const noexcept { return perm_.size(); }

  const std::vector<std::size_t>& permutation() const noexcept { return perm_; }
  void set_permutation(std::vector<std::size_t> perm);
  std::vector<double>& sign() noexcept { return sign_; }
  const std::vector<double>& sign() const noexcept { return sign_; }
  // Strict lower part of L and strict upper part of U, each dim x dim row-major;
  // entries outside the strict triangle are ignored and kept at zero.
  std::vector<double>& lower() noexcept { return lower_; }
  const std::vector<double>& lower() const noexcept { return lower_; }
  std::vector<double>& upper() noexcept { return upper_; }
  const std::vector<double>& upper() const noexcept { return upper_; }
  std::vector<double>& log_diag() noexcept { return log_diag_; }
  const std::vector<double>& log_diag() const noexcept { return log_diag_; }

  // Reconstructed W, row-major.
  std::vector<double> matrix() const;

  Tensor forward(const Tensor& x, std::span<double> logdet, LayerTape* tape) const;
  Tensor inverse(const Tensor& z, LayerTape* tape) const;
  Tensor backward_forward(const LayerTape& tape, const Tensor& dz, std::span<const double> dlogdet);
  Tensor backward_inverse(const LayerTape& tape, const Tensor& dx);

  std::vector<ParamRef> parameters();
  void zero_grad();

 private:
  void accumulate_matrix_grad(const std::vector<double>& dW);

  std::vector<std::size_t> perm_;
  std::vector<double> sign_;
  std::vector<double> lower_, upper_, log_diag_;
  std::vector<double> lower_grad_, upper_grad_, log_diag_grad_;
};

// Affine coupling: coordinates with mask 1 pass through and condition an MLP
// that emits a log-scale s and shift t for the mask-0 coordinates:
// z = x * exp(c * tanh(s / c)) + t.
class Coupling {
 public:
  Coupling(std::vector<std::uint8_t> mask, const std::vector<std::size_t>& hidden,
           double scale_clamp, Rng& rng);
  Coupling(std::vector<std::uint8_t> mask, Mlp conditioner, double scale_clamp);

  std::size_t dim() const noexcept { return mask_.size(); }
  const std::vector<std::uint8_t>& mask() const noexcept { return mask_; }
  double scale_clamp() const noexcept { return clamp_; }
  Mlp& conditioner() noexcept { return net_; }
  const Mlp& conditioner() const noexcept { return net_; }

  Tensor forward(const Tensor& x, std::span<double> logdet, LayerTape* tape) const;
  Tensor inverse(const Tensor& z, LayerTape* tape) const;
  Tensor backward_forward(const LayerTape& tape, const Tensor& dz, std::span<const double> dlogdet);
  Tensor backward_inverse(const LayerTape& tape, const Tensor& dx);

  std::vector<ParamRef> parameters() { return net_.parameters(); }
  void zero_grad() { net_.zero_grad(); }

 private:
  void conditioner_outputs(const Tensor& passed, MlpCache* cache, Tensor& log_scale,
                           Tensor& shift) const;
  Tensor gather(const Tensor& x, const std::vector<std::size_t>& idx) const;

  std::vector<std::uint8_t> mask_;
  std::vector<std::size_t> pass_idx_, trans_idx_;
  double clamp_;
  Mlp net_;
};

using FlowLayer = std::variant<ActNorm, InvLinear, Coupling>;

struct FlowConfig {
  std::size_t blocks = 8;
  std::vector<std::size_t> hidden = {64, 64};
  double scale_clamp = 5.0;
  bool random_permutation = true;
};

struct FlowOutput {
  Tensor z;
  std::vector<double> logdet;  // log|det Df(x)| per sample
};

// Ordered stack of invertible layers over R^D with a standard normal prior.
class FlowModel {
 public:
  FlowModel() = default;
  explicit FlowModel(std::size_t dim) : dim_(dim) {}

  // Blocks of [ActNorm -> InvLinear -> Coupling]; coupling masks alternate
  // index parity between blocks. Coupling layers are omitted when dim < 2.
  static FlowModel build(std::size_t dim, const FlowConfig& config, std::uint64_t seed);

  std::size_t dim() const noexcept { return dim_; }
  std::vector<FlowLayer>& layers() noexcept { return layers_; }
  const std::vector<FlowLayer>& layers() const noexcept { return layers_; }
  void add_layer(FlowLayer layer);

  // Throws NumericError naming the layer when an intermediate is non-finite.
  FlowOutput forward(const Tensor& x, FlowTape* tape = nullptr) const;
  Tensor inverse(const Tensor& z, FlowTape* tape = nullptr) const;

  // Backward through a taped forward pass: dz is dL/dz, dlogdet[b] is
  // dL/dlogdet[b]. Accumulates parameter gradients and returns dL/dx.
  Tensor backward_forward(const FlowTape& tape, Tensor dz, std::span<const double> dlogdet);
  // Backward through a taped inverse pass; returns dL/dz.
  Tensor backward_inverse(const FlowTape& tape, Tensor dx);

  // log p_X(x) = log N(f(x); 0, I) + log|det Df(x)|.
  std::vector<double> log_prob(const Tensor& x) const;

  bool actnorm_initialized() const;
  // Initializes every uninitialized ActNorm layer from the activations of `batch`.
  void initialize_actnorm(const Tensor& batch);

  std::vector<ParamRef> parameters();
  void zero_grad();
  std::size_t num_parameters();

 private:
  std::size_t dim_ = 0;
  std::vector<FlowLayer> layers_;
};

// Sum over the batch of log N(z; 0, I) for each row.
std::vector<double> standard_normal_log_density(const Tensor& z);

// Accumulates the gradients of sum_b -log p_X(x_b) and returns that sum.
double backprop_logprob(FlowModel& model, const Tensor& x);

enum class SampleMode { kFull, kManifold };

// Full mode: x = f^-1(z), z ~ N(0, I_D). Manifold mode: z = (u, 0) with
// u ~ N(0, I_d), or u = h^-1(u') with u' ~ N(0, I_d) when a manifold flow h
// is supplied. Throws ConfigError for d outside [1, D].
Tensor sample(const FlowModel& model, std::size_t n, SampleMode mode, std::size_t manifold_dim,
              std::uint64_t seed, const FlowModel* manifold_flow = nullptr);

}  // namespace mfood
