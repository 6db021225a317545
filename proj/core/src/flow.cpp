#include <cmath>
#include <numbers>
#include <string>

#include "mfood/errors.hpp"
#include "mfood/flow.hpp"

namespace mfood {
namespace {

std::size_t layer_dim(const FlowLayer& layer) {
  return std::visit([](const auto& l) { return l.dim(); }, layer);
}

void check_finite(const Tensor& t, std::size_t layer, const char* stage) {
  const std::size_t cols = t.cols();
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (!std::isfinite(t.data()[k])) {
      throw NumericError(std::string("non-finite value in flow ") + stage, layer, k / cols);
    }
  }
}

}  // namespace

FlowModel FlowModel::build(std::size_t dim, const FlowConfig& config, std::uint64_t seed) {
  if (dim == 0) throw ConfigError("flow dimension must be positive");
  if (config.blocks == 0) throw ConfigError("flow needs at least one block");
  Rng rng(seed);
  FlowModel model(dim);
  for (std::size_t b = 0; b < config.blocks; ++b) {
    model.add_layer(ActNorm(dim));
    model.add_layer(InvLinear(dim, config.random_permutation ? &rng : nullptr));
    if (dim >= 2) {
      std::vector<std::uint8_t> mask(dim);
      for (std::size_t i = 0; i < dim; ++i) mask[i] = (i + b) % 2 == 0 ? 1 : 0;
      model.add_layer(Coupling(std::move(mask), config.hidden, config.scale_clamp, rng));
    }
  }
  return model;
}

void FlowModel::add_layer(FlowLayer layer) {
  if (layer_dim(layer) != dim_) {
    throw ConfigError("layer dimension " + std::to_string(layer_dim(layer)) +
                      " does not match flow dimension " + std::to_string(dim_));
  }
  layers_.push_back(std::move(layer));
}

FlowOutput FlowModel::forward(const Tensor& x, FlowTape* tape) const {
  if (x.rank() != 2 || x.cols() != dim_) {
    throw ConfigError("flow input must be [batch, " + std::to_string(dim_) + "]");
  }
  check_finite(x, 0, "input");
  FlowOutput out{x, std::vector<double>(x.rows(), 0.0)};
  if (tape) tape->layers.assign(layers_.size(), LayerTape{});
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    LayerTape* lt = tape ? &tape->layers[i] : nullptr;
    out.z = std::visit([&](const auto& l) { return l.forward(out.z, out.logdet, lt); },
                       layers_[i]);
    check_finite(out.z, i, "forward");
  }
  for (std::size_t r = 0; r < out.logdet.size(); ++r) {
    if (!std::isfinite(out.logdet[r])) throw NumericError("non-finite log-determinant", {}, r);
  }
  return out;
}

Tensor FlowModel::inverse(const Tensor& z, FlowTape* tape) const {
  if (z.rank() != 2 || z.cols() != dim_) {
    throw ConfigError("flow latent must be [batch, " + std::to_string(dim_) + "]");
  }
  check_finite(z, layers_.size(), "latent");
  if (tape) tape->layers.assign(layers_.size(), LayerTape{});
  Tensor x = z;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    LayerTape* lt = tape ? &tape->layers[i] : nullptr;
    x = std::visit([&](const auto& l) { return l.inverse(x, lt); }, layers_[i]);
    check_finite(x, i, "inverse");
  }
  return x;
}

Tensor FlowModel::backward_forward(const FlowTape& tape, Tensor dz,
                                   std::span<const double> dlogdet) {
  if (tape.layers.size() != layers_.size()) throw InternalError("flow tape does not match model");
  for (std::size_t i = layers_.size(); i-- > 0;) {
    dz = std::visit([&](auto& l) { return l.backward_forward(tape.layers[i], dz, dlogdet); },
                    layers_[i]);
  }
  return dz;
}

Tensor FlowModel::backward_inverse(const FlowTape& tape, Tensor dx) {
  if (tape.layers.size() != layers_.size()) throw InternalError("flow tape does not match model");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    dx = std::visit([&](auto& l) { return l.backward_inverse(tape.layers[i], dx); }, layers_[i]);
  }
  return dx;
}

std::vector<double> standard_normal_log_density(const Tensor& z) {
  const std::size_t n = z.rows(), d = z.cols();
  const double norm = 0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi);
  std::vector<double> out(n);
  for (std::size_t r = 0; r < n; ++r) {
    double sq = 0.0;
    for (double v : z.row(r)) sq += v * v;
    out[r] = -0.5 * sq - norm;
  }
  return out;
}

std::vector<double> FlowModel::log_prob(const Tensor& x) const {
  const FlowOutput f = forward(x);
  auto lp = standard_normal_log_density(f.z);
  for (std::size_t r = 0; r < lp.size(); ++r) lp[r] += f.logdet[r];
  return lp;
}

bool FlowModel::actnorm_initialized() const {
  for (const auto& layer : layers_) {
    if (const auto* a = std::get_if<ActNorm>(&layer); a && !a->initialized()) return false;
  }
  return true;
}

void FlowModel::initialize_actnorm(const Tensor& batch) {
  Tensor h = batch;
  std::vector<double> scratch(batch.rows(), 0.0);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (auto* a = std::get_if<ActNorm>(&layers_[i]); a && !a->initialized()) a->initialize(h);
    h = std::visit([&](const auto& l) { return l.forward(h, scratch, nullptr); }, layers_[i]);
  }
}

std::vector<ParamRef> FlowModel::parameters() {
  std::vector<ParamRef> out;
  for (auto& layer : layers_) {
    auto p = std::visit([](auto& l) { return l.parameters(); }, layer);
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

void FlowModel::zero_grad() {
  for (auto& layer : layers_) std::visit([](auto& l) { l.zero_grad(); }, layer);
}

std::size_t FlowModel::num_parameters() {
  std::size_t n = 0;
  for (const auto& p : parameters()) n += p.value.size();
  return n;
}

double backprop_logprob(FlowModel& model, const Tensor& x) {
  FlowTape tape;
  const FlowOutput f = model.forward(x, &tape);
  const auto base = standard_normal_log_density(f.z);
  double total = 0.0;
  for (std::size_t r = 0; r < base.size(); ++r) total -= base[r] + f.logdet[r];
  // -log N(z) has gradient z; -logdet has gradient -1.
  const std::vector<double> dlogdet(x.rows(), -1.0);
  model.backward_forward(tape, f.z, dlogdet);
  return total;
}

Tensor sample(const FlowModel& model, std::size_t n, SampleMode mode, std::size_t manifold_dim,
              std::uint64_t seed, const FlowModel* manifold_flow) {
  const std::size_t dim = model.dim();
  Rng rng(seed);
  Tensor z({n, dim});
  if (mode == SampleMode::kFull) {
    for (auto& v : z.values()) v = rng.normal();
    return model.inverse(z);
  }
  if (manifold_dim < 1 || manifold_dim > dim) {
    throw ConfigError("manifold dimension must lie in [1, " + std::to_string(dim) + "]");
  }
  if (manifold_flow && manifold_flow->dim() != manifold_dim) {
    throw ConfigError("manifold flow dimension does not match d");
  }
  Tensor u({n, manifold_dim});
  for (auto& v : u.values()) v = rng.normal();
  if (manifold_flow) u = manifold_flow->inverse(u);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t k = 0; k < manifold_dim; ++k) z(r, k) = u(r, k);
  }
  return model.inverse(z);
}

}  // namespace mfood
