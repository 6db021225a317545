#include "mfood/mlp.hpp"

#include <atomic>
#include <cmath>
#include <string>

#include "mfood/errors.hpp"

namespace mfood {
namespace {

std::uint64_t next_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

}  // namespace

Mlp::Mlp(std::vector<std::size_t> widths, Rng& rng, bool zero_final)
    : id_(next_id()), widths_(std::move(widths)) {
  if (widths_.size() < 2) throw ConfigError("an MLP needs at least input and output widths");
  for (auto w : widths_) {
    if (w == 0) throw ConfigError("MLP layer widths must be positive");
  }
  const std::size_t layers = widths_.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = widths_[l], out = widths_[l + 1];
    Tensor w({out, in});
    std::vector<double> b(out, 0.0);
    const bool zero = zero_final && l + 1 == layers;
    if (!zero) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(in));
      for (auto& v : w.values()) v = rng.uniform(-bound, bound);
      for (auto& v : b) v = rng.uniform(-bound, bound);
    }
    weights_.push_back(std::move(w));
    biases_.push_back(std::move(b));
    weight_grads_.emplace_back(std::vector<std::size_t>{out, in});
    bias_grads_.emplace_back(out, 0.0);
  }
}

Mlp::Mlp(const Mlp& other)
    : id_(next_id()),
      widths_(other.widths_),
      weights_(other.weights_),
      biases_(other.biases_),
      weight_grads_(other.weight_grads_),
      bias_grads_(other.bias_grads_) {}

Mlp& Mlp::operator=(const Mlp& other) {
  if (this != &other) {
    id_ = next_id();
    widths_ = other.widths_;
    weights_ = other.weights_;
    biases_ = other.biases_;
    weight_grads_ = other.weight_grads_;
    bias_grads_ = other.bias_grads_;
  }
  return *this;
}

Tensor Mlp::forward(const Tensor& x, MlpCache* cache) const {
  if (x.rank() != 2 || x.cols() != input_width()) {
    throw ConfigError("MLP input width mismatch: expected " + std::to_string(input_width()));
  }
  const std::size_t batch = x.rows();
  if (cache) {
    cache->owner = id_;
    cache->activations.clear();
    cache->activations.push_back(x);
  }
  Tensor a = x;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    const Tensor& w = weights_[l];
    const auto& b = biases_[l];
    const std::size_t in = widths_[l], out = widths_[l + 1];
    const bool hidden = l + 1 < weights_.size();
    Tensor y({batch, out});
    for (std::size_t r = 0; r < batch; ++r) {
      const double* xr = a.data() + r * in;
      double* yr = y.data() + r * out;
      for (std::size_t o = 0; o < out; ++o) {
        const double* wr = w.data() + o * in;
        double acc = b[o];
        for (std::size_t i = 0; i < in; ++i) acc += wr[i] * xr[i];
        yr[o] = hidden ? std::tanh(acc) : acc;
      }
    }
    if (cache) cache->activations.push_back(y);
    a = std::move(y);
  }
  return a;
}

Tensor Mlp::backward(const MlpCache& cache, const Tensor& dy) {
  if (cache.owner != id_ || cache.activations.size() != weights_.size() + 1) {
    throw InternalError("MLP backward called with a cache from a different network");
  }
  const std::size_t batch = cache.activations.front().rows();
  if (dy.rank() != 2 || dy.rows() != batch || dy.cols() != output_width()) {
    throw InternalError("MLP backward cotangent shape does not match the cached forward pass");
  }
  Tensor delta = dy;
  for (std::size_t l = weights_.size(); l-- > 0;) {
    const std::size_t in = widths_[l], out = widths_[l + 1];
    const bool hidden = l + 1 < weights_.size();
    const Tensor& a_out = cache.activations[l + 1];
    const Tensor& a_in = cache.activations[l];
    if (hidden) {
      for (std::size_t k = 0; k < delta.size(); ++k) {
        const double t = a_out.data()[k];
        delta.data()[k] *= 1.0 - t * t;
      }
    }
    Tensor& gw = weight_grads_[l];
    auto& gb = bias_grads_[l];
    const Tensor& w = weights_[l];
    Tensor d_in({batch, in});
    for (std::size_t r = 0; r < batch; ++r) {
      const double* dr = delta.data() + r * out;
      const double* xr = a_in.data() + r * in;
      double* dxr = d_in.data() + r * in;
      for (std::size_t o = 0; o < out; ++o) {
        const double g = dr[o];
        if (g == 0.0) continue;
        gb[o] += g;
        double* gwr = gw.data() + o * in;
        const double* wr = w.data() + o * in;
        for (std::size_t i = 0; i < in; ++i) {
          gwr[i] += g * xr[i];
          dxr[i] += g * wr[i];
        }
      }
    }
    delta = std::move(d_in);
  }
  return delta;
}

std::vector<ParamRef> Mlp::parameters() {
  std::vector<ParamRef> out;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    out.push_back({weights_[l].values(), weight_grads_[l].values()});
    out.push_back({biases_[l], bias_grads_[l]});
  }
  return out;
}

void Mlp::zero_grad() {
  for (auto& g : weight_grads_) std::fill(g.values().begin(), g.values().end(), 0.0);
  for (auto& g : bias_grads_) std::fill(g.begin(), g.end(), 0.0);
}

}  // namespace mfood
