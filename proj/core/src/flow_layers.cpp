#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mfood/errors.hpp"
#include "mfood/flow.hpp"

namespace mfood {
namespace {

void check_width(const Tensor& t, std::size_t dim, const char* what) {
  if (t.rank() != 2 || t.cols() != dim) {
    throw ConfigError(std::string(what) + ": expected width " + std::to_string(dim));
  }
}

}  // namespace

// ---------------------------------------------------------------- ActNorm

ActNorm::ActNorm(std::size_t dim)
    : log_scale_(dim, 0.0), bias_(dim, 0.0), log_scale_grad_(dim, 0.0), bias_grad_(dim, 0.0) {}

void ActNorm::initialize(const Tensor& batch) {
  check_width(batch, dim(), "actnorm init");
  const std::size_t n = batch.rows();
  if (n == 0) throw ConfigError("actnorm init needs a nonempty batch");
  for (std::size_t i = 0; i < dim(); ++i) {
    double mean = 0.0;
    for (std::size_t r = 0; r < n; ++r) mean += batch(r, i);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double c = batch(r, i) - mean;
      var += c * c;
    }
    var /= static_cast<double>(n);
    const double stddev = std::max(std::sqrt(var), 1e-6);
    log_scale_[i] = -std::log(stddev);
    bias_[i] = -mean / stddev;
  }
  initialized_ = true;
}

Tensor ActNorm::forward(const Tensor& x, std::span<double> logdet, LayerTape* tape) const {
  check_width(x, dim(), "actnorm forward");
  const std::size_t n = x.rows(), d = dim();
  Tensor z({n, d});
  std::vector<double> scale(d);
  double ld = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    scale[i] = std::exp(log_scale_[i]);
    ld += log_scale_[i];
  }
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < d; ++i) z(r, i) = x(r, i) * scale[i] + bias_[i];
    logdet[r] += ld;
  }
  if (tape) {
    tape->input = x;
    tape->output = z;
  }
  return z;
}

Tensor ActNorm::inverse(const Tensor& z, LayerTape* tape) const {
  check_width(z, dim(), "actnorm inverse");
  const std::size_t n = z.rows(), d = dim();
  Tensor x({n, d});
  std::vector<double> inv_scale(d);
  for (std::size_t i = 0; i < d; ++i) inv_scale[i] = std::exp(-log_scale_[i]);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < d; ++i) x(r, i) = (z(r, i) - bias_[i]) * inv_scale[i];
  }
  if (tape) {
    tape->input = z;
    tape->output = x;
  }
  return x;
}

Tensor ActNorm::backward_forward(const LayerTape& tape, const Tensor& dz,
                                 std::span<const double> dlogdet) {
  const std::size_t n = dz.rows(), d = dim();
  Tensor dx({n, d});
  double dld = 0.0;
  for (double v : dlogdet) dld += v;
  for (std::size_t i = 0; i < d; ++i) {
    const double scale = std::exp(log_scale_[i]);
    double gs = 0.0, gb = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double g = dz(r, i);
      gs += g * tape.input(r, i) * scale;
      gb += g;
      dx(r, i) = g * scale;
    }
    log_scale_grad_[i] += gs + dld;
    bias_grad_[i] += gb;
  }
  return dx;
}

Tensor ActNorm::backward_inverse(const LayerTape& tape, const Tensor& dx) {
  const std::size_t n = dx.rows(), d = dim();
  Tensor dz({n, d});
  for (std::size_t i = 0; i < d; ++i) {
    const double inv_scale = std::exp(-log_scale_[i]);
    double gs = 0.0, gb = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double g = dx(r, i);
      dz(r, i) = g * inv_scale;
      gb -= g * inv_scale;
      gs -= g * tape.output(r, i);
    }
    log_scale_grad_[i] += gs;
    bias_grad_[i] += gb;
  }
  return dz;
}

std::vector<ParamRef> ActNorm::parameters() {
  return {{log_scale_, log_scale_grad_}, {bias_, bias_grad_}};
}

void ActNorm::zero_grad() {
  std::fill(log_scale_grad_.begin(), log_scale_grad_.end(), 0.0);
  std::fill(bias_grad_.begin(), bias_grad_.end(), 0.0);
}

// -------------------------------------------------------------- InvLinear

InvLinear::InvLinear(std::size_t dim, Rng* rng)
    : perm_(dim),
      sign_(dim, 1.0),
      lower_(dim * dim, 0.0),
      upper_(dim * dim, 0.0),
      log_diag_(dim, 0.0),
      lower_grad_(dim * dim, 0.0),
      upper_grad_(dim * dim, 0.0),
      log_diag_grad_(dim, 0.0) {
  if (dim == 0) throw ConfigError("invertible linear layer needs dim > 0");
  std::iota(perm_.begin(), perm_.end(), std::size_t{0});
  if (rng) {
    for (std::size_t i = dim; i-- > 1;) std::swap(perm_[i], perm_[rng->below(i + 1)]);
  }
}

void InvLinear::set_permutation(std::vector<std::size_t> perm) {
  if (perm.size() != dim()) throw ConfigError("permutation length mismatch");
  std::vector<std::uint8_t> seen(perm.size(), 0);
  for (auto p : perm) {
    if (p >= perm.size() || seen[p]) throw ConfigError("not a permutation");
    seen[p] = 1;
  }
  perm_ = std::move(perm);
}

std::vector<double> InvLinear::matrix() const {
  const std::size_t d = dim();
  // M = L U, then W[i, :] = M[perm[i], :].
  std::vector<double> m(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      // (L U)_ij = sum_{k <= min(i, j)} L_ik U_kj with L_ii = 1.
      double acc = 0.0;
      const std::size_t kmax = std::min(i, j);
      for (std::size_t k = 0; k <= kmax; ++k) {
        const double l = (k == i) ? 1.0 : lower_[i * d + k];
        const double u = (k == j) ? sign_[k] * std::exp(log_diag_[k]) : upper_[k * d + j];
        acc += l * u;
      }
      m[i * d + j] = acc;
    }
  }
  std::vector<double> w(d * d);
  for (std::size_t i = 0; i < d; ++i) {
    std::copy_n(m.begin() + perm_[i] * d, d, w.begin() + i * d);
  }
  return w;
}

Tensor InvLinear::forward(const Tensor& x, std::span<double> logdet, LayerTape* tape) const {
  check_width(x, dim(), "invertible linear forward");
  const std::size_t n = x.rows(), d = dim();
  const auto w = matrix();
  Tensor z({n, d});
  double ld = 0.0;
  for (double v : log_diag_) ld += v;
  for (std::size_t r = 0; r < n; ++r) {
    const double* xr = x.data() + r * d;
    double* zr = z.data() + r * d;
    for (std::size_t i = 0; i < d; ++i) {
      const double* wr = w.data() + i * d;
      double acc = 0.0;
      for (std::size_t j = 0; j < d; ++j) acc += wr[j] * xr[j];
      zr[i] = acc;
    }
    logdet[r] += ld;
  }
  if (tape) {
    tape->input = x;
    tape->output = z;
  }
  return z;
}

Tensor InvLinear::inverse(const Tensor& z, LayerTape* tape) const {
  check_width(z, dim(), "invertible linear inverse");
  const std::size_t n = z.rows(), d = dim();
  std::vector<double> diag(d);
  for (std::size_t i = 0; i < d; ++i) diag[i] = sign_[i] * std::exp(log_diag_[i]);
  Tensor x({n, d});
  std::vector<double> a(d);
  for (std::size_t r = 0; r < n; ++r) {
    const double* zr = z.data() + r * d;
    for (std::size_t i = 0; i < d; ++i) a[perm_[i]] = zr[i];
    for (std::size_t i = 0; i < d; ++i) {
      double acc = a[i];
      for (std::size_t j = 0; j < i; ++j) acc -= lower_[i * d + j] * a[j];
      a[i] = acc;
    }
    double* xr = x.data() + r * d;
    for (std::size_t i = d; i-- > 0;) {
      double acc = a[i];
      for (std::size_t j = i + 1; j < d; ++j) acc -= upper_[i * d + j] * xr[j];
      xr[i] = acc / diag[i];
    }
  }
  if (tape) {
    tape->input = z;
    tape->output = x;
  }
  return x;
}

void InvLinear::accumulate_matrix_grad(const std::vector<double>& dw) {
  const std::size_t d = dim();
  std::vector<double> dm(d * d);
  for (std::size_t i = 0; i < d; ++i) {
    std::copy_n(dw.begin() + i * d, d, dm.begin() + perm_[i] * d);
  }
  std::vector<double> diag(d);
  for (std::size_t i = 0; i < d; ++i) diag[i] = sign_[i] * std::exp(log_diag_[i]);
  auto u_at = [&](std::size_t i, std::size_t j) {
    return i == j ? diag[i] : (i < j ? upper_[i * d + j] : 0.0);
  };
  auto l_at = [&](std::size_t i, std::size_t j) {
    return i == j ? 1.0 : (i > j ? lower_[i * d + j] : 0.0);
  };
  // dL = dM U^T restricted to the strict lower triangle.
  for (std::size_t i = 1; i < d; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      double acc = 0.0;
      for (std::size_t k = j; k < d; ++k) acc += dm[i * d + k] * u_at(j, k);
      lower_grad_[i * d + j] += acc;
    }
  }
  // dU = L^T dM restricted to the upper triangle.
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      double acc = 0.0;
      for (std::size_t k = i; k < d; ++k) acc += l_at(k, i) * dm[k * d + j];
      if (i == j) {
        log_diag_grad_[i] += acc * diag[i];
      } else {
        upper_grad_[i * d + j] += acc;
      }
    }
  }
}

Tensor InvLinear::backward_forward(const LayerTape& tape, const Tensor& dz,
                                   std::span<const double> dlogdet) {
  const std::size_t n = dz.rows(), d = dim();
  const auto w = matrix();
  Tensor dx({n, d});
  std::vector<double> dw(d * d, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const double* gr = dz.data() + r * d;
    const double* xr = tape.input.data() + r * d;
    double* dxr = dx.data() + r * d;
    for (std::size_t i = 0; i < d; ++i) {
      const double g = gr[i];
      if (g == 0.0) continue;
      const double* wr = w.data() + i * d;
      double* dwr = dw.data() + i * d;
      for (std::size_t j = 0; j < d; ++j) {
        dxr[j] += g * wr[j];
        dwr[j] += g * xr[j];
      }
    }
  }
  accumulate_matrix_grad(dw);
  double dld = 0.0;
  for (double v : dlogdet) dld += v;
  for (auto& g : log_diag_grad_) g += dld;
  return dx;
}

Tensor InvLinear::backward_inverse(const LayerTape& tape, const Tensor& dx) {
  const std::size_t n = dx.rows(), d = dim();
  std::vector<double> diag(d);
  for (std::size_t i = 0; i < d; ++i) diag[i] = sign_[i] * std::exp(log_diag_[i]);
  Tensor dz({n, d});
  std::vector<double> dw(d * d, 0.0);
  std::vector<double> p(d);
  for (std::size_t r = 0; r < n; ++r) {
    const double* gr = dx.data() + r * d;
    // Solve W^T g = dx with W^T = U^T L^T P^T.
    for (std::size_t i = 0; i < d; ++i) {
      double acc = gr[i];
      for (std::size_t j = 0; j < i; ++j) acc -= upper_[j * d + i] * p[j];
      p[i] = acc / diag[i];
    }
    for (std::size_t i = d; i-- > 0;) {
      double acc = p[i];
      for (std::size_t j = i + 1; j < d; ++j) acc -= lower_[j * d + i] * p[j];
      p[i] = acc;
    }
    double* gz = dz.data() + r * d;
    for (std::size_t i = 0; i < d; ++i) gz[i] = p[perm_[i]];
    // dW = -g x^T where x is the inverse output.
    const double* xr = tape.output.data() + r * d;
    for (std::size_t i = 0; i < d; ++i) {
      const double g = gz[i];
      if (g == 0.0) continue;
      double* dwr = dw.data() + i * d;
      for (std::size_t j = 0; j < d; ++j) dwr[j] -= g * xr[j];
    }
  }
  accumulate_matrix_grad(dw);
  return dz;
}

std::vector<ParamRef> InvLinear::parameters() {
  return {{lower_, lower_grad_}, {upper_, upper_grad_}, {log_diag_, log_diag_grad_}};
}

void InvLinear::zero_grad() {
  std::fill(lower_grad_.begin(), lower_grad_.end(), 0.0);
  std::fill(upper_grad_.begin(), upper_grad_.end(), 0.0);
  std::fill(log_diag_grad_.begin(), log_diag_grad_.end(), 0.0);
}

// --------------------------------------------------------------- Coupling

namespace {

void split_mask(const std::vector<std::uint8_t>& mask, std::vector<std::size_t>& pass,
                std::vector<std::size_t>& trans) {
  pass.clear();
  trans.clear();
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] > 1) throw ConfigError("coupling mask entries must be 0 or 1");
    (mask[i] ? pass : trans).push_back(i);
  }
  if (pass.empty() || trans.empty()) {
    throw ConfigError("coupling mask must contain at least one 0 and one 1");
  }
}

}  // namespace

Coupling::Coupling(std::vector<std::uint8_t> mask, const std::vector<std::size_t>& hidden,
                   double scale_clamp, Rng& rng)
    : mask_(std::move(mask)), clamp_(scale_clamp) {
  split_mask(mask_, pass_idx_, trans_idx_);
  if (!(clamp_ > 0.0)) throw ConfigError("coupling scale clamp must be positive");
  std::vector<std::size_t> widths;
  widths.push_back(pass_idx_.size());
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(2 * trans_idx_.size());
  net_ = Mlp(std::move(widths), rng, /*zero_final=*/true);
}

Coupling::Coupling(std::vector<std::uint8_t> mask, Mlp conditioner, double scale_clamp)
    : mask_(std::move(mask)), clamp_(scale_clamp), net_(std::move(conditioner)) {
  split_mask(mask_, pass_idx_, trans_idx_);
  if (!(clamp_ > 0.0)) throw ConfigError("coupling scale clamp must be positive");
  if (net_.input_width() != pass_idx_.size() || net_.output_width() != 2 * trans_idx_.size()) {
    throw ConfigError("coupling conditioner widths do not match the mask");
  }
}

Tensor Coupling::gather(const Tensor& x, const std::vector<std::size_t>& idx) const {
  const std::size_t n = x.rows();
  Tensor out({n, idx.size()});
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t k = 0; k < idx.size(); ++k) out(r, k) = x(r, idx[k]);
  }
  return out;
}

void Coupling::conditioner_outputs(const Tensor& passed, MlpCache* cache, Tensor& log_scale,
                                   Tensor& shift) const {
  const Tensor h = net_.forward(passed, cache);
  const std::size_t n = passed.rows(), nt = trans_idx_.size();
  log_scale = Tensor({n, nt});
  shift = Tensor({n, nt});
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t k = 0; k < nt; ++k) {
      log_scale(r, k) = clamp_ * std::tanh(h(r, k) / clamp_);
      shift(r, k) = h(r, nt + k);
    }
  }
}

Tensor Coupling::forward(const Tensor& x, std::span<double> logdet, LayerTape* tape) const {
  check_width(x, dim(), "coupling forward");
  const std::size_t n = x.rows(), nt = trans_idx_.size();
  Tensor s, t;
  MlpCache local;
  conditioner_outputs(gather(x, pass_idx_), tape ? &tape->conditioner : &local, s, t);
  Tensor z = x;
  for (std::size_t r = 0; r < n; ++r) {
    double ld = 0.0;
    for (std::size_t k = 0; k < nt; ++k) {
      const std::size_t c = trans_idx_[k];
      z(r, c) = x(r, c) * std::exp(s(r, k)) + t(r, k);
      ld += s(r, k);
    }
    logdet[r] += ld;
  }
  if (tape) {
    tape->input = x;
    tape->output = z;
    tape->log_scale = std::move(s);
  }
  return z;
}

Tensor Coupling::inverse(const Tensor& z, LayerTape* tape) const {
  check_width(z, dim(), "coupling inverse");
  const std::size_t n = z.rows(), nt = trans_idx_.size();
  Tensor s, t;
  MlpCache local;
  conditioner_outputs(gather(z, pass_idx_), tape ? &tape->conditioner : &local, s, t);
  Tensor x = z;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t k = 0; k < nt; ++k) {
      const std::size_t c = trans_idx_[k];
      x(r, c) = (z(r, c) - t(r, k)) * std::exp(-s(r, k));
    }
  }
  if (tape) {
    tape->input = z;
    tape->output = x;
    tape->log_scale = std::move(s);
  }
  return x;
}

Tensor Coupling::backward_forward(const LayerTape& tape, const Tensor& dz,
                                  std::span<const double> dlogdet) {
  const std::size_t n = dz.rows(), nt = trans_idx_.size(), np = pass_idx_.size();
  Tensor dx({n, dim()});
  Tensor dh({n, 2 * nt});
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t k = 0; k < nt; ++k) {
      const std::size_t c = trans_idx_[k];
      const double s = tape.log_scale(r, k);
      const double es = std::exp(s);
      const double g = dz(r, c);
      const double ds = g * tape.input(r, c) * es + dlogdet[r];
      const double ratio = s / clamp_;
      dh(r, k) = ds * (1.0 - ratio * ratio);
      dh(r, nt + k) = g;
      dx(r, c) = g * es;
    }
  }
  const Tensor dpass = net_.backward(tape.conditioner, dh);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t k = 0; k < np; ++k) {
      const std::size_t c = pass_idx_[k];
      dx(r, c) = dz(r, c) + dpass(r, k);
    }
  }
  return dx;
}

Tensor Coupling::backward_inverse(const LayerTape& tape, const Tensor& dx) {
  const std::size_t n = dx.rows(), nt = trans_idx_.size(), np = pass_idx_.size();
  Tensor dz({n, dim()});
  Tensor dh({n, 2 * nt});
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t k = 0; k < nt; ++k) {
      const std::size_t c = trans_idx_[k];
      const double s = tape.log_scale(r, k);
      const double e = std::exp(-s);
      const double g = dx(r, c);
      dz(r, c) = g * e;
      const double ds = -g * tape.output(r, c);
      const double ratio = s / clamp_;
      dh(r, k) = ds * (1.0 - ratio * ratio);
      dh(r, nt + k) = -g * e;
    }
  }
  const Tensor dpass = net_.backward(tape.conditioner, dh);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t k = 0; k < np; ++k) {
      const std::size_t c = pass_idx_[k];
      dz(r, c) = dx(r, c) + dpass(r, k);
    }
  }
  return dz;
}

}  // namespace mfood
