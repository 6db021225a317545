#include "mfood/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mfood/errors.hpp"

namespace mfood {

void LatentSplit::validate() const {
  if (manifold_dim < 1 || manifold_dim > ambient_dim) {
    throw ConfigError("latent split requires 1 <= d <= D (got d=" + std::to_string(manifold_dim) +
                      ", D=" + std::to_string(ambient_dim) + ")");
  }
}

std::string to_string(PenaltyKind kind) { return kind == PenaltyKind::kMse ? "mse" : "huber"; }

PenaltyKind parse_penalty_kind(const std::string& text) {
  if (text == "mse") return PenaltyKind::kMse;
  if (text == "huber") return PenaltyKind::kHuber;
  throw ConfigError("unknown penalty kind '" + text + "' (expected mse or huber)");
}

void PenaltySpec::validate() const {
  if (kind == PenaltyKind::kHuber && !(delta > 0.0)) {
    throw ConfigError("Huber penalty needs delta > 0");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("penalty lambda must be >= 0");
}

void ManifoldFlowModel::validate() const {
  split.validate();
  if (base.dim() != split.ambient_dim) throw ConfigError("base flow dimension differs from D");
  if (manifold_flow && manifold_flow->dim() != split.manifold_dim) {
    throw ConfigError("manifold flow dimension differs from d");
  }
}

SplitLatent split(const Tensor& z, const LatentSplit& s) {
  s.validate();
  if (z.rank() != 2 || z.cols() != s.ambient_dim) throw ConfigError("split: latent width != D");
  const std::size_t n = z.rows(), d = s.manifold_dim, rest = s.off_manifold_dim();
  SplitLatent out{Tensor({n, d}), Tensor({n, rest})};
  for (std::size_t r = 0; r < n; ++r) {
    auto zr = z.row(r);
    std::copy_n(zr.begin(), d, out.u.row(r).begin());
    std::copy_n(zr.begin() + d, rest, out.v.row(r).begin());
  }
  return out;
}

Tensor project(const Tensor& z, const LatentSplit& s) {
  s.validate();
  if (z.rank() != 2 || z.cols() != s.ambient_dim) throw ConfigError("project: latent width != D");
  Tensor out = z;
  for (std::size_t r = 0; r < z.rows(); ++r) {
    auto row = out.row(r);
    std::fill(row.begin() + s.manifold_dim, row.end(), 0.0);
  }
  return out;
}

Tensor reconstruct(const ManifoldFlowModel& model, const Tensor& x) {
  model.validate();
  // With d = D the projection is the identity and f^-1(f(x)) = x exactly.
  if (model.split.manifold_dim == model.split.ambient_dim) return x;
  const FlowOutput f = model.base.forward(x);
  return model.base.inverse(project(f.z, model.split));
}

double huber(double e, double delta) {
  return e < delta ? 0.5 * e * e : delta * (e - 0.5 * delta);
}

std::vector<double> penalty(const Tensor& x, const Tensor& x_rec, const PenaltySpec& spec) {
  if (x.shape() != x_rec.shape() || x.rank() != 2) {
    throw ConfigError("penalty: input and reconstruction shapes differ");
  }
  const std::size_t n = x.rows(), d = x.cols();
  std::vector<double> out(n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    double acc = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double e = x(r, i) - x_rec(r, i);
      acc += spec.kind == PenaltyKind::kMse ? e * e : huber(std::abs(e), spec.delta);
    }
    out[r] = acc / static_cast<double>(d);
  }
  return out;
}

double LossTerms::mean_loss() const {
  if (loss.empty()) return 0.0;
  double acc = 0.0;
  for (double v : loss) acc += v;
  return acc / static_cast<double>(loss.size());
}

namespace {

// -log p_U(u) for the on-manifold block, optionally through h.
std::vector<double> manifold_nll(const ManifoldFlowModel& model, const Tensor& u) {
  std::vector<double> out;
  if (model.manifold_flow) {
    const FlowOutput h = model.manifold_flow->forward(u);
    out = standard_normal_log_density(h.z);
    for (std::size_t r = 0; r < out.size(); ++r) out[r] = -(out[r] + h.logdet[r]);
  } else {
    out = standard_normal_log_density(u);
    for (auto& v : out) v = -v;
  }
  return out;
}

}  // namespace

NllTerms negative_log_likelihood(const ManifoldFlowModel& model, const Tensor& x) {
  model.validate();
  const FlowOutput f = model.base.forward(x);
  const SplitLatent s = split(f.z, model.split);
  NllTerms out;
  out.nll_u = manifold_nll(model, s.u);
  out.nll_v = standard_normal_log_density(s.v);
  for (auto& v : out.nll_v) v = -v;
  out.logdet = f.logdet;
  return out;
}

LossTerms training_loss(const ManifoldFlowModel& model, const Tensor& x, const PenaltySpec& spec) {
  spec.validate();
  NllTerms nll = negative_log_likelihood(model, x);
  LossTerms out;
  out.nll_u = std::move(nll.nll_u);
  out.nll_v = std::move(nll.nll_v);
  out.logdet = std::move(nll.logdet);
  out.penalty = penalty(x, reconstruct(model, x), spec);
  out.loss.resize(out.nll_u.size());
  for (std::size_t r = 0; r < out.loss.size(); ++r) {
    out.loss[r] = out.nll_u[r] + out.nll_v[r] - out.logdet[r] + spec.lambda * out.penalty[r];
    if (!std::isfinite(out.loss[r])) {
      std::ostringstream msg;
      msg << "non-finite training loss: nll_u=" << out.nll_u[r] << " nll_v=" << out.nll_v[r]
          << " logdet=" << out.logdet[r] << " penalty=" << out.penalty[r];
      throw NumericError(msg.str(), std::nullopt, r);
    }
  }
  return out;
}

BatchLoss loss_and_gradient(ManifoldFlowModel& model, const Tensor& x, const PenaltySpec& spec,
                            Tensor* input_grad) {
  model.validate();
  spec.validate();
  const std::size_t n = x.rows(), dim = model.split.ambient_dim, d = model.split.manifold_dim;
  if (n == 0) throw ConfigError("loss_and_gradient needs a nonempty batch");
  const double w = 1.0 / static_cast<double>(n);

  FlowTape ftape;
  const FlowOutput f = model.base.forward(x, &ftape);
  const SplitLatent s = split(f.z, model.split);

  BatchLoss sums;
  Tensor dz({n, dim});
  const auto lp_v = standard_normal_log_density(s.v);
  for (std::size_t r = 0; r < n; ++r) {
    sums.nll_v -= lp_v[r];
    sums.logdet += f.logdet[r];
    for (std::size_t k = d; k < dim; ++k) dz(r, k) = w * f.z(r, k);
  }

  Tensor du;
  if (model.manifold_flow) {
    FlowTape htape;
    const FlowOutput h = model.manifold_flow->forward(s.u, &htape);
    const auto lp = standard_normal_log_density(h.z);
    Tensor dh = h.z;
    for (auto& v : dh.values()) v *= w;
    for (std::size_t r = 0; r < n; ++r) sums.nll_u -= lp[r] + h.logdet[r];
    const std::vector<double> dlog_h(n, -w);
    du = model.manifold_flow->backward_forward(htape, std::move(dh), dlog_h);
  } else {
    const auto lp = standard_normal_log_density(s.u);
    for (std::size_t r = 0; r < n; ++r) sums.nll_u -= lp[r];
    du = s.u;
    for (auto& v : du.values()) v *= w;
  }
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t k = 0; k < d; ++k) dz(r, k) = du(r, k);
  }

  Tensor direct({n, dim});
  if (d < dim) {
    FlowTape itape;
    const Tensor x_rec = model.base.inverse(project(f.z, model.split), &itape);
    const auto pen = penalty(x, x_rec, spec);
    for (double p : pen) sums.penalty += p;
    if (spec.lambda > 0.0) {
      const double scale = spec.lambda * w / static_cast<double>(dim);
      Tensor drec({n, dim});
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t i = 0; i < dim; ++i) {
          const double e = x(r, i) - x_rec(r, i);
          const double g = spec.kind == PenaltyKind::kMse ? 2.0 * e
                                                          : std::clamp(e, -spec.delta, spec.delta);
          drec(r, i) = -scale * g;
          direct(r, i) = scale * g;
        }
      }
      const Tensor dzp = model.base.backward_inverse(itape, std::move(drec));
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t k = 0; k < d; ++k) dz(r, k) += dzp(r, k);
      }
    }
  }

  const std::vector<double> dlogdet(n, -w);
  Tensor dx = model.base.backward_forward(ftape, std::move(dz), dlogdet);
  if (input_grad) {
    for (std::size_t k = 0; k < dx.size(); ++k) dx.data()[k] += direct.data()[k];
    *input_grad = std::move(dx);
  }
  BatchLoss mean{0.0, sums.nll_u * w, sums.nll_v * w, sums.logdet * w, sums.penalty * w};
  mean.loss = mean.nll_u + mean.nll_v - mean.logdet + spec.lambda * mean.penalty;
  return mean;
}

std::vector<ParamRef> parameters(ManifoldFlowModel& model) {
  auto out = model.base.parameters();
  if (model.manifold_flow) {
    auto h = model.manifold_flow->parameters();
    out.insert(out.end(), h.begin(), h.end());
  }
  return out;
}

void zero_grad(ManifoldFlowModel& model) {
  model.base.zero_grad();
  if (model.manifold_flow) model.manifold_flow->zero_grad();
}

}  // namespace mfood
