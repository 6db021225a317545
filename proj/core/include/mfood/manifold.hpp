#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mfood/flow.hpp"
#include "mfood/tensor.hpp"

namespace mfood {

// Partition of a latent vector into on-manifold u = z[0, d) and off-manifold v = z[d, D).
struct LatentSplit {
  std::size_t manifold_dim = 1;  // d
  std::size_t ambient_dim = 1;   // D

  // Throws ConfigError unless 1 <= d <= D.
  void validate() const;
  std::size_t off_manifold_dim() const noexcept { return ambient_dim - manifold_dim; }
};

enum class PenaltyKind { kMse, kHuber };

std::string to_string(PenaltyKind kind);
PenaltyKind parse_penalty_kind(const std::string& text);

struct PenaltySpec {
  PenaltyKind kind = PenaltyKind::kHuber;
  double delta = 0.1;   // Huber switch point, data units
  double lambda = 1.0;  // training weight

  void validate() const;
};

struct ManifoldFlowModel {
  FlowModel base;
  LatentSplit split;
  std::optional<FlowModel> manifold_flow;  // h over R^d

  void validate() const;
};

struct SplitLatent {
  Tensor u;
  Tensor v;
};

SplitLatent split(const Tensor& z, const LatentSplit& s);

// (u, v) -> (u, 0).
Tensor project(const Tensor& z, const LatentSplit& s);

// f^-1(proj(f(x))).
Tensor reconstruct(const ManifoldFlowModel& model, const Tensor& x);

// Huber function: e^2/2 below delta, delta (e - delta/2) above.
double huber(double e, double delta);

// Per-sample mean over coordinates of the element-wise penalty of x - x_rec.
std::vector<double> penalty(const Tensor& x, const Tensor& x_rec, const PenaltySpec& spec);

// Per-sample decomposition of the training objective:
// loss = nll_u + nll_v - logdet + lambda * penalty.
struct LossTerms {
  std::vector<double> nll_u;   // -log p_U(u), through h when present
  std::vector<double> nll_v;   // -log N(v; 0, I)
  std::vector<double> logdet;  // log|det Df(x)|
  std::vector<double> penalty;
  std::vector<double> loss;

  double mean_loss() const;
};

// NLL part of the objective only (no reconstruction), shared with scoring.
struct NllTerms {
  std::vector<double> nll_u, nll_v, logdet;
};
NllTerms negative_log_likelihood(const ManifoldFlowModel& model, const Tensor& x);

// Throws NumericError, with the per-term values in the message, when any
// loss entry is non-finite.
LossTerms training_loss(const ManifoldFlowModel& model, const Tensor& x, const PenaltySpec& spec);

// Batch means of the objective and its terms.
struct BatchLoss {
  double loss = 0.0, nll_u = 0.0, nll_v = 0.0, logdet = 0.0, penalty = 0.0;
};

// Mean training loss over the batch; accumulates its parameter gradients into
// every flow in the model (including the reconstruction path through f^-1).
// When input_grad is given it receives dLoss/dx.
BatchLoss loss_and_gradient(ManifoldFlowModel& model, const Tensor& x, const PenaltySpec& spec,
                         Tensor* input_grad = nullptr);

std::vector<ParamRef> parameters(ManifoldFlowModel& model);
void zero_grad(ManifoldFlowModel& model);

}  // namespace mfood
