#include "mfood/adam.hpp"

#include <cmath>
#include <string>

#include "mfood/errors.hpp"

namespace mfood {

Adam::Adam(AdamConfig config, const std::vector<ParamRef>& params) : config_(config) {
  if (!(config_.learning_rate > 0.0) || !(config_.beta1 >= 0.0 && config_.beta1 < 1.0) ||
      !(config_.beta2 >= 0.0 && config_.beta2 < 1.0) || !(config_.epsilon > 0.0)) {
    throw ConfigError("invalid Adam hyper-parameters");
  }
  for (const auto& p : params) {
    m_.emplace_back(p.value.size(), 0.0);
    v_.emplace_back(p.value.size(), 0.0);
  }
}

void Adam::step(const std::vector<ParamRef>& params) {
  if (params.size() != m_.size()) throw ConfigError("Adam: parameter list changed");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].value.size() != m_[i].size() || params[i].grad.size() != m_[i].size()) {
      throw ConfigError("Adam: parameter array " + std::to_string(i) + " changed shape");
    }
    for (double g : params[i].grad) {
      if (!std::isfinite(g)) {
        throw NumericError("non-finite gradient in parameter array " + std::to_string(i));
      }
    }
  }
  ++t_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto value = params[i].value;
    auto grad = params[i].grad;
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t k = 0; k < value.size(); ++k) {
      const double g = grad[k];
      m[k] = b1 * m[k] + (1.0 - b1) * g;
      v[k] = b2 * v[k] + (1.0 - b2) * g * g;
      const double m_hat = m[k] / c1;
      const double v_hat = v[k] / c2;
      value[k] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }
}

}  // namespace mfood
