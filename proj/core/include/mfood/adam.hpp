#pragma once

#include <cstdint>
#include <vector>

#include "mfood/tensor.hpp"

namespace mfood {

struct AdamConfig {
  double learning_rate = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Bias-corrected Adam over a fixed list of parameter arrays.
class Adam {
 public:
  Adam(AdamConfig config, const std::vector<ParamRef>& params);

  // Applies one update using the gradients held in params. Throws NumericError
  // (naming the offending array) before touching any parameter if a gradient
  // is non-finite, and ConfigError if the shapes differ from construction.
  void step(const std::vector<ParamRef>& params);

  std::uint64_t steps() const noexcept { return t_; }
  const AdamConfig& config() const noexcept { return config_; }
  const std::vector<std::vector<double>>& first_moments() const noexcept { return m_; }
  const std::vector<std::vector<double>>& second_moments() const noexcept { return v_; }

 private:
  AdamConfig config_;
  std::uint64_t t_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

}  // namespace mfood
