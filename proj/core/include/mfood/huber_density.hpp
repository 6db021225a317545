#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace mfood {

// Scaled Huber density over errors e:
//   p(e; delta', k) = C(delta', k) * exp(-H_delta'(|e|) / k^2)
// with
//   1 / C = (2 k^2 / delta') exp(-delta'^2 / (2 k^2)) + sqrt(2 pi) k (2 Phi(delta'/k) - 1)
// and Phi the standard normal CDF.
struct HuberDensityParams {
  double delta_prime = 1.0;
  double k = 1.0;
};

// Standard normal CDF.
double standard_normal_cdf(double x);

// Throws DomainError unless delta' > 0 and k > 0.
double norm_const(double delta_prime, double k);

// -N log C(delta', k) + sum_n H_delta'(|e_n|) / k^2. Throws DomainError on an empty sample.
double huber_nll(std::span<const double> errors, double delta_prime, double k);

// d/dk and d^2/dk^2 of huber_nll for a sample summarised by N and S = sum H_delta'(|e_n|).
struct NllDerivatives {
  double value, first, second;
};
NllDerivatives huber_nll_in_k(std::size_t n, double huber_sum, double delta_prime, double k);

enum class FitBoundary { kNone, kLower, kUpper };

struct HuberFit {
  double k = 0.0;
  double delta_prime = 0.0;
  std::size_t n = 0;
  double nll = 0.0;
  std::size_t iterations = 0;
  FitBoundary boundary = FitBoundary::kNone;
  bool converged = false;
  bool used_fallback = false;  // Newton did not converge; golden-section result returned
};

struct NewtonOptions {
  double k_min = 1e-8;
  double k_max = 1e6;
  double step_tolerance = 1e-10;      // on the log k step
  double gradient_tolerance = 1e-12;  // on d NLL / d log k, relative to N
  std::size_t max_iterations = 100;
  // When set, receives the NLL at the start point and after every iteration.
  std::vector<double>* nll_trace = nullptr;
};

// Maximum-likelihood scale k for a fixed delta'. Newton's method in log k,
// safeguarded by a sign-change bracket and a backtracking decrease test so
// the NLL never increases between iterates. Throws DomainError when N < 2 or
// every error is zero.
HuberFit fit_scale_newton(std::span<const double> errors, double delta_prime,
                          const NewtonOptions& options = {});

// sqrt(mean e^2), the zero-mean Gaussian MLE. Throws DomainError on N < 2 or all-zero input.
double fit_gaussian_sigma(std::span<const double> errors);

struct FittedScale {
  enum class Kind { kHuber, kGaussian };
  Kind kind = Kind::kHuber;
  double scale = 1.0;        // k for Huber, sigma_mse for Gaussian
  double delta_prime = 0.0;  // Huber only
  std::size_t n = 0;
  // Fit diagnostics carried into the calibration report.
  double nll = 0.0;
  std::size_t iterations = 0;
  FitBoundary boundary = FitBoundary::kNone;
  bool used_fallback = false;

  void validate() const;
};

FittedScale fitted_from(const HuberFit& fit);
FittedScale fitted_gaussian(std::span<const double> errors);

// Huber: c / k^2. Gaussian: c / sigma_mse.
double lambda_coefficient(const FittedScale& fit, double c_const);

// Calibration report: UTF-8 "key=value" lines.
struct CalibrationReport {
  FittedScale fit;
  double c_const = 1.0;
  double lambda = 0.0;
};

std::string format_calibration_report(const CalibrationReport& report);
CalibrationReport parse_calibration_report(const std::string& text);
void write_calibration_report(const std::filesystem::path& path, const CalibrationReport& report);
CalibrationReport read_calibration_report(const std::filesystem::path& path);

}  // namespace mfood
