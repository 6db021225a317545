#include "mfood/huber_density.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "mfood/errors.hpp"
#include "mfood/manifold.hpp"
#include "text_util.hpp"

namespace mfood {
namespace {

constexpr double kSqrt2Pi = 2.5066282746310002;

double huber_sum(std::span<const double> errors, double delta_prime) {
  double s = 0.0;
  for (double e : errors) s += huber(std::abs(e), delta_prime);
  return s;
}

// NLL and its derivatives with respect to t = log k.
struct LogKEval {
  double value, grad, hess;
};

LogKEval eval_log_k(std::size_t n, double s, double delta, double t) {
  const double k = std::exp(t);
  const NllDerivatives d = huber_nll_in_k(n, s, delta, k);
  return {d.value, k * d.first, k * d.first + k * k * d.second};
}

const char* boundary_name(FitBoundary b) {
  switch (b) {
    case FitBoundary::kLower: return "lower";
    case FitBoundary::kUpper: return "upper";
    default: return "none";
  }
}

FitBoundary parse_boundary(const std::string& s) {
  if (s == "none") return FitBoundary::kNone;
  if (s == "lower") return FitBoundary::kLower;
  if (s == "upper") return FitBoundary::kUpper;
  throw ConfigError("calibration report: unknown boundary '" + s + "'");
}

}  // namespace

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double norm_const(double delta_prime, double k) {
  if (!(delta_prime > 0.0) || !(k > 0.0)) {
    throw DomainError("Huber normalization constant needs delta' > 0 and k > 0");
  }
  const double r = delta_prime / k;
  // 2 Phi(r) - 1 = erf(r / sqrt 2), which keeps precision for small r.
  const double inv = (2.0 * k * k / delta_prime) * std::exp(-0.5 * r * r) +
                     kSqrt2Pi * k * std::erf(r / std::numbers::sqrt2);
  return 1.0 / inv;
}

double huber_nll(std::span<const double> errors, double delta_prime, double k) {
  if (errors.empty()) throw DomainError("Huber NLL of an empty sample");
  const double c = norm_const(delta_prime, k);
  return -static_cast<double>(errors.size()) * std::log(c) +
         huber_sum(errors, delta_prime) / (k * k);
}

NllDerivatives huber_nll_in_k(std::size_t n, double s, double delta, double k) {
  if (!(delta > 0.0) || !(k > 0.0)) throw DomainError("Huber NLL needs delta' > 0 and k > 0");
  const double r = delta / k;
  const double e = std::exp(-0.5 * r * r);
  const double erf_term = std::erf(r / std::numbers::sqrt2);
  const double a = (2.0 * k * k / delta) * e + kSqrt2Pi * k * erf_term;
  const double a1 = (4.0 * k / delta) * e + kSqrt2Pi * erf_term;
  const double a2 = (4.0 / delta) * e + 2.0 * delta * e / (k * k);
  const double nn = static_cast<double>(n);
  const double k2 = k * k;
  return {nn * std::log(a) + s / k2, nn * a1 / a - 2.0 * s / (k2 * k),
          nn * (a2 / a - (a1 * a1) / (a * a)) + 6.0 * s / (k2 * k2)};
}

HuberFit fit_scale_newton(std::span<const double> errors, double delta_prime,
                          const NewtonOptions& options) {
  if (!(delta_prime > 0.0)) throw DomainError("Huber fit needs delta' > 0");
  if (errors.size() < 2) throw DomainError("Huber fit needs at least two errors");
  bool any_nonzero = false;
  for (double e : errors) {
    if (!std::isfinite(e)) throw DomainError("Huber fit received a non-finite error");
    any_nonzero = any_nonzero || e != 0.0;
  }
  if (!any_nonzero) throw DomainError("degenerate Huber fit: all errors are zero");

  const std::size_t n = errors.size();
  const double s = huber_sum(errors, delta_prime);
  HuberFit fit;
  fit.delta_prime = delta_prime;
  fit.n = n;

  double lo = std::log(options.k_min), hi = std::log(options.k_max);
  auto finish = [&](double k) {
    fit.k = k;
    fit.nll = huber_nll_in_k(n, s, delta_prime, fit.k).value;
    return fit;
  };
  if (eval_log_k(n, s, delta_prime, lo).grad >= 0.0) {
    fit.boundary = FitBoundary::kLower;
    fit.converged = true;
    return finish(options.k_min);
  }
  if (eval_log_k(n, s, delta_prime, hi).grad <= 0.0) {
    fit.boundary = FitBoundary::kUpper;
    fit.converged = true;
    return finish(options.k_max);
  }

  // Start from the all-quadratic (Gaussian) solution k = sqrt(2 S / N).
  double t = std::clamp(0.5 * std::log(2.0 * s / static_cast<double>(n)), lo, hi);
  LogKEval cur = eval_log_k(n, s, delta_prime, t);
  if (options.nll_trace) options.nll_trace->push_back(cur.value);
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    fit.iterations = it + 1;
    if (std::abs(cur.grad) < options.gradient_tolerance) {
      fit.converged = true;
      break;
    }
    (cur.grad < 0.0 ? lo : hi) = t;
    double next = 0.5 * (lo + hi);
    if (cur.hess > 0.0) {
      const double newton = t - cur.grad / cur.hess;
      if (newton > lo && newton < hi) next = newton;
    }
    LogKEval cand = eval_log_k(n, s, delta_prime, next);
    for (int halving = 0; halving < 60 && cand.value > cur.value; ++halving) {
      next = t + 0.5 * (next - t);
      cand = eval_log_k(n, s, delta_prime, next);
    }
    const double step = std::abs(next - t);
    if (cand.value <= cur.value) {
      t = next;
      cur = cand;
    }
    if (options.nll_trace) options.nll_trace->push_back(cur.value);
    if (step < options.step_tolerance * std::max(1.0, std::abs(t))) {
      fit.converged = true;
      break;
    }
  }
  if (!fit.converged) {
    // Golden-section search over the final bracket.
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    double fc = eval_log_k(n, s, delta_prime, c).value;
    double fd = eval_log_k(n, s, delta_prime, d).value;
    while (b - a > 1e-12 * std::max(1.0, std::abs(a))) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - inv_phi * (b - a);
        fc = eval_log_k(n, s, delta_prime, c).value;
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + inv_phi * (b - a);
        fd = eval_log_k(n, s, delta_prime, d).value;
      }
    }
    t = 0.5 * (a + b);
    fit.used_fallback = true;
  }
  return finish(std::exp(t));
}

double fit_gaussian_sigma(std::span<const double> errors) {
  if (errors.size() < 2) throw DomainError("Gaussian fit needs at least two errors");
  double sq = 0.0;
  for (double e : errors) {
    if (!std::isfinite(e)) throw DomainError("Gaussian fit received a non-finite error");
    sq += e * e;
  }
  if (sq == 0.0) throw DomainError("degenerate Gaussian fit: all errors are zero");
  return std::sqrt(sq / static_cast<double>(errors.size()));
}

void FittedScale::validate() const {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw DomainError("fitted scale must be positive");
  if (n < 2) throw DomainError("fitted scale needs N >= 2");
  if (kind == Kind::kHuber && !(delta_prime > 0.0)) throw DomainError("Huber fit needs delta' > 0");
}

FittedScale fitted_from(const HuberFit& fit) {
  FittedScale out;
  out.kind = FittedScale::Kind::kHuber;
  out.scale = fit.k;
  out.delta_prime = fit.delta_prime;
  out.n = fit.n;
  out.nll = fit.nll;
  out.iterations = fit.iterations;
  out.boundary = fit.boundary;
  out.used_fallback = fit.used_fallback;
  return out;
}

FittedScale fitted_gaussian(std::span<const double> errors) {
  FittedScale out;
  out.kind = FittedScale::Kind::kGaussian;
  out.scale = fit_gaussian_sigma(errors);
  out.n = errors.size();
  const double sigma = out.scale;
  double sq = 0.0;
  for (double e : errors) sq += e * e;
  out.nll = static_cast<double>(out.n) * std::log(kSqrt2Pi * sigma) + sq / (2.0 * sigma * sigma);
  return out;
}

double lambda_coefficient(const FittedScale& fit, double c_const) {
  fit.validate();
  if (!(c_const >= 0.0) || !std::isfinite(c_const)) throw DomainError("lambda coefficient needs C >= 0");
  return fit.kind == FittedScale::Kind::kHuber ? c_const / (fit.scale * fit.scale)
                                               : c_const / fit.scale;
}

std::string format_calibration_report(const CalibrationReport& report) {
  using detail::format_double;
  const FittedScale& f = report.fit;
  std::ostringstream out;
  out << "# mfood calibration report\n";
  if (f.kind == FittedScale::Kind::kHuber) {
    out << "kind=huber\n"
        << "k=" << format_double(f.scale) << "\n"
        << "delta_prime=" << format_double(f.delta_prime) << "\n";
  } else {
    out << "kind=gaussian\n"
        << "sigma_mse=" << format_double(f.scale) << "\n";
  }
  out << "n=" << f.n << "\n"
      << "nll=" << format_double(f.nll) << "\n"
      << "iterations=" << f.iterations << "\n"
      << "boundary=" << boundary_name(f.boundary) << "\n"
      << "fallback=" << (f.used_fallback ? 1 : 0) << "\n"
      << "c_const=" << format_double(report.c_const) << "\n"
      << "lambda=" << format_double(report.lambda) << "\n";
  return out.str();
}

CalibrationReport parse_calibration_report(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) throw ConfigError("calibration report: malformed line");
    kv[std::string(detail::trim(t.substr(0, eq)))] = std::string(detail::trim(t.substr(eq + 1)));
  }
  auto get = [&](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw ConfigError("calibration report: missing key '" + key + "'");
    return it->second;
  };
  CalibrationReport r;
  const std::string& kind = get("kind");
  if (kind == "huber") {
    r.fit.kind = FittedScale::Kind::kHuber;
    r.fit.scale = detail::parse_double(get("k"), "k");
    r.fit.delta_prime = detail::parse_double(get("delta_prime"), "delta_prime");
  } else if (kind == "gaussian") {
    r.fit.kind = FittedScale::Kind::kGaussian;
    r.fit.scale = detail::parse_double(get("sigma_mse"), "sigma_mse");
  } else {
    throw ConfigError("calibration report: unknown kind '" + kind + "'");
  }
  r.fit.n = detail::parse_u64(get("n"), "n");
  r.fit.nll = detail::parse_double(get("nll"), "nll");
  r.fit.iterations = detail::parse_u64(get("iterations"), "iterations");
  r.fit.boundary = parse_boundary(get("boundary"));
  r.fit.used_fallback = get("fallback") == "1";
  r.c_const = detail::parse_double(get("c_const"), "c_const");
  r.lambda = detail::parse_double(get("lambda"), "lambda");
  r.fit.validate();
  return r;
}

void write_calibration_report(const std::filesystem::path& path, const CalibrationReport& report) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write calibration report '" + path.string() + "'");
  out << format_calibration_report(report);
}

CalibrationReport read_calibration_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read calibration report '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_calibration_report(buf.str());
}

}  // namespace mfood
