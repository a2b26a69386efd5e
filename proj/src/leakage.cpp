#include "gmcs/leakage.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gmcs::leakage {

namespace {

const double kTwoSqrtLn2 = 2.0 * std::sqrt(std::numbers::ln2);

void require_positive(double value, const char* name) {
  if (!std::isfinite(value) || value <= 0.0) {
    throw std::domain_error(std::string(name) + " must be finite and > 0");
  }
}

void require_finite_nonneg(double value, const char* name) {
  if (!std::isfinite(value) || value < 0.0) {
    throw std::domain_error(std::string(name) + " must be finite and >= 0");
  }
}

}  // namespace

PulseShape PulseShape::transform_limited(double fwhm_time) {
  PulseShape shape;
  shape.fwhm_time = fwhm_time;
  shape.sigma_time = sigma_from_fwhm(fwhm_time);
  shape.sigma_freq = transform_limited_sigma_freq(fwhm_time);
  return shape;
}

double sigma_from_fwhm(double fwhm) {
  require_positive(fwhm, "fwhm");
  return fwhm / kTwoSqrtLn2;
}

double transform_limited_fwhm_freq(double fwhm_time) {
  require_positive(fwhm_time, "fwhm_time");
  return (2.0 * std::numbers::ln2 / std::numbers::pi) / fwhm_time;
}

double transform_limited_sigma_freq(double fwhm_time) {
  return transform_limited_fwhm_freq(fwhm_time) / kTwoSqrtLn2;
}

double overlap_factor(double delta, double sigma) {
  require_positive(sigma, "sigma");
  if (!std::isfinite(delta)) throw std::domain_error("delta must be finite");
  const double ratio = delta / sigma;
  return std::exp(-0.5 * ratio * ratio);
}

double overlap_oracle_numeric(double delta_t, double sigma_t,
                              const OverlapGrid& grid) {
  require_positive(sigma_t, "sigma_t");
  if (!std::isfinite(delta_t)) throw std::domain_error("delta_t must be finite");
  if (grid.span_sigmas < 8.0 || grid.points < 10000) {
    throw std::invalid_argument(
        "integration grid too coarse: need span >= 8 sigma and >= 1e4 points");
  }

  // Pulse centers sit at +/- delta_t/2; the grid covers both plus the span.
  const double half_width = std::abs(delta_t) / 2.0 + grid.span_sigmas * sigma_t;
  long n = grid.points;
  if (n % 2 == 0) ++n;  // composite Simpson needs an even interval count

  const double e0_sq = 1.0 / (std::sqrt(std::numbers::pi) * sigma_t);
  const double h = 2.0 * half_width / static_cast<double>(n - 1);
  auto integrand = [&](double t) {
    const double a = (t - delta_t / 2.0) / sigma_t;
    const double b = (t + delta_t / 2.0) / sigma_t;
    return e0_sq * std::exp(-0.5 * (a * a + b * b));
  };

  double sum = integrand(-half_width) + integrand(half_width);
  for (long i = 1; i < n - 1; ++i) {
    const double t = -half_width + h * static_cast<double>(i);
    sum += (i % 2 == 1 ? 4.0 : 2.0) * integrand(t);
  }
  const double amplitude = sum * h / 3.0;
  return amplitude * amplitude;
}

double n_leak_time_mux(double n_le, double delta_t, double sigma_t) {
  require_finite_nonneg(n_le, "n_le");
  return 2.0 * n_le * overlap_factor(delta_t, sigma_t);
}

DelayRequirement required_delay(double n_le, double n_leak_target,
                                double sigma_t) {
  require_positive(n_le, "n_le");
  require_positive(sigma_t, "sigma_t");
  if (!std::isfinite(n_leak_target) || n_leak_target <= 0.0) {
    throw std::domain_error("n_leak_target must be finite and > 0");
  }
  DelayRequirement req;
  const double ratio = 2.0 * n_le / n_leak_target;
  if (ratio < 1.0) {
    // Even full overlap stays below the target.
    req.already_satisfied = true;
    return req;
  }
  req.delay_s = std::sqrt(2.0 * std::log(ratio)) * sigma_t;
  req.fiber_length_m = req.delay_s * kFiberGroupVelocity;
  return req;
}

DcLeakageEstimate effective_leakage_from_dc(double x0, double p0) {
  if (!std::isfinite(x0) || !std::isfinite(p0)) {
    throw std::domain_error("DC components must be finite");
  }
  DcLeakageEstimate estimate;
  estimate.n_le_eff = x0 * x0 + p0 * p0;
  if (x0 == 0.0 && p0 == 0.0) {
    estimate.phi_le_0 = 0.0;
    estimate.phase_defined = false;
  } else {
    estimate.phi_le_0 = std::atan2(p0, x0);
  }
  return estimate;
}

double n_leak_from_gamma(double n_le_eff, double gamma) {
  require_finite_nonneg(n_le_eff, "n_le_eff");
  require_finite_nonneg(gamma, "gamma");
  return n_le_eff * gamma;
}

double gamma_from_noise_split(double n_bob, double n_el, double n_le_eff) {
  require_finite_nonneg(n_el, "n_el");
  if (!std::isfinite(n_bob) || n_bob < n_el) {
    throw std::domain_error("inconsistent budget: n_bob must be >= n_el");
  }
  require_positive(n_le_eff, "n_le_eff");
  return (n_bob - n_el) / n_le_eff;
}

double electrical_noise_from_db(double db_below_shot) {
  if (!std::isfinite(db_below_shot)) {
    throw std::domain_error("dB value must be finite");
  }
  return std::pow(10.0, -db_below_shot / 10.0);
}

double extinction_ratio_db(double lo_photons, double n_le_eff) {
  require_positive(lo_photons, "lo_photons");
  require_positive(n_le_eff, "n_le_eff");
  return 10.0 * std::log10(lo_photons / n_le_eff);
}

}  // namespace gmcs::leakage
