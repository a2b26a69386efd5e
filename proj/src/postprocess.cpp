#include "gmcs/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "gmcs/format.hpp"

namespace gmcs::postprocess {

namespace {

double sample_mean(const Eigen::ArrayXd& v) { return v.mean(); }

double sample_var(const Eigen::ArrayXd& v) {
  const Eigen::Index n = v.size();
  if (n < 2) throw std::domain_error("need at least two samples for a variance");
  const double m = v.mean();
  return (v - m).square().sum() / static_cast<double>(n - 1);
}

double sample_cov(const Eigen::ArrayXd& u, const Eigen::ArrayXd& v) {
  const Eigen::Index n = u.size();
  if (n != v.size()) throw std::invalid_argument("covariance length mismatch");
  if (n < 2) throw std::domain_error("need at least two samples for a covariance");
  const double mu = u.mean();
  const double mv = v.mean();
  return ((u - mu) * (v - mv)).sum() / static_cast<double>(n - 1);
}

Eigen::ArrayXd gather(const Eigen::ArrayXd& v, const std::vector<int>& idx) {
  Eigen::ArrayXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[idx[i]];
  return out;
}

constexpr std::uint64_t kDisclosureSeedSalt = 0x9e3779b97f4a7c15ULL;
constexpr Eigen::Index kMinDisclosed = 100;
constexpr Eigen::Index kMinPairs = 100;

}  // namespace

SiftedPairs sift(const Eigen::ArrayXd& alice_x, const Eigen::ArrayXd& alice_p,
                 const std::vector<Quadrature>& basis,
                 const Eigen::ArrayXd& bob) {
  const Eigen::Index n = bob.size();
  if (alice_x.size() != n || alice_p.size() != n ||
      static_cast<Eigen::Index>(basis.size()) != n) {
    throw std::invalid_argument("sift: input lengths differ");
  }
  SiftedPairs pairs;
  pairs.alice.resize(n);
  pairs.bob = bob;
  pairs.basis = basis;
  for (Eigen::Index i = 0; i < n; ++i) {
    pairs.alice[i] = basis[static_cast<std::size_t>(i)] == Quadrature::x
                         ? alice_x[i]
                         : alice_p[i];
  }
  return pairs;
}

DcCorrection subtract_dc(const Eigen::ArrayXd& samples,
                         const std::vector<Quadrature>& basis) {
  const Eigen::Index n = samples.size();
  if (static_cast<Eigen::Index>(basis.size()) != n) {
    throw std::invalid_argument("subtract_dc: input lengths differ");
  }
  long n_x = 0, n_p = 0;
  double sum_x = 0.0, sum_p = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (basis[static_cast<std::size_t>(i)] == Quadrature::x) {
      ++n_x;
      sum_x += samples[i];
    } else {
      ++n_p;
      sum_p += samples[i];
    }
  }
  if ((n_x > 0 && n_x < 2) || (n_p > 0 && n_p < 2)) {
    throw std::domain_error("subtract_dc: need at least two samples per basis");
  }
  DcCorrection dc;
  dc.x0_hat = n_x > 0 ? sum_x / static_cast<double>(n_x) : 0.0;
  dc.p0_hat = n_p > 0 ? sum_p / static_cast<double>(n_p) : 0.0;
  dc.corrected.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double offset = basis[static_cast<std::size_t>(i)] == Quadrature::x
                              ? dc.x0_hat
                              : dc.p0_hat;
    dc.corrected[i] = samples[i] - offset;
  }
  return dc;
}

double estimate_phase(const DisclosedSet& disclosed) {
  const Eigen::Index n = disclosed.size();
  if (n < kMinDisclosed) {
    throw std::domain_error("estimate_phase: need at least 100 disclosed records");
  }
  if (disclosed.alice_x.size() != n || disclosed.alice_p.size() != n ||
      static_cast<Eigen::Index>(disclosed.basis.size()) != n) {
    throw std::invalid_argument("estimate_phase: input lengths differ");
  }

  std::vector<int> idx_x, idx_p;
  idx_x.reserve(static_cast<std::size_t>(n));
  idx_p.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    (disclosed.basis[static_cast<std::size_t>(i)] == Quadrature::x ? idx_x
                                                                   : idx_p)
        .push_back(static_cast<int>(i));
  }

  // X-basis records align the covariance vector with (cos, sin); P-basis
  // records see the rotated pair, so their components enter transposed with
  // the sign flipped on the sine part.
  double c_cos = 0.0, c_sin = 0.0;
  if (idx_x.size() >= 2) {
    const Eigen::ArrayXd ax = gather(disclosed.alice_x, idx_x);
    const Eigen::ArrayXd ap = gather(disclosed.alice_p, idx_x);
    const Eigen::ArrayXd y = gather(disclosed.bob, idx_x);
    c_cos += sample_cov(ax, y);
    c_sin += sample_cov(ap, y);
  }
  if (idx_p.size() >= 2) {
    const Eigen::ArrayXd ax = gather(disclosed.alice_x, idx_p);
    const Eigen::ArrayXd ap = gather(disclosed.alice_p, idx_p);
    const Eigen::ArrayXd y = gather(disclosed.bob, idx_p);
    c_cos += sample_cov(ap, y);
    c_sin -= sample_cov(ax, y);
  }
  if (c_cos == 0.0 && c_sin == 0.0) {
    throw std::domain_error("estimate_phase: degenerate covariances");
  }
  return std::atan2(c_sin, c_cos);
}

double phase_estimate_stddev(double bob_variance, double v_a, double eta_g,
                             Eigen::Index n_disclosed) {
  if (v_a <= 0.0 || eta_g <= 0.0 || n_disclosed < 1) {
    throw std::domain_error("phase_estimate_stddev: invalid inputs");
  }
  return std::sqrt(bob_variance /
                   (eta_g * v_a * static_cast<double>(n_disclosed)));
}

std::pair<double, double> remap(double x, double p, double phi_0) {
  const double c = std::cos(phi_0);
  const double s = std::sin(phi_0);
  return {x * c + p * s, -x * s + p * c};
}

std::pair<Eigen::ArrayXd, Eigen::ArrayXd> remap(const Eigen::ArrayXd& x,
                                                const Eigen::ArrayXd& p,
                                                double phi_0) {
  const double c = std::cos(phi_0);
  const double s = std::sin(phi_0);
  return {x * c + p * s, -x * s + p * c};
}

double estimate_transmission(const SiftedPairs& pairs) {
  if (pairs.size() < kMinPairs) {
    throw std::domain_error("estimate_transmission: need at least 100 pairs");
  }
  const double var_a = sample_var(pairs.alice);
  if (var_a <= 0.0) {
    throw std::domain_error("estimate_transmission: degenerate Alice variance");
  }
  const double slope = sample_cov(pairs.alice, pairs.bob) / var_a;
  return slope * slope;
}

double estimate_chi(const SiftedPairs& pairs, double eta_g_hat, double v_a) {
  if (!(eta_g_hat > 0.0) || !std::isfinite(eta_g_hat)) {
    throw std::domain_error("estimate_chi: eta_g_hat must be > 0");
  }
  if (!(v_a >= 0.0) || !std::isfinite(v_a)) {
    throw std::domain_error("estimate_chi: V_A must be finite and >= 0");
  }
  const Eigen::ArrayXd residual =
      pairs.bob - std::sqrt(eta_g_hat) * pairs.alice;
  return sample_var(residual) / eta_g_hat - 1.0;
}

PhaseDriftFit fit_phase_drift(const std::vector<double>& times,
                              const std::vector<double>& phases) {
  if (times.size() != phases.size() || times.empty()) {
    throw std::invalid_argument("fit_phase_drift: need matching non-empty series");
  }
  // Unwrap so consecutive differences stay within (-pi, pi].
  std::vector<double> unwrapped(phases.size());
  unwrapped[0] = phases[0];
  for (std::size_t i = 1; i < phases.size(); ++i) {
    const double step = simulator::wrap_angle(phases[i] - phases[i - 1]);
    unwrapped[i] = unwrapped[i - 1] + step;
  }

  PhaseDriftFit fit;
  const double n = static_cast<double>(times.size());
  double t_mean = 0.0, phi_mean = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    t_mean += times[i];
    phi_mean += unwrapped[i];
  }
  t_mean /= n;
  phi_mean /= n;
  fit.mid_time = t_mean;
  fit.mid_phase = phi_mean;
  if (times.size() < 2) return fit;

  double s_tt = 0.0, s_tp = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double dt = times[i] - t_mean;
    s_tt += dt * dt;
    s_tp += dt * (unwrapped[i] - phi_mean);
  }
  if (s_tt > 0.0) {
    fit.rate = s_tp / s_tt;
    fit.rate_valid = true;
  }
  return fit;
}

BudgetEstimate noise_budget(double chi_hat, double eta_g_hat, double delta_hat,
                            double v_a, double n_el) {
  if (!(eta_g_hat > 0.0) || !std::isfinite(eta_g_hat)) {
    throw std::domain_error("noise_budget: eta_g_hat must be > 0");
  }
  if (!std::isfinite(chi_hat) || !std::isfinite(delta_hat) ||
      !std::isfinite(v_a) || !std::isfinite(n_el) || n_el < 0.0) {
    throw std::domain_error("noise_budget: invalid inputs");
  }

  BudgetEstimate estimate;
  auto clamp0 = [&](double value, const char* what) {
    if (value >= 0.0) return value;
    estimate.clamped = true;
    estimate.warnings.push_back(std::string(what) +
                                " came out negative; clamped to 0");
    return 0.0;
  };

  double chi_vac = clamp0((1.0 - eta_g_hat) / eta_g_hat, "chi_vac");
  double epsilon = clamp0(chi_hat - chi_vac, "epsilon");
  double epsilon_a = v_a * delta_hat;
  if (epsilon_a > epsilon) {
    estimate.clamped = true;
    estimate.warnings.push_back(
        "epsilon_a exceeds total excess noise; capped at epsilon");
    epsilon_a = epsilon;
  }
  double n_bob = (epsilon - epsilon_a) * eta_g_hat;
  double n_leak = n_bob - n_el;
  double n_el_eff = n_el;
  if (n_leak < 0.0) {
    estimate.clamped = true;
    estimate.warnings.push_back(
        "N_Bob below electrical noise; N_leak clamped to 0");
    n_leak = 0.0;
    n_el_eff = n_bob;
  }

  estimate.delta_hat = delta_hat;
  estimate.budget.chi_vac = chi_vac;
  estimate.budget.epsilon_a = epsilon_a;
  estimate.budget.n_el = n_el_eff;
  estimate.budget.n_leak = n_leak;
  estimate.budget.n_bob = n_el_eff + n_leak;
  estimate.budget.epsilon = epsilon_a + estimate.budget.n_bob / eta_g_hat;
  estimate.budget.chi = chi_vac + estimate.budget.epsilon;
  return estimate;
}

EstimationReport estimate_session(const simulator::SessionData& session,
                                  const EstimationOptions& options) {
  const auto& config = session.config;
  if (session.frames.empty()) {
    throw std::invalid_argument("estimate_session: empty session");
  }
  const double v_a = config.params.modulation_variance;
  const double fraction = options.disclosed_fraction >= 0.0
                              ? options.disclosed_fraction
                              : config.disclosed_fraction;
  if (fraction < 0.0 || fraction > 1.0) {
    throw std::invalid_argument("estimate_session: disclosed fraction out of range");
  }
  const std::uint64_t seed = options.disclosure_seed != 0
                                 ? options.disclosure_seed
                                 : (config.rng_seed ^ kDisclosureSeedSalt);
  simulator::Prng disclosure_rng(seed);

  EstimationReport report;
  report.delta_hat = config.delta;

  std::vector<double> frame_times, frame_phases;
  std::vector<Eigen::ArrayXd> corrected_frames;
  std::vector<std::vector<int>> disclosed_indices;
  std::vector<double> frame_bob_var;
  corrected_frames.reserve(session.frames.size());

  for (const auto& frame : session.frames) {
    const Eigen::Index n = frame.bob_sample.size();
    DcCorrection dc = subtract_dc(frame.bob_sample, frame.basis);

    const long k = std::lround(fraction * static_cast<double>(n));
    std::vector<int> selected;
    if (k > 0) {
      // Partial Fisher-Yates, then sorted for a deterministic layout.
      std::vector<int> pool(static_cast<std::size_t>(n));
      for (Eigen::Index i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = static_cast<int>(i);
      for (long i = 0; i < k; ++i) {
        const auto j = i + static_cast<long>(disclosure_rng.below(
                               static_cast<std::uint64_t>(n - i)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
      }
      selected.assign(pool.begin(), pool.begin() + k);
      std::sort(selected.begin(), selected.end());
    }

    FrameEstimate fe;
    fe.frame_index = frame.frame_index;
    fe.x0_hat = dc.x0_hat;
    fe.p0_hat = dc.p0_hat;
    fe.disclosed_count = static_cast<int>(selected.size());

    if (!selected.empty()) {
      DisclosedSet disclosed;
      disclosed.alice_x = gather(frame.alice_x, selected);
      disclosed.alice_p = gather(frame.alice_p, selected);
      disclosed.bob = gather(dc.corrected, selected);
      disclosed.basis.reserve(selected.size());
      for (int i : selected) {
        disclosed.basis.push_back(frame.basis[static_cast<std::size_t>(i)]);
      }
      fe.phi_raw = estimate_phase(disclosed);
      frame_times.push_back((static_cast<double>(frame.frame_index) + 0.5) *
                            config.frame_duration);
      frame_phases.push_back(fe.phi_raw);
    } else if (options.apply_remap) {
      throw std::domain_error(
          "estimate_session: remap requested but no pulses are disclosed");
    }

    frame_bob_var.push_back(sample_var(dc.corrected));
    corrected_frames.push_back(std::move(dc.corrected));
    disclosed_indices.push_back(std::move(selected));
    report.frames.push_back(fe);
    report.disclosed_used += static_cast<long>(disclosed_indices.back().size());
  }

  // Smooth the per-frame phase estimates with a linear drift model; the
  // drift within one session is far below the per-frame statistical noise.
  PhaseDriftFit fit;
  if (!frame_phases.empty()) {
    fit = fit_phase_drift(frame_times, frame_phases);
    report.drift_rate_hat = fit.rate;
    report.drift_rate_valid = fit.rate_valid;
  }

  // Remap, sift, and pool the key-bearing pairs.
  const long total = session.pulse_count();
  Eigen::ArrayXd pooled_alice(total), pooled_bob(total);
  std::vector<Quadrature> pooled_basis;
  pooled_basis.reserve(static_cast<std::size_t>(total));
  Eigen::Index out = 0;
  for (std::size_t f = 0; f < session.frames.size(); ++f) {
    const auto& frame = session.frames[f];
    const double phi = frame_phases.empty()
                           ? 0.0
                           : fit.at((static_cast<double>(frame.frame_index) + 0.5) *
                                    config.frame_duration);
    report.frames[f].phi_fitted = frame_phases.empty() ? 0.0 : phi;

    Eigen::ArrayXd ax = frame.alice_x, ap = frame.alice_p;
    if (options.apply_remap) {
      auto rotated = remap(frame.alice_x, frame.alice_p, phi);
      ax = std::move(rotated.first);
      ap = std::move(rotated.second);
    }
    SiftedPairs frame_pairs = sift(ax, ap, frame.basis, corrected_frames[f]);

    const auto& skip = disclosed_indices[f];
    std::size_t skip_pos = 0;
    for (Eigen::Index i = 0; i < frame_pairs.size(); ++i) {
      if (skip_pos < skip.size() && skip[skip_pos] == static_cast<int>(i)) {
        ++skip_pos;
        continue;
      }
      pooled_alice[out] = frame_pairs.alice[i];
      pooled_bob[out] = frame_pairs.bob[i];
      pooled_basis.push_back(frame_pairs.basis[static_cast<std::size_t>(i)]);
      ++out;
    }
  }
  pooled_alice.conservativeResize(out);
  pooled_bob.conservativeResize(out);
  SiftedPairs pooled{std::move(pooled_alice), std::move(pooled_bob),
                     std::move(pooled_basis)};
  report.pairs_used = static_cast<long>(out);

  report.eta_g_hat = estimate_transmission(pooled);
  report.chi_hat = estimate_chi(pooled, report.eta_g_hat, v_a);

  BudgetEstimate budget =
      noise_budget(report.chi_hat, report.eta_g_hat, config.delta, v_a,
                   config.electrical_noise);
  report.budget = budget.budget;
  report.epsilon_hat = budget.budget.epsilon;
  report.epsilon_a_hat = budget.budget.epsilon_a;
  report.n_bob_hat = budget.budget.n_bob;
  report.n_leak_hat = budget.budget.n_leak;
  report.clamped = budget.clamped;
  report.warnings = std::move(budget.warnings);

  // First-order standard errors of the pooled estimators.
  const long n = report.pairs_used;
  if (n >= 2) {
    const double var_a = sample_var(pooled.alice);
    const double resid_var = (report.chi_hat + 1.0) * report.eta_g_hat;
    const double slope = std::sqrt(report.eta_g_hat);
    const double se_slope =
        std::sqrt(resid_var / (static_cast<double>(n) * var_a));
    report.eta_g_stddev = 2.0 * slope * se_slope;
    const double se_resid = resid_var * std::sqrt(2.0 / static_cast<double>(n));
    const double eg = report.eta_g_hat;
    report.chi_stddev = std::hypot(se_resid / eg,
                                   resid_var / (eg * eg) * report.eta_g_stddev);
    report.epsilon_stddev =
        std::hypot(se_resid / eg,
                   (resid_var - 1.0) / (eg * eg) * report.eta_g_stddev);
    report.n_bob_stddev =
        std::hypot(se_resid, report.epsilon_a_hat * report.eta_g_stddev);
  }

  // Phase diagnostics use the estimated transmission.
  if (!frame_phases.empty()) {
    double se_sum = 0.0;
    for (std::size_t f = 0; f < report.frames.size(); ++f) {
      auto& fe = report.frames[f];
      if (fe.disclosed_count > 0) {
        fe.phi_stddev =
            phase_estimate_stddev(frame_bob_var[f], v_a, report.eta_g_hat,
                                  fe.disclosed_count);
        se_sum += fe.phi_stddev;
      }
    }
    const double mean_se = se_sum / static_cast<double>(frame_phases.size());
    report.phi0_hat = simulator::wrap_angle(fit.mid_phase);
    report.phi0_stddev =
        mean_se / std::sqrt(static_cast<double>(frame_phases.size()));
  }

  return report;
}

double calibrate_delta(const simulator::SessionData& session) {
  const auto& config = session.config;
  if (config.params.modulation_variance < 1e4) {
    throw std::domain_error(
        "calibrate_delta: requires a session with V_A >= 1e4");
  }
  if (config.electrical_noise != 0.0 || config.leakage.photons_eff != 0.0) {
    throw std::domain_error(
        "calibrate_delta: requires electrical and leakage noise disabled");
  }
  const EstimationReport report = estimate_session(session);
  return report.chi_hat / config.params.modulation_variance;
}

double epsilon_a_transmittance_sensitivity(double v_a, double eta_g,
                                           double bob_variance, double n_bob) {
  if (!(eta_g > 0.0) || !std::isfinite(eta_g)) {
    throw std::domain_error("sensitivity: eta_g must be > 0");
  }
  auto epsilon_a_of = [&](double g) {
    const double chi = bob_variance / g - (v_a + 1.0);
    return chi - (1.0 - g) / g - n_bob / g;
  };
  const double h = eta_g * 1e-6;
  return (epsilon_a_of(eta_g + h) - epsilon_a_of(eta_g - h)) / (2.0 * h);
}

void write_report(const EstimationReport& report, std::ostream& out) {
  out << "phi0_hat=" << format_g9(report.phi0_hat) << '\n'
      << "phi0_stddev=" << format_g9(report.phi0_stddev) << '\n'
      << "drift_rate_hat=" << format_g9(report.drift_rate_hat) << '\n'
      << "drift_rate_valid=" << (report.drift_rate_valid ? 1 : 0) << '\n'
      << "eta_G_hat=" << format_g9(report.eta_g_hat) << '\n'
      << "eta_G_stddev=" << format_g9(report.eta_g_stddev) << '\n'
      << "chi_hat=" << format_g9(report.chi_hat) << '\n'
      << "chi_stddev=" << format_g9(report.chi_stddev) << '\n'
      << "epsilon_hat=" << format_g9(report.epsilon_hat) << '\n'
      << "epsilon_stddev=" << format_g9(report.epsilon_stddev) << '\n'
      << "epsilon_A_hat=" << format_g9(report.epsilon_a_hat) << '\n'
      << "N_Bob_hat=" << format_g9(report.n_bob_hat) << '\n'
      << "N_Bob_stddev=" << format_g9(report.n_bob_stddev) << '\n'
      << "N_leak_hat=" << format_g9(report.n_leak_hat) << '\n'
      << "delta_hat=" << format_g9(report.delta_hat) << '\n'
      << "chi_vac_hat=" << format_g9(report.budget.chi_vac) << '\n'
      << "pairs_used=" << report.pairs_used << '\n'
      << "disclosed_used=" << report.disclosed_used << '\n'
      << "clamped=" << (report.clamped ? 1 : 0) << '\n';
  for (const auto& warning : report.warnings) {
    out << "warning=" << warning << '\n';
  }
}

void write_frame_csv(const EstimationReport& report, std::ostream& out) {
  out << "frame_index,disclosed_count,x0_hat,p0_hat,phi_raw,phi_fitted,"
         "phi_stddev\n";
  for (const auto& fe : report.frames) {
    out << fe.frame_index << ',' << fe.disclosed_count << ','
        << format_g9(fe.x0_hat) << ',' << format_g9(fe.p0_hat) << ','
        << format_g9(fe.phi_raw) << ',' << format_g9(fe.phi_fitted) << ','
        << format_g9(fe.phi_stddev) << '\n';
  }
}

}  // namespace gmcs::postprocess
