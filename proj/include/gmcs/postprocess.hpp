#ifndef GMCS_POSTPROCESS_HPP
#define GMCS_POSTPROCESS_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "gmcs/keyrate.hpp"
#include "gmcs/simulator.hpp"

namespace gmcs::postprocess {

using simulator::Quadrature;

/// Sifted raw key: per pulse, the Alice quadrature Bob measured next to
/// Bob's sample, with the basis tag preserved.
struct SiftedPairs {
  Eigen::ArrayXd alice;
  Eigen::ArrayXd bob;
  std::vector<Quadrature> basis;

  Eigen::Index size() const { return alice.size(); }
};

SiftedPairs sift(const Eigen::ArrayXd& alice_x, const Eigen::ArrayXd& alice_p,
                 const std::vector<Quadrature>& basis,
                 const Eigen::ArrayXd& bob);

struct DcCorrection {
  Eigen::ArrayXd corrected;
  double x0_hat = 0.0;  // mean of the X-basis samples
  double p0_hat = 0.0;
};

/// Removes the per-basis mean of one frame of Bob samples and reports the
/// removed components. A basis must have either zero or at least two
/// samples in the frame.
DcCorrection subtract_dc(const Eigen::ArrayXd& samples,
                         const std::vector<Quadrature>& basis);

/// Disclosed records carry both Alice quadratures so the receiver-side
/// rotation can be estimated.
struct DisclosedSet {
  Eigen::ArrayXd alice_x;
  Eigen::ArrayXd alice_p;
  Eigen::ArrayXd bob;
  std::vector<Quadrature> basis;

  Eigen::Index size() const { return bob.size(); }
};

/// Covariance-regression phase estimate over a disclosed subset:
/// atan2 of the covariance vector between Alice's quadrature pair and
/// Bob's samples, combining both bases. Requires >= 100 records.
double estimate_phase(const DisclosedSet& disclosed);

/// Statistical standard error of estimate_phase for the given second
/// moments (used for reporting and test tolerances).
double phase_estimate_stddev(double bob_variance, double v_a, double eta_g,
                             Eigen::Index n_disclosed);

/// Rotation of Alice's quadrature pair by phi_0:
///   x' =  x cos(phi_0) + p sin(phi_0)
///   p' = -x sin(phi_0) + p cos(phi_0)
std::pair<double, double> remap(double x, double p, double phi_0);
std::pair<Eigen::ArrayXd, Eigen::ArrayXd> remap(const Eigen::ArrayXd& x,
                                                const Eigen::ArrayXd& p,
                                                double phi_0);

/// eta*G estimate: squared regression slope of Bob on remapped Alice.
double estimate_transmission(const SiftedPairs& pairs);

/// Equivalent input noise estimate:
///   chi_hat = Var(bob - sqrt(eta_g_hat) * alice) / eta_g_hat - 1.
double estimate_chi(const SiftedPairs& pairs, double eta_g_hat, double v_a);

/// Least-squares line through per-frame phase estimates (times in seconds).
/// Phases are unwrapped before fitting.
struct PhaseDriftFit {
  double mid_phase = 0.0;   // fitted phase at the mean frame time
  double rate = 0.0;        // rad/s
  double mid_time = 0.0;
  bool rate_valid = false;  // false when fewer than two frames

  double at(double t) const { return mid_phase + rate * (t - mid_time); }
};

PhaseDriftFit fit_phase_drift(const std::vector<double>& times,
                              const std::vector<double>& phases);

struct BudgetEstimate {
  keyrate::NoiseBudget budget{};
  double delta_hat = 0.0;
  bool clamped = false;
  std::vector<std::string> warnings;
};

/// Splits the estimated equivalent input noise into the budget components:
///   epsilon_a = V_A * delta, epsilon = chi - chi_vac,
///   n_bob = (epsilon - epsilon_a) * eta*G, n_leak = n_bob - n_el.
/// Slightly negative intermediates (statistical noise) are clamped to zero
/// and flagged.
BudgetEstimate noise_budget(double chi_hat, double eta_g_hat, double delta_hat,
                            double v_a, double n_el);

struct FrameEstimate {
  int frame_index = 0;
  double x0_hat = 0.0;
  double p0_hat = 0.0;
  double phi_raw = 0.0;     // per-frame covariance estimate
  double phi_fitted = 0.0;  // after the drift fit
  double phi_stddev = 0.0;
  int disclosed_count = 0;
};

struct EstimationReport {
  double phi0_hat = 0.0;  // fitted phase at the session midpoint
  double phi0_stddev = 0.0;
  double drift_rate_hat = 0.0;
  bool drift_rate_valid = false;
  double eta_g_hat = 0.0;
  double chi_hat = 0.0;
  double epsilon_hat = 0.0;
  double epsilon_a_hat = 0.0;
  double n_bob_hat = 0.0;
  double n_leak_hat = 0.0;
  double delta_hat = 0.0;
  double eta_g_stddev = 0.0;
  double chi_stddev = 0.0;
  double epsilon_stddev = 0.0;
  double n_bob_stddev = 0.0;
  keyrate::NoiseBudget budget{};  // self-consistent point estimates
  std::vector<FrameEstimate> frames;
  long pairs_used = 0;
  long disclosed_used = 0;
  bool clamped = false;
  std::vector<std::string> warnings;
};

struct EstimationOptions {
  bool apply_remap = true;
  // Negative fraction means "use the session config's value".
  double disclosed_fraction = -1.0;
  // Zero means "derive from the session seed".
  std::uint64_t disclosure_seed = 0;
};

/// Full receiver-side pipeline: per-frame DC subtraction, disclosed-subset
/// phase estimation, drift fit, rotation remap, pooled transmission and
/// noise estimation, budget split. Disclosed pulses are excluded from the
/// key-bearing statistics.
EstimationReport estimate_session(const simulator::SessionData& session,
                                  const EstimationOptions& options = {});

/// delta = chi_hat / V_A from a dedicated high-modulation-variance session
/// with leakage and electrical noise disabled. Rejects sessions outside
/// that regime.
double calibrate_delta(const simulator::SessionData& session);

/// Numerical d(epsilon_a)/d(eta*G) when epsilon_a is inferred from a fixed
/// measured Bob variance: epsilon_a(eta_g) = chi(eta_g) - chi_vac(eta_g)
/// - n_bob/eta_g with chi = v_b/eta_g - V. Central difference.
double epsilon_a_transmittance_sensitivity(double v_a, double eta_g,
                                           double bob_variance, double n_bob);

/// Flat key=value serialization.
void write_report(const EstimationReport& report, std::ostream& out);

/// Per-frame quantities, one CSV row per frame.
void write_frame_csv(const EstimationReport& report, std::ostream& out);

}  // namespace gmcs::postprocess

#endif  // GMCS_POSTPROCESS_HPP
