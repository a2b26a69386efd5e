#ifndef GMCS_LEAKAGE_HPP
#define GMCS_LEAKAGE_HPP

namespace gmcs::leakage {

/// Group velocity in standard telecom fiber, used to convert an optical
/// delay into an equivalent fiber length difference.
inline constexpr double kFiberGroupVelocity = 2.0e8;  // m/s

/// Gaussian pulse widths. fwhm_time is the intensity FWHM; sigma_time the
/// Gaussian sigma of the field envelope; sigma_freq the spectral sigma of
/// the transform-limited pulse.
struct PulseShape {
  double fwhm_time = 0.0;   // seconds
  double sigma_time = 0.0;  // seconds
  double sigma_freq = 0.0;  // Hz

  static PulseShape transform_limited(double fwhm_time);
};

/// sigma_t = fwhm / (2*sqrt(ln 2)).
double sigma_from_fwhm(double fwhm);

/// Spectral sigma of a transform-limited Gaussian pulse of the given
/// temporal FWHM: FWHM_nu = (2 ln2 / pi)/fwhm_time, sigma_nu = FWHM_nu/(2 sqrt(ln 2)).
double transform_limited_sigma_freq(double fwhm_time);
double transform_limited_fwhm_freq(double fwhm_time);

/// Mode overlap of two identical Gaussian pulses offset by delta (same units
/// as sigma, time or frequency domain): exp(-delta^2 / (2 sigma^2)).
double overlap_factor(double delta, double sigma);

/// Quadrature grid for the numerical overlap integral. The grid must span
/// at least +/-8 sigma around both pulse centers and carry at least 1e4
/// samples.
struct OverlapGrid {
  double span_sigmas = 10.0;
  long points = 20001;
};

/// Numerically integrates the product of the two normalized Gaussian field
/// envelopes and squares the modulus. Independent route against
/// overlap_factor; the common optical carrier cancels in the conjugate
/// product up to a constant phase, which drops out of the modulus.
double overlap_oracle_numeric(double delta_t, double sigma_t,
                              const OverlapGrid& grid = {});

/// Leakage excess noise in the time-multiplexing scheme, for a leakage
/// pulse of n_le mean photons delayed by delta_t:
///   n_leak = 2 * n_le * exp(-delta_t^2/(2 sigma_t^2)).
/// Assumes the LO-leakage phase is uniform on [0, 2pi).
double n_leak_time_mux(double n_le, double delta_t, double sigma_t);

struct DelayRequirement {
  double delay_s = 0.0;
  double fiber_length_m = 0.0;
  // Set when the target is already met with zero delay (target >= 2*n_le).
  bool already_satisfied = false;
};

/// Inverse of n_leak_time_mux: the delay needed to push the leakage noise
/// down to n_leak_target, plus the equivalent fiber length difference.
DelayRequirement required_delay(double n_le, double n_leak_target,
                                double sigma_t);

struct DcLeakageEstimate {
  double n_le_eff = 0.0;  // mean effective leakage photons per pulse
  double phi_le_0 = 0.0;  // mean LO-leakage phase, radians
  // False when both DC components vanish and the phase is undefined.
  bool phase_defined = true;
};

/// Effective leakage from the per-frame DC components of Bob's data:
///   n_le_eff = x0^2 + p0^2, phi = atan2(p0, x0).
DcLeakageEstimate effective_leakage_from_dc(double x0, double p0);

/// n_leak = n_le_eff * gamma.
double n_leak_from_gamma(double n_le_eff, double gamma);

/// gamma = (n_bob - n_el) / n_le_eff.
double gamma_from_noise_split(double n_bob, double n_el, double n_le_eff);

/// Output-referred electrical noise from its level below shot noise:
/// 10^(-db/10).
double electrical_noise_from_db(double db_below_shot);

/// 10*log10(n_lo / n_le_eff), dB.
double extinction_ratio_db(double lo_photons, double n_le_eff);

/// Full leakage characterization assembled from the DC-estimation route.
struct LeakageEstimate {
  double n_le = 0.0;      // mean leakage photons per pulse
  double n_le_eff = 0.0;  // effective (mode-matched) leakage photons
  double alpha = 0.0;     // overlap factor, n_le_eff = alpha * n_le
  double phi_le_0 = 0.0;
  double gamma = 0.0;
  double n_leak = 0.0;    // shot-noise units
};

}  // namespace gmcs::leakage

#endif  // GMCS_LEAKAGE_HPP
