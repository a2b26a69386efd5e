#ifndef GMCS_CLI_HPP
#define GMCS_CLI_HPP

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "gmcs/keyrate.hpp"
#include "gmcs/leakage.hpp"
#include "gmcs/postprocess.hpp"
#include "gmcs/simulator.hpp"

namespace gmcs::cli {

enum class RunMode { keyrate, leakage, simulate, calibrate };

/// Distance sweep of the analytic key rate.
struct SweepSpec {
  double start_km = 0.0;
  double stop_km = 50.0;
  double step_km = 0.5;
  std::vector<double> betas{1.0, 0.898};
  std::vector<keyrate::EveModel> models{keyrate::EveModel::general,
                                        keyrate::EveModel::realistic};

  std::vector<std::string> validation_errors() const;
};

/// Inputs of the leakage run mode.
struct LeakageOptions {
  double n_le_time = 1e8;       // leakage photons, plain time multiplexing
  double n_le_combined = 1e5;   // with a 30 dB polarization stage in front
  double n_leak_target = 0.02;  // shot-noise units
  double pulse_fwhm = 100e-9;   // seconds
  double lo_freq_shift = 55e6;  // Hz
  double dc_x0 = 2.449489742783178;  // sqrt(6)
  double dc_p0 = 0.0;
  double gamma = 0.0033;
  double lo_photons = 8e7;
  double n_el_db = 13.4;  // electrical noise below shot noise, dB

  std::vector<std::string> validation_errors() const;
};

struct Config {
  simulator::ScenarioConfig scenario{};
  SweepSpec sweep{};
  LeakageOptions leakage{};
  double calibration_modulation_variance = 40000.0;
};

/// Flat key=value configuration, one setting per line, '#' comments.
/// Unknown keys, malformed values and constraint violations are reported
/// with the offending key (and line, where applicable).
Config parse_config(const std::string& path);
Config parse_config_text(std::istream& in, const std::string& name);

struct SweepRow {
  double distance_km = 0.0;
  double transmittance = 0.0;
  keyrate::EveModel model = keyrate::EveModel::general;
  double beta = 0.0;
  double mutual_info_ab = 0.0;
  double mutual_info_be = 0.0;
  double delta_i = 0.0;
};

/// One row per (distance, model, beta), ordered exactly that way. The
/// excess noise is recomposed at each distance from the fixed epsilon_a and
/// n_bob.
std::vector<SweepRow> run_keyrate_sweep(const SweepSpec& sweep,
                                        const keyrate::SystemParameters& params,
                                        double epsilon_a, double n_bob);

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out);

/// Key rates computed from estimated parameters, at beta = 1 and at the
/// configured beta.
struct EstimatedKeyRates {
  double beta = 0.0;
  keyrate::KeyRateResult general_beta1{};
  keyrate::KeyRateResult general_at_beta{};
  keyrate::KeyRateResult realistic_beta1{};
  keyrate::KeyRateResult realistic_at_beta{};
};

EstimatedKeyRates key_rates_from_estimates(
    const postprocess::EstimationReport& report,
    const keyrate::SystemParameters& params);

struct SimulateResult {
  simulator::SessionData session;
  postprocess::EstimationReport report;
  EstimatedKeyRates rates;
};

SimulateResult run_simulate(const Config& config);

void write_simulate_report(const SimulateResult& result, std::ostream& out);

struct LeakageReport {
  LeakageOptions options{};
  double sigma_t = 0.0;
  leakage::DelayRequirement time_mux{};
  leakage::DelayRequirement combined{};
  leakage::PulseShape pulse{};
  double alpha_freq = 0.0;
  leakage::DcLeakageEstimate dc_estimate{};
  double n_leak_dc = 0.0;
  double extinction_db = 0.0;
  double n_el = 0.0;
};

LeakageReport run_leakage(const LeakageOptions& options);

void write_leakage_report(const LeakageReport& report, std::ostream& out);

struct CalibrationResult {
  double calibration_v_a = 0.0;
  double production_v_a = 0.0;
  double delta_hat = 0.0;
  double epsilon_a_production = 0.0;  // production_v_a * delta_hat
  double chi_hat = 0.0;
  long pulses = 0;
};

/// Runs a dedicated high-modulation-variance session with leakage and
/// electrical noise disabled and extracts delta.
CalibrationResult run_calibrate(const Config& config);

void write_calibration_report(const CalibrationResult& result,
                              std::ostream& out);

}  // namespace gmcs::cli

#endif  // GMCS_CLI_HPP
