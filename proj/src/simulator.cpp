#include "gmcs/simulator.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "gmcs/format.hpp"

namespace gmcs::simulator {

double Prng::normal() {
  // Basic Box-Muller; u1 is shifted away from zero so the log is finite.
  const double u1 =
      (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Prng::below(std::uint64_t bound) {
  if (bound == 0) throw std::domain_error("bound must be > 0");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t value;
  do {
    value = engine_();
  } while (value >= limit);
  return value % bound;
}

double ScenarioConfig::dc_offset_x() const {
  return std::sqrt(leakage.photons_eff) * std::cos(leakage.mean_phase);
}

double ScenarioConfig::dc_offset_p() const {
  return std::sqrt(leakage.photons_eff) * std::sin(leakage.mean_phase);
}

keyrate::NoiseBudget ScenarioConfig::budget() const {
  return keyrate::make_noise_budget(params.bob_efficiency,
                                    params.channel_transmittance, epsilon_a(),
                                    electrical_noise, n_leak());
}

std::vector<std::string> ScenarioConfig::validation_errors() const {
  std::vector<std::string> errors = params.validation_errors();
  auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
  if (!finite_nonneg(delta)) errors.push_back("delta must be finite and >= 0");
  if (!finite_nonneg(electrical_noise))
    errors.push_back("N_el must be finite and >= 0");
  if (!finite_nonneg(leakage.photons_eff))
    errors.push_back("n_le_eff must be finite and >= 0");
  if (!std::isfinite(leakage.mean_phase))
    errors.push_back("phi_le_0 must be finite");
  if (!finite_nonneg(leakage.gamma))
    errors.push_back("gamma must be finite and >= 0");
  if (frame_size < 2) errors.push_back("frame_size must be >= 2");
  if (x_count < 0 || p_count < 0)
    errors.push_back("x_count and p_count must be >= 0");
  if (x_count + p_count != frame_size)
    errors.push_back("x_count + p_count must equal frame_size");
  if (!std::isfinite(frame_duration) || frame_duration <= 0.0)
    errors.push_back("frame_duration must be finite and > 0");
  if (!std::isfinite(phase_drift_rate))
    errors.push_back("phase_drift_rate must be finite");
  if (!std::isfinite(initial_phase))
    errors.push_back("initial_phase must be finite");
  if (n_frames < 1) errors.push_back("n_frames must be >= 1");
  if (!std::isfinite(disclosed_fraction) || disclosed_fraction < 0.0 ||
      disclosed_fraction > 1.0)
    errors.push_back("disclosed_fraction must lie in [0,1]");
  return errors;
}

void ScenarioConfig::validate() const {
  const auto errors = validation_errors();
  if (errors.empty()) return;
  std::ostringstream msg;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (i > 0) msg << "; ";
    msg << errors[i];
  }
  throw std::invalid_argument(msg.str());
}

std::pair<Eigen::ArrayXd, Eigen::ArrayXd> generate_alice_frame(double v_a,
                                                               int count,
                                                               Prng& rng) {
  if (!std::isfinite(v_a) || v_a < 0.0) {
    throw std::domain_error("V_A must be finite and >= 0");
  }
  if (count < 0) throw std::domain_error("count must be >= 0");
  const double scale = std::sqrt(v_a);
  Eigen::ArrayXd x(count), p(count);
  for (int i = 0; i < count; ++i) {
    x[i] = scale * rng.normal();
    p[i] = scale * rng.normal();
  }
  return {std::move(x), std::move(p)};
}

double wrap_angle(double phi) {
  double wrapped = std::remainder(phi, 2.0 * std::numbers::pi);
  if (wrapped <= -std::numbers::pi) wrapped += 2.0 * std::numbers::pi;
  return wrapped;
}

double phase_at(double t, const ScenarioConfig& config) {
  if (!(t >= 0.0)) throw std::domain_error("t must be >= 0");
  return wrap_angle(config.initial_phase + config.phase_drift_rate * t);
}

double phase_drift_excess_noise(double v_a, double delta_phi) {
  return v_a * delta_phi * delta_phi;
}

double measure_pulse(double alice_x, double alice_p, Quadrature basis,
                     double phi_0, const keyrate::SystemParameters& params,
                     const NoiseSpec& noise, Prng& rng) {
  const double eta_g = params.total_transmittance();
  const double c = std::cos(phi_0);
  const double s = std::sin(phi_0);
  const double rotated = basis == Quadrature::x
                             ? alice_x * c + alice_p * s
                             : -alice_x * s + alice_p * c;
  const double dc = basis == Quadrature::x ? noise.dc_x : noise.dc_p;
  const double noise_var =
      1.0 + eta_g * noise.epsilon_a + noise.n_el + noise.n_leak;
  return std::sqrt(eta_g) * rotated + dc + std::sqrt(noise_var) * rng.normal();
}

SessionData run_session(const ScenarioConfig& config) {
  config.validate();

  SessionData session;
  session.config = config;
  session.truth.eta_g = config.params.total_transmittance();
  session.truth.budget = config.budget();
  session.truth.pulse_noise_variance =
      1.0 + session.truth.eta_g * config.epsilon_a() + config.n_bob();
  session.truth.dc_x = config.dc_offset_x();
  session.truth.dc_p = config.dc_offset_p();

  NoiseSpec noise;
  noise.epsilon_a = config.epsilon_a();
  noise.n_el = config.electrical_noise;
  noise.n_leak = config.n_leak();
  noise.dc_x = session.truth.dc_x;
  noise.dc_p = session.truth.dc_p;

  Prng rng(config.rng_seed);
  session.frames.reserve(static_cast<std::size_t>(config.n_frames));
  for (int f = 0; f < config.n_frames; ++f) {
    FrameData frame;
    frame.frame_index = f;
    // phi_0 is treated as constant over a frame; the frame midpoint fixes it.
    const double t_mid = (static_cast<double>(f) + 0.5) * config.frame_duration;
    frame.phase = phase_at(t_mid, config);
    frame.dc_x = noise.dc_x;
    frame.dc_p = noise.dc_p;

    auto [x, p] = generate_alice_frame(config.params.modulation_variance,
                                       config.frame_size, rng);
    frame.alice_x = std::move(x);
    frame.alice_p = std::move(p);

    frame.basis.assign(static_cast<std::size_t>(config.frame_size),
                       Quadrature::p);
    for (int i = 0; i < config.x_count; ++i) frame.basis[i] = Quadrature::x;
    rng.shuffle(frame.basis);

    frame.bob_sample.resize(config.frame_size);
    for (int i = 0; i < config.frame_size; ++i) {
      frame.bob_sample[i] =
          measure_pulse(frame.alice_x[i], frame.alice_p[i], frame.basis[i],
                        frame.phase, config.params, noise, rng);
    }
    session.frames.push_back(std::move(frame));
  }
  return session;
}

void write_session_csv(const SessionData& session, std::ostream& out) {
  out << "frame_index,pulse_index,X_A,P_A,basis,y_B\n";
  for (const auto& frame : session.frames) {
    for (Eigen::Index i = 0; i < frame.alice_x.size(); ++i) {
      out << frame.frame_index << ',' << i << ',' << format_g9(frame.alice_x[i])
          << ',' << format_g9(frame.alice_p[i]) << ','
          << (frame.basis[static_cast<std::size_t>(i)] == Quadrature::x ? 'X'
                                                                        : 'P')
          << ',' << format_g9(frame.bob_sample[i]) << '\n';
    }
  }
}

void write_session_truth(const SessionData& session, std::ostream& out) {
  const auto& truth = session.truth;
  const auto& config = session.config;
  out << "V_A=" << format_g9(config.params.modulation_variance) << '\n'
      << "G=" << format_g9(config.params.channel_transmittance) << '\n'
      << "eta=" << format_g9(config.params.bob_efficiency) << '\n'
      << "eta_G=" << format_g9(truth.eta_g) << '\n'
      << "beta=" << format_g9(config.params.reconciliation_efficiency) << '\n'
      << "delta=" << format_g9(config.delta) << '\n'
      << "chi=" << format_g9(truth.budget.chi) << '\n'
      << "chi_vac=" << format_g9(truth.budget.chi_vac) << '\n'
      << "epsilon=" << format_g9(truth.budget.epsilon) << '\n'
      << "epsilon_A=" << format_g9(truth.budget.epsilon_a) << '\n'
      << "N_Bob=" << format_g9(truth.budget.n_bob) << '\n'
      << "N_el=" << format_g9(truth.budget.n_el) << '\n'
      << "N_leak=" << format_g9(truth.budget.n_leak) << '\n'
      << "pulse_noise_variance=" << format_g9(truth.pulse_noise_variance)
      << '\n'
      << "dc_x=" << format_g9(truth.dc_x) << '\n'
      << "dc_p=" << format_g9(truth.dc_p) << '\n'
      << "initial_phase=" << format_g9(config.initial_phase) << '\n'
      << "phase_drift_rate=" << format_g9(config.phase_drift_rate) << '\n'
      << "frame_duration=" << format_g9(config.frame_duration) << '\n'
      << "n_frames=" << config.n_frames << '\n'
      << "frame_size=" << config.frame_size << '\n'
      << "rng_seed=" << config.rng_seed << '\n';
}

}  // namespace gmcs::simulator
