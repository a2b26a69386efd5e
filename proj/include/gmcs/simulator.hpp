#ifndef GMCS_SIMULATOR_HPP
#define GMCS_SIMULATOR_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <ostream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "gmcs/keyrate.hpp"

namespace gmcs::simulator {

enum class Quadrature : std::uint8_t { x, p };

/// Seeded random stream with a pinned Gaussian sampler. The engine is the
/// standard-specified mt19937_64; normals come from a fixed Box-Muller
/// transform because std::normal_distribution is implementation-defined and
/// would break the reproducibility contract across toolchains.
class Prng {
 public:
  explicit Prng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal draw; consumes exactly two engine outputs.
  double normal();

  /// Uniform integer in [0, bound), rejection-sampled from the engine.
  std::uint64_t below(std::uint64_t bound);

  /// In-place Fisher-Yates shuffle with a pinned draw order.
  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

/// Injected local-oscillator leakage: a constant per-frame DC offset of
/// amplitude sqrt(photons_eff) at mean_phase, plus Gaussian fluctuation
/// noise of variance gamma * photons_eff folded into the pulse noise.
struct LeakageSpec {
  double photons_eff = 6.0;  // mean effective leakage photons per pulse
  double mean_phase = 0.0;   // phi_le_0, radians
  double gamma = 0.0033;     // output noise per effective leakage photon
};

struct ScenarioConfig {
  keyrate::SystemParameters params{};
  double delta = 0.0033;             // epsilon_a = V_A * delta
  double electrical_noise = 0.045;   // n_el, shot-noise units
  LeakageSpec leakage{};
  int frame_size = 4000;
  int x_count = 1980;
  int p_count = 2020;
  double frame_duration = 0.040;     // seconds
  double phase_drift_rate = 0.016;   // rad/s
  double initial_phase = 0.0;        // radians
  std::uint64_t rng_seed = 1;
  int n_frames = 10;
  double disclosed_fraction = 0.10;  // share of each frame Bob announces

  double epsilon_a() const { return params.modulation_variance * delta; }
  double n_leak() const { return leakage.gamma * leakage.photons_eff; }
  double n_bob() const { return electrical_noise + n_leak(); }
  double dc_offset_x() const;
  double dc_offset_p() const;
  keyrate::NoiseBudget budget() const;

  std::vector<std::string> validation_errors() const;
  void validate() const;  // throws std::invalid_argument listing all violations
};

struct FrameData {
  int frame_index = 0;
  Eigen::ArrayXd alice_x;
  Eigen::ArrayXd alice_p;
  std::vector<Quadrature> basis;
  Eigen::ArrayXd bob_sample;
  double phase = 0.0;  // phi_0 applied to every pulse of this frame
  double dc_x = 0.0;   // injected X-quadrature DC offset
  double dc_p = 0.0;
};

/// Injected quantities an estimator should recover, recorded for round-trip
/// validation.
struct GroundTruth {
  double eta_g = 0.0;
  keyrate::NoiseBudget budget{};
  double pulse_noise_variance = 0.0;  // 1 + eta*G*epsilon_a + n_bob
  double dc_x = 0.0;
  double dc_p = 0.0;
};

struct SessionData {
  ScenarioConfig config{};
  GroundTruth truth{};
  std::vector<FrameData> frames;

  long pulse_count() const {
    long n = 0;
    for (const auto& f : frames) n += f.alice_x.size();
    return n;
  }
};

/// I.i.d. zero-mean Gaussian quadrature pairs of variance v_a.
std::pair<Eigen::ArrayXd, Eigen::ArrayXd> generate_alice_frame(double v_a,
                                                               int count,
                                                               Prng& rng);

/// Wraps an angle to (-pi, pi].
double wrap_angle(double phi);

/// Interferometer phase at time t: initial_phase + drift_rate * t, wrapped.
double phase_at(double t, const ScenarioConfig& config);

/// Excess-noise contribution of an uncompensated intra-frame phase change:
/// v_a * delta_phi^2 (input-referred, small-angle).
double phase_drift_excess_noise(double v_a, double delta_phi);

/// Per-pulse noise terms for measure_pulse, all output-referred.
struct NoiseSpec {
  double epsilon_a = 0.0;
  double n_el = 0.0;
  double n_leak = 0.0;
  double dc_x = 0.0;
  double dc_p = 0.0;
};

/// One homodyne sample:
///   y = sqrt(eta*G) * (rotated Alice quadrature) + DC + n,
/// where the rotation by phi_0 selects the quadrature Bob measures and n is
/// zero-mean Gaussian with variance 1 + eta*G*epsilon_a + n_el + n_leak.
double measure_pulse(double alice_x, double alice_p, Quadrature basis,
                     double phi_0, const keyrate::SystemParameters& params,
                     const NoiseSpec& noise, Prng& rng);

/// Runs the full Monte Carlo session. Bit-exact reproducible for a given
/// (config, rng_seed).
SessionData run_session(const ScenarioConfig& config);

/// One row per pulse: frame_index,pulse_index,X_A,P_A,basis,y_B.
void write_session_csv(const SessionData& session, std::ostream& out);

/// Ground-truth sidecar, flat key=value.
void write_session_truth(const SessionData& session, std::ostream& out);

}  // namespace gmcs::simulator

#endif  // GMCS_SIMULATOR_HPP
