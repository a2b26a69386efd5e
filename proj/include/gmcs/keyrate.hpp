#ifndef GMCS_KEYRATE_HPP
#define GMCS_KEYRATE_HPP

#include <string>
#include <vector>

namespace gmcs::keyrate {

/// Eavesdropper assumption used when bounding Eve's information.
/// Under the realistic model the noise added inside Bob's receiver is
/// treated as trusted (outside Eve's control).
enum class EveModel { general, realistic };

std::string to_string(EveModel model);

/// Physical and protocol parameters of one GMCS link.
/// All quadrature variances are in shot-noise units (vacuum variance = 1).
struct SystemParameters {
  double modulation_variance = 16.9;       // V_A
  double channel_transmittance = 0.758;    // G, in (0,1]
  double bob_efficiency = 0.44;            // eta, in (0,1]
  double reconciliation_efficiency = 0.898;  // beta, in (0,1]
  double fiber_loss_db_per_km = 0.21;

  // V = V_A + 1, the quadrature variance of Alice's coherent states.
  double coherent_state_variance() const { return modulation_variance + 1.0; }
  double total_transmittance() const {
    return bob_efficiency * channel_transmittance;
  }

  std::vector<std::string> validation_errors() const;
  void validate() const;  // throws std::invalid_argument listing all violations
};

/// Decomposition of the equivalent input noise:
///   chi = chi_vac + epsilon,  epsilon = epsilon_a + n_bob/(eta*G),
///   n_bob = n_el + n_leak.
/// chi_vac, epsilon_a and epsilon are input-referred; the n_* terms are
/// output-referred (measured at Bob's detector).
struct NoiseBudget {
  double chi_vac = 0.0;
  double epsilon_a = 0.0;
  double n_bob = 0.0;
  double n_el = 0.0;
  double n_leak = 0.0;
  double epsilon = 0.0;
  double chi = 0.0;
};

struct KeyRateResult {
  double mutual_info_ab = 0.0;       // I_AB, bits/pulse
  double mutual_info_be = 0.0;       // I_BE, bits/pulse (may be negative)
  double delta_i_raw = 0.0;          // beta*I_AB - I_BE, unclamped
  double delta_i = 0.0;              // max(0, delta_i_raw)
  double bob_variance = 0.0;         // V_B = eta*G*(V + chi)
  double conditional_variance = 0.0; // V_{B|E}
  EveModel model = EveModel::general;
};

/// 10^(-length*loss/10). Zero length gives 1.
double fiber_transmittance(double length_km, double loss_db_per_km);

/// chi_vac = (1 - eta*G)/(eta*G).
double vacuum_noise(double eta, double transmittance);

/// epsilon = epsilon_a + n_bob/(eta*G).
double total_excess_noise(double epsilon_a, double n_bob, double eta,
                          double transmittance);

/// chi = chi_vac + epsilon_a + n_bob/(eta*G).
double equivalent_input_noise(double eta, double transmittance,
                              double epsilon_a, double n_bob);

/// Assembles the full decomposition from its independent inputs.
NoiseBudget make_noise_budget(double eta, double transmittance,
                              double epsilon_a, double n_el, double n_leak);

/// I_AB = (1/2) log2[(V + chi)/(1 + chi)], V = V_A + 1.
double mutual_info_ab(double modulation_variance, double chi);

/// I_BE = (1/2) log2[(eta*G)^2 (V + chi)(1/V + chi)].
/// Returned as-is; the value is negative when the argument of the log
/// falls below 1.
double mutual_info_be_general(double modulation_variance, double eta,
                              double transmittance, double chi);

/// V_{B|E} = eta/(1 - G + G*(epsilon_a + 1/V)) + (1 - eta) + n_bob.
double conditional_variance_realistic(double modulation_variance, double eta,
                                      double transmittance, double epsilon_a,
                                      double n_bob);

/// I_BE = (1/2) log2(V_B / V_{B|E}) with V_B = eta*G*V_A + 1 + eta*G*epsilon.
/// epsilon must be consistent with (epsilon_a, n_bob) to within 1e-9; the
/// consistent recomputed value is the one actually used.
double mutual_info_be_realistic(double modulation_variance, double eta,
                                double transmittance, double epsilon,
                                double epsilon_a, double n_bob);

/// Composite rate: delta_i_raw = beta*I_AB - I_BE, clamped at zero.
KeyRateResult secure_key_rate(const SystemParameters& params,
                              const NoiseBudget& budget, EveModel model);

}  // namespace gmcs::keyrate

#endif  // GMCS_KEYRATE_HPP
