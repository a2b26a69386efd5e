#include "gmcs/keyrate.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gmcs::keyrate {

namespace {

constexpr double kBudgetConsistencyTol = 1e-9;

void require_finite_nonneg(double value, const char* name) {
  if (!std::isfinite(value) || value < 0.0) {
    throw std::domain_error(std::string(name) + " must be finite and >= 0");
  }
}

void require_unit_interval(double value, const char* name) {
  if (!std::isfinite(value) || value <= 0.0 || value > 1.0) {
    throw std::domain_error(std::string(name) + " must lie in (0,1]");
  }
}

}  // namespace

std::string to_string(EveModel model) {
  return model == EveModel::general ? "general" : "realistic";
}

std::vector<std::string> SystemParameters::validation_errors() const {
  std::vector<std::string> errors;
  auto in_unit = [](double v) { return std::isfinite(v) && v > 0.0 && v <= 1.0; };
  if (!std::isfinite(modulation_variance) || modulation_variance < 0.0)
    errors.push_back("V_A must be finite and >= 0");
  if (!in_unit(channel_transmittance)) errors.push_back("G must lie in (0,1]");
  if (!in_unit(bob_efficiency)) errors.push_back("eta must lie in (0,1]");
  if (!in_unit(reconciliation_efficiency)) errors.push_back("beta must lie in (0,1]");
  if (!std::isfinite(fiber_loss_db_per_km) || fiber_loss_db_per_km < 0.0)
    errors.push_back("fiber_loss must be finite and >= 0");
  return errors;
}

void SystemParameters::validate() const {
  const auto errors = validation_errors();
  if (errors.empty()) return;
  std::ostringstream msg;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (i > 0) msg << "; ";
    msg << errors[i];
  }
  throw std::invalid_argument(msg.str());
}

double fiber_transmittance(double length_km, double loss_db_per_km) {
  require_finite_nonneg(length_km, "fiber length");
  require_finite_nonneg(loss_db_per_km, "fiber loss");
  return std::pow(10.0, -length_km * loss_db_per_km / 10.0);
}

double vacuum_noise(double eta, double transmittance) {
  require_unit_interval(eta, "eta");
  require_unit_interval(transmittance, "G");
  const double eta_g = eta * transmittance;
  return (1.0 - eta_g) / eta_g;
}

double total_excess_noise(double epsilon_a, double n_bob, double eta,
                          double transmittance) {
  require_finite_nonneg(epsilon_a, "epsilon_a");
  require_finite_nonneg(n_bob, "n_bob");
  require_unit_interval(eta, "eta");
  require_unit_interval(transmittance, "G");
  return epsilon_a + n_bob / (eta * transmittance);
}

double equivalent_input_noise(double eta, double transmittance,
                              double epsilon_a, double n_bob) {
  return vacuum_noise(eta, transmittance) +
         total_excess_noise(epsilon_a, n_bob, eta, transmittance);
}

NoiseBudget make_noise_budget(double eta, double transmittance,
                              double epsilon_a, double n_el, double n_leak) {
  require_finite_nonneg(n_el, "n_el");
  require_finite_nonneg(n_leak, "n_leak");
  NoiseBudget budget;
  budget.n_el = n_el;
  budget.n_leak = n_leak;
  budget.n_bob = n_el + n_leak;
  budget.epsilon_a = epsilon_a;
  budget.chi_vac = vacuum_noise(eta, transmittance);
  budget.epsilon = total_excess_noise(epsilon_a, budget.n_bob, eta, transmittance);
  budget.chi = budget.chi_vac + budget.epsilon;
  return budget;
}

double mutual_info_ab(double modulation_variance, double chi) {
  require_finite_nonneg(modulation_variance, "V_A");
  require_finite_nonneg(chi, "chi");
  const double v = modulation_variance + 1.0;
  return 0.5 * std::log2((v + chi) / (1.0 + chi));
}

double mutual_info_be_general(double modulation_variance, double eta,
                              double transmittance, double chi) {
  require_finite_nonneg(modulation_variance, "V_A");
  require_finite_nonneg(chi, "chi");
  require_unit_interval(eta, "eta");
  require_unit_interval(transmittance, "G");
  const double eta_g = eta * transmittance;
  const double v = modulation_variance + 1.0;
  const double arg = eta_g * eta_g * (v + chi) * (1.0 / v + chi);
  if (arg <= 0.0) {
    throw std::domain_error("nonpositive argument in Eve information bound");
  }
  return 0.5 * std::log2(arg);
}

double conditional_variance_realistic(double modulation_variance, double eta,
                                      double transmittance, double epsilon_a,
                                      double n_bob) {
  require_finite_nonneg(modulation_variance, "V_A");
  require_finite_nonneg(epsilon_a, "epsilon_a");
  require_finite_nonneg(n_bob, "n_bob");
  require_unit_interval(eta, "eta");
  require_unit_interval(transmittance, "G");
  const double v = modulation_variance + 1.0;
  const double denom =
      1.0 - transmittance + transmittance * (epsilon_a + 1.0 / v);
  if (denom <= 0.0) {
    throw std::domain_error("nonpositive conditional-variance denominator");
  }
  return eta / denom + (1.0 - eta) + n_bob;
}

double mutual_info_be_realistic(double modulation_variance, double eta,
                                double transmittance, double epsilon,
                                double epsilon_a, double n_bob) {
  const double recomputed =
      total_excess_noise(epsilon_a, n_bob, eta, transmittance);
  if (!std::isfinite(epsilon) ||
      std::abs(epsilon - recomputed) > kBudgetConsistencyTol) {
    throw std::invalid_argument(
        "epsilon inconsistent with epsilon_a + n_bob/(eta*G)");
  }
  const double eta_g = eta * transmittance;
  const double v_b = eta_g * modulation_variance + 1.0 + eta_g * recomputed;
  const double v_b_given_e = conditional_variance_realistic(
      modulation_variance, eta, transmittance, epsilon_a, n_bob);
  if (v_b <= 0.0 || v_b_given_e <= 0.0) {
    throw std::domain_error("nonpositive argument in Eve information bound");
  }
  return 0.5 * std::log2(v_b / v_b_given_e);
}

KeyRateResult secure_key_rate(const SystemParameters& params,
                              const NoiseBudget& budget, EveModel model) {
  params.validate();
  require_finite_nonneg(budget.chi, "chi");
  require_finite_nonneg(budget.epsilon, "epsilon");
  if (std::abs(budget.chi - (budget.chi_vac + budget.epsilon)) >
      kBudgetConsistencyTol) {
    throw std::invalid_argument("chi inconsistent with chi_vac + epsilon");
  }
  if (std::abs(budget.n_bob - (budget.n_el + budget.n_leak)) >
      kBudgetConsistencyTol) {
    throw std::invalid_argument("n_bob inconsistent with n_el + n_leak");
  }

  const double v_a = params.modulation_variance;
  const double eta = params.bob_efficiency;
  const double g = params.channel_transmittance;
  const double eta_g = params.total_transmittance();

  KeyRateResult result;
  result.model = model;
  result.mutual_info_ab = mutual_info_ab(v_a, budget.chi);
  result.bob_variance =
      eta_g * (params.coherent_state_variance() + budget.chi);
  if (model == EveModel::general) {
    result.mutual_info_be = mutual_info_be_general(v_a, eta, g, budget.chi);
    // Implied conditional variance so both models expose the same shape.
    result.conditional_variance =
        result.bob_variance / std::exp2(2.0 * result.mutual_info_be);
  } else {
    result.mutual_info_be = mutual_info_be_realistic(
        v_a, eta, g, budget.epsilon, budget.epsilon_a, budget.n_bob);
    result.conditional_variance =
        conditional_variance_realistic(v_a, eta, g, budget.epsilon_a, budget.n_bob);
  }
  result.delta_i_raw = params.reconciliation_efficiency * result.mutual_info_ab -
                       result.mutual_info_be;
  result.delta_i = std::max(0.0, result.delta_i_raw);
  return result;
}

}  // namespace gmcs::keyrate
