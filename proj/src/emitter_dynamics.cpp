#include "cavtool/emitter_dynamics.hpp"

#include <cmath>
#include <stdexcept>

#include "cavtool/errors.hpp"

namespace cavtool {

namespace {

void validate_rates(const ThreeLevelRates& r) {
  if (r.k12 < 0.0 || r.k21 < 0.0 || r.k23 < 0.0 || r.k31 < 0.0) {
    throw std::invalid_argument("rates must be non-negative");
  }
}

}  // namespace

G2Params rates_to_g2_params(const ThreeLevelRates& rates) {
  validate_rates(rates);
  if (!(rates.k12 > 0.0)) {
    throw std::invalid_argument("correlation requires a nonzero pump rate");
  }
  // Nonzero eigenvalues of the rate matrix solve lambda^2 + s lambda + p = 0.
  const double s = rates.k12 + rates.k21 + rates.k23 + rates.k31;
  const double p = rates.k12 * rates.k23 + rates.k12 * rates.k31 +
                   (rates.k21 + rates.k23) * rates.k31;
  const double disc = s * s - 4.0 * p;
  if (disc < 0.0) {
    throw DegenerateRatesError(
        "relaxation eigenvalues form a complex pair; two-exponential form "
        "does not apply");
  }
  const double root = std::sqrt(disc);
  const double rate_fast = 0.5 * (s + root);  // 1/tau1
  const double rate_slow = 0.5 * (s - root);  // 1/tau2
  if (rate_fast - rate_slow < 1e-9 * rate_fast) {
    throw DegenerateRatesError(
        "relaxation eigenvalues coincide within 1e-9 relative");
  }

  const PopulationState ss = steady_state(rates);
  if (!(ss.excited > 0.0)) {
    throw DegenerateRatesError("steady state carries no excited population");
  }
  // Conditional evolution from the ground state: p2(t) = p2_ss
  // + c_fast e^{-rate_fast t} + c_slow e^{-rate_slow t}, fixed by p2(0) = 0
  // and p2'(0) = k12.
  const double c_fast =
      (rates.k12 - rate_slow * ss.excited) / (rate_slow - rate_fast);
  const double c_slow = -ss.excited - c_fast;

  G2Params params;
  params.tau1_ns = 1.0 / rate_fast;
  if (rate_slow > 0.0) {
    params.tau2_ns = 1.0 / rate_slow;
    params.bunching_a = c_slow / ss.excited;
  } else {
    // Two-level limit: the slow channel is absent.
    params.tau2_ns = 0.0;
    params.bunching_a = 0.0;
  }
  return params;
}

PopulationState steady_state(const ThreeLevelRates& rates) {
  validate_rates(rates);
  PopulationState state;
  if (!(rates.k12 > 0.0)) {
    return state;  // nothing leaves the ground state
  }
  const double out_of_two = rates.k21 + rates.k23;
  if (!(out_of_two > 0.0)) {
    // Pumped with no decay path: population accumulates in the excited
    // state (and the dark state stays empty without shelving).
    return PopulationState{0.0, 1.0, 0.0};
  }
  if (rates.k31 <= 0.0 && rates.k23 > 0.0) {
    return PopulationState{0.0, 0.0, 1.0};  // dark state is absorbing
  }
  // Detailed-balance chain: p2 = p1 k12/(k21+k23), p3 = p2 k23/k31.
  const double p2_over_p1 = rates.k12 / out_of_two;
  const double p3_over_p1 =
      rates.k23 > 0.0 ? p2_over_p1 * rates.k23 / rates.k31 : 0.0;
  const double norm = 1.0 + p2_over_p1 + p3_over_p1;
  state.ground = 1.0 / norm;
  state.excited = p2_over_p1 / norm;
  state.dark = p3_over_p1 / norm;
  return state;
}

double dark_population_limit(const ThreeLevelRates& rates) {
  validate_rates(rates);
  if (!(rates.k23 > 0.0)) return 0.0;
  if (!(rates.k31 > 0.0)) return 1.0;
  return rates.k23 / (rates.k23 + rates.k31);
}

double g2_intrinsic(const G2Params& params, double tau_ns) {
  if (!(params.tau1_ns > 0.0)) {
    throw std::invalid_argument("antibunching timescale must be positive");
  }
  const double t = std::abs(tau_ns);
  double g = 1.0 - (1.0 + params.bunching_a) * std::exp(-t / params.tau1_ns);
  if (params.bunching_a != 0.0) {
    if (!(params.tau2_ns > 0.0)) {
      throw std::invalid_argument("bunching term requires a positive tau2");
    }
    g += params.bunching_a * std::exp(-t / params.tau2_ns);
  }
  return g;
}

double g2_measured(const G2Params& params, double sigma, double tau_ns) {
  if (!(sigma > 0.0) || sigma > 1.0) {
    throw std::invalid_argument("signal fraction must be in (0, 1]");
  }
  return g2_intrinsic(params, tau_ns) * sigma * sigma + 1.0 - sigma * sigma;
}

double emission_rate_per_s(const PopulationState& state, double k21_per_ns,
                           double quantum_efficiency) {
  if (k21_per_ns < 0.0) {
    throw std::invalid_argument("decay rate must be non-negative");
  }
  if (quantum_efficiency < 0.0 || quantum_efficiency > 1.0) {
    throw std::invalid_argument("quantum efficiency must be in [0, 1]");
  }
  return state.excited * k21_per_ns * 1e9 * quantum_efficiency;
}

double saturation_rate_per_s(const SaturationParams& params, double power_mw) {
  if (!(params.p_sat_mw > 0.0)) {
    throw std::invalid_argument("saturation power must be positive");
  }
  if (power_mw < 0.0) {
    throw std::invalid_argument("power must be non-negative");
  }
  return params.i_inf_per_s * power_mw / (power_mw + params.p_sat_mw) +
         params.c_bg_per_s_mw * power_mw;
}

ThreeLevelRates rates_at_power(const PowerLaws& laws, double power_mw) {
  if (power_mw < 0.0) {
    throw std::invalid_argument("power must be non-negative");
  }
  ThreeLevelRates rates;
  rates.k12 = laws.alpha * power_mw;
  rates.k21 = laws.k21;
  rates.k23 = laws.beta0 + laws.beta1 * power_mw;
  rates.k31 = laws.k31;
  validate_rates(rates);
  return rates;
}

}  // namespace cavtool
