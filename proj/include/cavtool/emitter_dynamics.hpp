#ifndef CAVTOOL_EMITTER_DYNAMICS_HPP
#define CAVTOOL_EMITTER_DYNAMICS_HPP

namespace cavtool {

// Three-level rate model: ground (1), excited (2), shelving/dark (3).
// Populations evolve under
//   dp1/dt = -k12 p1 + k21 p2 + k31 p3
//   dp2/dt =  k12 p1 - (k21 + k23) p2
//   dp3/dt =  k23 p2 - k31 p3
// All rates in 1/ns; rates must be >= 0.
struct ThreeLevelRates {
  double k12 = 0.0;  // pump
  double k21 = 0.0;  // radiative decay
  double k23 = 0.0;  // shelving
  double k31 = 0.0;  // deshelving
};

struct PopulationState {
  double ground = 1.0;
  double excited = 0.0;
  double dark = 0.0;
};

// Two-exponential form of the intensity autocorrelation,
//   g2(tau) = 1 - (1 + a) e^{-|tau|/tau1} + a e^{-|tau|/tau2},
// with tau1 the fast (antibunching) and tau2 the slow (bunching) timescale.
struct G2Params {
  double bunching_a = 0.0;
  double tau1_ns = 0.0;
  double tau2_ns = 0.0;
};

// Exact mapping from rates to the correlation parameters via the nonzero
// eigenvalues of the rate matrix. Requires k12 > 0 (the correlation is
// conditioned on a detection, which needs re-excitation). Throws
// DegenerateRatesError when the eigenvalues coincide within 1e-9 relative
// or form a complex pair.
G2Params rates_to_g2_params(const ThreeLevelRates& rates);

// Stationary populations (null vector of the rate matrix, normalized).
// k12 = 0 returns the ground state exactly. k31 = 0 with k12, k23 > 0 traps
// everything in the dark state; if additionally k23 = 0 the dark state is
// unreachable and p_dark = 0.
PopulationState steady_state(const ThreeLevelRates& rates);

// p_dark in the k12 -> infinity limit at fixed k23, k31: k23/(k23 + k31).
double dark_population_limit(const ThreeLevelRates& rates);

double g2_intrinsic(const G2Params& params, double tau_ns);

// Background-corrected correlation for signal fraction sigma = S/(S+B):
//   g2_m(tau) = g2(tau) sigma^2 + 1 - sigma^2.
double g2_measured(const G2Params& params, double sigma, double tau_ns);

// Detected photon flux in 1/s for a steady state, k21 in 1/ns.
double emission_rate_per_s(const PopulationState& state, double k21_per_ns,
                           double quantum_efficiency);

// Saturation curve I(P) = I_inf P / (P + P_sat) + c_bg P.
struct SaturationParams {
  double i_inf_per_s = 0.0;
  double p_sat_mw = 0.0;
  double c_bg_per_s_mw = 0.0;  // linear background slope
};

double saturation_rate_per_s(const SaturationParams& params, double power_mw);

// Pump and shelving scale with excitation power; decay and deshelving do
// not: k12 = alpha P, k23 = beta0 + beta1 P.
struct PowerLaws {
  double alpha = 0.0;   // 1/(ns mW)
  double beta0 = 0.0;   // 1/ns
  double beta1 = 0.0;   // 1/(ns mW)
  double k21 = 0.0;     // 1/ns
  double k31 = 0.0;     // 1/ns
};

ThreeLevelRates rates_at_power(const PowerLaws& laws, double power_mw);

}  // namespace cavtool

#endif  // CAVTOOL_EMITTER_DYNAMICS_HPP
