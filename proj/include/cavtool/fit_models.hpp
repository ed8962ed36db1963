#ifndef CAVTOOL_FIT_MODELS_HPP
#define CAVTOOL_FIT_MODELS_HPP

#include <string>
#include <vector>

#include "cavtool/emitter_dynamics.hpp"
#include "cavtool/fitting.hpp"

namespace cavtool {

// Ready-made objectives for the three measurement types the toolkit handles:
// autocorrelation histograms, saturation curves, and cavity-length scans.
// Each wrapper seeds the engine from the data, applies physical bounds, and
// repackages the raw parameter vector.

struct G2Fit {
  std::string label;       // dataset tag, e.g. the pump power
  double sigma = 1.0;      // signal fraction S/(S+B)
  G2Params params;         // bunching amplitude and both timescales
  FitResult engine;
};

// Measured autocorrelation model
//   g_m(tau) = sigma^2 g2(tau) + 1 - sigma^2,
//   g2(tau)  = 1 - (1+a) exp(-|tau|/tau1) + a exp(-|tau|/tau2).
// Parameter order [sigma, a, tau1, tau2]; sigma bounded to (0, 1], the rest
// nonnegative. Initial values are derived from the dip depth and tail level
// unless an explicit seed is given.
G2Fit fit_g2(const std::vector<double>& tau_ns,
             const std::vector<double>& g2_values,
             const std::string& label = "",
             const std::vector<double>& initial = {});

struct SaturationFit {
  SaturationParams params;
  FitResult engine;
};

// I(P) = I_inf P / (P + P_sat) + c_bg P, parameter order
// [i_inf, p_sat, c_bg]. Requires at least 4 distinct powers. fix_background
// pins c_bg to 0, reproducing the two-parameter form. poisson selects
// 1/max(y,1) weights for count data.
SaturationFit fit_saturation(const std::vector<double>& power_mw,
                             const std::vector<double>& counts_per_s,
                             bool fix_background = false,
                             bool poisson = false);

struct GaussianPeak {
  double amplitude = 0.0;  // height above baseline
  double center = 0.0;
  double width = 0.0;      // gaussian sigma, same unit as the scan axis
  double sigma_amplitude = 0.0;
  double sigma_center = 0.0;
  double sigma_width = 0.0;
};

struct PeaksFit {
  double baseline = 0.0;
  std::vector<GaussianPeak> peaks;  // sorted by center
  FitResult engine;
};

// Baseline plus n_peaks gaussians, parameter order
// [baseline, A1, c1, w1, A2, c2, w2, ...]. Seeds sit at the n_peaks largest
// local maxima of the 5-point median-smoothed scan. A flat scan cannot seed
// anything: the result comes back converged = false with a warning instead
// of an exception.
PeaksFit fit_gaussian_peaks(const std::vector<double>& position,
                            const std::vector<double>& counts, int n_peaks);

}  // namespace cavtool

#endif  // CAVTOOL_FIT_MODELS_HPP
