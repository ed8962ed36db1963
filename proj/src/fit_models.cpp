#include "cavtool/fit_models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace cavtool {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double measured_g2_model(const std::vector<double>& p, double tau) {
  const double sigma = p[0];
  const double a = p[1];
  const double t = std::abs(tau);
  const double g2 =
      1.0 - (1.0 + a) * std::exp(-t / p[2]) + a * std::exp(-t / p[3]);
  return sigma * sigma * g2 + 1.0 - sigma * sigma;
}

double saturation_model(const std::vector<double>& p, double power) {
  return p[0] * power / (power + p[1]) + p[2] * power;
}

// params: [baseline, A1, c1, w1, ...]
double peaks_model(const std::vector<double>& p, double x) {
  double y = p[0];
  for (std::size_t k = 1; k + 2 < p.size(); k += 3) {
    const double a = p[k];
    const double c = p[k + 1];
    const double w = p[k + 2];
    const double u = (x - c) / w;
    y += a * std::exp(-0.5 * u * u);
  }
  return y;
}

std::vector<double> median_smooth5(const std::vector<double>& y) {
  const std::size_t n = y.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= 2 ? i - 2 : 0;
    const std::size_t hi = std::min(i + 2, n - 1);
    std::vector<double> window(y.begin() + static_cast<std::ptrdiff_t>(lo),
                               y.begin() + static_cast<std::ptrdiff_t>(hi) +
                                   1);
    std::sort(window.begin(), window.end());
    out[i] = window[window.size() / 2];
  }
  return out;
}

}  // namespace

G2Fit fit_g2(const std::vector<double>& tau_ns,
             const std::vector<double>& g2_values, const std::string& label,
             const std::vector<double>& initial) {
  if (tau_ns.size() != g2_values.size()) {
    throw std::invalid_argument("g2 fit: tau and value sizes differ");
  }
  if (tau_ns.size() < 5) {
    throw std::invalid_argument("g2 fit needs at least 5 points");
  }

  FitProblem problem;
  problem.model = measured_g2_model;
  problem.x = tau_ns;
  problem.y = g2_values;
  problem.lower_bounds = {1e-6, 0.0, 1e-6, 1e-6};
  problem.upper_bounds = {1.0, kInf, kInf, kInf};

  double tau_abs_max = 0.0;
  for (double t : tau_ns) {
    tau_abs_max = std::max(tau_abs_max, std::abs(t));
  }

  if (!initial.empty()) {
    if (initial.size() != 4) {
      throw std::invalid_argument("g2 fit seed needs 4 values");
    }
    problem.initial_params = initial;
  } else {
    const double y_min = *std::min_element(g2_values.begin(), g2_values.end());
    const double y_max = *std::max_element(g2_values.begin(), g2_values.end());
    // Depth of the antibunching dip sets sigma; tail excess above 1 sets a.
    const double sigma0 =
        std::sqrt(std::clamp(1.0 - y_min, 1e-4, 1.0));
    const double a0 = std::max(0.01, (y_max - 1.0) / (sigma0 * sigma0));
    // Recovery point of the dip to half depth estimates the fast timescale.
    double tau1_0 = std::max(tau_abs_max / 50.0, 1e-3);
    const double half_level = 1.0 - 0.5 * sigma0 * sigma0;
    double best = kInf;
    for (std::size_t i = 0; i < tau_ns.size(); ++i) {
      const double t = std::abs(tau_ns[i]);
      if (g2_values[i] >= half_level && t > 0.0 && t < best) {
        best = t;
      }
    }
    if (std::isfinite(best)) {
      tau1_0 = std::max(best / std::log(2.0), 1e-3);
    }
    const double tau2_0 = std::max(tau_abs_max / 3.0, 10.0 * tau1_0);
    problem.initial_params = {sigma0, a0, tau1_0, tau2_0};
  }

  G2Fit out;
  out.label = label;
  out.engine = fit(problem);
  out.sigma = out.engine.params[0];
  out.params.bunching_a = out.engine.params[1];
  out.params.tau1_ns = out.engine.params[2];
  out.params.tau2_ns = out.engine.params[3];

  // Grid-span diagnostics: both timescales need support in the data.
  if (out.params.tau2_ns > tau_abs_max) {
    out.engine.warnings.push_back(
        "slow timescale exceeds the scan range; tau2 poorly constrained");
  }
  double min_spacing = kInf;
  std::vector<double> sorted_tau = tau_ns;
  std::sort(sorted_tau.begin(), sorted_tau.end());
  for (std::size_t i = 1; i < sorted_tau.size(); ++i) {
    const double d = sorted_tau[i] - sorted_tau[i - 1];
    if (d > 0.0) {
      min_spacing = std::min(min_spacing, d);
    }
  }
  if (std::isfinite(min_spacing) && out.params.tau1_ns < 2.0 * min_spacing) {
    out.engine.warnings.push_back(
        "fast timescale under-resolved by the tau grid");
  }
  return out;
}

SaturationFit fit_saturation(const std::vector<double>& power_mw,
                             const std::vector<double>& counts_per_s,
                             bool fix_background, bool poisson) {
  if (power_mw.size() != counts_per_s.size()) {
    throw std::invalid_argument("saturation fit: size mismatch");
  }
  std::set<double> distinct(power_mw.begin(), power_mw.end());
  if (distinct.size() < 4) {
    throw std::invalid_argument(
        "saturation fit needs at least 4 distinct powers");
  }
  for (double p : power_mw) {
    if (p < 0.0) {
      throw std::invalid_argument("powers must be non-negative");
    }
  }

  FitProblem problem;
  problem.model = saturation_model;
  problem.x = power_mw;
  problem.y = counts_per_s;
  if (poisson) {
    problem.weights = poisson_weights(counts_per_s);
  }

  const double y_max =
      *std::max_element(counts_per_s.begin(), counts_per_s.end());
  const double p_max = *std::max_element(power_mw.begin(), power_mw.end());
  problem.initial_params = {std::max(y_max, 1.0), std::max(p_max / 4.0, 1e-3),
                            0.0};
  problem.lower_bounds = {0.0, 1e-6, 0.0};
  problem.upper_bounds = {kInf, kInf, fix_background ? 0.0 : kInf};
  if (fix_background) {
    problem.lower_bounds[2] = 0.0;
  }

  SaturationFit out;
  out.engine = fit(problem);
  out.params.i_inf_per_s = out.engine.params[0];
  out.params.p_sat_mw = out.engine.params[1];
  out.params.c_bg_per_s_mw = out.engine.params[2];
  return out;
}

PeaksFit fit_gaussian_peaks(const std::vector<double>& position,
                            const std::vector<double>& counts, int n_peaks) {
  if (position.size() != counts.size()) {
    throw std::invalid_argument("peak fit: size mismatch");
  }
  if (position.empty()) {
    throw std::invalid_argument("peak fit: empty scan");
  }
  if (n_peaks < 1) {
    throw std::invalid_argument("peak fit needs n_peaks >= 1");
  }

  // Work on an index ordering sorted by position; callers may hand the scan
  // in either direction.
  std::vector<std::size_t> order(position.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    order[i] = i;
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return position[a] < position[b];
  });
  std::vector<double> x(order.size()), y(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    x[i] = position[order[i]];
    y[i] = counts[order[i]];
  }

  const double y_min = *std::min_element(y.begin(), y.end());
  const double y_max = *std::max_element(y.begin(), y.end());
  const double span = x.back() - x.front();
  const double default_width =
      span > 0.0 ? span / (8.0 * n_peaks) : 1.0;

  PeaksFit out;
  if (!(y_max - y_min > 1e-12 * std::max(std::abs(y_max), 1.0))) {
    // Flat scan: no structure to seed from. Report the degenerate result
    // instead of running the engine against pure noise floor.
    out.baseline = y_min;
    for (int k = 0; k < n_peaks; ++k) {
      GaussianPeak peak;
      peak.center =
          x.front() + span * (k + 1.0) / (n_peaks + 1.0);
      peak.width = default_width;
      out.peaks.push_back(peak);
    }
    out.engine.converged = false;
    out.engine.params.push_back(out.baseline);
    for (const auto& peak : out.peaks) {
      out.engine.params.insert(out.engine.params.end(),
                               {peak.amplitude, peak.center, peak.width});
    }
    out.engine.sigma.assign(out.engine.params.size(), 0.0);
    out.engine.warnings.push_back("scan is flat; nothing to fit");
    return out;
  }

  const std::vector<double> smooth = median_smooth5(y);
  struct Candidate {
    double height;
    std::size_t index;
  };
  std::vector<Candidate> maxima;
  for (std::size_t i = 1; i + 1 < smooth.size(); ++i) {
    if (smooth[i] >= smooth[i - 1] && smooth[i] > smooth[i + 1]) {
      maxima.push_back({smooth[i], i});
    }
  }
  std::sort(maxima.begin(), maxima.end(),
            [](const Candidate& a, const Candidate& b) {
              if (a.height != b.height) {
                return a.height > b.height;
              }
              return a.index < b.index;
            });

  const double baseline0 = *std::min_element(smooth.begin(), smooth.end());
  std::vector<double> params = {baseline0};
  std::vector<double> lower = {-kInf};
  std::vector<double> upper = {kInf};
  for (int k = 0; k < n_peaks; ++k) {
    double center, amplitude, width = default_width;
    if (static_cast<std::size_t>(k) < maxima.size()) {
      const std::size_t i = maxima[static_cast<std::size_t>(k)].index;
      center = x[i];
      amplitude = std::max(smooth[i] - baseline0, 1e-6 * (y_max - y_min));
      // Half-height crossings of the smoothed scan give a width estimate.
      const double half = baseline0 + 0.5 * (smooth[i] - baseline0);
      std::size_t left = i, right = i;
      while (left > 0 && smooth[left] > half) {
        --left;
      }
      while (right + 1 < smooth.size() && smooth[right] > half) {
        ++right;
      }
      const double fwhm = x[right] - x[left];
      if (fwhm > 0.0) {
        width = std::max(fwhm / 2.355, 1e-6 * std::max(span, 1.0));
      }
    } else {
      // More peaks requested than maxima found; spread the extras evenly.
      center = x.front() + span * (k + 1.0) / (n_peaks + 1.0);
      amplitude = 0.5 * (y_max - baseline0);
    }
    params.insert(params.end(), {amplitude, center, width});
    lower.insert(lower.end(),
                 {0.0, x.front() - span, 1e-9 * std::max(span, 1.0)});
    upper.insert(upper.end(), {kInf, x.back() + span, kInf});
  }

  FitProblem problem;
  problem.model = peaks_model;
  problem.x = x;
  problem.y = y;
  problem.initial_params = params;
  problem.lower_bounds = lower;
  problem.upper_bounds = upper;

  out.engine = fit(problem);
  out.baseline = out.engine.params[0];
  for (int k = 0; k < n_peaks; ++k) {
    const std::size_t base = 1 + 3 * static_cast<std::size_t>(k);
    GaussianPeak peak;
    peak.amplitude = out.engine.params[base];
    peak.center = out.engine.params[base + 1];
    peak.width = std::abs(out.engine.params[base + 2]);
    peak.sigma_amplitude = out.engine.sigma[base];
    peak.sigma_center = out.engine.sigma[base + 1];
    peak.sigma_width = out.engine.sigma[base + 2];
    out.peaks.push_back(peak);
  }
  std::sort(out.peaks.begin(), out.peaks.end(),
            [](const GaussianPeak& a, const GaussianPeak& b) {
              return a.center < b.center;
            });
  return out;
}

}  // namespace cavtool
