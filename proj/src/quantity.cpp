#include "cavtool/quantity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cavtool {

Quantity symmetric(double value, double sigma, std::string unit) {
  Quantity q{value, sigma, sigma, std::move(unit)};
  validate(q);
  return q;
}

void validate(const Quantity& q) {
  if (!std::isfinite(q.value)) {
    throw std::invalid_argument("quantity value must be finite");
  }
  if (q.sigma_plus < 0.0 || q.sigma_minus < 0.0 ||
      !std::isfinite(q.sigma_plus) || !std::isfinite(q.sigma_minus)) {
    throw std::invalid_argument("quantity sigmas must be finite and >= 0");
  }
}

Quantity propagate(const ScalarFn& f, const std::vector<Quantity>& inputs,
                   std::string unit) {
  std::vector<double> x(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    validate(inputs[i]);
    x[i] = inputs[i].value;
  }
  Quantity out;
  out.unit = std::move(unit);
  out.value = f(x);
  if (!std::isfinite(out.value)) {
    throw std::invalid_argument("function not finite at the central values");
  }
  double up_sq = 0.0, down_sq = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].sigma_plus == 0.0 && inputs[i].sigma_minus == 0.0) continue;
    const double scale = std::max({std::abs(x[i]), inputs[i].sigma_plus,
                                   inputs[i].sigma_minus});
    const double h = 1e-6 * scale;
    std::vector<double> hi = x, lo = x;
    hi[i] += h;
    lo[i] -= h;
    const double d = (f(hi) - f(lo)) / (2.0 * h);
    const double up = d >= 0.0 ? d * inputs[i].sigma_plus
                               : -d * inputs[i].sigma_minus;
    const double down = d >= 0.0 ? d * inputs[i].sigma_minus
                                 : -d * inputs[i].sigma_plus;
    up_sq += up * up;
    down_sq += down * down;
  }
  out.sigma_plus = std::sqrt(up_sq);
  out.sigma_minus = std::sqrt(down_sq);
  return out;
}

namespace {

double percentile(std::vector<double>& sorted, double p) {
  const double idx = p * (sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(idx);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = idx - lo;
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

Quantity propagate_mc(const ScalarFn& f, const std::vector<Quantity>& inputs,
                      std::mt19937_64& engine, int samples, std::string unit) {
  if (samples < 100) {
    throw std::invalid_argument("Monte Carlo needs at least 100 samples");
  }
  std::vector<double> x(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    validate(inputs[i]);
    x[i] = inputs[i].value;
  }
  std::normal_distribution<double> unit_normal(0.0, 1.0);
  std::vector<double> draws;
  draws.reserve(samples);
  std::vector<double> sample = x;
  for (int s = 0; s < samples; ++s) {
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      const double u = unit_normal(engine);
      sample[i] = x[i] + (u >= 0.0 ? u * inputs[i].sigma_plus
                                   : u * inputs[i].sigma_minus);
    }
    const double v = f(sample);
    if (std::isfinite(v)) draws.push_back(v);
  }
  if (draws.size() < 100) {
    throw std::invalid_argument("function not finite over the sampled inputs");
  }
  std::sort(draws.begin(), draws.end());
  Quantity out;
  out.unit = std::move(unit);
  const double median = percentile(draws, 0.5);
  out.value = median;
  out.sigma_plus = percentile(draws, 0.8413) - median;
  out.sigma_minus = median - percentile(draws, 0.1587);
  return out;
}

}  // namespace cavtool
