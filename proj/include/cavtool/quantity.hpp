#ifndef CAVTOOL_QUANTITY_HPP
#define CAVTOOL_QUANTITY_HPP

#include <functional>
#include <random>
#include <string>
#include <vector>

namespace cavtool {

// Measured value with asymmetric one-sigma interval [value - sigma_minus,
// value + sigma_plus]. The unit is a tag carried through for reporting; the
// arithmetic never interprets it.
struct Quantity {
  double value = 0.0;
  double sigma_plus = 0.0;
  double sigma_minus = 0.0;
  std::string unit;
};

Quantity symmetric(double value, double sigma, std::string unit = "");

// Throws std::invalid_argument for negative sigmas or non-finite values.
void validate(const Quantity& q);

using ScalarFn = std::function<double(const std::vector<double>&)>;

// First-order propagation with sign routing: each input's plus (minus)
// excursion is mapped through the partial derivative and lands on the output
// side the derivative's sign sends it to; sides combine in quadrature. This
// is the linearized version of evaluating f at the interval endpoints, and
// for symmetric inputs it reduces exactly to standard first-order error
// propagation. Derivatives are central differences.
Quantity propagate(const ScalarFn& f, const std::vector<Quantity>& inputs,
                   std::string unit = "");

// Monte Carlo cross-check of the same convention: inputs are drawn from
// split-normal distributions (scale sigma_plus above the value, sigma_minus
// below), and the output interval comes from the 15.87/50/84.13 percentiles
// relative to the median. Deterministic for a fixed engine state.
Quantity propagate_mc(const ScalarFn& f, const std::vector<Quantity>& inputs,
                      std::mt19937_64& engine, int samples = 10000,
                      std::string unit = "");

}  // namespace cavtool

#endif  // CAVTOOL_QUANTITY_HPP
