#ifndef CAVTOOL_FITTING_HPP
#define CAVTOOL_FITTING_HPP

#include <functional>
#include <string>
#include <vector>

namespace cavtool {

// Scalar model y = f(params, x). Models must be evaluable in a small
// neighborhood of the bounds: numerical derivatives step slightly past them.
using ModelFn =
    std::function<double(const std::vector<double>& params, double x)>;

struct FitProblem {
  ModelFn model;
  std::vector<double> x;
  std::vector<double> y;
  // Optional weights, one per point; empty means uniform 1. Weighted cost is
  // sum_i w_i (y_i - f_i)^2.
  std::vector<double> weights;
  std::vector<double> initial_params;
  // Optional per-parameter bounds; empty vectors mean unbounded. Candidate
  // steps are clamped to the box.
  std::vector<double> lower_bounds;
  std::vector<double> upper_bounds;
  int max_iterations = 200;
  double initial_damping = 1e-3;
  double gradient_tolerance = 1e-8;
};

struct FitResult {
  std::vector<double> params;
  // sqrt of the covariance diagonal; zero where the covariance collapsed.
  std::vector<double> sigma;
  std::vector<std::vector<double>> covariance;
  double chi_squared = 0.0;
  double reduced_chi_squared = 0.0;
  int iterations = 0;       // accepted parameter updates
  bool converged = false;   // gradient criterion met within max_iterations
  bool rank_deficient = false;
  std::vector<std::string> warnings;
};

// Damped least squares. Damping factor starts at initial_damping, grows x10
// on a rejected step and shrinks /10 on an accepted one; steps never increase
// the weighted cost. Convergence is declared when |grad| < tol * (1 + cost),
// checked before stepping, so data generated exactly from the model leaves
// the initial parameters untouched. Running out of iterations flags
// converged = false; it does not throw.
FitResult fit(const FitProblem& problem);

// Central-difference Jacobian d f(x_i) / d p_j with step
// max(1e-8, 1e-6 |p_j|). Row per data point, column per parameter.
std::vector<std::vector<double>> model_jacobian(
    const ModelFn& model, const std::vector<double>& params,
    const std::vector<double>& x);

// 1 / max(y, 1) per point, the usual variance weighting for count data.
std::vector<double> poisson_weights(const std::vector<double>& counts);

}  // namespace cavtool

#endif  // CAVTOOL_FITTING_HPP
