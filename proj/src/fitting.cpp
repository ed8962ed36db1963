#include "cavtool/fitting.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cavtool {

namespace {

double lower_of(const FitProblem& problem, std::size_t j) {
  return problem.lower_bounds.empty()
             ? -std::numeric_limits<double>::infinity()
             : problem.lower_bounds[j];
}

double upper_of(const FitProblem& problem, std::size_t j) {
  return problem.upper_bounds.empty()
             ? std::numeric_limits<double>::infinity()
             : problem.upper_bounds[j];
}

void validate_problem(const FitProblem& problem) {
  if (!problem.model) {
    throw std::invalid_argument("fit model is empty");
  }
  const std::size_t n = problem.x.size();
  if (n == 0) {
    throw std::invalid_argument("fit data is empty");
  }
  if (problem.y.size() != n) {
    throw std::invalid_argument("fit x and y sizes differ");
  }
  if (!problem.weights.empty() && problem.weights.size() != n) {
    throw std::invalid_argument("fit weights size differs from data");
  }
  for (double w : problem.weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("fit weights must be finite and >= 0");
    }
  }
  const std::size_t p = problem.initial_params.size();
  if (p == 0) {
    throw std::invalid_argument("fit needs at least one parameter");
  }
  if ((!problem.lower_bounds.empty() && problem.lower_bounds.size() != p) ||
      (!problem.upper_bounds.empty() && problem.upper_bounds.size() != p)) {
    throw std::invalid_argument("fit bounds size differs from parameters");
  }
  for (std::size_t j = 0; j < p; ++j) {
    const double lo = lower_of(problem, j);
    const double hi = upper_of(problem, j);
    if (!(lo <= hi)) {
      throw std::invalid_argument("fit bounds inverted for parameter " +
                                  std::to_string(j));
    }
    const double v = problem.initial_params[j];
    if (v < lo || v > hi) {
      throw std::invalid_argument("initial parameter " + std::to_string(j) +
                                  " outside bounds");
    }
  }
  if (problem.max_iterations < 0) {
    throw std::invalid_argument("max_iterations must be >= 0");
  }
}

// Residuals r_i = y_i - f(p, x_i); returns the weighted cost, or +inf when
// the model produced a non-finite value.
double residuals(const FitProblem& problem, const std::vector<double>& params,
                 Eigen::VectorXd* r) {
  const std::size_t n = problem.x.size();
  r->resize(static_cast<Eigen::Index>(n));
  double cost = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = problem.model(params, problem.x[i]);
    if (!std::isfinite(f)) {
      return std::numeric_limits<double>::infinity();
    }
    const double ri = problem.y[i] - f;
    (*r)(static_cast<Eigen::Index>(i)) = ri;
    const double w = problem.weights.empty() ? 1.0 : problem.weights[i];
    cost += w * ri * ri;
  }
  return cost;
}

// Jacobian restricted to the free (lo < hi) parameter columns.
Eigen::MatrixXd free_jacobian(const FitProblem& problem,
                              const std::vector<double>& params,
                              const std::vector<std::size_t>& free_idx) {
  const auto rows = model_jacobian(problem.model, params, problem.x);
  const std::size_t n = problem.x.size();
  Eigen::MatrixXd j(static_cast<Eigen::Index>(n),
                    static_cast<Eigen::Index>(free_idx.size()));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < free_idx.size(); ++k) {
      j(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          rows[i][free_idx[k]];
    }
  }
  return j;
}

// Gradient components that would push a parameter out of an active bound are
// zeroed; a solution resting on the boundary then still registers as
// converged.
Eigen::VectorXd projected_gradient(const FitProblem& problem,
                                   const std::vector<double>& params,
                                   const std::vector<std::size_t>& free_idx,
                                   const Eigen::VectorXd& gradient) {
  Eigen::VectorXd projected = gradient;
  for (std::size_t k = 0; k < free_idx.size(); ++k) {
    const std::size_t j = free_idx[k];
    const double v = params[j];
    const auto idx = static_cast<Eigen::Index>(k);
    if (v <= lower_of(problem, j) && projected(idx) < 0.0) {
      projected(idx) = 0.0;
    }
    if (v >= upper_of(problem, j) && projected(idx) > 0.0) {
      projected(idx) = 0.0;
    }
  }
  return projected;
}

void add_warning(FitResult* result, const std::string& text) {
  for (const auto& existing : result->warnings) {
    if (existing == text) {
      return;
    }
  }
  result->warnings.push_back(text);
}

// Covariance s^2 (J^T W J)^+ over the free parameters, with
// s^2 = chi^2 / (n - p_free). Near-null eigenvalues are dropped rather than
// inverted so a rank-deficient solution still yields a positive-semidefinite
// matrix. Pinned parameters keep zero rows and columns.
void fill_covariance(const FitProblem& problem, const Eigen::MatrixXd& jtwj,
                     const std::vector<std::size_t>& free_idx,
                     FitResult* result) {
  const std::size_t n = problem.x.size();
  const std::size_t p = result->params.size();
  const std::size_t p_free = free_idx.size();
  result->covariance.assign(p, std::vector<double>(p, 0.0));
  result->sigma.assign(p, 0.0);

  double scale = 1.0;
  if (n > p_free) {
    scale = result->chi_squared / static_cast<double>(n - p_free);
    result->reduced_chi_squared = scale;
  } else {
    result->reduced_chi_squared = 0.0;
    add_warning(result,
                "no degrees of freedom: parameter uncertainties unscaled");
  }
  if (p_free == 0) {
    return;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen(jtwj);
  if (eigen.info() != Eigen::Success) {
    add_warning(result, "covariance estimation failed");
    result->rank_deficient = true;
    return;
  }
  const Eigen::VectorXd values = eigen.eigenvalues();
  const double threshold =
      values.cwiseAbs().maxCoeff() * static_cast<double>(p_free) * 1e-12;
  Eigen::VectorXd inverted = Eigen::VectorXd::Zero(values.size());
  int rank = 0;
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    if (threshold > 0.0 && values(k) > threshold) {
      inverted(k) = 1.0 / values(k);
      ++rank;
    }
  }
  if (rank < static_cast<int>(p_free)) {
    result->rank_deficient = true;
    add_warning(result, "jacobian rank " + std::to_string(rank) + " of " +
                            std::to_string(p_free) +
                            ": some parameters are unconstrained by the data");
  }
  const Eigen::MatrixXd cov = eigen.eigenvectors() * inverted.asDiagonal() *
                              eigen.eigenvectors().transpose() * scale;
  for (std::size_t a = 0; a < p_free; ++a) {
    for (std::size_t b = 0; b < p_free; ++b) {
      result->covariance[free_idx[a]][free_idx[b]] =
          cov(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    }
    result->sigma[free_idx[a]] = std::sqrt(std::max(
        0.0, cov(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a))));
  }
}

}  // namespace

std::vector<std::vector<double>> model_jacobian(
    const ModelFn& model, const std::vector<double>& params,
    const std::vector<double>& x) {
  const std::size_t n = x.size();
  const std::size_t p = params.size();
  std::vector<std::vector<double>> j(n, std::vector<double>(p, 0.0));
  std::vector<double> probe = params;
  std::vector<double> up(n);
  for (std::size_t k = 0; k < p; ++k) {
    const double step = std::max(1e-8, 1e-6 * std::abs(params[k]));
    probe[k] = params[k] + step;
    for (std::size_t i = 0; i < n; ++i) {
      up[i] = model(probe, x[i]);
    }
    probe[k] = params[k] - step;
    for (std::size_t i = 0; i < n; ++i) {
      const double down = model(probe, x[i]);
      j[i][k] = (up[i] - down) / (2.0 * step);
    }
    probe[k] = params[k];
  }
  return j;
}

std::vector<double> poisson_weights(const std::vector<double>& counts) {
  std::vector<double> w(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    w[i] = 1.0 / std::max(counts[i], 1.0);
  }
  return w;
}

FitResult fit(const FitProblem& problem) {
  validate_problem(problem);

  const std::size_t n = problem.x.size();
  std::vector<std::size_t> free_idx;
  for (std::size_t j = 0; j < problem.initial_params.size(); ++j) {
    if (lower_of(problem, j) < upper_of(problem, j)) {
      free_idx.push_back(j);
    }
  }

  const Eigen::VectorXd w = [&] {
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      v(static_cast<Eigen::Index>(i)) =
          problem.weights.empty() ? 1.0 : problem.weights[i];
    }
    return v;
  }();

  FitResult result;
  result.params = problem.initial_params;

  Eigen::VectorXd r;
  double cost = residuals(problem, result.params, &r);
  if (!std::isfinite(cost)) {
    throw std::invalid_argument("model not finite at initial parameters");
  }

  double damping = problem.initial_damping;
  Eigen::MatrixXd j = free_jacobian(problem, result.params, free_idx);
  Eigen::MatrixXd jtwj = j.transpose() * w.asDiagonal() * j;
  Eigen::VectorXd gradient = j.transpose() * w.cwiseProduct(r);

  int accepted = 0;
  bool converged = false;
  while (true) {
    const Eigen::VectorXd active =
        projected_gradient(problem, result.params, free_idx, gradient);
    if (active.norm() < problem.gradient_tolerance * (1.0 + cost)) {
      converged = true;
      break;
    }
    if (accepted >= problem.max_iterations) {
      break;
    }

    // Inner damping loop: retry the same linearization with stronger damping
    // until a step stops increasing the cost.
    bool stepped = false;
    while (damping < 1e14) {
      Eigen::MatrixXd damped = jtwj;
      for (Eigen::Index k = 0; k < damped.rows(); ++k) {
        damped(k, k) += damping * std::max(jtwj(k, k), 1e-12);
      }
      const Eigen::VectorXd delta = damped.ldlt().solve(gradient);
      if (!delta.allFinite()) {
        damping *= 10.0;
        continue;
      }
      std::vector<double> candidate = result.params;
      for (std::size_t k = 0; k < free_idx.size(); ++k) {
        const std::size_t pj = free_idx[k];
        candidate[pj] += delta(static_cast<Eigen::Index>(k));
        candidate[pj] = std::clamp(candidate[pj], lower_of(problem, pj),
                                   upper_of(problem, pj));
      }

      Eigen::VectorXd r_candidate;
      const double candidate_cost =
          residuals(problem, candidate, &r_candidate);
      if (candidate_cost <= cost) {
        result.params = candidate;
        r.swap(r_candidate);
        cost = candidate_cost;
        damping = std::max(damping / 10.0, 1e-14);
        stepped = true;
        break;
      }
      damping *= 10.0;
    }
    if (!stepped) {
      add_warning(&result, "damping saturated before convergence");
      break;
    }
    ++accepted;

    j = free_jacobian(problem, result.params, free_idx);
    jtwj = j.transpose() * w.asDiagonal() * j;
    gradient = j.transpose() * w.cwiseProduct(r);
  }

  result.iterations = accepted;
  result.converged = converged;
  if (!converged) {
    add_warning(&result, "did not converge in " +
                             std::to_string(problem.max_iterations) +
                             " iterations");
  }
  result.chi_squared = cost;
  fill_covariance(problem, jtwj, free_idx, &result);
  return result;
}

}  // namespace cavtool
