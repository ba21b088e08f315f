#include "grnn/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace grnn {

namespace {

constexpr double kAlphaMax = 1e10;

bool armijo(double phi, double phi0, double dphi0, double alpha, double c1) {
  return phi <= phi0 + c1 * alpha * dphi0;
}

bool strong_curvature(double dphi, double dphi0, double c2) {
  return std::abs(dphi) <= -c2 * dphi0;
}

// Minimizer of the cubic Hermite interpolant through (a, fa, da) and
// (b, fb, db). NaN when the data admits none.
double cubic_minimizer(double a, double fa, double da, double b, double fb, double db) {
  const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
  const double radicand = d1 * d1 - da * db;
  if (radicand < 0.0) return std::numeric_limits<double>::quiet_NaN();
  const double d2 = (b >= a ? 1.0 : -1.0) * std::sqrt(radicand);
  return b - (b - a) * (db + d2 - d1) / (db - da + 2.0 * d2);
}

struct RayPoint {
  double alpha;
  double value;
  double deriv;
};

}  // namespace

std::string to_string(TerminationReason reason) {
  switch (reason) {
    case TerminationReason::MaxIterations: return "max_iterations";
    case TerminationReason::FunctionTolerance: return "function_tolerance";
    case TerminationReason::GradientTolerance: return "gradient_tolerance";
    case TerminationReason::LineSearchFailure: return "line_search_failure";
  }
  return "unknown";
}

double initial_step(std::optional<double> prev_first_order_decrease,
                    double current_directional_derivative) {
  if (!(current_directional_derivative < 0.0)) {
    throw std::invalid_argument("initial_step: direction is not a descent direction");
  }
  if (!prev_first_order_decrease) return 1.0;
  return std::clamp(*prev_first_order_decrease / current_directional_derivative, 1e-10, 1e10);
}

LineSearchResult line_search(const RayObjective& ray, double phi0, double dphi0,
                             double alpha_init, const OptimizerConfig& cfg) {
  if (!(dphi0 < 0.0)) {
    throw std::invalid_argument("line_search: directional derivative at 0 must be negative");
  }
  const double c1 = cfg.wolfe_c1;
  const double c2 = cfg.wolfe_c2;

  int evals = 0;
  RayPoint best{0.0, phi0, dphi0};

  auto evaluate = [&](double alpha) {
    double deriv = std::numeric_limits<double>::quiet_NaN();
    double value = ray(alpha, deriv);
    ++evals;
    if (!std::isfinite(value)) value = std::numeric_limits<double>::infinity();
    if (std::isfinite(value) && value < best.value) best = {alpha, value, deriv};
    return RayPoint{alpha, value, deriv};
  };

  auto finish = [&](const RayPoint& p, bool ok) {
    return LineSearchResult{p.alpha, p.value, p.deriv, evals, ok};
  };

  // Zoom phase: lo always satisfies Armijo and has the lower value; the
  // minimizer is bracketed between lo and hi.
  auto zoom = [&](RayPoint lo, RayPoint hi) {
    while (evals < cfg.max_line_search_evals) {
      const double width = hi.alpha - lo.alpha;
      double alpha = std::numeric_limits<double>::quiet_NaN();
      if (std::isfinite(lo.value) && std::isfinite(hi.value) && std::isfinite(lo.deriv) &&
          std::isfinite(hi.deriv)) {
        alpha = cubic_minimizer(lo.alpha, lo.value, lo.deriv, hi.alpha, hi.value, hi.deriv);
      }
      const double guard_lo = std::min(lo.alpha, hi.alpha) + 0.1 * std::abs(width);
      const double guard_hi = std::max(lo.alpha, hi.alpha) - 0.1 * std::abs(width);
      if (!std::isfinite(alpha) || alpha < guard_lo || alpha > guard_hi) {
        alpha = lo.alpha + 0.5 * width;  // bisection fallback
      }
      const RayPoint trial = evaluate(alpha);
      if (!std::isfinite(trial.value) || !armijo(trial.value, phi0, dphi0, alpha, c1) ||
          trial.value >= lo.value) {
        hi = trial;
      } else {
        if (strong_curvature(trial.deriv, dphi0, c2)) return finish(trial, true);
        if (trial.deriv * width >= 0.0) hi = lo;
        lo = trial;
      }
      if (std::abs(hi.alpha - lo.alpha) < 1e-16 * std::max(1.0, std::abs(lo.alpha))) break;
    }
    return finish(best, false);
  };

  RayPoint prev{0.0, phi0, dphi0};
  double alpha = std::min(alpha_init, kAlphaMax);
  bool first = true;
  while (evals < cfg.max_line_search_evals) {
    const RayPoint trial = evaluate(alpha);
    if (!std::isfinite(trial.value) || !armijo(trial.value, phi0, dphi0, alpha, c1) ||
        (!first && trial.value >= prev.value)) {
      return zoom(prev, trial);
    }
    if (strong_curvature(trial.deriv, dphi0, c2)) return finish(trial, true);
    if (trial.deriv >= 0.0) return zoom(trial, prev);
    if (alpha >= kAlphaMax) break;
    prev = trial;
    alpha = std::min(2.0 * alpha, kAlphaMax);
    first = false;
  }
  return finish(best, false);
}

MinimizeResult minimize(const Objective& objective, Eigen::VectorXd x0,
                        const OptimizerConfig& cfg) {
  const int n = static_cast<int>(x0.size());
  if (n < 1) throw std::invalid_argument("minimize: empty parameter vector");

  const bool limited_memory = n > cfg.lbfgs_threshold;

  MinimizeResult result;
  result.x = std::move(x0);
  result.gradient.resize(n);
  result.value = objective(result.x, result.gradient);
  if (!std::isfinite(result.value) || !result.gradient.allFinite()) {
    throw std::runtime_error("minimize: objective is non-finite at the starting point");
  }

  Eigen::MatrixXd H;
  if (!limited_memory) H = Eigen::MatrixXd::Identity(n, n);
  struct Correction {
    Eigen::VectorXd s, y;
    double rho;
  };
  std::deque<Correction> memory;
  double lbfgs_gamma = 1.0;

  std::optional<double> prev_decrease;
  bool first_accepted_step = true;
  result.reason = TerminationReason::MaxIterations;

  for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
    if (result.gradient.lpNorm<Eigen::Infinity>() < cfg.g_tol) {
      result.reason = TerminationReason::GradientTolerance;
      break;
    }

    Eigen::VectorXd p;
    if (!limited_memory) {
      p = -(H * result.gradient);
    } else {
      // Two-loop recursion with gamma-scaled identity seed.
      p = -result.gradient;
      std::vector<double> a(memory.size());
      for (int i = static_cast<int>(memory.size()) - 1; i >= 0; --i) {
        a[i] = memory[i].rho * memory[i].s.dot(p);
        p -= a[i] * memory[i].y;
      }
      p *= lbfgs_gamma;
      for (std::size_t i = 0; i < memory.size(); ++i) {
        const double beta = memory[i].rho * memory[i].y.dot(p);
        p += (a[i] - beta) * memory[i].s;
      }
    }

    double dphi0 = result.gradient.dot(p);
    if (!(dphi0 < 0.0)) {
      // Numerical loss of descent; restart from steepest descent.
      if (!limited_memory) H = Eigen::MatrixXd::Identity(n, n);
      memory.clear();
      lbfgs_gamma = 1.0;
      first_accepted_step = true;
      p = -result.gradient;
      dphi0 = result.gradient.dot(p);
    }

    // Ray evaluation caches the gradient of the most recent trial so the
    // accepted point's gradient is reused instead of recomputed.
    Eigen::VectorXd trial_x(n), trial_grad(n);
    double cached_alpha = std::numeric_limits<double>::quiet_NaN();
    double cached_value = 0.0;
    auto ray = [&](double alpha, double& deriv) {
      trial_x = result.x + alpha * p;
      const double value = objective(trial_x, trial_grad);
      deriv = trial_grad.dot(p);
      cached_alpha = alpha;
      cached_value = value;
      return value;
    };

    const double alpha_init = initial_step(prev_decrease, dphi0);
    const LineSearchResult ls = line_search(ray, result.value, dphi0, alpha_init, cfg);

    if (!ls.ok && (ls.alpha == 0.0 || !(ls.value < result.value))) {
      result.reason = TerminationReason::LineSearchFailure;
      break;
    }
    if (cached_alpha != ls.alpha) {
      double unused;
      ray(ls.alpha, unused);
    }

    const Eigen::VectorXd s = ls.alpha * p;
    const Eigen::VectorXd y = trial_grad - result.gradient;
    const double sy = s.dot(y);
    const bool apply_update = ls.ok && sy > 1e-10 * s.norm() * y.norm();

    if (apply_update) {
      const double yy = y.squaredNorm();
      if (!limited_memory) {
        if (first_accepted_step && yy > 0.0) H = (sy / yy) * Eigen::MatrixXd::Identity(n, n);
        const Eigen::VectorXd Hy = H * y;
        const double yHy = y.dot(Hy);
        const Eigen::MatrixXd sHyT = s * Hy.transpose();
        H += ((sy + yHy) / (sy * sy)) * (s * s.transpose());
        H -= (sHyT + sHyT.transpose()) / sy;
      } else {
        if (yy > 0.0) lbfgs_gamma = sy / yy;
        memory.push_back({s, y, 1.0 / sy});
        if (static_cast<int>(memory.size()) > cfg.lbfgs_memory) memory.pop_front();
      }
      first_accepted_step = false;
    }

    const double f_prev = result.value;
    result.x = trial_x;
    result.value = cached_value;
    result.gradient = trial_grad;
    prev_decrease = ls.alpha * dphi0;

    result.trace.push_back({iter, result.value, result.gradient.lpNorm<Eigen::Infinity>(),
                            ls.alpha, ls.evals, f_prev, dphi0, ls.value, ls.derivative, sy,
                            !apply_update});

    if (!ls.ok) {
      result.reason = TerminationReason::LineSearchFailure;
      break;
    }
    if (std::abs(result.value - f_prev) < cfg.f_tol) {
      result.reason = TerminationReason::FunctionTolerance;
      break;
    }
  }

  if (!limited_memory) result.inverse_hessian = std::move(H);
  return result;
}

}  // namespace grnn
