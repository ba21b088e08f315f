#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace grnn {

struct OptimizerConfig {
  int max_iterations = 1000;
  double f_tol = 1e-6;  // stop when |f_k - f_{k-1}| falls below this
  double g_tol = 1e-6;  // stop when the max-norm of the gradient falls below this
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;
  int max_line_search_evals = 50;
  /// Above this parameter count the dense inverse-Hessian is replaced by the
  /// two-loop limited-memory recursion (same line search and stops).
  int lbfgs_threshold = 5000;
  int lbfgs_memory = 20;
};

enum class TerminationReason {
  MaxIterations,
  FunctionTolerance,
  GradientTolerance,
  LineSearchFailure,
};

std::string to_string(TerminationReason reason);

struct IterationRecord {
  int iteration;
  double f;           // objective after the step
  double grad_norm;   // max-norm after the step
  double alpha;       // accepted step size
  int ls_evals;       // objective evaluations spent in the line search
  double phi0;        // ray value at alpha = 0
  double dphi0;       // ray slope at alpha = 0
  double f_alpha;     // ray value at the accepted alpha
  double dphi_alpha;  // ray slope at the accepted alpha
  double s_dot_y;     // curvature of the accepted step
  bool update_skipped;  // curvature guard rejected the quasi-Newton update
};

struct MinimizeResult {
  Eigen::VectorXd x;
  double value = 0.0;
  Eigen::VectorXd gradient;
  TerminationReason reason = TerminationReason::MaxIterations;
  std::vector<IterationRecord> trace;
  Eigen::MatrixXd inverse_hessian;  // final dense approximation (empty in limited-memory mode)
};

/// point -> (value, gradient into the out-parameter)
using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

/// Quasi-Newton minimization: directions from the BFGS inverse-Hessian
/// approximation (identity start, rescaled after the first accepted step),
/// step sizes from the strong-Wolfe line search, updates skipped when the
/// curvature s.y is not safely positive. Throws if the objective is
/// non-finite at x0.
MinimizeResult minimize(const Objective& objective, Eigen::VectorXd x0,
                        const OptimizerConfig& cfg = {});

/// alpha -> (value, derivative along the ray into the out-parameter)
using RayObjective = std::function<double(double, double&)>;

struct LineSearchResult {
  double alpha = 0.0;
  double value = 0.0;
  double derivative = 0.0;
  int evals = 0;
  bool ok = false;  // both strong Wolfe conditions hold at alpha
};

/// Bracketing plus zoom with cubic Hermite interpolation (bisection
/// fallback). Requires a descent direction (slope at 0 negative); returns
/// the best point found with ok=false when the evaluation budget runs out.
/// Non-finite trial values are treated as overshoots and shrink the bracket.
LineSearchResult line_search(const RayObjective& ray, double phi0, double dphi0,
                             double alpha_init, const OptimizerConfig& cfg = {});

/// First iteration (no previous decrease) gives 1; afterwards the previous
/// first-order decrease alpha_{k-1} * slope_{k-1} divided by the current
/// slope, clamped to [1e-10, 1e10].
double initial_step(std::optional<double> prev_first_order_decrease,
                    double current_directional_derivative);

}  // namespace grnn
