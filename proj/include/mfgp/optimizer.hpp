#pragma once

#include <functional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "mfgp/gp.hpp"

namespace mfgp {

enum class OptimizerKind { gradient_descent, quasi_newton };

std::string_view to_string(OptimizerKind kind) noexcept;
OptimizerKind parse_optimizer(std::string_view text);

/// Box constraints on the (log-space) parameter vector.
struct Bounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Eigen::VectorXd clamp(const Eigen::VectorXd& x) const;
};

struct OptimizerOptions {
  OptimizerKind kind = OptimizerKind::quasi_newton;
  int max_iters = 200;
  /// Stop once the projected gradient has infinity norm below this.
  double tolerance = 1e-5;
  /// Step size of plain gradient ascent.
  double learning_rate = 0.01;
};

/// Objective value and gradient; may throw NumericalError, which line
/// searches treat as an infinitely bad point.
using Objective = std::function<LmlWithGradient(const Eigen::VectorXd&)>;

struct OptimizationResult {
  Eigen::VectorXd x;
  double value = 0.0;
  Eigen::VectorXd gradient;
  /// Objective after every accepted iterate, starting with the initial point.
  std::vector<double> trace;
  int iterations = 0;
  bool converged = false;
};

/// Gradient with components that push against an active bound removed.
Eigen::VectorXd projected_gradient(const Eigen::VectorXd& x, const Eigen::VectorXd& gradient,
                                   const Bounds& bounds);

/// Maximizes the objective on the box. Quasi-Newton uses projected BFGS with
/// an Armijo backtracking line search; gradient descent takes steps of
/// `learning_rate` along the gradient, halving until the value does not
/// decrease. Accepted values are therefore non-decreasing.
OptimizationResult maximize(const Objective& objective, const Eigen::VectorXd& start,
                            const Bounds& bounds, const OptimizerOptions& options);

}  // namespace mfgp
