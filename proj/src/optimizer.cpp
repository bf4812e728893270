#include "mfgp/optimizer.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "mfgp/errors.hpp"

namespace mfgp {

namespace {

struct Point {
  Eigen::VectorXd x;
  double value = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd gradient;
};

std::optional<Point> evaluate(const Objective& objective, const Eigen::VectorXd& x) {
  try {
    auto r = objective(x);
    if (!std::isfinite(r.value) || !r.gradient.allFinite()) return std::nullopt;
    return Point{x, r.value, std::move(r.gradient)};
  } catch (const NumericalError&) {
    return std::nullopt;
  }
}

bool at_lower(const Bounds& b, const Eigen::VectorXd& x, Eigen::Index i) {
  return x(i) <= b.lower(i);
}

bool at_upper(const Bounds& b, const Eigen::VectorXd& x, Eigen::Index i) {
  return x(i) >= b.upper(i);
}

// Zero the components of an ascent direction that would leave the box.
Eigen::VectorXd restrict_direction(const Eigen::VectorXd& x, Eigen::VectorXd direction,
                                   const Bounds& b) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if ((at_lower(b, x, i) && direction(i) < 0.0) || (at_upper(b, x, i) && direction(i) > 0.0)) {
      direction(i) = 0.0;
    }
  }
  return direction;
}

OptimizationResult finish(const Point& p, const Bounds& bounds, std::vector<double> trace,
                          int iterations, double tolerance) {
  OptimizationResult r;
  r.x = p.x;
  r.value = p.value;
  r.gradient = p.gradient;
  r.trace = std::move(trace);
  r.iterations = iterations;
  r.converged = projected_gradient(p.x, p.gradient, bounds).lpNorm<Eigen::Infinity>() < tolerance;
  return r;
}

OptimizationResult gradient_ascent(const Objective& objective, Point current, const Bounds& bounds,
                                   const OptimizerOptions& options) {
  std::vector<double> trace{current.value};
  int iter = 0;
  for (; iter < options.max_iters; ++iter) {
    const Eigen::VectorXd pg = projected_gradient(current.x, current.gradient, bounds);
    if (pg.lpNorm<Eigen::Infinity>() < options.tolerance) break;
    double step = options.learning_rate;
    bool accepted = false;
    for (int halving = 0; halving < 40 && step > 0.0; ++halving, step *= 0.5) {
      const Eigen::VectorXd candidate = bounds.clamp(current.x + step * pg);
      if (auto next = evaluate(objective, candidate); next && next->value >= current.value) {
        current = std::move(*next);
        accepted = true;
        break;
      }
    }
    trace.push_back(current.value);
    if (!accepted) break;
  }
  return finish(current, bounds, std::move(trace), iter, options.tolerance);
}

OptimizationResult bfgs(const Objective& objective, Point current, const Bounds& bounds,
                        const OptimizerOptions& options) {
  const Eigen::Index n = current.x.size();
  // Inverse Hessian approximation of the negated objective.
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
  bool fresh = true;
  std::vector<double> trace{current.value};
  int iter = 0;
  int stalls = 0;
  for (; iter < options.max_iters; ++iter) {
    const Eigen::VectorXd pg = projected_gradient(current.x, current.gradient, bounds);
    const double pg_norm = pg.lpNorm<Eigen::Infinity>();
    if (pg_norm < options.tolerance) break;

    Eigen::VectorXd direction = restrict_direction(current.x, h * current.gradient, bounds);
    if (direction.dot(current.gradient) <= 0.0 || !direction.allFinite()) {
      h.setIdentity();
      fresh = true;
      direction = pg;
    }
    double step = 1.0;
    if (fresh) step = std::min(1.0, 1.0 / std::max(pg_norm, 1e-12));

    std::optional<Point> next;
    for (int halving = 0; halving < 50; ++halving, step *= 0.5) {
      const Eigen::VectorXd candidate = bounds.clamp(current.x + step * direction);
      if ((candidate - current.x).lpNorm<Eigen::Infinity>() < 1e-15) break;
      auto trial = evaluate(objective, candidate);
      if (trial &&
          trial->value >= current.value + 1e-4 * current.gradient.dot(candidate - current.x)) {
        next = std::move(trial);
        break;
      }
    }
    if (!next) {
      if (fresh) break;
      h.setIdentity();
      fresh = true;
      continue;
    }

    const Eigen::VectorXd s = next->x - current.x;
    // Gradient of the negated objective changes by -(g_new - g_old).
    const Eigen::VectorXd y = current.gradient - next->gradient;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (fresh) h *= sy / y.squaredNorm();
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);
      h = (identity - rho * s * y.transpose()) * h * (identity - rho * y * s.transpose()) +
          rho * s * s.transpose();
      fresh = false;
    }
    const double improvement = next->value - current.value;
    current = std::move(*next);
    trace.push_back(current.value);
    stalls = improvement <= 1e-13 * (1.0 + std::abs(current.value)) ? stalls + 1 : 0;
    if (stalls >= 5) break;
  }
  return finish(current, bounds, std::move(trace), iter, options.tolerance);
}

}  // namespace

std::string_view to_string(OptimizerKind kind) noexcept {
  return kind == OptimizerKind::quasi_newton ? "quasi-newton" : "gradient-descent";
}

OptimizerKind parse_optimizer(std::string_view text) {
  if (text == "quasi-newton") return OptimizerKind::quasi_newton;
  if (text == "gradient-descent") return OptimizerKind::gradient_descent;
  throw InputError("unknown optimizer '" + std::string(text) + "'");
}

Eigen::VectorXd Bounds::clamp(const Eigen::VectorXd& x) const {
  return x.cwiseMax(lower).cwiseMin(upper);
}

Eigen::VectorXd projected_gradient(const Eigen::VectorXd& x, const Eigen::VectorXd& gradient,
                                   const Bounds& bounds) {
  return restrict_direction(x, gradient, bounds);
}

OptimizationResult maximize(const Objective& objective, const Eigen::VectorXd& start,
                            const Bounds& bounds, const OptimizerOptions& options) {
  if (bounds.lower.size() != start.size() || bounds.upper.size() != start.size()) {
    throw InputError("bounds do not match the parameter count");
  }
  if (options.max_iters < 1) throw InputError("max_iters must be at least 1");
  if (!(options.tolerance > 0.0)) throw InputError("convergence tolerance must be positive");
  if (!(options.learning_rate >= 0.0)) throw InputError("learning rate must be non-negative");
  auto first = evaluate(objective, bounds.clamp(start));
  if (!first) {
    throw NumericalError("objective is not finite at the initial point");
  }
  if (options.kind == OptimizerKind::gradient_descent) {
    return gradient_ascent(objective, std::move(*first), bounds, options);
  }
  return bfgs(objective, std::move(*first), bounds, options);
}

}  // namespace mfgp
