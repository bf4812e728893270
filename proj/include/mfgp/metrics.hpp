#pragma once

#include <Eigen/Dense>

#include "mfgp/gp.hpp"

namespace mfgp {

/// Two-sided 95% standard-normal quantile.
inline constexpr double kZ95 = 1.959963984540054;

/// Predictive variance of an observation: latent variance plus noise.
Eigen::VectorXd predictive_variance(const Prediction& prediction);

/// Mean negative log predictive density of `truth` under independent
/// Gaussians N(mean, latent variance + noise variance).
double mnll(const Prediction& prediction, const Eigen::VectorXd& truth);
double rmse(const Prediction& prediction, const Eigen::VectorXd& truth);
/// Fraction of truth values inside mean +- z * predictive std.
double coverage(const Prediction& prediction, const Eigen::VectorXd& truth, double z = kZ95);
double mean_variance(const Prediction& prediction);

}  // namespace mfgp
