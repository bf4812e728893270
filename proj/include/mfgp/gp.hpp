#pragma once

#include <cstdint>
#include <limits>
#include <span>

#include <Eigen/Dense>

#include "mfgp/kernel.hpp"
#include "mfgp/linalg.hpp"

namespace mfgp {

/// Posterior mean vector and full covariance of a GP at a set of inputs.
/// Immutable once built; consumed by the effective kernels.
struct ConditionalMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;

  Eigen::Index size() const { return mean.size(); }
};

/// Posterior summary at query inputs.
struct Prediction {
  Eigen::VectorXd mean;
  /// Latent (noise-free) variance, clamped at zero.
  Eigen::VectorXd variance;
  /// Full latent covariance; empty unless requested.
  Eigen::MatrixXd covariance;
  /// Observation noise variance of the predicted level.
  double noise_variance = 0.0;
  double lml = std::numeric_limits<double>::quiet_NaN();
};

/// log N(y | 0, K + noise I) via Cholesky.
double log_marginal_likelihood(const Eigen::MatrixXd& gram, const Eigen::VectorXd& y,
                               double noise_variance, JitterPolicy policy = {});

struct LmlWithGradient {
  double value = 0.0;
  Eigen::VectorXd gradient;
};

/// LML of y under the noisy covariance `covariance` and its gradient given
/// the covariance derivatives dK/dtheta_p:
///   dL/dtheta_p = 0.5 tr((alpha alpha^T - K^{-1}) dK/dtheta_p).
LmlWithGradient lml_with_gradient(const Eigen::MatrixXd& covariance, const Eigen::VectorXd& y,
                                  std::span<const Eigen::MatrixXd> derivatives,
                                  JitterPolicy policy = {});

/// Conditional Gaussian from Gram blocks: training Gram (N x N, noise-free),
/// query/train cross Gram (Q x N) and query Gram (Q x Q).
ConditionalMoments condition_on_gram(const Eigen::MatrixXd& train_gram,
                                     const Eigen::MatrixXd& cross_gram,
                                     const Eigen::MatrixXd& query_gram, const Eigen::VectorXd& y,
                                     double noise_variance, JitterPolicy policy = {});

/// Mean and clamped variance of a set of moments, packaged as a Prediction.
Prediction to_prediction(const ConditionalMoments& moments, bool keep_covariance = false);

struct PosteriorResult {
  Prediction prediction;
  ConditionalMoments moments;
};

/// Exact zero-mean GP posterior of a base kernel at `query`.
PosteriorResult posterior_predict(const BaseKernel& kernel, const Eigen::MatrixXd& train_inputs,
                                  const Eigen::VectorXd& train_outputs, double noise_variance,
                                  const Eigen::MatrixXd& query);

/// `count` draws from N(0, K); row s is sample s. Same seed, same draws.
Eigen::MatrixXd sample_prior(const Eigen::MatrixXd& gram, int count, std::uint64_t seed,
                             JitterPolicy policy = {});

}  // namespace mfgp
