#pragma once

#include <Eigen/Dense>

#include "mfgp/dataset.hpp"
#include "mfgp/gp.hpp"
#include "mfgp/kernel.hpp"
#include "mfgp/training.hpp"

namespace mfgp {

/// Linear autoregressive two-fidelity model f = alpha f_1 + h with
/// independent GPs f_1 ~ GP(0, low) and h ~ GP(0, residual).
struct AR1Params {
  double alpha = 1.0;
  BaseKernel low;
  BaseKernel residual;
  double low_noise_variance = 1e-2;
  double high_noise_variance = 1e-2;
};

/// Noise-free joint covariance of the stacked vector [f(X_high); f_1(X_low)]:
///   [[alpha^2 K + K_h, alpha K_cross], [alpha K_cross^T, K_low]].
Eigen::MatrixXd ar1_joint_gram(const AR1Params& params, const Eigen::MatrixXd& high_inputs,
                               const Eigen::MatrixXd& low_inputs);

struct AR1Fit {
  AR1Params params;
  double lml = 0.0;
};

/// Maximizes the stacked-observation LML over alpha (started at 1), both
/// kernels and both noise variances. An empty low level reduces to a
/// vanilla GP on the high level (alpha = 0).
AR1Fit ar1_train(const FidelityDataset& data, const TrainConfig& config = {});
Prediction ar1_predict(const AR1Fit& fit, const FidelityDataset& data,
                       const Eigen::MatrixXd& query);
Prediction ar1_train_predict(const FidelityDataset& data, const Eigen::MatrixXd& query,
                             const TrainConfig& config = {});

/// SE-kernel GP on the high-fidelity level alone.
struct VanillaFit {
  BaseKernel kernel;
  double noise_variance = 0.0;
  double lml = 0.0;
};

VanillaFit vanilla_train(const FidelityLevel& high, const TrainConfig& config = {});
Prediction vanilla_predict(const VanillaFit& fit, const FidelityLevel& high,
                           const Eigen::MatrixXd& query);
Prediction vanilla_gp(const FidelityLevel& high, const Eigen::MatrixXd& query,
                      const TrainConfig& config = {});

}  // namespace mfgp
