#include "mfgp/metrics.hpp"

#include <cmath>
#include <numbers>

#include "mfgp/errors.hpp"

namespace mfgp {

namespace {

void check_sizes(const Prediction& p, const Eigen::VectorXd& truth) {
  if (p.mean.size() != truth.size() || p.variance.size() != truth.size()) {
    throw InputError("prediction and truth sizes differ");
  }
  if (truth.size() == 0) throw InputError("empty test set");
}

}  // namespace

Eigen::VectorXd predictive_variance(const Prediction& prediction) {
  return prediction.variance.array() + prediction.noise_variance;
}

double mnll(const Prediction& prediction, const Eigen::VectorXd& truth) {
  check_sizes(prediction, truth);
  const Eigen::ArrayXd var = predictive_variance(prediction).array();
  const Eigen::ArrayXd r = truth.array() - prediction.mean.array();
  const Eigen::ArrayXd nll =
      0.5 * (2.0 * std::numbers::pi * var).log() + 0.5 * r.square() / var;
  return nll.mean();
}

double rmse(const Prediction& prediction, const Eigen::VectorXd& truth) {
  check_sizes(prediction, truth);
  return std::sqrt((truth - prediction.mean).squaredNorm() / truth.size());
}

double coverage(const Prediction& prediction, const Eigen::VectorXd& truth, double z) {
  check_sizes(prediction, truth);
  const Eigen::ArrayXd sd = predictive_variance(prediction).array().sqrt();
  const Eigen::ArrayXd r = (truth - prediction.mean).array().abs();
  return (r <= z * sd).cast<double>().mean();
}

double mean_variance(const Prediction& prediction) {
  if (prediction.variance.size() == 0) throw InputError("empty prediction");
  return prediction.variance.mean();
}

}  // namespace mfgp
