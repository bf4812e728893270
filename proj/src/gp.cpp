#include "mfgp/gp.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "mfgp/errors.hpp"
#include "mfgp/random.hpp"

namespace mfgp {

namespace {

void check_noise(double noise_variance) {
  if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance)) {
    throw InputError("noise variance must be finite and non-negative");
  }
}

Eigen::MatrixXd add_noise(const Eigen::MatrixXd& gram, double noise_variance) {
  Eigen::MatrixXd k = gram;
  k.diagonal().array() += noise_variance;
  return k;
}

}  // namespace

double log_marginal_likelihood(const Eigen::MatrixXd& gram, const Eigen::VectorXd& y,
                               double noise_variance, JitterPolicy policy) {
  check_noise(noise_variance);
  if (gram.rows() != gram.cols() || gram.rows() != y.size()) {
    throw InputError("Gram matrix is " + std::to_string(gram.rows()) + "x" +
                     std::to_string(gram.cols()) + " but y has " + std::to_string(y.size()) +
                     " entries");
  }
  const JitteredCholesky chol(add_noise(gram, noise_variance), policy);
  const Eigen::VectorXd whitened = chol.solve_lower(y);
  const double n = static_cast<double>(y.size());
  return -0.5 * whitened.squaredNorm() - 0.5 * chol.log_determinant() -
         0.5 * n * std::log(2.0 * std::numbers::pi);
}

LmlWithGradient lml_with_gradient(const Eigen::MatrixXd& covariance, const Eigen::VectorXd& y,
                                  std::span<const Eigen::MatrixXd> derivatives,
                                  JitterPolicy policy) {
  if (covariance.rows() != y.size() || covariance.cols() != y.size()) {
    throw InputError("covariance and y sizes differ");
  }
  const JitteredCholesky chol(covariance, policy);
  const Eigen::VectorXd alpha = chol.solve(y);
  const double n = static_cast<double>(y.size());
  LmlWithGradient out;
  out.value = -0.5 * y.dot(alpha) - 0.5 * chol.log_determinant() -
              0.5 * n * std::log(2.0 * std::numbers::pi);
  const Eigen::MatrixXd inner = alpha * alpha.transpose() - chol.inverse();
  out.gradient.resize(static_cast<Eigen::Index>(derivatives.size()));
  for (std::size_t p = 0; p < derivatives.size(); ++p) {
    const auto& dk = derivatives[p];
    if (dk.rows() != covariance.rows() || dk.cols() != covariance.cols()) {
      throw InputError("covariance derivative has wrong shape");
    }
    out.gradient(static_cast<Eigen::Index>(p)) = 0.5 * inner.cwiseProduct(dk).sum();
  }
  return out;
}

ConditionalMoments condition_on_gram(const Eigen::MatrixXd& train_gram,
                                     const Eigen::MatrixXd& cross_gram,
                                     const Eigen::MatrixXd& query_gram, const Eigen::VectorXd& y,
                                     double noise_variance, JitterPolicy policy) {
  check_noise(noise_variance);
  const Eigen::Index n = train_gram.rows();
  if (train_gram.cols() != n || y.size() != n || cross_gram.cols() != n ||
      query_gram.rows() != cross_gram.rows() || query_gram.cols() != cross_gram.rows()) {
    throw InputError("inconsistent Gram block shapes in conditioning");
  }
  if (n == 0) return {Eigen::VectorXd::Zero(query_gram.rows()), query_gram};

  const JitteredCholesky chol(add_noise(train_gram, noise_variance), policy);
  ConditionalMoments out;
  out.mean = cross_gram * chol.solve(y);
  const Eigen::MatrixXd v = chol.solve_lower(cross_gram.transpose());
  out.covariance = query_gram - v.transpose() * v;
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
  return out;
}

Prediction to_prediction(const ConditionalMoments& moments, bool keep_covariance) {
  Prediction p;
  p.mean = moments.mean;
  p.variance = moments.covariance.diagonal().cwiseMax(0.0);
  if (keep_covariance) p.covariance = moments.covariance;
  return p;
}

PosteriorResult posterior_predict(const BaseKernel& kernel, const Eigen::MatrixXd& train_inputs,
                                  const Eigen::VectorXd& train_outputs, double noise_variance,
                                  const Eigen::MatrixXd& query) {
  if (train_inputs.rows() != train_outputs.size()) {
    throw InputError("training inputs and outputs differ in length");
  }
  if (train_inputs.rows() > 0 && train_inputs.cols() != query.cols()) {
    throw InputError("query dimension " + std::to_string(query.cols()) +
                     " differs from training dimension " + std::to_string(train_inputs.cols()));
  }
  PosteriorResult out;
  if (train_inputs.rows() == 0) {
    out.moments = {Eigen::VectorXd::Zero(query.rows()), gram(kernel, query)};
  } else {
    out.moments = condition_on_gram(gram(kernel, train_inputs), gram(kernel, query, train_inputs),
                                    gram(kernel, query), train_outputs, noise_variance);
    out.prediction.lml = log_marginal_likelihood(gram(kernel, train_inputs), train_outputs,
                                                 noise_variance);
  }
  const double lml = out.prediction.lml;
  out.prediction = to_prediction(out.moments, true);
  out.prediction.lml = lml;
  out.prediction.noise_variance = noise_variance;
  return out;
}

Eigen::MatrixXd sample_prior(const Eigen::MatrixXd& gram, int count, std::uint64_t seed,
                             JitterPolicy policy) {
  if (count < 0) throw InputError("sample count must be non-negative");
  const JitteredCholesky chol(gram, policy);
  const Eigen::Index n = gram.rows();
  Rng rng(seed, 0x5a4d);
  Eigen::MatrixXd white(n, count);
  for (int s = 0; s < count; ++s) {
    for (Eigen::Index i = 0; i < n; ++i) white(i, s) = rng.normal();
  }
  return (chol.lower() * white).transpose();
}

}  // namespace mfgp
