#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "mfgp/gp.hpp"
#include "mfgp/kernel.hpp"

namespace mfgp {

/// delta^2_ij = c_ii + c_jj - 2 c_ij, the variance of f(x_i) - f(x_j).
/// Round-off negatives above -1e-12 (relative to the diagonal) become 0.
double delta_squared(const ConditionalMoments& moments, Eigen::Index i, Eigen::Index j);

/// E[exp(-g^T A g / 2)] for g ~ N(m, C), A symmetric PSD.
/// Evaluated as exp(-m^T (I + A C)^{-1} A m / 2) / sqrt|I + C A|, which equals
/// the C^{-1}(I - (I + C A)^{-1}) form without inverting C.
double expectation_exp_quadratic(const Eigen::VectorXd& mean, const Eigen::MatrixXd& covariance,
                                 const Eigen::MatrixXd& quadratic);

/// E[exp(a^T g)] = exp(a^T m + tr(C a a^T) / 2) for g ~ N(m, C).
double expectation_exp_inner(const Eigen::VectorXd& mean, const Eigen::MatrixXd& covariance,
                             const Eigen::VectorXd& direction);

/// Outer-kernel expectation over a bivariate Gaussian warp with mean
/// difference `mean_diff` and difference variance `delta2`:
///   SE: v / sqrt(1 + delta2 / l^2) * exp(-mean_diff^2 / (2 (l^2 + delta2)))
///   SC: (v / 2) * (1 + cos(mean_diff / l) * exp(-delta2 / (2 l^2)))
double effective_kernel_value(KernelFamily family, double variance, double lengthscale,
                              double mean_diff, double delta2);

/// Value of the effective kernel and its partial derivatives with respect
/// to the outer variance, the outer lengthscale, delta^2 and m_i - m_j.
struct EffectiveKernelPartials {
  double value = 0.0;
  double d_variance = 0.0;
  double d_lengthscale = 0.0;
  double d_delta2 = 0.0;
  double d_mean_diff = 0.0;
};

EffectiveKernelPartials effective_kernel_partials(KernelFamily family, double variance,
                                                  double lengthscale, double mean_diff,
                                                  double delta2);

double effective_kernel_se(const ConditionalMoments& moments, double variance,
                           double lengthscale, Eigen::Index i, Eigen::Index j);
double effective_kernel_sc(const ConditionalMoments& moments, double variance,
                           double lengthscale, Eigen::Index i, Eigen::Index j);

using IndexList = std::vector<Eigen::Index>;

/// [begin, begin + count).
IndexList index_range(Eigen::Index begin, Eigen::Index count);

/// Moment-matched covariance of an outer kernel applied to warped inputs
/// whose distribution is described by `moments`. Points are addressed by
/// their index into the moments.
class EffectiveKernel {
 public:
  EffectiveKernel(BaseKernel outer, std::shared_ptr<const ConditionalMoments> moments);

  const BaseKernel& outer() const { return outer_; }
  const ConditionalMoments& moments() const { return *moments_; }

  double operator()(Eigen::Index i, Eigen::Index j) const;
  Eigen::MatrixXd gram(const IndexList& rows, const IndexList& cols) const;
  Eigen::MatrixXd gram(const IndexList& indices) const { return gram(indices, indices); }

 private:
  BaseKernel outer_;
  std::shared_ptr<const ConditionalMoments> moments_;
};

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

/// Monte Carlo estimate of E[k(g_i, g_j)] for (g_i, g_j) ~ N(mean, cov),
/// with its standard error. Ground truth for the closed forms above.
McEstimate mc_oracle_kernel(const BaseKernel& outer, const Eigen::Vector2d& mean,
                            const Eigen::Matrix2d& covariance, long samples, std::uint64_t seed);

/// Checks, to 1e-10, that with A = [[1, -1], [-1, 1]]:
///   |I + C A| = 1 + delta^2,
///   I - (I + C A)^{-1} = C A / (1 + delta^2),
///   (I + C A)^{-1} = [[1 + c22 - c12, c11 - c12], [c22 - c12, 1 + c11 - c12]] / (1 + delta^2).
bool reduced_inverse_identity_check(const Eigen::Matrix2d& covariance);

}  // namespace mfgp
