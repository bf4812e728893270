#include "mfgp/moments.hpp"

#include <cmath>
#include <string>

#include "mfgp/errors.hpp"
#include "mfgp/random.hpp"

namespace mfgp {

namespace {

void check_index(const ConditionalMoments& moments, Eigen::Index i) {
  if (i < 0 || i >= moments.size()) {
    throw InputError("moment index " + std::to_string(i) + " out of range [0, " +
                     std::to_string(moments.size()) + ")");
  }
}

void check_square(const Eigen::MatrixXd& m, Eigen::Index n, const char* what) {
  if (m.rows() != n || m.cols() != n) {
    throw InputError(std::string(what) + " must be " + std::to_string(n) + "x" +
                     std::to_string(n));
  }
}

void check_psd(const Eigen::MatrixXd& m, const char* what) {
  if (m.size() == 0) return;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (m + m.transpose()),
                                                     Eigen::EigenvaluesOnly);
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() < -1e-10 * scale) {
    throw InputError(std::string(what) + " must be positive semidefinite");
  }
}

}  // namespace

double delta_squared(const ConditionalMoments& moments, Eigen::Index i, Eigen::Index j) {
  check_index(moments, i);
  check_index(moments, j);
  if (i == j) return 0.0;
  const auto& c = moments.covariance;
  const double d2 = c(i, i) + c(j, j) - 2.0 * c(i, j);
  if (d2 >= 0.0) return d2;
  const double scale = std::max({1.0, std::abs(c(i, i)), std::abs(c(j, j))});
  if (d2 > -1e-12 * scale) return 0.0;
  throw NumericalError("negative delta^2 " + std::to_string(d2) + " at (" + std::to_string(i) +
                       ", " + std::to_string(j) + "): covariance is not PSD");
}

double expectation_exp_quadratic(const Eigen::VectorXd& mean, const Eigen::MatrixXd& covariance,
                                 const Eigen::MatrixXd& quadratic) {
  const Eigen::Index n = mean.size();
  check_square(covariance, n, "covariance");
  check_square(quadratic, n, "quadratic form");
  if ((quadratic - quadratic.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw InputError("quadratic form must be symmetric");
  }
  check_psd(quadratic, "quadratic form");
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);
  const Eigen::FullPivLU<Eigen::MatrixXd> left(identity + covariance * quadratic);
  const Eigen::FullPivLU<Eigen::MatrixXd> right(identity + quadratic * covariance);
  if (!left.isInvertible() || !right.isInvertible()) {
    throw NumericalError("I + C A is singular");
  }
  const double det = left.determinant();
  if (!(det > 0.0)) throw NumericalError("|I + C A| is not positive");
  const double exponent = -0.5 * mean.dot(right.solve(quadratic * mean));
  return std::exp(exponent) / std::sqrt(det);
}

double expectation_exp_inner(const Eigen::VectorXd& mean, const Eigen::MatrixXd& covariance,
                             const Eigen::VectorXd& direction) {
  check_square(covariance, mean.size(), "covariance");
  if (direction.size() != mean.size()) {
    throw InputError("direction has " + std::to_string(direction.size()) +
                     " entries, mean has " + std::to_string(mean.size()));
  }
  return std::exp(direction.dot(mean) + 0.5 * direction.dot(covariance * direction));
}

double effective_kernel_value(KernelFamily family, double variance, double lengthscale,
                              double mean_diff, double delta2) {
  const double l2 = lengthscale * lengthscale;
  if (family == KernelFamily::SE) {
    return variance / std::sqrt(1.0 + delta2 / l2) *
           std::exp(-mean_diff * mean_diff / (2.0 * (l2 + delta2)));
  }
  return 0.5 * variance *
         (1.0 + std::cos(mean_diff / lengthscale) * std::exp(-delta2 / (2.0 * l2)));
}

EffectiveKernelPartials effective_kernel_partials(KernelFamily family, double variance,
                                                  double lengthscale, double mean_diff,
                                                  double delta2) {
  EffectiveKernelPartials p;
  const double l = lengthscale;
  const double l2 = l * l;
  if (family == KernelFamily::SE) {
    const double s = l2 + delta2;
    const double d2m = mean_diff * mean_diff;
    p.value = effective_kernel_value(family, variance, l, mean_diff, delta2);
    p.d_variance = p.value / variance;
    // log k = log v + log l - log(s)/2 - dm^2 / (2 s)
    p.d_lengthscale = p.value * (1.0 / l - l / s + d2m * l / (s * s));
    p.d_delta2 = p.value * (-0.5 / s + 0.5 * d2m / (s * s));
    p.d_mean_diff = -p.value * mean_diff / s;
  } else {
    const double decay = std::exp(-delta2 / (2.0 * l2));
    const double phase = mean_diff / l;
    const double c = std::cos(phase);
    const double sn = std::sin(phase);
    p.value = 0.5 * variance * (1.0 + c * decay);
    p.d_variance = 0.5 * (1.0 + c * decay);
    p.d_lengthscale = 0.5 * variance * decay * (sn * mean_diff / l2 + c * delta2 / (l2 * l));
    p.d_delta2 = -0.5 * variance * c * decay / (2.0 * l2);
    p.d_mean_diff = -0.5 * variance * sn * decay / l;
  }
  return p;
}

double effective_kernel_se(const ConditionalMoments& moments, double variance,
                           double lengthscale, Eigen::Index i, Eigen::Index j) {
  const double d2 = delta_squared(moments, i, j);
  return effective_kernel_value(KernelFamily::SE, variance, lengthscale,
                                moments.mean(i) - moments.mean(j), d2);
}

double effective_kernel_sc(const ConditionalMoments& moments, double variance,
                           double lengthscale, Eigen::Index i, Eigen::Index j) {
  const double d2 = delta_squared(moments, i, j);
  return effective_kernel_value(KernelFamily::SC, variance, lengthscale,
                                moments.mean(i) - moments.mean(j), d2);
}

IndexList index_range(Eigen::Index begin, Eigen::Index count) {
  IndexList out(static_cast<std::size_t>(count));
  for (Eigen::Index k = 0; k < count; ++k) out[static_cast<std::size_t>(k)] = begin + k;
  return out;
}

EffectiveKernel::EffectiveKernel(BaseKernel outer,
                                 std::shared_ptr<const ConditionalMoments> moments)
    : outer_(outer), moments_(std::move(moments)) {
  validate(outer_);
  if (!moments_) throw InputError("effective kernel needs moments");
  if (moments_->covariance.rows() != moments_->size() ||
      moments_->covariance.cols() != moments_->size()) {
    throw InputError("moment covariance does not match mean length");
  }
}

double EffectiveKernel::operator()(Eigen::Index i, Eigen::Index j) const {
  const double d2 = delta_squared(*moments_, i, j);
  return effective_kernel_value(outer_.family, outer_.variance, outer_.lengthscale,
                                moments_->mean(i) - moments_->mean(j), d2);
}

Eigen::MatrixXd EffectiveKernel::gram(const IndexList& rows, const IndexList& cols) const {
  Eigen::MatrixXd k(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (Eigen::Index c = 0; c < k.cols(); ++c) {
    for (Eigen::Index r = 0; r < k.rows(); ++r) {
      k(r, c) = (*this)(rows[static_cast<std::size_t>(r)], cols[static_cast<std::size_t>(c)]);
    }
  }
  return k;
}

McEstimate mc_oracle_kernel(const BaseKernel& outer, const Eigen::Vector2d& mean,
                            const Eigen::Matrix2d& covariance, long samples, std::uint64_t seed) {
  validate(outer);
  if (samples < 2) throw InputError("need at least two Monte Carlo samples");
  // Lower-triangular square root of a PSD 2x2 matrix, tolerating zero pivots.
  const double c00 = covariance(0, 0);
  const double c11 = covariance(1, 1);
  const double c01 = 0.5 * (covariance(0, 1) + covariance(1, 0));
  const double scale = std::max({1.0, std::abs(c00), std::abs(c11)});
  if (c00 < -1e-12 * scale || c11 < -1e-12 * scale) {
    throw NumericalError("Cholesky failed: negative variance in 2x2 covariance");
  }
  const double l00 = std::sqrt(std::max(c00, 0.0));
  double l10 = 0.0;
  if (l00 > 0.0) {
    l10 = c01 / l00;
  } else if (std::abs(c01) > 1e-12 * scale) {
    throw NumericalError("Cholesky failed: covariance is not PSD");
  }
  const double rem = c11 - l10 * l10;
  if (rem < -1e-10 * scale) throw NumericalError("Cholesky failed: covariance is not PSD");
  const double l11 = std::sqrt(std::max(rem, 0.0));

  Rng rng(seed, 0x0c1e);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (long s = 0; s < samples; ++s) {
    const double z0 = rng.normal();
    const double z1 = rng.normal();
    const double gi = mean(0) + l00 * z0;
    const double gj = mean(1) + l10 * z0 + l11 * z1;
    const double k = kernel_from_distance(outer, std::abs(gi - gj));
    sum += k;
    sum_sq += k * k;
  }
  const double n = static_cast<double>(samples);
  const double avg = sum / n;
  const double var = std::max(0.0, (sum_sq - n * avg * avg) / (n - 1.0));
  return {avg, std::sqrt(var / n)};
}

bool reduced_inverse_identity_check(const Eigen::Matrix2d& covariance) {
  Eigen::Matrix2d a;
  a << 1.0, -1.0, -1.0, 1.0;
  const Eigen::Matrix2d& c = covariance;
  const double delta2 = c(0, 0) + c(1, 1) - 2.0 * c(0, 1);
  const Eigen::Matrix2d ca = c * a;
  const Eigen::Matrix2d m = Eigen::Matrix2d::Identity() + ca;
  const double det = m.determinant();
  const double tol = 1e-10 * std::max(1.0, c.cwiseAbs().maxCoeff());
  if (std::abs(det - (1.0 + delta2)) > tol) return false;
  if (std::abs(1.0 + delta2) < 1e-300) return false;
  const Eigen::Matrix2d inv = m.inverse();
  Eigen::Matrix2d reduced;
  reduced << 1.0 + c(1, 1) - c(0, 1), c(0, 0) - c(0, 1), c(1, 1) - c(0, 1),
      1.0 + c(0, 0) - c(0, 1);
  reduced /= 1.0 + delta2;
  if ((inv - reduced).cwiseAbs().maxCoeff() > tol) return false;
  const Eigen::Matrix2d lhs = Eigen::Matrix2d::Identity() - inv;
  return (lhs - ca / (1.0 + delta2)).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace mfgp
