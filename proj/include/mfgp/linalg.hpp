#pragma once

#include <Eigen/Dense>

namespace mfgp {

/// Diagonal jitter schedule, relative to the mean diagonal of the matrix.
/// A factorization without jitter is attempted first; on failure the
/// relative jitter starts at `initial` and grows by `factor` up to `max`.
struct JitterPolicy {
  double initial = 1e-10;
  double max = 1e-6;
  double factor = 10.0;
};

/// Cholesky factorization of a symmetric PSD matrix with escalating jitter.
/// Throws NumericalError (with size, diagonal range and smallest eigenvalue)
/// when the matrix is not positive definite even at maximal jitter.
class JitteredCholesky {
 public:
  explicit JitteredCholesky(const Eigen::MatrixXd& matrix, JitterPolicy policy = {});

  Eigen::Index size() const { return llt_.rows(); }
  /// Absolute jitter that was added to the diagonal (0 if none was needed).
  double jitter() const { return jitter_; }
  Eigen::MatrixXd lower() const { return llt_.matrixL(); }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const { return llt_.solve(rhs); }
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const { return llt_.solve(rhs); }
  /// L^{-1} rhs.
  Eigen::MatrixXd solve_lower(const Eigen::MatrixXd& rhs) const;
  Eigen::MatrixXd inverse() const;
  double log_determinant() const;

 private:
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double jitter_ = 0.0;
};

/// Largest |A - A^T| entry.
double asymmetry(const Eigen::MatrixXd& matrix);

}  // namespace mfgp
