#include "mfgp/linalg.hpp"

#include <cmath>
#include <sstream>

#include "mfgp/errors.hpp"

namespace mfgp {

namespace {

std::string diagnostics(const Eigen::MatrixXd& matrix) {
  std::ostringstream out;
  out << "size " << matrix.rows() << "x" << matrix.cols();
  if (matrix.size() > 0) {
    out << ", diagonal in [" << matrix.diagonal().minCoeff() << ", "
        << matrix.diagonal().maxCoeff() << "]";
    if (matrix.allFinite()) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(matrix, Eigen::EigenvaluesOnly);
      if (eig.info() == Eigen::Success) {
        const auto& ev = eig.eigenvalues();
        out << ", eigenvalues in [" << ev.minCoeff() << ", " << ev.maxCoeff() << "]";
      }
    } else {
      out << ", contains non-finite entries";
    }
  }
  return out.str();
}

}  // namespace

JitteredCholesky::JitteredCholesky(const Eigen::MatrixXd& matrix, JitterPolicy policy) {
  if (matrix.rows() != matrix.cols()) {
    throw InputError("Cholesky requires a square matrix");
  }
  if (matrix.size() == 0) {
    llt_.compute(matrix);
    return;
  }
  if (!matrix.allFinite()) {
    throw NumericalError("Cholesky failed: " + diagnostics(matrix));
  }
  llt_.compute(matrix);
  if (llt_.info() == Eigen::Success) return;

  const double scale = std::max(std::abs(matrix.diagonal().mean()), 1e-300);
  Eigen::MatrixXd shifted = matrix;
  for (double rel = policy.initial; rel <= policy.max * (1.0 + 1e-9); rel *= policy.factor) {
    jitter_ = rel * scale;
    shifted.diagonal() = matrix.diagonal().array() + jitter_;
    llt_.compute(shifted);
    if (llt_.info() == Eigen::Success) return;
  }
  throw NumericalError("Cholesky failed after maximal jitter " + std::to_string(jitter_) + ": " +
                       diagnostics(matrix));
}

Eigen::MatrixXd JitteredCholesky::solve_lower(const Eigen::MatrixXd& rhs) const {
  return llt_.matrixL().solve(rhs);
}

Eigen::MatrixXd JitteredCholesky::inverse() const {
  return llt_.solve(Eigen::MatrixXd::Identity(size(), size()));
}

double JitteredCholesky::log_determinant() const {
  return 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
}

double asymmetry(const Eigen::MatrixXd& matrix) {
  if (matrix.size() == 0) return 0.0;
  return (matrix - matrix.transpose()).cwiseAbs().maxCoeff();
}

}  // namespace mfgp
