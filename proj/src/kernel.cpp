#include "mfgp/kernel.hpp"

#include <cmath>
#include <string>

#include "mfgp/errors.hpp"

namespace mfgp {

namespace {

void check_columns(const BaseKernel& kernel, const Eigen::MatrixXd& rows,
                   const Eigen::MatrixXd& cols) {
  if (rows.cols() != cols.cols()) {
    throw InputError("input dimension mismatch: " + std::to_string(rows.cols()) + " vs " +
                     std::to_string(cols.cols()));
  }
  if (rows.cols() < 1 && (rows.rows() > 0 || cols.rows() > 0)) {
    throw InputError("inputs must have at least one column");
  }
  if (kernel.family == KernelFamily::SC && rows.cols() > 1) {
    throw InputError("SC kernel requires scalar inputs, got dimension " +
                     std::to_string(rows.cols()));
  }
}

double squared_distance(const Eigen::MatrixXd& a, Eigen::Index i, const Eigen::MatrixXd& b,
                        Eigen::Index j) {
  return (a.row(i) - b.row(j)).squaredNorm();
}

}  // namespace

std::string_view to_string(KernelFamily family) noexcept {
  return family == KernelFamily::SE ? "SE" : "SC";
}

KernelFamily parse_family(std::string_view text) {
  if (text == "SE") return KernelFamily::SE;
  if (text == "SC") return KernelFamily::SC;
  throw InputError("unknown kernel family '" + std::string(text) + "'");
}

void validate(const BaseKernel& kernel) {
  if (!(kernel.variance > 0.0) || !std::isfinite(kernel.variance)) {
    throw InputError("kernel variance must be positive and finite");
  }
  if (!(kernel.lengthscale > 0.0) || !std::isfinite(kernel.lengthscale)) {
    throw InputError("kernel lengthscale must be positive and finite");
  }
}

double kernel_from_distance(const BaseKernel& kernel, double distance) noexcept {
  const double scaled = distance / kernel.lengthscale;
  if (kernel.family == KernelFamily::SE) {
    return kernel.variance * std::exp(-0.5 * scaled * scaled);
  }
  return 0.5 * kernel.variance * (1.0 + std::cos(scaled));
}

double kernel_eval(const BaseKernel& kernel, const Eigen::Ref<const Eigen::VectorXd>& xi,
                   const Eigen::Ref<const Eigen::VectorXd>& xj) {
  if (xi.size() != xj.size()) {
    throw InputError("input dimension mismatch: " + std::to_string(xi.size()) + " vs " +
                     std::to_string(xj.size()));
  }
  if (xi.size() < 1) throw InputError("inputs must have at least one component");
  if (kernel.family == KernelFamily::SC && xi.size() > 1) {
    throw InputError("SC kernel requires scalar inputs");
  }
  return kernel_from_distance(kernel, (xi - xj).norm());
}

Eigen::MatrixXd gram(const BaseKernel& kernel, const Eigen::MatrixXd& rows,
                     const Eigen::MatrixXd& cols) {
  validate(kernel);
  check_columns(kernel, rows, cols);
  Eigen::MatrixXd k(rows.rows(), cols.rows());
  for (Eigen::Index j = 0; j < cols.rows(); ++j) {
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
      k(i, j) = kernel_from_distance(kernel, std::sqrt(squared_distance(rows, i, cols, j)));
    }
  }
  return k;
}

Eigen::MatrixXd gram(const BaseKernel& kernel, const Eigen::MatrixXd& inputs) {
  validate(kernel);
  check_columns(kernel, inputs, inputs);
  const Eigen::Index n = inputs.rows();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    k(j, j) = kernel.variance;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      k(i, j) = kernel_from_distance(kernel, std::sqrt(squared_distance(inputs, i, inputs, j)));
      k(j, i) = k(i, j);
    }
  }
  return k;
}

GramDerivatives gram_derivatives(const BaseKernel& kernel, const Eigen::MatrixXd& rows,
                                 const Eigen::MatrixXd& cols) {
  validate(kernel);
  check_columns(kernel, rows, cols);
  GramDerivatives d{Eigen::MatrixXd(rows.rows(), cols.rows()),
                    Eigen::MatrixXd(rows.rows(), cols.rows())};
  const double ell = kernel.lengthscale;
  for (Eigen::Index j = 0; j < cols.rows(); ++j) {
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
      const double r2 = squared_distance(rows, i, cols, j);
      const double r = std::sqrt(r2);
      const double k = kernel_from_distance(kernel, r);
      d.d_log_variance(i, j) = k;
      if (kernel.family == KernelFamily::SE) {
        d.d_log_lengthscale(i, j) = k * r2 / (ell * ell);
      } else {
        d.d_log_lengthscale(i, j) = 0.5 * kernel.variance * std::sin(r / ell) * r / ell;
      }
    }
  }
  return d;
}

}  // namespace mfgp
