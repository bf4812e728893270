#pragma once

#include <string_view>

#include <Eigen/Dense>

namespace mfgp {

enum class KernelFamily { SE, SC };

std::string_view to_string(KernelFamily family) noexcept;
/// Accepts "SE" or "SC"; throws InputError otherwise.
KernelFamily parse_family(std::string_view text);

/// Stationary base kernel on Euclidean distance r = |x - y|:
///   SE: variance * exp(-r^2 / (2 lengthscale^2))
///   SC: (variance / 2) * (1 + cos(r / lengthscale))
/// SC is only positive semidefinite on scalar inputs, so Gram assembly
/// rejects SC on inputs with more than one column.
struct BaseKernel {
  KernelFamily family = KernelFamily::SE;
  double variance = 1.0;
  double lengthscale = 1.0;
};

/// Throws InputError unless variance and lengthscale are finite and > 0.
void validate(const BaseKernel& kernel);

double kernel_from_distance(const BaseKernel& kernel, double distance) noexcept;

double kernel_eval(const BaseKernel& kernel, const Eigen::Ref<const Eigen::VectorXd>& xi,
                   const Eigen::Ref<const Eigen::VectorXd>& xj);

/// Cross Gram matrix between the rows of `rows` and the rows of `cols`.
Eigen::MatrixXd gram(const BaseKernel& kernel, const Eigen::MatrixXd& rows,
                     const Eigen::MatrixXd& cols);
/// Symmetric Gram matrix over the rows of `inputs`.
Eigen::MatrixXd gram(const BaseKernel& kernel, const Eigen::MatrixXd& inputs);

/// Derivatives of a Gram matrix with respect to log(variance) and
/// log(lengthscale).
struct GramDerivatives {
  Eigen::MatrixXd d_log_variance;
  Eigen::MatrixXd d_log_lengthscale;
};

GramDerivatives gram_derivatives(const BaseKernel& kernel, const Eigen::MatrixXd& rows,
                                 const Eigen::MatrixXd& cols);

}  // namespace mfgp
