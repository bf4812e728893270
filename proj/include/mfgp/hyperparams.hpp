#pragma once

#include <vector>

#include <Eigen/Dense>

namespace mfgp {

/// Kernel and observation-noise parameters of one fidelity level.
struct LayerParams {
  double variance = 1.0;
  double lengthscale = 1.0;
  double noise_variance = 1e-2;

  bool operator==(const LayerParams&) const = default;
};

/// One LayerParams per fidelity level, lowest fidelity (innermost) first.
/// Optimized as the log-space vector
///   [log v_1, log l_1, log s_1, log v_2, log l_2, log s_2, ...].
struct Hyperparams {
  std::vector<LayerParams> layers;

  Eigen::VectorXd to_log() const;
  static Hyperparams from_log(const Eigen::VectorXd& log_params);

  bool operator==(const Hyperparams&) const = default;
};

/// Throws InputError unless every entry is finite and strictly positive
/// (noise may be zero).
void validate(const Hyperparams& hyperparams);

}  // namespace mfgp
