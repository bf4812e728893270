#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "mfgp/composition.hpp"
#include "mfgp/dataset.hpp"
#include "mfgp/gp.hpp"
#include "mfgp/hyperparams.hpp"
#include "mfgp/optimizer.hpp"

namespace mfgp {

enum class TrainMode { sequential, joint };
enum class InitStrategy { fixed, log_uniform };

std::string_view to_string(TrainMode mode) noexcept;
TrainMode parse_mode(std::string_view text);
std::string_view to_string(InitStrategy init) noexcept;
InitStrategy parse_init(std::string_view text);

/// Box on the natural-scale hyperparameters; optimization runs in log space.
struct ParameterBounds {
  double min_variance = 1e-6;
  double max_variance = 1e6;
  double min_lengthscale = 1e-3;
  double max_lengthscale = 1e3;
  double min_noise = 1e-8;
  double max_noise = 1e2;
};

struct TrainConfig {
  TrainMode mode = TrainMode::sequential;
  OptimizerKind optimizer = OptimizerKind::quasi_newton;
  int max_iters = 200;
  int restarts = 5;
  InitStrategy init = InitStrategy::log_uniform;
  double convergence_tol = 1e-5;
  double learning_rate = 0.01;
  std::uint64_t seed = 0;
  ParameterBounds bounds;
  /// Starting point for `fixed` initialization; data-driven when empty.
  std::optional<Hyperparams> initial;
};

/// Throws InputError for max_iters < 1, restarts < 1 or tolerance <= 0.
void validate(const TrainConfig& config);

struct TrainResult {
  CompositionSpec spec;
  TrainMode mode = TrainMode::sequential;
  Hyperparams hyperparams;
  /// Log evidence of the highest-fidelity data at `hyperparams`.
  double lml = 0.0;
  /// Per-stage LML (one per level; sequential mode), lowest level first.
  std::vector<double> stage_lml;
  /// Objective after each accepted iterate of the exposed-stage optimization.
  std::vector<double> trace;
};

struct BaseFit {
  LayerParams params;
  double lml = 0.0;
  std::vector<double> trace;
};

/// Multi-restart maximum-likelihood fit of a single-kernel GP.
BaseFit fit_base_gp(const FidelityLevel& level, KernelFamily family, const TrainConfig& config,
                    std::uint64_t stream = 0);

/// Stagewise training: fit level 1 on its own data, propagate moments,
/// then fit each effective-kernel stage on its level with the lower stages
/// held fixed. Handles two and three levels.
TrainResult train_sequential(const FidelityDataset& data, const CompositionSpec& spec,
                             const TrainConfig& config);

/// Two-level joint maximization of the exposed-stage evidence over all six
/// log-parameters using lml_gradient_joint.
TrainResult train_joint(const FidelityDataset& data, const CompositionSpec& spec,
                        const TrainConfig& config);

/// Dispatches on config.mode.
TrainResult train(const FidelityDataset& data, const CompositionSpec& spec,
                  const TrainConfig& config);

struct JointGradientOptions {
  /// Drop the dependence of the level-1 covariance on level-1 parameters.
  bool freeze_covariance = false;
  /// Drop the dependence of the level-1 mean on level-1 parameters.
  bool freeze_mean = false;
};

/// Exposed-stage log evidence of a two-level model and its gradient with
/// respect to Hyperparams::to_log() (six entries: level-1 then level-2
/// variance, lengthscale, noise). Level-1 parameters act through the
/// conditional mean and covariance (chain rule through m_i - m_j and
/// delta^2_ij); level-2 parameters act explicitly.
LmlWithGradient lml_gradient_joint(const FidelityDataset& data, const Hyperparams& hyperparams,
                                   const CompositionSpec& spec,
                                   const JointGradientOptions& options = {});

/// Posterior mean and variance of the highest-fidelity function at `query`.
Prediction predict(const TrainResult& trained, const FidelityDataset& data,
                   const Eigen::MatrixXd& query);

}  // namespace mfgp
