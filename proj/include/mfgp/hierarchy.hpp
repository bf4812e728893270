#pragma once

#include <Eigen/Dense>

#include "mfgp/composition.hpp"
#include "mfgp/dataset.hpp"
#include "mfgp/gp.hpp"
#include "mfgp/hyperparams.hpp"
#include "mfgp/moments.hpp"

namespace mfgp {

// Recursive moment propagation through an L-level composition.
//
// Stage s (0-based) is trained on fidelity level s. Its posterior is
// evaluated once over the stacked downstream inputs
//   Z_s = [X_{s+1}; ...; X_{L-1}; query],
// so stage s + 1 finds its own training points in the first rows of the
// moments it receives and passes the remaining rows on.

/// Stacked inputs of all levels above `stage`, followed by `query`.
Eigen::MatrixXd downstream_inputs(const FidelityDataset& data, std::size_t stage,
                                  const Eigen::MatrixXd& query);

/// Posterior of the level-1 GP (base kernel on raw inputs) at `downstream`.
ConditionalMoments first_stage_moments(const FidelityLevel& level, KernelFamily family,
                                       const LayerParams& params,
                                       const Eigen::MatrixXd& downstream);

/// Effective-kernel Gram over rows/cols of the upstream moments.
Eigen::MatrixXd effective_gram(KernelFamily family, const LayerParams& params,
                               const ConditionalMoments& upstream, const IndexList& rows,
                               const IndexList& cols);

/// LML of `outputs` under the effective kernel restricted to the first
/// outputs.size() rows of `upstream`.
double effective_stage_lml(const ConditionalMoments& upstream, const Eigen::VectorXd& outputs,
                           KernelFamily family, const LayerParams& params);

/// Posterior of an effective-kernel stage trained on the first
/// outputs.size() rows of `upstream`, evaluated at the remaining rows.
ConditionalMoments effective_stage_moments(const ConditionalMoments& upstream,
                                           const Eigen::VectorXd& outputs, KernelFamily family,
                                           const LayerParams& params);

/// Approximate log evidence of the highest-fidelity outputs given all
/// lower levels (the objective of the exposed stage).
double hierarchy_lml(const FidelityDataset& data, const CompositionSpec& spec,
                     const Hyperparams& hyperparams);

/// Predicts the highest-fidelity function at `query`; moments are computed
/// once over the union of downstream training and query inputs.
Prediction predict_hierarchy(const FidelityDataset& data, const CompositionSpec& spec,
                             const Hyperparams& hyperparams, const Eigen::MatrixXd& query,
                             bool keep_covariance = false);

/// Throws InputError unless the dataset, composition and hyperparameters
/// agree on the number of levels and all levels are non-empty.
void check_hierarchy(const FidelityDataset& data, const CompositionSpec& spec,
                     const Hyperparams* hyperparams = nullptr);

/// Throws NumericalError if noise is zero and `inputs` has repeated rows.
void check_duplicates_without_noise(const Eigen::MatrixXd& inputs, double noise_variance);

}  // namespace mfgp
