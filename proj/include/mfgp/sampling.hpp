#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "mfgp/composition.hpp"
#include "mfgp/dataset.hpp"
#include "mfgp/gp.hpp"
#include "mfgp/hyperparams.hpp"
#include "mfgp/training.hpp"

namespace mfgp {

/// Approximate marginal prior of a two-layer composition on a grid: the
/// inner GP is fitted to `low`, its posterior moments at `grid` feed the
/// outer effective kernel.
struct WarpedPrior {
  LayerParams inner;
  ConditionalMoments moments;
  Eigen::MatrixXd gram;
};

/// With `warping_only` the posterior covariance is dropped, so the prior is
/// the outer base kernel on the warped mean.
WarpedPrior warped_prior(const FidelityLevel& low, const CompositionSpec& spec,
                         const LayerParams& outer, const Eigen::MatrixXd& grid,
                         bool warping_only, const TrainConfig& config = {});

/// `count` sample paths, one per row.
Eigen::MatrixXd sample_warped_prior(const WarpedPrior& prior, int count, std::uint64_t seed);

}  // namespace mfgp
