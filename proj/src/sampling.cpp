#include "mfgp/sampling.hpp"

#include <memory>

#include "mfgp/errors.hpp"
#include "mfgp/moments.hpp"

namespace mfgp {

WarpedPrior warped_prior(const FidelityLevel& low, const CompositionSpec& spec,
                         const LayerParams& outer, const Eigen::MatrixXd& grid,
                         bool warping_only, const TrainConfig& config) {
  if (spec.depth() != 2) throw InputError("prior sampling needs a two-layer composition");
  if (grid.cols() != low.inputs.cols()) throw InputError("grid dimension differs from data");
  const BaseKernel outer_kernel{spec.outermost(), outer.variance, outer.lengthscale};
  validate(outer_kernel);

  WarpedPrior out;
  out.inner = fit_base_gp(low, spec.families[0], config, 0).params;
  const BaseKernel inner{spec.families[0], out.inner.variance, out.inner.lengthscale};
  out.moments =
      posterior_predict(inner, low.inputs, low.outputs, out.inner.noise_variance, grid).moments;
  if (warping_only) out.moments.covariance.setZero();
  const EffectiveKernel k(outer_kernel, std::make_shared<const ConditionalMoments>(out.moments));
  out.gram = k.gram(index_range(0, grid.rows()));
  return out;
}

Eigen::MatrixXd sample_warped_prior(const WarpedPrior& prior, int count, std::uint64_t seed) {
  if (count < 0) throw InputError("sample count must be non-negative");
  if (count == 0) return Eigen::MatrixXd(0, prior.gram.rows());
  return sample_prior(prior.gram, count, seed);
}

}  // namespace mfgp
