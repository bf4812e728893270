#include "mfgp/hierarchy.hpp"

#include <string>

#include "mfgp/errors.hpp"
#include "mfgp/moments.hpp"

namespace mfgp {

namespace {

BaseKernel base_kernel(KernelFamily family, const LayerParams& params) {
  return {family, params.variance, params.lengthscale};
}

}  // namespace

void check_hierarchy(const FidelityDataset& data, const CompositionSpec& spec,
                     const Hyperparams* hyperparams) {
  require_non_empty_levels(data);
  if (data.level_count() < 2) throw InputError("need at least two fidelity levels");
  if (spec.depth() != data.level_count()) {
    throw InputError("composition " + spec.to_string() + " has depth " +
                     std::to_string(spec.depth()) + " but the dataset has " +
                     std::to_string(data.level_count()) + " fidelity levels");
  }
  if (hyperparams != nullptr) {
    if (hyperparams->layers.size() != data.level_count()) {
      throw InputError("hyperparameters describe " + std::to_string(hyperparams->layers.size()) +
                       " levels, dataset has " + std::to_string(data.level_count()));
    }
    validate(*hyperparams);
  }
}

void check_duplicates_without_noise(const Eigen::MatrixXd& inputs, double noise_variance) {
  if (noise_variance > 0.0) return;
  for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < inputs.rows(); ++j) {
      if (inputs.row(i) == inputs.row(j)) {
        throw NumericalError("conditioning error: inputs " + std::to_string(i) + " and " +
                             std::to_string(j) + " coincide and the noise variance is zero");
      }
    }
  }
}

Eigen::MatrixXd downstream_inputs(const FidelityDataset& data, std::size_t stage,
                                  const Eigen::MatrixXd& query) {
  const Eigen::Index d = data.dimension();
  if (query.rows() > 0 && query.cols() != d) {
    throw InputError("query dimension " + std::to_string(query.cols()) +
                     " differs from data dimension " + std::to_string(d));
  }
  Eigen::Index rows = query.rows();
  for (std::size_t l = stage + 1; l < data.level_count(); ++l) rows += data.levels[l].size();
  Eigen::MatrixXd out(rows, d);
  Eigen::Index at = 0;
  for (std::size_t l = stage + 1; l < data.level_count(); ++l) {
    out.middleRows(at, data.levels[l].size()) = data.levels[l].inputs;
    at += data.levels[l].size();
  }
  if (query.rows() > 0) out.bottomRows(query.rows()) = query;
  return out;
}

ConditionalMoments first_stage_moments(const FidelityLevel& level, KernelFamily family,
                                       const LayerParams& params,
                                       const Eigen::MatrixXd& downstream) {
  const BaseKernel k = base_kernel(family, params);
  check_duplicates_without_noise(level.inputs, params.noise_variance);
  return condition_on_gram(gram(k, level.inputs), gram(k, downstream, level.inputs),
                           gram(k, downstream), level.outputs, params.noise_variance);
}

Eigen::MatrixXd effective_gram(KernelFamily family, const LayerParams& params,
                               const ConditionalMoments& upstream, const IndexList& rows,
                               const IndexList& cols) {
  Eigen::MatrixXd k(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (Eigen::Index c = 0; c < k.cols(); ++c) {
    const Eigen::Index j = cols[static_cast<std::size_t>(c)];
    for (Eigen::Index r = 0; r < k.rows(); ++r) {
      const Eigen::Index i = rows[static_cast<std::size_t>(r)];
      k(r, c) = effective_kernel_value(family, params.variance, params.lengthscale,
                                       upstream.mean(i) - upstream.mean(j),
                                       delta_squared(upstream, i, j));
    }
  }
  return k;
}

double effective_stage_lml(const ConditionalMoments& upstream, const Eigen::VectorXd& outputs,
                           KernelFamily family, const LayerParams& params) {
  const Eigen::Index n = outputs.size();
  if (n > upstream.size()) throw InputError("more outputs than upstream moments");
  const IndexList train = index_range(0, n);
  return log_marginal_likelihood(effective_gram(family, params, upstream, train, train), outputs,
                                 params.noise_variance);
}

ConditionalMoments effective_stage_moments(const ConditionalMoments& upstream,
                                           const Eigen::VectorXd& outputs, KernelFamily family,
                                           const LayerParams& params) {
  const Eigen::Index n = outputs.size();
  if (n > upstream.size()) throw InputError("more outputs than upstream moments");
  const IndexList train = index_range(0, n);
  const IndexList rest = index_range(n, upstream.size() - n);
  return condition_on_gram(effective_gram(family, params, upstream, train, train),
                           effective_gram(family, params, upstream, rest, train),
                           effective_gram(family, params, upstream, rest, rest), outputs,
                           params.noise_variance);
}

double hierarchy_lml(const FidelityDataset& data, const CompositionSpec& spec,
                     const Hyperparams& hyperparams) {
  check_hierarchy(data, spec, &hyperparams);
  const Eigen::MatrixXd none(0, data.dimension());
  ConditionalMoments moments = first_stage_moments(
      data.levels[0], spec.families[0], hyperparams.layers[0], downstream_inputs(data, 0, none));
  const std::size_t top = data.level_count() - 1;
  for (std::size_t s = 1; s < top; ++s) {
    check_duplicates_without_noise(data.levels[s].inputs, hyperparams.layers[s].noise_variance);
    moments = effective_stage_moments(moments, data.levels[s].outputs, spec.families[s],
                                      hyperparams.layers[s]);
  }
  check_duplicates_without_noise(data.levels[top].inputs, hyperparams.layers[top].noise_variance);
  return effective_stage_lml(moments, data.levels[top].outputs, spec.families[top],
                             hyperparams.layers[top]);
}

Prediction predict_hierarchy(const FidelityDataset& data, const CompositionSpec& spec,
                             const Hyperparams& hyperparams, const Eigen::MatrixXd& query,
                             bool keep_covariance) {
  check_hierarchy(data, spec, &hyperparams);
  ConditionalMoments moments = first_stage_moments(
      data.levels[0], spec.families[0], hyperparams.layers[0], downstream_inputs(data, 0, query));
  const std::size_t top = data.level_count() - 1;
  for (std::size_t s = 1; s < top; ++s) {
    check_duplicates_without_noise(data.levels[s].inputs, hyperparams.layers[s].noise_variance);
    moments = effective_stage_moments(moments, data.levels[s].outputs, spec.families[s],
                                      hyperparams.layers[s]);
  }
  const auto& level = data.levels[top];
  check_duplicates_without_noise(level.inputs, hyperparams.layers[top].noise_variance);
  const double lml =
      effective_stage_lml(moments, level.outputs, spec.families[top], hyperparams.layers[top]);
  Prediction p = to_prediction(
      effective_stage_moments(moments, level.outputs, spec.families[top], hyperparams.layers[top]),
      keep_covariance);
  p.lml = lml;
  p.noise_variance = hyperparams.layers[top].noise_variance;
  return p;
}

}  // namespace mfgp
