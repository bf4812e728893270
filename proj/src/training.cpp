#include "mfgp/training.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "mfgp/errors.hpp"
#include "mfgp/hierarchy.hpp"
#include "mfgp/moments.hpp"
#include "mfgp/random.hpp"

namespace mfgp {

namespace {

struct LayerBounds {
  Eigen::Vector3d lower;
  Eigen::Vector3d upper;
};

LayerBounds layer_bounds(const ParameterBounds& b) {
  return {Eigen::Vector3d(std::log(b.min_variance), std::log(b.min_lengthscale),
                          std::log(b.min_noise)),
          Eigen::Vector3d(std::log(b.max_variance), std::log(b.max_lengthscale),
                          std::log(b.max_noise))};
}

Bounds stacked_bounds(const ParameterBounds& b, std::size_t layers) {
  const LayerBounds one = layer_bounds(b);
  Bounds out{Eigen::VectorXd(3 * static_cast<Eigen::Index>(layers)),
             Eigen::VectorXd(3 * static_cast<Eigen::Index>(layers))};
  for (std::size_t l = 0; l < layers; ++l) {
    out.lower.segment<3>(3 * static_cast<Eigen::Index>(l)) = one.lower;
    out.upper.segment<3>(3 * static_cast<Eigen::Index>(l)) = one.upper;
  }
  return out;
}

double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

double column_scale(const Eigen::MatrixXd& x) {
  if (x.rows() < 2) return 1.0;
  double total = 0.0;
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double mean = x.col(c).mean();
    total += std::sqrt((x.col(c).array() - mean).square().sum() / static_cast<double>(x.rows() - 1));
  }
  const double s = total / static_cast<double>(x.cols());
  return s > 0.0 ? s : 1.0;
}

// Data-driven starting point: second moment of the outputs as the signal
// variance, spread of the (possibly warped) inputs as the lengthscale.
LayerParams default_layer(const Eigen::VectorXd& outputs, double input_scale,
                          const ParameterBounds& b) {
  const double second_moment = outputs.size() > 0 ? outputs.squaredNorm() / outputs.size() : 1.0;
  const double variance = clamp(second_moment > 0.0 ? second_moment : 1.0, b.min_variance,
                                b.max_variance);
  return {variance, clamp(input_scale, b.min_lengthscale, b.max_lengthscale),
          clamp(1e-2 * variance, b.min_noise, b.max_noise)};
}

double log_uniform(Rng& rng, double lo, double hi) {
  return std::exp(rng.uniform(std::log(lo), std::log(hi)));
}

LayerParams random_layer(Rng& rng, const ParameterBounds& b) {
  return {clamp(log_uniform(rng, 1e-2, 1e1), b.min_variance, b.max_variance),
          clamp(log_uniform(rng, 1e-2, 1e1), b.min_lengthscale, b.max_lengthscale),
          clamp(log_uniform(rng, 1e-6, 1e-1), b.min_noise, b.max_noise)};
}

Eigen::Vector3d to_log(const LayerParams& p) {
  return {std::log(p.variance), std::log(p.lengthscale), std::log(p.noise_variance)};
}

LayerParams from_log(const Eigen::Ref<const Eigen::VectorXd>& v) {
  return {std::exp(v(0)), std::exp(v(1)), std::exp(v(2))};
}

// Starting points for a run: restart 0 is `preferred`; with log-uniform
// initialization the remaining restarts are random draws.
template <typename RandomStart>
std::vector<Eigen::VectorXd> starting_points(const TrainConfig& config,
                                             const Eigen::VectorXd& preferred,
                                             std::uint64_t stream, RandomStart random_start) {
  std::vector<Eigen::VectorXd> out{preferred};
  if (config.init == InitStrategy::fixed) return out;
  Rng rng(config.seed, 1000 + stream);
  for (int r = 1; r < config.restarts; ++r) out.push_back(random_start(rng));
  return out;
}

OptimizerOptions optimizer_options(const TrainConfig& config) {
  return {config.optimizer, config.max_iters, config.convergence_tol, config.learning_rate};
}

OptimizationResult best_of(const Objective& objective, const std::vector<Eigen::VectorXd>& starts,
                           const Bounds& bounds, const TrainConfig& config) {
  std::optional<OptimizationResult> best;
  std::string last_error = "no restarts";
  for (const auto& start : starts) {
    try {
      auto r = maximize(objective, start, bounds, optimizer_options(config));
      if (!best || r.value > best->value) best = std::move(r);
    } catch (const NumericalError& e) {
      last_error = e.what();
    }
  }
  if (!best) throw NumericalError("every restart failed: " + last_error);
  return *best;
}

Objective base_objective(const FidelityLevel& level, KernelFamily family) {
  return [&level, family](const Eigen::VectorXd& x) {
    const LayerParams p = from_log(x);
    const BaseKernel k{family, p.variance, p.lengthscale};
    const GramDerivatives d = gram_derivatives(k, level.inputs, level.inputs);
    Eigen::MatrixXd cov = d.d_log_variance;
    cov.diagonal().array() += p.noise_variance;
    const std::array<Eigen::MatrixXd, 3> dk = {
        d.d_log_variance, d.d_log_lengthscale,
        p.noise_variance * Eigen::MatrixXd::Identity(level.size(), level.size())};
    return lml_with_gradient(cov, level.outputs, dk);
  };
}

Objective effective_objective(const ConditionalMoments& upstream, const Eigen::VectorXd& outputs,
                              KernelFamily family) {
  return [&upstream, &outputs, family](const Eigen::VectorXd& x) {
    const LayerParams p = from_log(x);
    const Eigen::Index n = outputs.size();
    Eigen::MatrixXd k(n, n);
    Eigen::MatrixXd dl(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto part =
            effective_kernel_partials(family, p.variance, p.lengthscale,
                                      upstream.mean(i) - upstream.mean(j),
                                      delta_squared(upstream, i, j));
        k(i, j) = part.value;
        dl(i, j) = p.lengthscale * part.d_lengthscale;
      }
    }
    Eigen::MatrixXd cov = k;
    cov.diagonal().array() += p.noise_variance;
    const std::array<Eigen::MatrixXd, 3> dk = {k, dl,
                                               p.noise_variance * Eigen::MatrixXd::Identity(n, n)};
    return lml_with_gradient(cov, outputs, dk);
  };
}

BaseFit fit_effective_stage(const ConditionalMoments& upstream, const FidelityLevel& level,
                            KernelFamily family, const TrainConfig& config, std::uint64_t stream,
                            const std::optional<LayerParams>& initial) {
  const Eigen::Index n = level.size();
  const double warped_scale = column_scale(upstream.mean.head(n));
  const LayerParams preferred =
      initial ? *initial : default_layer(level.outputs, warped_scale, config.bounds);
  const LayerBounds lb = layer_bounds(config.bounds);
  const Bounds bounds{lb.lower, lb.upper};
  const auto starts = starting_points(config, to_log(preferred), stream, [&](Rng& rng) {
    return Eigen::VectorXd(to_log(random_layer(rng, config.bounds)));
  });
  const auto best =
      best_of(effective_objective(upstream, level.outputs, family), starts, bounds, config);
  return {from_log(best.x), best.value, best.trace};
}

std::optional<LayerParams> initial_layer(const TrainConfig& config, std::size_t level) {
  if (!config.initial || config.initial->layers.size() <= level) return std::nullopt;
  return config.initial->layers[level];
}

}  // namespace

std::string_view to_string(TrainMode mode) noexcept {
  return mode == TrainMode::sequential ? "sequential" : "joint";
}

TrainMode parse_mode(std::string_view text) {
  if (text == "sequential") return TrainMode::sequential;
  if (text == "joint") return TrainMode::joint;
  throw InputError("unknown training mode '" + std::string(text) + "'");
}

std::string_view to_string(InitStrategy init) noexcept {
  return init == InitStrategy::fixed ? "fixed" : "log-uniform";
}

InitStrategy parse_init(std::string_view text) {
  if (text == "fixed") return InitStrategy::fixed;
  if (text == "log-uniform") return InitStrategy::log_uniform;
  throw InputError("unknown initialization '" + std::string(text) + "'");
}

void validate(const TrainConfig& config) {
  if (config.max_iters < 1) throw InputError("max_iters must be at least 1");
  if (config.restarts < 1) throw InputError("restarts must be at least 1");
  if (!(config.convergence_tol > 0.0)) throw InputError("convergence_tol must be positive");
  if (!(config.learning_rate >= 0.0)) throw InputError("learning_rate must be non-negative");
  const auto& b = config.bounds;
  if (!(0.0 < b.min_variance && b.min_variance < b.max_variance) ||
      !(0.0 < b.min_lengthscale && b.min_lengthscale < b.max_lengthscale) ||
      !(0.0 < b.min_noise && b.min_noise < b.max_noise)) {
    throw InputError("parameter bounds must be positive and ordered");
  }
  if (config.initial) validate(*config.initial);
}

BaseFit fit_base_gp(const FidelityLevel& level, KernelFamily family, const TrainConfig& config,
                    std::uint64_t stream) {
  validate(config);
  if (level.size() == 0) throw InputError("cannot fit a GP to an empty level");
  if (level.inputs.rows() != level.outputs.size()) {
    throw InputError("level inputs and outputs differ in length");
  }
  const auto initial = initial_layer(config, 0);
  const LayerParams preferred =
      initial ? *initial : default_layer(level.outputs, column_scale(level.inputs), config.bounds);
  const LayerBounds lb = layer_bounds(config.bounds);
  const auto starts = starting_points(config, to_log(preferred), stream, [&](Rng& rng) {
    return Eigen::VectorXd(to_log(random_layer(rng, config.bounds)));
  });
  const auto best =
      best_of(base_objective(level, family), starts, Bounds{lb.lower, lb.upper}, config);
  return {from_log(best.x), best.value, best.trace};
}

TrainResult train_sequential(const FidelityDataset& data, const CompositionSpec& spec,
                             const TrainConfig& config) {
  check_hierarchy(data, spec);
  validate(config);
  TrainResult result;
  result.spec = spec;
  result.mode = TrainMode::sequential;

  const BaseFit first = fit_base_gp(data.levels[0], spec.families[0], config, 0);
  result.hyperparams.layers.push_back(first.params);
  result.stage_lml.push_back(first.lml);
  result.trace = first.trace;

  const Eigen::MatrixXd none(0, data.dimension());
  ConditionalMoments moments = first_stage_moments(data.levels[0], spec.families[0], first.params,
                                                   downstream_inputs(data, 0, none));
  const std::size_t top = data.level_count() - 1;
  for (std::size_t s = 1; s <= top; ++s) {
    const BaseFit fit = fit_effective_stage(moments, data.levels[s], spec.families[s], config, s,
                                            initial_layer(config, s));
    result.hyperparams.layers.push_back(fit.params);
    result.stage_lml.push_back(fit.lml);
    result.trace = fit.trace;
    if (s < top) {
      moments = effective_stage_moments(moments, data.levels[s].outputs, spec.families[s],
                                        fit.params);
    }
  }
  result.lml = hierarchy_lml(data, spec, result.hyperparams);
  return result;
}

TrainResult train_joint(const FidelityDataset& data, const CompositionSpec& spec,
                        const TrainConfig& config) {
  check_hierarchy(data, spec);
  validate(config);
  if (data.level_count() != 2) {
    throw InputError("joint training supports two fidelity levels; use sequential training");
  }
  Hyperparams preferred;
  if (config.initial && config.initial->layers.size() == 2) {
    preferred = *config.initial;
  } else {
    preferred.layers = {
        default_layer(data.levels[0].outputs, column_scale(data.levels[0].inputs), config.bounds),
        default_layer(data.levels[1].outputs, column_scale(data.levels[0].outputs), config.bounds)};
  }
  const auto starts = starting_points(config, preferred.to_log(), 0, [&](Rng& rng) {
    Hyperparams hp;
    hp.layers = {random_layer(rng, config.bounds), random_layer(rng, config.bounds)};
    return hp.to_log();
  });
  const Objective objective = [&](const Eigen::VectorXd& x) {
    return lml_gradient_joint(data, Hyperparams::from_log(x), spec);
  };
  const auto best = best_of(objective, starts, stacked_bounds(config.bounds, 2), config);

  TrainResult result;
  result.spec = spec;
  result.mode = TrainMode::joint;
  result.hyperparams = Hyperparams::from_log(best.x);
  result.trace = best.trace;
  result.lml = hierarchy_lml(data, spec, result.hyperparams);
  return result;
}

TrainResult train(const FidelityDataset& data, const CompositionSpec& spec,
                  const TrainConfig& config) {
  return config.mode == TrainMode::joint ? train_joint(data, spec, config)
                                         : train_sequential(data, spec, config);
}

LmlWithGradient lml_gradient_joint(const FidelityDataset& data, const Hyperparams& hyperparams,
                                   const CompositionSpec& spec,
                                   const JointGradientOptions& options) {
  check_hierarchy(data, spec, &hyperparams);
  if (data.level_count() != 2) throw InputError("joint gradient needs exactly two levels");
  const FidelityLevel& low = data.levels[0];
  const FidelityLevel& high = data.levels[1];
  const LayerParams& p1 = hyperparams.layers[0];
  const LayerParams& p2 = hyperparams.layers[1];
  const BaseKernel k1{spec.families[0], p1.variance, p1.lengthscale};
  const Eigen::Index n1 = low.size();
  const Eigen::Index n = high.size();
  check_duplicates_without_noise(low.inputs, p1.noise_variance);
  check_duplicates_without_noise(high.inputs, p2.noise_variance);

  // Level-1 posterior at the high-fidelity inputs: m = K_x1 a, C = K_xx - W K_1x.
  const GramDerivatives d11 = gram_derivatives(k1, low.inputs, low.inputs);
  const GramDerivatives dx1 = gram_derivatives(k1, high.inputs, low.inputs);
  const GramDerivatives dxx = gram_derivatives(k1, high.inputs, high.inputs);
  Eigen::MatrixXd k11 = d11.d_log_variance;
  k11.diagonal().array() += p1.noise_variance;
  const JitteredCholesky chol(k11);
  const Eigen::MatrixXd& kx1 = dx1.d_log_variance;
  const Eigen::VectorXd a1 = chol.solve(low.outputs);
  const Eigen::MatrixXd w = chol.solve(Eigen::MatrixXd(kx1.transpose())).transpose();
  ConditionalMoments moments{kx1 * a1, dxx.d_log_variance - w * kx1.transpose()};
  moments.covariance = 0.5 * (moments.covariance + moments.covariance.transpose());

  const Eigen::MatrixXd zero_x1 = Eigen::MatrixXd::Zero(n, n1);
  const Eigen::MatrixXd zero_xx = Eigen::MatrixXd::Zero(n, n);
  const std::array<Eigen::MatrixXd, 3> dk11 = {
      d11.d_log_variance, d11.d_log_lengthscale,
      p1.noise_variance * Eigen::MatrixXd::Identity(n1, n1)};
  const std::array<const Eigen::MatrixXd*, 3> dkx1 = {&dx1.d_log_variance, &dx1.d_log_lengthscale,
                                                      &zero_x1};
  const std::array<const Eigen::MatrixXd*, 3> dkxx = {&dxx.d_log_variance, &dxx.d_log_lengthscale,
                                                      &zero_xx};
  std::array<Eigen::VectorXd, 3> dm;
  std::array<Eigen::MatrixXd, 3> dc;
  for (std::size_t p = 0; p < 3; ++p) {
    // d(K^{-1}) = -K^{-1} dK K^{-1}
    dm[p] = *dkx1[p] * a1 - w * (dk11[p] * a1);
    const Eigen::MatrixXd cross = *dkx1[p] * w.transpose();
    dc[p] = *dkxx[p] - cross - cross.transpose() + w * dk11[p] * w.transpose();
  }

  const KernelFamily outer = spec.families[1];
  Eigen::MatrixXd keff(n, n);
  std::array<Eigen::MatrixXd, 6> dk;
  for (auto& m : dk) m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto part =
          effective_kernel_partials(outer, p2.variance, p2.lengthscale,
                                    moments.mean(i) - moments.mean(j),
                                    delta_squared(moments, i, j));
      keff(i, j) = part.value;
      if (i != j) {
        for (std::size_t p = 0; p < 3; ++p) {
          double v = 0.0;
          if (!options.freeze_covariance) {
            v += part.d_delta2 * (dc[p](i, i) + dc[p](j, j) - 2.0 * dc[p](i, j));
          }
          if (!options.freeze_mean) v += part.d_mean_diff * (dm[p](i) - dm[p](j));
          dk[p](i, j) = v;
        }
      }
      dk[4](i, j) = p2.lengthscale * part.d_lengthscale;
    }
  }
  dk[3] = keff;
  dk[5] = p2.noise_variance * Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd cov = keff;
  cov.diagonal().array() += p2.noise_variance;
  auto out = lml_with_gradient(cov, high.outputs, dk);
  if (!out.gradient.allFinite()) {
    std::string snapshot;
    for (const auto& l : hyperparams.layers) {
      snapshot += " (" + std::to_string(l.variance) + ", " + std::to_string(l.lengthscale) + ", " +
                  std::to_string(l.noise_variance) + ")";
    }
    throw NumericalError("non-finite joint gradient at hyperparameters" + snapshot);
  }
  return out;
}

Prediction predict(const TrainResult& trained, const FidelityDataset& data,
                   const Eigen::MatrixXd& query) {
  return predict_hierarchy(data, trained.spec, trained.hyperparams, query);
}

}  // namespace mfgp
