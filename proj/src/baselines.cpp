#include "mfgp/baselines.hpp"

#include <array>
#include <cmath>
#include <string>

#include "mfgp/errors.hpp"
#include "mfgp/random.hpp"

namespace mfgp {

namespace {

// [alpha, log v, log l, log s_low, log v_h, log l_h, log s_high]
AR1Params unpack(const Eigen::VectorXd& x) {
  AR1Params p;
  p.alpha = x(0);
  p.low = {KernelFamily::SE, std::exp(x(1)), std::exp(x(2))};
  p.low_noise_variance = std::exp(x(3));
  p.residual = {KernelFamily::SE, std::exp(x(4)), std::exp(x(5))};
  p.high_noise_variance = std::exp(x(6));
  return p;
}

Eigen::VectorXd pack(const AR1Params& p) {
  Eigen::VectorXd x(7);
  x << p.alpha, std::log(p.low.variance), std::log(p.low.lengthscale),
      std::log(p.low_noise_variance), std::log(p.residual.variance),
      std::log(p.residual.lengthscale), std::log(p.high_noise_variance);
  return x;
}

Eigen::VectorXd stacked_outputs(const FidelityDataset& data) {
  const auto& high = data.levels[1];
  const auto& low = data.levels[0];
  Eigen::VectorXd y(high.size() + low.size());
  y << high.outputs, low.outputs;
  return y;
}

Eigen::MatrixXd add_block_noise(Eigen::MatrixXd k, Eigen::Index n_high, double high_noise,
                                double low_noise) {
  k.diagonal().head(n_high).array() += high_noise;
  k.diagonal().tail(k.rows() - n_high).array() += low_noise;
  return k;
}

LmlWithGradient ar1_objective(const FidelityDataset& data, const Eigen::VectorXd& x) {
  const AR1Params p = unpack(x);
  const auto& xh = data.levels[1].inputs;
  const auto& xl = data.levels[0].inputs;
  const Eigen::Index nh = xh.rows();
  const Eigen::Index nl = xl.rows();
  const Eigen::Index n = nh + nl;
  const GramDerivatives dhh = gram_derivatives(p.low, xh, xh);
  const GramDerivatives dhl = gram_derivatives(p.low, xh, xl);
  const GramDerivatives dll = gram_derivatives(p.low, xl, xl);
  const GramDerivatives rhh = gram_derivatives(p.residual, xh, xh);
  const double a = p.alpha;

  auto assemble = [&](const Eigen::MatrixXd& hh, const Eigen::MatrixXd& hl,
                      const Eigen::MatrixXd& ll) {
    Eigen::MatrixXd m(n, n);
    m.topLeftCorner(nh, nh) = hh;
    m.topRightCorner(nh, nl) = hl;
    m.bottomLeftCorner(nl, nh) = hl.transpose();
    m.bottomRightCorner(nl, nl) = ll;
    return m;
  };
  const Eigen::MatrixXd zero_hh = Eigen::MatrixXd::Zero(nh, nh);
  const Eigen::MatrixXd zero_hl = Eigen::MatrixXd::Zero(nh, nl);
  const Eigen::MatrixXd zero_ll = Eigen::MatrixXd::Zero(nl, nl);

  const Eigen::MatrixXd k = add_block_noise(
      assemble(a * a * dhh.d_log_variance + rhh.d_log_variance, a * dhl.d_log_variance,
               dll.d_log_variance),
      nh, p.high_noise_variance, p.low_noise_variance);
  const std::array<Eigen::MatrixXd, 7> dk = {
      assemble(2.0 * a * dhh.d_log_variance, dhl.d_log_variance, zero_ll),
      assemble(a * a * dhh.d_log_variance, a * dhl.d_log_variance, dll.d_log_variance),
      assemble(a * a * dhh.d_log_lengthscale, a * dhl.d_log_lengthscale, dll.d_log_lengthscale),
      assemble(zero_hh, zero_hl, p.low_noise_variance * Eigen::MatrixXd::Identity(nl, nl)),
      assemble(rhh.d_log_variance, zero_hl, zero_ll),
      assemble(rhh.d_log_lengthscale, zero_hl, zero_ll),
      assemble(p.high_noise_variance * Eigen::MatrixXd::Identity(nh, nh), zero_hl, zero_ll)};
  return lml_with_gradient(k, stacked_outputs(data), dk);
}

void check_two_levels(const FidelityDataset& data) {
  validate(data);
  if (data.level_count() != 2) {
    throw InputError("AR1 needs exactly two fidelity levels, got " +
                     std::to_string(data.level_count()));
  }
  if (data.levels[1].size() == 0) throw InputError("high-fidelity level is empty");
}

}  // namespace

Eigen::MatrixXd ar1_joint_gram(const AR1Params& params, const Eigen::MatrixXd& high_inputs,
                               const Eigen::MatrixXd& low_inputs) {
  const Eigen::Index nh = high_inputs.rows();
  const Eigen::Index nl = low_inputs.rows();
  const double a = params.alpha;
  Eigen::MatrixXd k(nh + nl, nh + nl);
  k.topLeftCorner(nh, nh) = a * a * gram(params.low, high_inputs) + gram(params.residual, high_inputs);
  const Eigen::MatrixXd cross = a * gram(params.low, high_inputs, low_inputs);
  k.topRightCorner(nh, nl) = cross;
  k.bottomLeftCorner(nl, nh) = cross.transpose();
  k.bottomRightCorner(nl, nl) = gram(params.low, low_inputs);
  return k;
}

AR1Fit ar1_train(const FidelityDataset& data, const TrainConfig& config) {
  check_two_levels(data);
  validate(config);
  const auto& high = data.levels[1];
  const auto& low = data.levels[0];
  if (low.size() == 0) {
    const BaseFit v = fit_base_gp(high, KernelFamily::SE, config, 0);
    AR1Fit out;
    out.params.alpha = 0.0;
    out.params.residual = {KernelFamily::SE, v.params.variance, v.params.lengthscale};
    out.params.high_noise_variance = v.params.noise_variance;
    out.lml = v.lml;
    return out;
  }

  const auto& b = config.bounds;
  Bounds bounds{Eigen::VectorXd(7), Eigen::VectorXd(7)};
  bounds.lower << -1e3, std::log(b.min_variance), std::log(b.min_lengthscale),
      std::log(b.min_noise), std::log(b.min_variance), std::log(b.min_lengthscale),
      std::log(b.min_noise);
  bounds.upper << 1e3, std::log(b.max_variance), std::log(b.max_lengthscale),
      std::log(b.max_noise), std::log(b.max_variance), std::log(b.max_lengthscale),
      std::log(b.max_noise);

  // Restart 0: both kernels sized from the data; others log-uniform draws.
  AR1Params start;
  const double low_var = std::max(low.outputs.squaredNorm() / low.size(), 1e-2);
  const double high_var = std::max(high.outputs.squaredNorm() / high.size(), 1e-2);
  start.low = {KernelFamily::SE, low_var, 0.2};
  start.residual = {KernelFamily::SE, 0.1 * high_var, 0.2};
  start.low_noise_variance = 1e-2 * low_var;
  start.high_noise_variance = 1e-2 * high_var;
  std::vector<Eigen::VectorXd> starts{bounds.clamp(pack(start))};
  if (config.init == InitStrategy::log_uniform) {
    Rng rng(config.seed, 2000);
    auto draw = [&](double lo, double hi) {
      return rng.uniform(std::log(lo), std::log(hi));
    };
    for (int r = 1; r < config.restarts; ++r) {
      Eigen::VectorXd x(7);
      x << 1.0, draw(1e-2, 1e1), draw(1e-2, 1e1), draw(1e-6, 1e-1), draw(1e-2, 1e1),
          draw(1e-2, 1e1), draw(1e-6, 1e-1);
      starts.push_back(bounds.clamp(x));
    }
  }
  const Objective objective = [&data](const Eigen::VectorXd& x) { return ar1_objective(data, x); };
  const OptimizerOptions options{config.optimizer, config.max_iters, config.convergence_tol,
                                 config.learning_rate};
  std::optional<OptimizationResult> best;
  std::string last_error = "no restarts";
  for (const auto& s : starts) {
    try {
      auto r = maximize(objective, s, bounds, options);
      if (!best || r.value > best->value) best = std::move(r);
    } catch (const NumericalError& e) {
      last_error = e.what();
    }
  }
  if (!best) throw NumericalError("AR1 training failed: " + last_error);
  return {unpack(best->x), best->value};
}

Prediction ar1_predict(const AR1Fit& fit, const FidelityDataset& data,
                       const Eigen::MatrixXd& query) {
  check_two_levels(data);
  const auto& p = fit.params;
  const auto& xh = data.levels[1].inputs;
  const auto& xl = data.levels[0].inputs;
  if (query.cols() != xh.cols()) throw InputError("query dimension differs from data dimension");
  const Eigen::Index nh = xh.rows();
  const Eigen::Index nl = xl.rows();
  Eigen::MatrixXd cross(query.rows(), nh + nl);
  cross.leftCols(nh) = p.alpha * p.alpha * gram(p.low, query, xh) + gram(p.residual, query, xh);
  if (nl > 0) cross.rightCols(nl) = p.alpha * gram(p.low, query, xl);
  const Eigen::MatrixXd prior = p.alpha * p.alpha * gram(p.low, query) + gram(p.residual, query);
  Eigen::MatrixXd train(nh + nl, nh + nl);
  if (nl > 0) {
    train = add_block_noise(ar1_joint_gram(p, xh, xl), nh, p.high_noise_variance,
                            p.low_noise_variance);
  } else {
    train = p.alpha * p.alpha * gram(p.low, xh) + gram(p.residual, xh);
    train.diagonal().array() += p.high_noise_variance;
  }
  Eigen::VectorXd y(nh + nl);
  y << data.levels[1].outputs, data.levels[0].outputs;
  Prediction out = to_prediction(condition_on_gram(train, cross, prior, y, 0.0));
  out.noise_variance = p.high_noise_variance;
  out.lml = fit.lml;
  return out;
}

Prediction ar1_train_predict(const FidelityDataset& data, const Eigen::MatrixXd& query,
                             const TrainConfig& config) {
  return ar1_predict(ar1_train(data, config), data, query);
}

VanillaFit vanilla_train(const FidelityLevel& high, const TrainConfig& config) {
  const BaseFit fit = fit_base_gp(high, KernelFamily::SE, config, 0);
  return {{KernelFamily::SE, fit.params.variance, fit.params.lengthscale},
          fit.params.noise_variance,
          fit.lml};
}

Prediction vanilla_predict(const VanillaFit& fit, const FidelityLevel& high,
                           const Eigen::MatrixXd& query) {
  Prediction out =
      posterior_predict(fit.kernel, high.inputs, high.outputs, fit.noise_variance, query)
          .prediction;
  out.covariance.resize(0, 0);
  return out;
}

Prediction vanilla_gp(const FidelityLevel& high, const Eigen::MatrixXd& query,
                      const TrainConfig& config) {
  return vanilla_predict(vanilla_train(high, config), high, query);
}

}  // namespace mfgp
