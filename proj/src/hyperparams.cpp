#include "mfgp/hyperparams.hpp"

#include <cmath>
#include <string>

#include "mfgp/errors.hpp"

namespace mfgp {

Eigen::VectorXd Hyperparams::to_log() const {
  Eigen::VectorXd out(3 * static_cast<Eigen::Index>(layers.size()));
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto k = 3 * static_cast<Eigen::Index>(l);
    out(k) = std::log(layers[l].variance);
    out(k + 1) = std::log(layers[l].lengthscale);
    out(k + 2) = std::log(layers[l].noise_variance);
  }
  return out;
}

Hyperparams Hyperparams::from_log(const Eigen::VectorXd& log_params) {
  if (log_params.size() % 3 != 0) {
    throw InputError("log-parameter vector length must be a multiple of 3");
  }
  Hyperparams hp;
  for (Eigen::Index k = 0; k < log_params.size(); k += 3) {
    hp.layers.push_back(
        {std::exp(log_params(k)), std::exp(log_params(k + 1)), std::exp(log_params(k + 2))});
  }
  return hp;
}

void validate(const Hyperparams& hyperparams) {
  for (std::size_t l = 0; l < hyperparams.layers.size(); ++l) {
    const auto& p = hyperparams.layers[l];
    const std::string where = "level " + std::to_string(l + 1);
    if (!(p.variance > 0.0) || !std::isfinite(p.variance)) {
      throw InputError(where + ": variance must be positive");
    }
    if (!(p.lengthscale > 0.0) || !std::isfinite(p.lengthscale)) {
      throw InputError(where + ": lengthscale must be positive");
    }
    if (!(p.noise_variance >= 0.0) || !std::isfinite(p.noise_variance)) {
      throw InputError(where + ": noise variance must be non-negative");
    }
  }
}

}  // namespace mfgp
