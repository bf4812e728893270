#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "mfgp/dataset.hpp"

namespace mfgp {

/// Closed-form test functions. Inputs of the multivariate functions follow
/// the emukit column order (see docs/benchmarks.md).
namespace functions {

double synthetic_a_low(double x);   // sin(8 pi x)
double synthetic_a_high(double x);  // (x - sqrt 2) sin^2(8 pi x)
double synthetic_b_low(double x);   // cos(15 x)
double synthetic_b_high(double x);  // x exp(cos(15 (2x - 0.2))) - 1

double borehole_high(const Eigen::Ref<const Eigen::VectorXd>& x);
double borehole_low(const Eigen::Ref<const Eigen::VectorXd>& x);

double branin_high(const Eigen::Ref<const Eigen::VectorXd>& x);
double branin_medium(const Eigen::Ref<const Eigen::VectorXd>& x);
double branin_low(const Eigen::Ref<const Eigen::VectorXd>& x);

}  // namespace functions

struct InputBox {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Eigen::Index dimension() const { return lower.size(); }
  bool contains(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

/// Which generator to run, with per-level sample counts and noise standard
/// deviations (lowest fidelity first). Empty vectors mean generator defaults.
struct ScenarioSpec {
  std::string generator;
  std::uint64_t seed = 0;
  std::vector<int> counts;
  std::vector<double> noise_std;
};

/// All generator ids accepted by `generate`.
const std::vector<std::string>& generator_ids();
/// Number of fidelity levels a generator produces.
std::size_t generator_levels(std::string_view generator);
InputBox generator_box(std::string_view generator);

/// Noise-free values of generator level `level` (0 = lowest) at each row of `x`.
Eigen::VectorXd evaluate_level(std::string_view generator, std::size_t level,
                               const Eigen::MatrixXd& x);

/// Realizes a scenario. Pure function of the spec; inputs are uniform on the
/// generator's box, each level from its own random stream.
FidelityDataset generate(const ScenarioSpec& spec);

struct TestSet {
  Eigen::MatrixXd inputs;
  Eigen::VectorXd truth;
};

/// Noise-free highest-fidelity values: an evenly spaced grid on [0, 1] for
/// one-dimensional generators, uniform box samples otherwise.
TestSet make_test_set(const ScenarioSpec& spec, int count);

FidelityDataset gen_synthetic_a(std::uint64_t seed, int n_low = 30, int n_high = 10);
FidelityDataset gen_synthetic_b(std::uint64_t seed, int n_low = 30, int n_high = 15);
/// Identity, tanh, sin(4 pi x) and sin(8 pi x) low-fidelity variants sharing
/// the synthetic-a high-fidelity observations.
std::vector<FidelityDataset> gen_compositional_variants(std::uint64_t seed, double low_noise_std = 0.0,
                                                        int n_low = 30, int n_high = 10);
FidelityDataset gen_denoising(std::uint64_t seed, int n_low = 30, int n_high = 15);
FidelityDataset gen_borehole(std::uint64_t seed, int n_low = 150, int n_high = 40);
FidelityDataset gen_branin(std::uint64_t seed, int n_low = 80, int n_mid = 40, int n_high = 20);

}  // namespace mfgp
