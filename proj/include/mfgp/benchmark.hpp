#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mfgp/dataset.hpp"
#include "mfgp/gp.hpp"
#include "mfgp/scenarios.hpp"
#include "mfgp/training.hpp"

namespace mfgp {

/// Affine map to the unit box and per-level output standardization.
struct Normalizer {
  Eigen::VectorXd input_lower;
  Eigen::VectorXd input_scale;
  std::vector<double> output_mean;
  std::vector<double> output_scale;

  static Normalizer identity(Eigen::Index dim, std::size_t levels);
  static Normalizer fit(const FidelityDataset& data, const InputBox& box);

  FidelityDataset apply(const FidelityDataset& data) const;
  Eigen::MatrixXd apply_inputs(const Eigen::MatrixXd& x) const;
  /// Maps a prediction of the highest level back to original output units.
  Prediction restore(Prediction prediction) const;
};

/// Model ids: a composition string ("SE[SE]", "SC[SC[SE]]"), "AR1" or "GP".
bool is_baseline_model(std::string_view model);
/// Whether `model` can run on a scenario with `levels` fidelity levels.
bool model_fits_scenario(std::string_view model, std::size_t levels);

/// Fits `model` to `data` and predicts the highest level at `query`.
Prediction fit_and_predict(std::string_view model, const FidelityDataset& data,
                           const Eigen::MatrixXd& query, const TrainConfig& config);

struct BenchmarkConfig {
  std::vector<std::string> models;
  std::vector<std::string> scenarios;
  std::vector<std::uint64_t> seeds;
  TrainConfig train;
  /// Test points per cell; 1-D generators use an evenly spaced grid.
  int test_count = 500;
  /// Normalize inputs to the unit box and outputs per level before fitting
  /// (metrics stay in original units). Applied to non-unit-box generators.
  bool normalize = true;
};

struct BenchmarkRow {
  std::string model;
  std::string scenario;
  std::optional<std::uint64_t> seed;  // empty on aggregate rows
  std::string status;                 // "ok", "failed: ..." or "median"
  double mnll = 0.0;
  double rmse = 0.0;
  double coverage = 0.0;
  double mean_variance = 0.0;
  double wall_seconds = 0.0;
  int count = 1;
};

/// One cell: generate, fit, predict, score.
BenchmarkRow run_cell(const std::string& model, const std::string& scenario, std::uint64_t seed,
                      const BenchmarkConfig& config);

/// Every compatible (model, scenario, seed) cell followed by one median row
/// per (model, scenario). Failures become rows with a status; the sweep
/// continues.
std::vector<BenchmarkRow> run_benchmark(const BenchmarkConfig& config);

void write_benchmark_csv(const std::vector<BenchmarkRow>& rows, std::ostream& out,
                         bool include_timing);

}  // namespace mfgp
