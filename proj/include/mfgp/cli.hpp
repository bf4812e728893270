#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mfgp/composition.hpp"
#include "mfgp/dataset.hpp"
#include "mfgp/hyperparams.hpp"
#include "mfgp/training.hpp"

namespace mfgp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Environment variable naming the directory for relative output paths.
inline constexpr const char* kOutputDirEnv = "MFGP_OUTPUT_DIR";

/// Where a dataset comes from: a generator (id, seed, counts, noise) or a CSV file.
struct DataSource {
  std::string generator;
  std::uint64_t seed = 0;
  std::vector<int> counts;
  std::vector<double> noise_std;
  std::string csv_path;

  bool is_generator() const { return csv_path.empty(); }
};

FidelityDataset load_source(const DataSource& source);

inline constexpr int kModelSchemaVersion = 1;

/// Trained model as stored on disk. Text, one `key = value` pair per line.
struct ModelArtifact {
  CompositionSpec spec;
  TrainMode mode = TrainMode::sequential;
  DataSource source;
  std::string fingerprint;
  std::size_t dimension = 0;
  std::vector<int> level_sizes;
  Hyperparams hyperparams;
  double lml = 0.0;
  std::vector<double> stage_lml;
  std::size_t iterations = 0;
};

void write_model(const ModelArtifact& model, std::ostream& out);
ModelArtifact read_model(std::istream& in);
ModelArtifact load_model(const std::filesystem::path& path);

/// Resolves a relative output path against $MFGP_OUTPUT_DIR when set.
std::filesystem::path output_path(const std::string& path);

/// Runs the command line; returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mfgp::cli
