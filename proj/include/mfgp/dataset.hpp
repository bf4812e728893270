#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mfgp {

/// Observations of one fidelity level; inputs are stored one point per row.
struct FidelityLevel {
  Eigen::MatrixXd inputs;
  Eigen::VectorXd outputs;
  double noise_std = 0.0;
  std::string label;

  Eigen::Index size() const { return outputs.size(); }
  bool operator==(const FidelityLevel& other) const;
};

/// Levels ordered from lowest to highest fidelity; all share one input
/// dimension.
struct FidelityDataset {
  std::vector<FidelityLevel> levels;

  std::size_t level_count() const { return levels.size(); }
  Eigen::Index dimension() const;
  const FidelityLevel& highest() const { return levels.back(); }
  bool operator==(const FidelityDataset& other) const = default;
};

/// Throws InputError unless the dataset has at least one level, every level
/// has matching input/output counts and all levels share the input dimension.
void validate(const FidelityDataset& data);
/// Additionally requires every level to be non-empty.
void require_non_empty_levels(const FidelityDataset& data);

/// Shortest decimal string that parses back to the same double.
std::string format_double(double value);

/// CSV with header `x_1,...,x_d,y,fidelity_level` (1 = lowest fidelity),
/// preceded by optional `# level,<k>,<label>,<noise_std>` metadata lines.
void write_csv(const FidelityDataset& data, std::ostream& out);
std::string to_csv(const FidelityDataset& data);
FidelityDataset read_csv(std::istream& in);

void save_csv(const FidelityDataset& data, const std::filesystem::path& path);
/// Throws InputError for missing or empty files and ParseError (with the
/// offending line) for malformed content.
FidelityDataset load_csv(const std::filesystem::path& path);

/// FNV-1a 64-bit hash of the CSV serialization, as 16 hex digits.
std::string fingerprint(const FidelityDataset& data);

}  // namespace mfgp
