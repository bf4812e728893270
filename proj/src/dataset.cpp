#include "mfgp/dataset.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "mfgp/errors.hpp"

namespace mfgp {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& cell, std::size_t line, std::size_t column) {
  const std::string text = trim(cell);
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (text.empty() || ec != std::errc() || ptr != last) {
    throw ParseError("row " + std::to_string(line) + ", column " + std::to_string(column) +
                         ": '" + text + "' is not a number",
                     line);
  }
  return value;
}

}  // namespace

bool FidelityLevel::operator==(const FidelityLevel& other) const {
  return inputs.rows() == other.inputs.rows() && inputs.cols() == other.inputs.cols() &&
         inputs == other.inputs && outputs.size() == other.outputs.size() &&
         outputs == other.outputs && noise_std == other.noise_std && label == other.label;
}

Eigen::Index FidelityDataset::dimension() const {
  return levels.empty() ? 0 : levels.front().inputs.cols();
}

void validate(const FidelityDataset& data) {
  if (data.levels.empty()) throw InputError("dataset has no fidelity levels");
  const Eigen::Index d = data.dimension();
  if (d < 1) throw InputError("inputs must have at least one column");
  for (std::size_t l = 0; l < data.levels.size(); ++l) {
    const auto& level = data.levels[l];
    if (level.inputs.rows() != level.outputs.size()) {
      throw InputError("level " + std::to_string(l + 1) + " has " +
                       std::to_string(level.inputs.rows()) + " inputs but " +
                       std::to_string(level.outputs.size()) + " outputs");
    }
    if (level.inputs.cols() != d) {
      throw InputError("level " + std::to_string(l + 1) + " has input dimension " +
                       std::to_string(level.inputs.cols()) + ", expected " + std::to_string(d));
    }
    if (!level.inputs.allFinite() || !level.outputs.allFinite()) {
      throw InputError("level " + std::to_string(l + 1) + " contains non-finite values");
    }
  }
}

void require_non_empty_levels(const FidelityDataset& data) {
  validate(data);
  for (std::size_t l = 0; l < data.levels.size(); ++l) {
    if (data.levels[l].size() == 0) {
      throw InputError("fidelity level " + std::to_string(l + 1) + " is empty");
    }
  }
}

std::string format_double(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) throw InputError("cannot format number");
  return std::string(buffer, ptr);
}

void write_csv(const FidelityDataset& data, std::ostream& out) {
  validate(data);
  for (std::size_t l = 0; l < data.levels.size(); ++l) {
    out << "# level," << (l + 1) << ',' << data.levels[l].label << ','
        << format_double(data.levels[l].noise_std) << '\n';
  }
  const Eigen::Index d = data.dimension();
  for (Eigen::Index c = 0; c < d; ++c) out << "x_" << (c + 1) << ',';
  out << "y,fidelity_level\n";
  for (std::size_t l = 0; l < data.levels.size(); ++l) {
    const auto& level = data.levels[l];
    for (Eigen::Index i = 0; i < level.size(); ++i) {
      for (Eigen::Index c = 0; c < d; ++c) out << format_double(level.inputs(i, c)) << ',';
      out << format_double(level.outputs(i)) << ',' << (l + 1) << '\n';
    }
  }
}

std::string to_csv(const FidelityDataset& data) {
  std::ostringstream out;
  write_csv(data, out);
  return out.str();
}

FidelityDataset read_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::map<int, std::pair<std::string, double>> metadata;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      const auto cells = split(t.substr(1), ',');
      if (cells.size() == 4 && trim(cells[0]) == "level") {
        const int level = static_cast<int>(parse_double(cells[1], line_no, 2));
        metadata[level] = {trim(cells[2]), parse_double(cells[3], line_no, 4)};
      }
      continue;
    }
    header = split(t, ',');
    break;
  }
  if (header.empty()) throw InputError("dataset file is empty");
  if (header.size() < 3) throw ParseError("header needs x_1..x_d, y and fidelity_level", line_no);
  const std::size_t d = header.size() - 2;
  for (std::size_t c = 0; c < d; ++c) {
    if (trim(header[c]) != "x_" + std::to_string(c + 1)) {
      throw ParseError("expected column 'x_" + std::to_string(c + 1) + "', found '" +
                           trim(header[c]) + "'",
                       line_no);
    }
  }
  if (trim(header[d]) != "y") throw ParseError("expected column 'y'", line_no);
  if (trim(header[d + 1]) != "fidelity_level") {
    throw ParseError("missing 'fidelity_level' column", line_no);
  }

  std::map<int, std::vector<std::vector<double>>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto cells = split(t, ',');
    if (cells.size() != header.size()) {
      throw ParseError("row " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                           " cells, expected " + std::to_string(header.size()),
                       line_no);
    }
    std::vector<double> values(d + 1);
    for (std::size_t c = 0; c <= d; ++c) values[c] = parse_double(cells[c], line_no, c + 1);
    const double level = parse_double(cells[d + 1], line_no, d + 2);
    if (level < 1.0 || level != static_cast<double>(static_cast<int>(level))) {
      throw ParseError("row " + std::to_string(line_no) +
                           ": fidelity_level must be a positive integer",
                       line_no);
    }
    rows[static_cast<int>(level)].push_back(std::move(values));
  }
  int max_level = rows.empty() ? 0 : rows.rbegin()->first;
  if (!metadata.empty()) max_level = std::max(max_level, metadata.rbegin()->first);
  if (max_level == 0) throw InputError("dataset file has no observations");

  FidelityDataset data;
  for (int level = 1; level <= max_level; ++level) {
    const auto found = rows.find(level);
    const auto meta = metadata.find(level);
    if (found == rows.end() && meta == metadata.end()) {
      throw InputError("fidelity level " + std::to_string(level) + " is missing");
    }
    FidelityLevel out;
    const auto n = found == rows.end() ? 0 : static_cast<Eigen::Index>(found->second.size());
    out.inputs.resize(n, static_cast<Eigen::Index>(d));
    out.outputs.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& r = found->second[static_cast<std::size_t>(i)];
      for (std::size_t c = 0; c < d; ++c) out.inputs(i, static_cast<Eigen::Index>(c)) = r[c];
      out.outputs(i) = r[d];
    }
    if (meta != metadata.end()) {
      out.label = meta->second.first;
      out.noise_std = meta->second.second;
    } else {
      out.label = "level_" + std::to_string(level);
    }
    data.levels.push_back(std::move(out));
  }
  validate(data);
  return data;
}

void save_csv(const FidelityDataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open '" + path.string() + "' for writing");
  write_csv(data, out);
  if (!out) throw InputError("failed writing '" + path.string() + "'");
}

FidelityDataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open dataset '" + path.string() + "'");
  return read_csv(in);
}

std::string fingerprint(const FidelityDataset& data) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const unsigned char c : to_csv(data)) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[hash & 0xf];
    hash >>= 4;
  }
  return out;
}

}  // namespace mfgp
