#include "mfgp/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "mfgp/benchmark.hpp"
#include "mfgp/errors.hpp"
#include "mfgp/hierarchy.hpp"
#include "mfgp/metrics.hpp"
#include "mfgp/sampling.hpp"
#include "mfgp/scenarios.hpp"

namespace mfgp::cli {

namespace {

// Raised for configuration problems detected before any computation.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <typename T>
std::string join(const std::vector<T>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) s += ',';
    if constexpr (std::is_floating_point_v<T>) {
      s += format_double(values[i]);
    } else {
      s += std::to_string(values[i]);
    }
  }
  return s;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  return parts;
}

double to_double(const std::string& text, const std::string& what) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw InputError("bad number for " + what + ": '" + text + "'");
  return v;
}

template <typename Int>
Int to_integer(const std::string& text, const std::string& what) {
  Int v = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw InputError("bad integer for " + what + ": '" + text + "'");
  return v;
}

void write_text(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
    return;
  }
  const auto target = output_path(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  std::ofstream f(target, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + target.string());
  f << content;
  if (!f) throw std::runtime_error("failed writing " + target.string());
}

std::string input_header(Eigen::Index dim) {
  if (dim == 1) return "x";
  std::string h;
  for (Eigen::Index c = 0; c < dim; ++c) h += (c ? ",x_" : "x_") + std::to_string(c + 1);
  return h;
}

void write_row_inputs(std::ostream& out, const Eigen::MatrixXd& x, Eigen::Index i) {
  for (Eigen::Index c = 0; c < x.cols(); ++c) out << (c ? "," : "") << format_double(x(i, c));
}

Eigen::MatrixXd grid_1d(double lo, double hi, int count) {
  Eigen::MatrixXd g(count, 1);
  for (int i = 0; i < count; ++i) {
    g(i, 0) = count == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * static_cast<double>(i) / (count - 1);
  }
  return g;
}

struct QueryFile {
  Eigen::MatrixXd inputs;
  std::optional<Eigen::VectorXd> truth;
};

// Header names input columns x or x_1..x_d; an optional `truth` column.
QueryFile read_query_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open query file " + path.string());
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    header = split(line, ',');
    break;
  }
  if (header.empty()) throw InputError("query file " + path.string() + " is empty");
  std::vector<int> input_cols;
  int truth_col = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "truth") {
      truth_col = static_cast<int>(c);
    } else if (header[c] == "x" || header[c].rfind("x_", 0) == 0) {
      input_cols.push_back(static_cast<int>(c));
    }
  }
  if (input_cols.empty()) throw ParseError("query header has no input columns", line_no);
  std::vector<std::vector<double>> rows;
  std::vector<double> truth;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split(line, ',');
    if (cells.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " columns", line_no);
    }
    std::vector<double> row;
    try {
      for (int c : input_cols) row.push_back(to_double(cells[c], header[c]));
      if (truth_col >= 0) truth.push_back(to_double(cells[truth_col], "truth"));
    } catch (const InputError& e) {
      throw ParseError(e.what(), line_no);
    }
    rows.push_back(std::move(row));
  }
  QueryFile q;
  q.inputs.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(input_cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < input_cols.size(); ++c) q.inputs(i, c) = rows[i][c];
  }
  if (truth_col >= 0) q.truth = Eigen::Map<Eigen::VectorXd>(truth.data(), truth.size());
  return q;
}

// ---- shared option groups ----

struct SourceOptions {
  std::string generator;
  std::string data;
  std::uint64_t seed = 0;
  std::vector<int> counts;
  std::vector<double> noise;
};

void add_source_options(CLI::App* cmd, SourceOptions& o) {
  auto* gen = cmd->add_option("--generator", o.generator, "Scenario generator id");
  auto* data = cmd->add_option("--data", o.data, "Dataset CSV file");
  gen->excludes(data);
  cmd->add_option("--seed", o.seed, "Generator seed");
  cmd->add_option("--counts", o.counts, "Samples per level, lowest first")->delimiter(',');
  cmd->add_option("--noise", o.noise, "Noise std per level, lowest first")->delimiter(',');
}

DataSource make_source(const SourceOptions& o) {
  if (o.generator.empty() && o.data.empty()) throw UsageError("one of --generator or --data is required");
  DataSource s;
  if (!o.data.empty()) {
    if (!o.counts.empty() || !o.noise.empty()) {
      throw UsageError("--counts and --noise apply only to --generator");
    }
    s.csv_path = o.data;
    return s;
  }
  const auto& ids = generator_ids();
  if (std::find(ids.begin(), ids.end(), o.generator) == ids.end()) {
    throw UsageError("unknown generator '" + o.generator + "'");
  }
  const std::size_t levels = generator_levels(o.generator);
  if (!o.counts.empty() && o.counts.size() != levels) {
    throw UsageError("--counts needs " + std::to_string(levels) + " values");
  }
  if (!o.noise.empty() && o.noise.size() != levels) {
    throw UsageError("--noise needs " + std::to_string(levels) + " values");
  }
  for (int c : o.counts) {
    if (c < 1) throw UsageError("--counts entries must be at least 1");
  }
  for (double n : o.noise) {
    if (!(n >= 0.0)) throw UsageError("--noise entries must be non-negative");
  }
  s.generator = o.generator;
  s.seed = o.seed;
  s.counts = o.counts;
  s.noise_std = o.noise;
  return s;
}

struct TrainOptions {
  std::string mode = "sequential";
  std::string optimizer = "quasi-newton";
  std::string init = "log-uniform";
  int max_iters = 200;
  int restarts = 5;
  double tolerance = 1e-5;
  double learning_rate = 0.01;
};

void add_train_options(CLI::App* cmd, TrainOptions& o, bool with_mode) {
  if (with_mode) cmd->add_option("--mode", o.mode, "sequential | joint");
  cmd->add_option("--optimizer", o.optimizer, "quasi-newton | gradient-descent");
  cmd->add_option("--init", o.init, "log-uniform | fixed");
  cmd->add_option("--max-iters", o.max_iters, "Iterations per restart");
  cmd->add_option("--restarts", o.restarts, "Optimizer restarts");
  cmd->add_option("--tol", o.tolerance, "Convergence tolerance");
  cmd->add_option("--learning-rate", o.learning_rate, "Step size for gradient-descent");
}

TrainConfig make_train_config(const TrainOptions& o, std::uint64_t seed) {
  TrainConfig c;
  c.mode = parse_mode(o.mode);
  c.optimizer = parse_optimizer(o.optimizer);
  c.init = parse_init(o.init);
  c.max_iters = o.max_iters;
  c.restarts = o.restarts;
  c.convergence_tol = o.tolerance;
  c.learning_rate = o.learning_rate;
  c.seed = seed;
  validate(c);
  if (!(c.learning_rate >= 0.0)) throw InputError("learning rate must be non-negative");
  return c;
}

std::size_t source_levels_hint(const DataSource& s) {
  return s.is_generator() ? generator_levels(s.generator) : 0;
}

// ---- commands ----

struct TrainArgs {
  SourceOptions source;
  TrainOptions train;
  std::string spec;
  std::string out = "model.txt";
  std::string metrics;
  bool record_timing = false;
};

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  DataSource source;
  CompositionSpec spec;
  TrainConfig config;
  try {
    source = make_source(a.source);
    spec = CompositionSpec::parse(a.spec);
    config = make_train_config(a.train, a.source.seed);
    const std::size_t levels = source_levels_hint(source);
    if (levels != 0 && levels != spec.depth()) {
      throw UsageError("spec " + spec.to_string() + " has depth " + std::to_string(spec.depth()) +
                       " but the dataset has " + std::to_string(levels) + " levels");
    }
    if (config.mode == TrainMode::joint && spec.depth() != 2) {
      throw UsageError("joint training supports two-level compositions only");
    }
  } catch (const InputError& e) {
    throw UsageError(e.what());
  }

  const FidelityDataset data = load_source(source);
  if (data.level_count() != spec.depth()) {
    throw UsageError("spec depth " + std::to_string(spec.depth()) + " does not match " +
                     std::to_string(data.level_count()) + " dataset levels");
  }
  const auto start = std::chrono::steady_clock::now();
  const TrainResult result = train(data, spec, config);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  ModelArtifact model;
  model.spec = spec;
  model.mode = result.mode;
  model.source = source;
  if (source.is_generator()) {
    model.source.counts.clear();
    model.source.noise_std.clear();
    for (const auto& l : data.levels) {
      model.source.counts.push_back(static_cast<int>(l.size()));
      model.source.noise_std.push_back(l.noise_std);
    }
  }
  model.fingerprint = fingerprint(data);
  model.dimension = static_cast<std::size_t>(data.dimension());
  for (const auto& l : data.levels) model.level_sizes.push_back(static_cast<int>(l.size()));
  model.hyperparams = result.hyperparams;
  model.lml = result.lml;
  model.stage_lml = result.stage_lml;
  model.iterations = result.trace.size();

  std::ostringstream model_text;
  write_model(model, model_text);
  write_text(a.out, model_text.str(), out);

  std::ostringstream metrics;
  metrics << "lml = " << format_double(result.lml) << '\n'
          << "stage_lml = " << join(result.stage_lml) << '\n'
          << "iterations = " << result.trace.size() << '\n';
  if (a.record_timing) metrics << "wall_seconds = " << format_double(wall) << '\n';
  const std::string metrics_path = a.metrics.empty() ? a.out + ".metrics" : a.metrics;
  if (a.out.empty() || a.out == "-") {
    err << metrics.str();
  } else {
    write_text(metrics_path, metrics.str(), out);
    out << "model = " << output_path(a.out).string() << '\n'
        << "metrics = " << output_path(metrics_path).string() << '\n'
        << "lml = " << format_double(result.lml) << '\n';
  }
  err << "wall_seconds = " << wall << '\n';
  return kExitOk;
}

struct PredictArgs {
  std::string model;
  std::string data;
  std::string query;
  int grid = 0;
  bool truth = false;
  std::string out;
};

int cmd_predict(const PredictArgs& a, std::ostream& out) {
  if (a.query.empty() && a.grid == 0) throw UsageError("one of --query or --grid is required");
  if (a.grid < 0) throw UsageError("--grid must be positive");

  const ModelArtifact model = load_model(a.model);
  DataSource source = model.source;
  if (!a.data.empty()) {
    source = DataSource{};
    source.csv_path = a.data;
  }
  if (a.truth && a.query.empty() && !source.is_generator()) {
    throw UsageError("--truth with --grid needs a generator-backed model");
  }
  const FidelityDataset data = load_source(source);
  const std::string fp = fingerprint(data);
  if (fp != model.fingerprint) {
    throw std::runtime_error("dataset fingerprint " + fp + " does not match model fingerprint " +
                             model.fingerprint);
  }

  Eigen::MatrixXd query;
  std::optional<Eigen::VectorXd> truth;
  if (!a.query.empty()) {
    QueryFile q = read_query_csv(a.query);
    query = std::move(q.inputs);
    truth = std::move(q.truth);
    if (a.truth && !truth && source.is_generator()) {
      truth = evaluate_level(source.generator, data.level_count() - 1, query);
    }
    if (a.truth && !truth) throw UsageError("--truth needs a truth column or a generator-backed model");
  } else {
    if (data.dimension() != 1) throw UsageError("--grid needs one-dimensional inputs; use --query");
    double lo = 0.0, hi = 1.0;
    if (source.is_generator()) {
      const InputBox box = generator_box(source.generator);
      lo = box.lower(0);
      hi = box.upper(0);
    }
    query = grid_1d(lo, hi, a.grid);
    if (a.truth) truth = evaluate_level(source.generator, data.level_count() - 1, query);
  }
  if (query.cols() != data.dimension()) {
    throw InputError("query has " + std::to_string(query.cols()) + " input columns, model expects " +
                     std::to_string(data.dimension()));
  }

  const Prediction pred = predict_hierarchy(data, model.spec, model.hyperparams, query);
  std::ostringstream csv;
  csv << input_header(query.cols()) << ",mean,std" << (truth ? ",truth" : "") << '\n';
  for (Eigen::Index i = 0; i < query.rows(); ++i) {
    write_row_inputs(csv, query, i);
    csv << ',' << format_double(pred.mean(i)) << ',' << format_double(std::sqrt(pred.variance(i)));
    if (truth) csv << ',' << format_double((*truth)(i));
    csv << '\n';
  }
  csv << "# noise_variance," << format_double(pred.noise_variance) << '\n';
  if (truth && query.rows() > 0) {
    csv << "# mnll," << format_double(mnll(pred, *truth)) << '\n'
        << "# rmse," << format_double(rmse(pred, *truth)) << '\n'
        << "# coverage," << format_double(coverage(pred, *truth)) << '\n';
  }
  write_text(a.out, csv.str(), out);
  return kExitOk;
}

struct SampleArgs {
  SourceOptions source;
  std::string spec;
  int count = 5;
  int grid = 200;
  double variance = 1.0;
  double lengthscale = 0.5;
  std::optional<std::uint64_t> sample_seed;
  bool warping_only = false;
  std::string out;
};

int cmd_sample(const SampleArgs& a, std::ostream& out) {
  DataSource source;
  CompositionSpec spec;
  try {
    source = make_source(a.source);
    spec = CompositionSpec::parse(a.spec);
    if (spec.depth() != 2) throw UsageError("sample needs a two-layer spec such as SE[SE]");
    if (a.count < 0) throw UsageError("--n must be non-negative");
    if (a.grid < 1) throw UsageError("--grid must be positive");
    validate(BaseKernel{spec.outermost(), a.variance, a.lengthscale});
    if (source.is_generator() && generator_box(source.generator).dimension() != 1) {
      throw UsageError("sample needs a one-dimensional generator");
    }
  } catch (const InputError& e) {
    throw UsageError(e.what());
  }
  const FidelityDataset data = load_source(source);
  if (data.dimension() != 1) throw UsageError("sample needs one-dimensional inputs");
  double lo = 0.0, hi = 1.0;
  if (source.is_generator()) {
    const InputBox box = generator_box(source.generator);
    lo = box.lower(0);
    hi = box.upper(0);
  }
  const Eigen::MatrixXd grid = grid_1d(lo, hi, a.grid);

  std::ostringstream csv;
  csv << "x";
  for (int s = 1; s <= a.count; ++s) csv << ",sample_" << s;
  csv << '\n';
  if (a.count > 0) {
    TrainConfig config;
    config.seed = a.source.seed;
    const WarpedPrior prior = warped_prior(data.levels.front(), spec,
                                           {a.variance, a.lengthscale, 0.0}, grid, a.warping_only,
                                           config);
    const Eigen::MatrixXd samples =
        sample_warped_prior(prior, a.count, a.sample_seed.value_or(a.source.seed));
    for (Eigen::Index i = 0; i < grid.rows(); ++i) {
      csv << format_double(grid(i, 0));
      for (int s = 0; s < a.count; ++s) csv << ',' << format_double(samples(s, i));
      csv << '\n';
    }
  }
  write_text(a.out, csv.str(), out);
  return kExitOk;
}

struct BenchmarkArgs {
  std::vector<std::string> scenarios;
  std::vector<std::string> models = {"SE[SE]", "SC[SE]", "SE[SE[SE]]", "SC[SC[SE]]", "AR1", "GP"};
  int seeds = 5;
  std::vector<std::uint64_t> seed_list;
  int test_count = 500;
  TrainOptions train;
  bool record_timing = false;
  bool no_normalize = false;
  std::string out;
};

int cmd_benchmark(const BenchmarkArgs& a, std::ostream& out) {
  BenchmarkConfig config;
  try {
    for (const auto& s : a.scenarios) {
      if (!s.empty()) config.scenarios.push_back(s);
    }
    if (config.scenarios.empty()) throw UsageError("empty scenario list");
    const auto& ids = generator_ids();
    for (const auto& s : config.scenarios) {
      if (std::find(ids.begin(), ids.end(), s) == ids.end()) {
        throw UsageError("unknown scenario '" + s + "'");
      }
    }
    for (const auto& m : a.models) {
      if (m.empty()) continue;
      if (!is_baseline_model(m)) CompositionSpec::parse(m);
      config.models.push_back(m);
    }
    if (config.models.empty()) throw UsageError("empty model list");
    if (!a.seed_list.empty()) {
      config.seeds = a.seed_list;
    } else {
      if (a.seeds < 1) throw UsageError("--seeds must be positive");
      for (int s = 0; s < a.seeds; ++s) config.seeds.push_back(static_cast<std::uint64_t>(s));
    }
    if (a.test_count < 1) throw UsageError("--test-count must be positive");
    config.test_count = a.test_count;
    config.train = make_train_config(a.train, 0);
    config.normalize = !a.no_normalize;
  } catch (const InputError& e) {
    throw UsageError(e.what());
  }
  const auto rows = run_benchmark(config);
  std::ostringstream csv;
  write_benchmark_csv(rows, csv, a.record_timing);
  write_text(a.out, csv.str(), out);
  return kExitOk;
}

}  // namespace

FidelityDataset load_source(const DataSource& source) {
  if (!source.is_generator()) return load_csv(source.csv_path);
  return generate({source.generator, source.seed, source.counts, source.noise_std});
}

void write_model(const ModelArtifact& m, std::ostream& out) {
  out << "# mfgp model\n"
      << "schema_version = " << kModelSchemaVersion << '\n'
      << "spec = " << m.spec.to_string() << '\n'
      << "mode = " << to_string(m.mode) << '\n';
  if (m.source.is_generator()) {
    out << "source.kind = generator\n"
        << "source.generator = " << m.source.generator << '\n'
        << "source.seed = " << m.source.seed << '\n'
        << "source.counts = " << join(m.source.counts) << '\n'
        << "source.noise_std = " << join(m.source.noise_std) << '\n';
  } else {
    out << "source.kind = csv\n"
        << "source.path = " << m.source.csv_path << '\n';
  }
  out << "data.fingerprint = " << m.fingerprint << '\n'
      << "data.dimension = " << m.dimension << '\n'
      << "data.level_sizes = " << join(m.level_sizes) << '\n'
      << "moments.downstream_rows = ";
  // Rows each stage's moments cover at training time (query rows are added at prediction).
  std::vector<int> rows;
  for (std::size_t s = 0; s + 1 < m.level_sizes.size(); ++s) {
    int n = 0;
    for (std::size_t l = s + 1; l < m.level_sizes.size(); ++l) n += m.level_sizes[l];
    rows.push_back(n);
  }
  out << join(rows) << '\n';
  for (std::size_t l = 0; l < m.hyperparams.layers.size(); ++l) {
    const auto& p = m.hyperparams.layers[l];
    const std::string key = "level." + std::to_string(l + 1) + ".";
    out << key << "family = " << to_string(m.spec.families[l]) << '\n'
        << key << "variance = " << format_double(p.variance) << '\n'
        << key << "lengthscale = " << format_double(p.lengthscale) << '\n'
        << key << "noise_variance = " << format_double(p.noise_variance) << '\n';
  }
  out << "lml = " << format_double(m.lml) << '\n'
      << "stage_lml = " << join(m.stage_lml) << '\n'
      << "iterations = " << m.iterations << '\n';
}

ModelArtifact read_model(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_no);
    kv[line.substr(0, eq)] = line.substr(eq + 3);
  }
  auto get = [&kv](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw InputError("model file is missing '" + key + "'");
    return it->second;
  };
  auto doubles = [](const std::string& text, const std::string& what) {
    std::vector<double> v;
    if (text.empty()) return v;
    for (const auto& p : split(text, ',')) v.push_back(to_double(p, what));
    return v;
  };
  auto ints = [](const std::string& text, const std::string& what) {
    std::vector<int> v;
    if (text.empty()) return v;
    for (const auto& p : split(text, ',')) v.push_back(to_integer<int>(p, what));
    return v;
  };

  const int version = to_integer<int>(get("schema_version"), "schema_version");
  if (version != kModelSchemaVersion) {
    throw InputError("unsupported model schema version " + std::to_string(version));
  }
  ModelArtifact m;
  m.spec = CompositionSpec::parse(get("spec"));
  m.mode = parse_mode(get("mode"));
  const std::string& kind = get("source.kind");
  if (kind == "generator") {
    m.source.generator = get("source.generator");
    m.source.seed = to_integer<std::uint64_t>(get("source.seed"), "source.seed");
    m.source.counts = ints(get("source.counts"), "source.counts");
    m.source.noise_std = doubles(get("source.noise_std"), "source.noise_std");
  } else if (kind == "csv") {
    m.source.csv_path = get("source.path");
    if (m.source.csv_path.empty()) throw InputError("model file has an empty source.path");
  } else {
    throw InputError("unknown source.kind '" + kind + "'");
  }
  m.fingerprint = get("data.fingerprint");
  m.dimension = to_integer<std::size_t>(get("data.dimension"), "data.dimension");
  m.level_sizes = ints(get("data.level_sizes"), "data.level_sizes");
  for (std::size_t l = 0; l < m.spec.depth(); ++l) {
    const std::string key = "level." + std::to_string(l + 1) + ".";
    if (parse_family(get(key + "family")) != m.spec.families[l]) {
      throw InputError(key + "family disagrees with spec");
    }
    LayerParams p;
    p.variance = to_double(get(key + "variance"), key + "variance");
    p.lengthscale = to_double(get(key + "lengthscale"), key + "lengthscale");
    p.noise_variance = to_double(get(key + "noise_variance"), key + "noise_variance");
    m.hyperparams.layers.push_back(p);
  }
  validate(m.hyperparams);
  m.lml = to_double(get("lml"), "lml");
  m.stage_lml = doubles(get("stage_lml"), "stage_lml");
  m.iterations = to_integer<std::size_t>(get("iterations"), "iterations");
  return m;
}

ModelArtifact load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file " + path.string());
  return read_model(in);
}

std::filesystem::path output_path(const std::string& path) {
  const std::filesystem::path p(path);
  if (p.is_absolute()) return p;
  if (const char* dir = std::getenv(kOutputDirEnv); dir != nullptr && *dir != '\0') {
    return std::filesystem::path(dir) / p;
  }
  return p;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-fidelity Gaussian-process regression with conditional deep-GP kernels", "mfgp"};
  app.require_subcommand(1);

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Fit a composition model and write a model file");
  add_source_options(train_cmd, train_args.source);
  add_train_options(train_cmd, train_args.train, true);
  train_cmd->add_option("--spec", train_args.spec, "Composition, e.g. SE[SE] or SC[SC[SE]]")->required();
  train_cmd->add_option("--out", train_args.out, "Model file (- for stdout)");
  train_cmd->add_option("--metrics", train_args.metrics, "Metrics file (default: <out>.metrics)");
  train_cmd->add_flag("--record-timing", train_args.record_timing, "Write wall time to the metrics file");

  PredictArgs predict_args;
  auto* predict_cmd = app.add_subcommand("predict", "Predict the highest fidelity with a trained model");
  predict_cmd->add_option("--model", predict_args.model, "Model file")->required();
  predict_cmd->add_option("--data", predict_args.data, "Dataset CSV (overrides the model's source)");
  auto* q = predict_cmd->add_option("--query", predict_args.query, "Query CSV with x or x_1..x_d columns");
  auto* g = predict_cmd->add_option("--grid", predict_args.grid, "Evenly spaced 1-D grid size");
  q->excludes(g);
  predict_cmd->add_flag("--truth", predict_args.truth, "Append generator truth and MNLL/RMSE footer");
  predict_cmd->add_option("--out", predict_args.out, "Predictions CSV (default: stdout)");

  SampleArgs sample_args;
  auto* sample_cmd = app.add_subcommand("sample", "Draw prior samples from a warped effective kernel");
  add_source_options(sample_cmd, sample_args.source);
  sample_cmd->add_option("--spec", sample_args.spec, "Two-layer composition, e.g. SE[SE]")->required();
  sample_cmd->add_option("--n", sample_args.count, "Number of sample paths");
  sample_cmd->add_option("--grid", sample_args.grid, "Grid size");
  sample_cmd->add_option("--variance", sample_args.variance, "Outer kernel variance");
  sample_cmd->add_option("--lengthscale", sample_args.lengthscale, "Outer kernel lengthscale");
  sample_cmd->add_option("--sample-seed", sample_args.sample_seed, "Sampling seed (default: --seed)");
  sample_cmd->add_flag("--warping-only", sample_args.warping_only, "Ignore low-fidelity uncertainty");
  sample_cmd->add_option("--out", sample_args.out, "Samples CSV (default: stdout)");

  BenchmarkArgs bench_args;
  auto* bench_cmd = app.add_subcommand("benchmark", "Score models over scenarios and seeds");
  bench_cmd->add_option("--scenarios", bench_args.scenarios, "Comma-separated generator ids")
      ->required()
      ->delimiter(',');
  bench_cmd->add_option("--models", bench_args.models, "Comma-separated models (specs, AR1, GP)")
      ->delimiter(',');
  auto* seeds = bench_cmd->add_option("--seeds", bench_args.seeds, "Use seeds 0..N-1");
  auto* seed_list = bench_cmd->add_option("--seed-list", bench_args.seed_list, "Explicit seeds")
                        ->delimiter(',');
  seeds->excludes(seed_list);
  bench_cmd->add_option("--test-count", bench_args.test_count, "Test points per cell");
  add_train_options(bench_cmd, bench_args.train, false);
  bench_cmd->add_flag("--no-normalize", bench_args.no_normalize, "Fit in original units");
  bench_cmd->add_flag("--record-timing", bench_args.record_timing, "Add a wall_seconds column");
  bench_cmd->add_option("--out", bench_args.out, "Metrics CSV (default: stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << "run with --help for usage\n";
    return kExitUsage;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(train_args, out, err);
    if (predict_cmd->parsed()) return cmd_predict(predict_args, out);
    if (sample_cmd->parsed()) return cmd_sample(sample_args, out);
    if (bench_cmd->parsed()) return cmd_benchmark(bench_args, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error: line " << e.line() << ": " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace mfgp::cli
