#include "mfgp/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <ostream>

#include "mfgp/baselines.hpp"
#include "mfgp/composition.hpp"
#include "mfgp/errors.hpp"
#include "mfgp/metrics.hpp"

namespace mfgp {

Normalizer Normalizer::identity(Eigen::Index dim, std::size_t levels) {
  return {Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim),
          std::vector<double>(levels, 0.0), std::vector<double>(levels, 1.0)};
}

Normalizer Normalizer::fit(const FidelityDataset& data, const InputBox& box) {
  Normalizer n;
  n.input_lower = box.lower;
  n.input_scale = box.upper - box.lower;
  for (const auto& level : data.levels) {
    const double mu = level.size() > 0 ? level.outputs.mean() : 0.0;
    double sd = level.size() > 1
                    ? std::sqrt((level.outputs.array() - mu).square().sum() / (level.size() - 1))
                    : 1.0;
    if (!(sd > 0.0)) sd = 1.0;
    n.output_mean.push_back(mu);
    n.output_scale.push_back(sd);
  }
  return n;
}

Eigen::MatrixXd Normalizer::apply_inputs(const Eigen::MatrixXd& x) const {
  return ((x.rowwise() - input_lower.transpose()).array().rowwise() /
          input_scale.transpose().array())
      .matrix();
}

FidelityDataset Normalizer::apply(const FidelityDataset& data) const {
  FidelityDataset out = data;
  for (std::size_t l = 0; l < out.levels.size(); ++l) {
    auto& level = out.levels[l];
    level.inputs = apply_inputs(level.inputs);
    level.outputs = (level.outputs.array() - output_mean[l]) / output_scale[l];
    level.noise_std /= output_scale[l];
  }
  return out;
}

Prediction Normalizer::restore(Prediction p) const {
  const double mu = output_mean.back();
  const double s = output_scale.back();
  p.mean = (p.mean.array() * s + mu).matrix();
  p.variance *= s * s;
  if (p.covariance.size() > 0) p.covariance *= s * s;
  p.noise_variance *= s * s;
  return p;
}

bool is_baseline_model(std::string_view model) { return model == "AR1" || model == "GP"; }

bool model_fits_scenario(std::string_view model, std::size_t levels) {
  if (model == "GP") return levels >= 1;
  if (model == "AR1") return levels >= 2;
  return CompositionSpec::parse(model).depth() == levels;
}

namespace {

FidelityDataset top_levels(const FidelityDataset& data, std::size_t count) {
  FidelityDataset out;
  out.levels.assign(data.levels.end() - static_cast<std::ptrdiff_t>(count), data.levels.end());
  return out;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

Prediction fit_and_predict(std::string_view model, const FidelityDataset& data,
                           const Eigen::MatrixXd& query, const TrainConfig& config) {
  if (model == "GP") return vanilla_gp(data.highest(), query, config);
  if (model == "AR1") return ar1_train_predict(top_levels(data, 2), query, config);
  const CompositionSpec spec = CompositionSpec::parse(model);
  return predict(train(data, spec, config), data, query);
}

BenchmarkRow run_cell(const std::string& model, const std::string& scenario, std::uint64_t seed,
                      const BenchmarkConfig& config) {
  BenchmarkRow row{model, scenario, seed, "ok"};
  const auto start = std::chrono::steady_clock::now();
  try {
    const ScenarioSpec spec{scenario, seed, {}, {}};
    const FidelityDataset data = generate(spec);
    const TestSet test = make_test_set(spec, config.test_count);
    const InputBox box = generator_box(scenario);
    const bool unit_box = (box.lower.array() == 0.0).all() && (box.upper.array() == 1.0).all();
    const Normalizer norm = config.normalize && (!unit_box)
                                ? Normalizer::fit(data, box)
                                : Normalizer::identity(data.dimension(), data.level_count());
    TrainConfig train = config.train;
    train.seed = seed;
    const Prediction pred = norm.restore(
        fit_and_predict(model, norm.apply(data), norm.apply_inputs(test.inputs), train));
    row.mnll = mnll(pred, test.truth);
    row.rmse = rmse(pred, test.truth);
    row.coverage = coverage(pred, test.truth);
    row.mean_variance = mean_variance(pred);
    if (!std::isfinite(row.mnll)) row.status = "failed: non-finite MNLL";
  } catch (const std::exception& e) {
    row.status = std::string("failed: ") + e.what();
  }
  row.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

std::vector<BenchmarkRow> run_benchmark(const BenchmarkConfig& config) {
  if (config.scenarios.empty()) throw InputError("empty scenario list");
  if (config.models.empty()) throw InputError("empty model list");
  if (config.seeds.empty()) throw InputError("empty seed list");
  if (config.test_count < 1) throw InputError("test count must be positive");
  for (const auto& s : config.scenarios) generator_levels(s);  // rejects unknown ids
  for (const auto& m : config.models) {
    if (!is_baseline_model(m)) CompositionSpec::parse(m);
  }

  std::vector<BenchmarkRow> rows;
  for (const auto& scenario : config.scenarios) {
    const std::size_t levels = generator_levels(scenario);
    for (const auto& model : config.models) {
      if (!model_fits_scenario(model, levels)) continue;
      std::vector<BenchmarkRow> cells;
      for (auto seed : config.seeds) cells.push_back(run_cell(model, scenario, seed, config));
      std::vector<double> mn, rm, cv, mv, wt;
      for (const auto& c : cells) {
        if (c.status != "ok") continue;
        mn.push_back(c.mnll);
        rm.push_back(c.rmse);
        cv.push_back(c.coverage);
        mv.push_back(c.mean_variance);
        wt.push_back(c.wall_seconds);
      }
      rows.insert(rows.end(), cells.begin(), cells.end());
      BenchmarkRow agg{model, scenario, std::nullopt, "median"};
      agg.count = static_cast<int>(mn.size());
      if (mn.empty()) {
        agg.status = "failed: no successful cells";
      } else {
        agg.mnll = median(mn);
        agg.rmse = median(rm);
        agg.coverage = median(cv);
        agg.mean_variance = median(mv);
        agg.wall_seconds = median(wt);
      }
      rows.push_back(agg);
    }
  }
  return rows;
}

void write_benchmark_csv(const std::vector<BenchmarkRow>& rows, std::ostream& out,
                         bool include_timing) {
  out << "model,scenario,seed,status,mnll,rmse,coverage,mean_variance,count";
  if (include_timing) out << ",wall_seconds";
  out << '\n';
  for (const auto& r : rows) {
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    const bool has_values = status == "ok" || status == "median";
    out << r.model << ',' << r.scenario << ',' << (r.seed ? std::to_string(*r.seed) : "all")
        << ',' << status << ',';
    if (has_values) {
      out << format_double(r.mnll) << ',' << format_double(r.rmse) << ','
          << format_double(r.coverage) << ',' << format_double(r.mean_variance);
    } else {
      out << ",,,";
    }
    out << ',' << r.count;
    if (include_timing) out << ',' << format_double(r.wall_seconds);
    out << '\n';
  }
}

}  // namespace mfgp
