// Acceptance run: one PASS/FAIL line per criterion. Pass criterion numbers as
// arguments to run a subset. Exit status is non-zero if any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mfgp/baselines.hpp"
#include "mfgp/benchmark.hpp"
#include "mfgp/hierarchy.hpp"
#include "mfgp/metrics.hpp"
#include "mfgp/moments.hpp"
#include "mfgp/random.hpp"
#include "mfgp/sampling.hpp"
#include "mfgp/scenarios.hpp"
#include "mfgp/training.hpp"

namespace fs = std::filesystem;
using namespace mfgp;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s << std::setprecision(precision) << v;
  return s.str();
}

Eigen::Matrix2d random_psd(Rng& rng, double scale) {
  Eigen::Matrix2d l = Eigen::Matrix2d::Zero();
  l(0, 0) = scale * rng.uniform();
  l(1, 0) = scale * (2.0 * rng.uniform() - 1.0);
  l(1, 1) = scale * rng.uniform();
  return l * l.transpose();
}

Outcome moment_matching_vs_monte_carlo() {
  Rng rng(1, 101);
  constexpr int kConfigs = 200;
  constexpr long kSamples = 1000000;
  int se_ok = 0, sc_ok = 0;
  for (int c = 0; c < kConfigs; ++c) {
    ConditionalMoments m;
    m.mean = Eigen::Vector2d(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0));
    m.covariance = random_psd(rng, 1.2);
    const double v = std::exp(rng.uniform(std::log(0.1), std::log(10.0)));
    const double l = std::exp(rng.uniform(std::log(0.2), std::log(3.0)));
    const Eigen::Matrix2d cov = m.covariance;
    const double se = effective_kernel_se(m, v, l, 0, 1);
    const double sc = effective_kernel_sc(m, v, l, 0, 1);
    const McEstimate mc_se = mc_oracle_kernel({KernelFamily::SE, v, l}, m.mean, cov, kSamples, 2 * c);
    const McEstimate mc_sc =
        mc_oracle_kernel({KernelFamily::SC, v, l}, m.mean, cov, kSamples, 2 * c + 1);
    se_ok += std::abs(se - mc_se.estimate) <= 3.0 * mc_se.std_error;
    sc_ok += std::abs(sc - mc_sc.estimate) <= 3.0 * mc_sc.std_error;
  }
  const int need = (99 * kConfigs + 99) / 100;
  return {se_ok >= need && sc_ok >= need,
          "SE " + std::to_string(se_ok) + "/200, SC " + std::to_string(sc_ok) +
              "/200 within 3 SE (need " + std::to_string(need) + ")"};
}

Outcome reduced_inverse_identities() {
  Rng rng(2, 102);
  int ok = 0;
  for (int c = 0; c < 100; ++c) {
    ok += reduced_inverse_identity_check(random_psd(rng, std::exp(rng.uniform(-2.0, 1.5))));
  }
  return {ok == 100, std::to_string(ok) + "/100 random PSD matrices"};
}

FidelityDataset gradient_problem(Rng& rng) {
  FidelityDataset d;
  d.levels.resize(2);
  const int sizes[2] = {10, 6};
  for (int l = 0; l < 2; ++l) {
    auto& level = d.levels[l];
    level.inputs.resize(sizes[l], 1);
    level.outputs.resize(sizes[l]);
    for (int i = 0; i < sizes[l]; ++i) {
      const double x = rng.uniform();
      const double f1 = std::sin(6.0 * x);
      level.inputs(i, 0) = x;
      level.outputs(i) = (l == 0 ? f1 : f1 * f1 - 0.3 * x) + 0.05 * rng.normal();
    }
  }
  return d;
}

Outcome joint_gradient_vs_finite_differences() {
  Rng rng(3, 103);
  const double h = 1e-5;
  double worst = 0.0;
  int ok = 0;
  for (int t = 0; t < 50; ++t) {
    const CompositionSpec spec = CompositionSpec::parse(t % 2 == 0 ? "SE[SE]" : "SC[SE]");
    const FidelityDataset d = gradient_problem(rng);
    Hyperparams hp;
    for (int l = 0; l < 2; ++l) {
      hp.layers.push_back({std::exp(rng.uniform(-1.0, 1.0)), std::exp(rng.uniform(-1.5, 0.5)),
                           std::exp(rng.uniform(-6.0, -2.0))});
    }
    const LmlWithGradient g = lml_gradient_joint(d, hp, spec);
    const Eigen::VectorXd x = hp.to_log();
    double problem_worst = 0.0;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      Eigen::VectorXd up = x, dn = x;
      up(k) += h;
      dn(k) -= h;
      const double fd = (hierarchy_lml(d, spec, Hyperparams::from_log(up)) -
                         hierarchy_lml(d, spec, Hyperparams::from_log(dn))) /
                        (2 * h);
      problem_worst =
          std::max(problem_worst, std::abs(g.gradient(k) - fd) / std::max(1.0, std::abs(fd)));
    }
    worst = std::max(worst, problem_worst);
    ok += problem_worst < 1e-4;
  }
  return {ok == 50, std::to_string(ok) + "/50 problems, worst relative error " + fmt(worst, 3)};
}

Outcome limiting_cases() {
  // Zero covariance: effective SE Gram equals the SE Gram on the means.
  Rng rng(4, 104);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const int n = 12;
    auto m = std::make_shared<ConditionalMoments>();
    m->mean = Eigen::VectorXd(n);
    for (int i = 0; i < n; ++i) m->mean(i) = rng.uniform(-3.0, 3.0);
    m->covariance = Eigen::MatrixXd::Zero(n, n);
    const BaseKernel outer{KernelFamily::SE, std::exp(rng.uniform(-1.0, 1.0)),
                           std::exp(rng.uniform(-1.0, 1.0))};
    const Eigen::MatrixXd eff = EffectiveKernel(outer, m).gram(index_range(0, n));
    const Eigen::MatrixXd plain = gram(outer, Eigen::MatrixXd(m->mean));
    worst = std::max(worst, (eff - plain).cwiseAbs().maxCoeff());
  }

  // Identity warping learned from dense noiseless data: sample covariance
  // of the warped prior against the plain SE covariance on the grid.
  FidelityLevel low;
  low.inputs.resize(40, 1);
  for (int i = 0; i < 40; ++i) low.inputs(i, 0) = i / 39.0;
  low.outputs = low.inputs.col(0);
  const int grid_n = 10;
  Eigen::MatrixXd grid(grid_n, 1);
  for (int i = 0; i < grid_n; ++i) grid(i, 0) = 0.05 + 0.9 * i / (grid_n - 1.0);
  const LayerParams outer{1.0, 0.5, 0.0};
  const WarpedPrior prior =
      warped_prior(low, CompositionSpec::parse("SE[SE]"), outer, grid, false);
  const int samples = 10000;
  const Eigen::MatrixXd draws = sample_warped_prior(prior, samples, 44);
  const Eigen::MatrixXd centered = draws.rowwise() - draws.colwise().mean();
  const Eigen::MatrixXd sample_cov = centered.transpose() * centered / (samples - 1.0);
  const Eigen::MatrixXd k = gram({KernelFamily::SE, 1.0, 0.5}, grid);
  double max_z = 0.0;
  for (int i = 0; i < grid_n; ++i) {
    for (int j = i; j < grid_n; ++j) {
      const double se = std::sqrt((k(i, i) * k(j, j) + k(i, j) * k(i, j)) / samples);
      max_z = std::max(max_z, std::abs(sample_cov(i, j) - k(i, j)) / se);
    }
  }
  return {worst <= 1e-12 && max_z <= 3.0,
          "C=0 max Gram difference " + fmt(worst, 3) + "; identity warping max |z| " +
              fmt(max_z, 3) + " over " + std::to_string(grid_n * (grid_n + 1) / 2) +
              " covariance entries"};
}

Outcome scenario_a() {
  const CompositionSpec spec = CompositionSpec::parse("SE[SE]");
  int wins = 0;
  std::ostringstream per_seed;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const ScenarioSpec scenario{"synthetic-a", seed, {}, {}};
    const FidelityDataset d = generate(scenario);
    const TestSet t = make_test_set(scenario, 500);
    TrainConfig cfg;
    cfg.seed = seed;
    const Prediction ours = predict(train(d, spec, cfg), d, t.inputs);
    const Prediction gp = vanilla_gp(d.highest(), t.inputs, cfg);
    const Prediction ar1 = ar1_train_predict(d, t.inputs, cfg);
    const double cov = coverage(ours, t.truth);
    const double m = mnll(ours, t.truth), m_gp = mnll(gp, t.truth), m_ar1 = mnll(ar1, t.truth);
    const bool win = cov >= 0.9 && m < m_gp && m < m_ar1;
    wins += win;
    per_seed << "\n    seed " << seed << ": coverage " << fmt(cov, 3) << ", MNLL " << fmt(m)
             << " vs GP " << fmt(m_gp) << ", AR1 " << fmt(m_ar1) << (win ? "" : "  (miss)");
  }
  return {wins >= 8, std::to_string(wins) + "/10 seeds (need 8)" + per_seed.str()};
}

Outcome denoising() {
  const CompositionSpec spec = CompositionSpec::parse("SE[SE]");
  int wins = 0;
  std::ostringstream per_seed;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const ScenarioSpec scenario{"denoising", seed, {}, {}};
    const FidelityDataset d = generate(scenario);
    const TestSet t = make_test_set(scenario, 500);
    TrainConfig cfg;
    cfg.seed = seed;
    const double ours = mean_variance(predict(train(d, spec, cfg), d, t.inputs));
    const double gp = mean_variance(vanilla_gp(d.levels[0], t.inputs, cfg));
    wins += ours < gp;
    per_seed << "\n    seed " << seed << ": " << fmt(ours, 3) << " vs GP " << fmt(gp, 3);
  }
  return {wins == 10, std::to_string(wins) + "/10 seeds with smaller mean variance" + per_seed.str()};
}

double median_mnll(const std::vector<BenchmarkRow>& rows, const std::string& model) {
  for (const auto& r : rows) {
    if (r.model == model && r.status == "median") return r.mnll;
  }
  return std::nan("");
}

Outcome table_direction() {
  BenchmarkConfig cfg;
  for (std::uint64_t s = 0; s < 10; ++s) cfg.seeds.push_back(s);
  cfg.test_count = 500;

  cfg.scenarios = {"borehole"};
  cfg.models = {"SE[SE]", "SC[SE]", "GP"};
  const auto borehole = run_benchmark(cfg);
  cfg.scenarios = {"branin"};
  cfg.models = {"SC[SC[SE]]", "GP"};
  const auto branin = run_benchmark(cfg);

  const double bse = median_mnll(borehole, "SE[SE]");
  const double bsc = median_mnll(borehole, "SC[SE]");
  const double bgp = median_mnll(borehole, "GP");
  const double rsc = median_mnll(branin, "SC[SC[SE]]");
  const double rgp = median_mnll(branin, "GP");
  const bool pass = bse < bgp && bsc < bgp && rsc < rgp;
  return {pass, "median MNLL over 10 seeds: Borehole SE[SE] " + fmt(bse) + ", SC[SE] " + fmt(bsc) +
                    " vs GP " + fmt(bgp) + "; Branin SC[SC[SE]] " + fmt(rsc) + " vs GP " + fmt(rgp)};
}

Outcome sequential_vs_joint() {
  const CompositionSpec spec = CompositionSpec::parse("SE[SE]");
  int wins = 0;
  std::ostringstream per_seed;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const FidelityDataset d = gen_synthetic_a(seed, 30, 10);
    TrainConfig cfg;
    cfg.seed = seed;
    const double seq = train_sequential(d, spec, cfg).lml;
    TrainConfig joint_cfg = cfg;
    joint_cfg.optimizer = OptimizerKind::gradient_descent;
    const double joint = train_joint(d, spec, joint_cfg).lml;
    wins += seq >= joint;
    per_seed << "\n    seed " << seed << ": sequential " << fmt(seq) << ", joint " << fmt(joint);
  }
  return {wins >= 7, std::to_string(wins) + "/10 seeds with sequential >= joint (need 7)" +
                         per_seed.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome cli_determinism() {
  const char* env = std::getenv("MFGP_TEST_TMP");
  const fs::path dir = fs::path(env ? env : fs::temp_directory_path().string()) / "determinism";
  fs::create_directories(dir);
  const std::string cli = MFGP_CLI_PATH;

  struct Command {
    std::string name;
    std::string args;      // %OUT% is replaced per run
    std::vector<std::string> extra_outputs;
  };
  const fs::path model = dir / "model.txt";
  const std::vector<Command> commands = {
      {"train", "train --generator synthetic-a --seed 3 --spec SE[SE] --out %OUT%", {".metrics"}},
      {"predict", "predict --model " + model.string() + " --grid 200 --truth --out %OUT%", {}},
      {"sample", "sample --generator synthetic-a --seed 1 --spec SE[SE] --n 4 --grid 100 --out %OUT%",
       {}},
      {"benchmark",
       "benchmark --scenarios synthetic-a,denoising --models SE[SE],AR1,GP --seeds 2 --out %OUT%",
       {}},
  };
  // The predict command needs a model; train one first.
  if (std::system((cli + " train --generator synthetic-a --seed 3 --spec SE[SE] --out " +
                   model.string() + " >/dev/null 2>&1")
                      .c_str()) != 0) {
    return {false, "could not train the model for predict"};
  }
  std::vector<std::string> identical, different;
  for (const auto& c : commands) {
    std::vector<std::string> outputs;
    bool ran = true;
    // Same paths both times, so any difference comes from the command itself.
    const fs::path out = dir / (c.name + ".out");
    const fs::path stdout_file = dir / (c.name + ".stdout");
    std::string args = c.args;
    args.replace(args.find("%OUT%"), 5, out.string());
    for (int run = 0; run < 2; ++run) {
      ran = ran && std::system((cli + " " + args + " > " + stdout_file.string() + " 2>/dev/null")
                                   .c_str()) == 0;
      std::string all = slurp(out) + "\n--stdout--\n" + slurp(stdout_file);
      for (const auto& suffix : c.extra_outputs) {
        all += "\n--" + suffix + "--\n" + slurp(out.string() + suffix);
      }
      outputs.push_back(all);
      fs::remove(out);
    }
    ((ran && outputs[0] == outputs[1]) ? identical : different).push_back(c.name);
  }
  std::string detail = "byte-identical:";
  for (const auto& n : identical) detail += " " + n;
  if (!different.empty()) {
    detail += "; differing or failed:";
    for (const auto& n : different) detail += " " + n;
  }
  return {different.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"moment matching agrees with Monte Carlo", moment_matching_vs_monte_carlo},
      {"reduced inverse identities", reduced_inverse_identities},
      {"joint gradient matches finite differences", joint_gradient_vs_finite_differences},
      {"limiting-case reductions", limiting_cases},
      {"synthetic A coverage and MNLL", scenario_a},
      {"denoising variance below vanilla GP", denoising},
      {"Borehole and Branin median MNLL below vanilla GP", table_direction},
      {"sequential LML at least joint LML", sequential_vs_joint},
      {"CLI determinism", cli_determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !o.pass;
    std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << "  "
              << criteria[i].first << " (" << fmt(secs, 3) << " s)\n    " << o.detail << '\n'
              << std::flush;
  }
  return failures == 0 ? 0 : 1;
}
