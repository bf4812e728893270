#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mfgp/cli.hpp"
#include "mfgp/dataset.hpp"
#include "mfgp/scenarios.hpp"

namespace fs = std::filesystem;
using mfgp::cli::run;

namespace {

fs::path tmp(const std::string& name) {
  const char* env = std::getenv("MFGP_TEST_TMP");
  fs::path dir = env ? env : fs::temp_directory_path() / "mfgp_cli";
  fs::create_directories(dir);
  return dir / name;
}

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream s(line);
  std::string cell;
  while (std::getline(s, cell, ',')) cells.push_back(cell);
  return cells;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::map<std::string, double> footer;
};

Table parse_table(const std::string& text) {
  Table t;
  std::stringstream s(text);
  std::string line;
  while (std::getline(s, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto cells = split(line.substr(2));
      if (cells.size() == 2) t.footer[cells[0]] = std::stod(cells[1]);
      continue;
    }
    if (t.header.empty()) {
      t.header = split(line);
      continue;
    }
    std::vector<double> row;
    for (const auto& c : split(line)) row.push_back(std::stod(c));
    t.rows.push_back(row);
  }
  return t;
}

std::vector<std::string> train_args(const fs::path& out) {
  return {"train", "--generator", "synthetic-a", "--seed", "3", "--spec", "SE[SE]",
          "--restarts", "2", "--out", out.string()};
}

}  // namespace

TEST_CASE("train writes a model and metrics deterministically") {
  const auto model = tmp("model_a.txt");
  const auto again = tmp("model_b.txt");
  auto r = call(train_args(model));
  REQUIRE_MESSAGE(r.code == 0, r.err);
  REQUIRE(call(train_args(again)).code == 0);
  CHECK(slurp(model) == slurp(again));
  CHECK(fs::exists(model.string() + ".metrics"));
  CHECK(slurp(model.string() + ".metrics") == slurp(again.string() + ".metrics"));
  CHECK(slurp(model).find("schema_version = 1") != std::string::npos);
  CHECK(slurp(model.string() + ".metrics").find("wall") == std::string::npos);

  const auto parsed = mfgp::cli::load_model(model);
  CHECK(parsed.spec.to_string() == "SE[SE]");
  CHECK(parsed.level_sizes == std::vector<int>{30, 10});
  CHECK(parsed.fingerprint == mfgp::fingerprint(mfgp::gen_synthetic_a(3)));
}

TEST_CASE("usage errors exit with code 2") {
  CHECK(call({"train", "--generator", "synthetic-a", "--spec", "SE[", "--out",
              tmp("bad.txt").string()}).code == 2);
  CHECK(call({"train", "--generator", "synthetic-a", "--data", "x.csv", "--spec", "SE[SE]"}).code ==
        2);
  CHECK(call({"train", "--generator", "synthetic-a"}).code == 2);
  CHECK(call({"frobnicate"}).code == 2);
  CHECK(call({}).code == 2);
  CHECK(call({"benchmark", "--scenarios", ""}).code == 2);
  CHECK(call({"benchmark", "--scenarios", "synthetic-a", "--seeds", "2", "--seed-list", "1,2"}).code ==
        2);
  CHECK(call({"predict", "--model", "m", "--grid", "5", "--query", "q.csv"}).code == 2);
  CHECK(call({"--help"}).code == 0);
}

TEST_CASE("predict on a grid with truth") {
  const auto model = tmp("model_grid.txt");
  REQUIRE(call(train_args(model)).code == 0);
  const auto pred = tmp("pred.csv");
  auto r = call({"predict", "--model", model.string(), "--grid", "200", "--truth", "--out",
                 pred.string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const Table t = parse_table(slurp(pred));
  CHECK(t.header == std::vector<std::string>{"x", "mean", "std", "truth"});
  REQUIRE(t.rows.size() == 200);
  CHECK(t.rows.front()[0] == 0.0);
  CHECK(t.rows.back()[0] == 1.0);

  const double noise = t.footer.at("noise_variance");
  double nll = 0.0, se = 0.0;
  int covered = 0;
  for (const auto& row : t.rows) {
    CHECK(row[3] == mfgp::functions::synthetic_a_high(row[0]));
    const double var = row[2] * row[2] + noise;
    const double d = row[3] - row[1];
    nll += 0.5 * std::log(2 * std::numbers::pi * var) + 0.5 * d * d / var;
    se += d * d;
    if (std::abs(d) <= 1.959963984540054 * std::sqrt(var)) ++covered;
  }
  CHECK(t.footer.at("mnll") == doctest::Approx(nll / 200).epsilon(1e-10));
  CHECK(t.footer.at("rmse") == doctest::Approx(std::sqrt(se / 200)).epsilon(1e-10));
  CHECK(t.footer.at("coverage") == doctest::Approx(covered / 200.0));

  const auto again = tmp("pred_again.csv");
  REQUIRE(call({"predict", "--model", model.string(), "--grid", "200", "--truth", "--out",
                again.string()}).code == 0);
  CHECK(slurp(pred) == slurp(again));
}

TEST_CASE("predict with a query file and external data") {
  const auto data = tmp("data.csv");
  mfgp::save_csv(mfgp::gen_synthetic_b(1), data);
  const auto model = tmp("model_csv.txt");
  REQUIRE(call({"train", "--data", data.string(), "--spec", "SC[SE]", "--restarts", "1", "--out",
                model.string()}).code == 0);
  const auto query = tmp("query.csv");
  std::ofstream(query) << "x\n0.1\n0.5\n0.9\n";
  auto r = call({"predict", "--model", model.string(), "--query", query.string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(parse_table(r.out).rows.size() == 3);

  const auto other = tmp("other.csv");
  mfgp::save_csv(mfgp::gen_synthetic_b(2), other);
  CHECK(call({"predict", "--model", model.string(), "--data", other.string(), "--grid", "5"}).code ==
        1);
  CHECK(call({"predict", "--model", tmp("missing_model.txt").string(), "--grid", "5"}).code == 1);
  const auto broken = tmp("broken_model.txt");
  std::ofstream(broken) << "# mfgp model\nschema_version = 1\nspec = SE[SE]\n";
  CHECK(call({"predict", "--model", broken.string(), "--grid", "5"}).code == 1);
}

TEST_CASE("sample is deterministic and handles zero paths") {
  const auto a = tmp("samples_a.csv");
  const auto b = tmp("samples_b.csv");
  const std::vector<std::string> base = {"sample", "--generator", "synthetic-a", "--seed", "0",
                                         "--spec", "SE[SE]", "--n", "3", "--grid", "50"};
  auto args = base;
  args.insert(args.end(), {"--out", a.string()});
  REQUIRE(call(args).code == 0);
  args = base;
  args.insert(args.end(), {"--out", b.string()});
  REQUIRE(call(args).code == 0);
  CHECK(slurp(a) == slurp(b));
  const Table t = parse_table(slurp(a));
  CHECK(t.header.size() == 4);
  CHECK(t.rows.size() == 50);

  auto r = call({"sample", "--generator", "synthetic-a", "--spec", "SE[SE]", "--n", "0"});
  REQUIRE(r.code == 0);
  CHECK(r.out == "x\n");
  CHECK(call({"sample", "--generator", "synthetic-a", "--spec", "SE[SE[SE]]"}).code != 0);
}

TEST_CASE("identity warping samples match plain SE prior samples") {
  const auto path = tmp("samples_identity.csv");
  REQUIRE(call({"sample", "--generator", "composition-identity", "--seed", "5", "--spec", "SE[SE]",
                "--n", "10000", "--grid", "8", "--variance", "1", "--lengthscale", "0.5",
                "--out", path.string()}).code == 0);
  const Table t = parse_table(slurp(path));
  REQUIRE(t.rows.size() == 8);
  const int n = 10000;
  REQUIRE(t.rows[0].size() == static_cast<std::size_t>(n + 1));
  Eigen::MatrixXd draws(n, 8);
  Eigen::VectorXd x(8);
  for (int i = 0; i < 8; ++i) {
    x(i) = t.rows[i][0];
    for (int s = 0; s < n; ++s) draws(s, i) = t.rows[i][s + 1];
  }
  const Eigen::MatrixXd centered = draws.rowwise() - draws.colwise().mean();
  const Eigen::MatrixXd cov = centered.transpose() * centered / (n - 1.0);
  for (int i = 0; i < 8; ++i) {
    for (int j = i; j < 8; ++j) {
      const double k = std::exp(-(x(i) - x(j)) * (x(i) - x(j)) / (2 * 0.25));
      const double se = std::sqrt((1.0 + k * k) / n);
      CHECK(std::abs(cov(i, j) - k) <= 3 * se);
    }
  }
}

TEST_CASE("benchmark output is reproducible") {
  const std::vector<std::string> args = {"benchmark", "--scenarios", "synthetic-a", "--models",
                                         "GP,SE[SE]", "--seeds", "2", "--test-count", "40",
                                         "--restarts", "1"};
  auto first = call(args);
  REQUIRE_MESSAGE(first.code == 0, first.err);
  auto second = call(args);
  CHECK(first.out == second.out);
  CHECK(first.out.rfind("model,scenario,seed,status,", 0) == 0);
  // Two seeds and one median row per model, plus the header.
  CHECK(std::count(first.out.begin(), first.out.end(), '\n') == 7);
}

TEST_CASE("relative outputs resolve against the output directory") {
  const auto dir = tmp("outdir");
  fs::create_directories(dir);
  ::setenv(mfgp::cli::kOutputDirEnv, dir.string().c_str(), 1);
  CHECK(mfgp::cli::output_path("m.txt") == dir / "m.txt");
  CHECK(mfgp::cli::output_path("/abs/m.txt") == fs::path("/abs/m.txt"));
  ::unsetenv(mfgp::cli::kOutputDirEnv);
  CHECK(mfgp::cli::output_path("m.txt") == fs::path("m.txt"));
}
