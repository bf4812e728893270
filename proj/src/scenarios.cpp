#include "mfgp/scenarios.hpp"

#include <cmath>
#include <functional>
#include <numbers>

#include "mfgp/errors.hpp"
#include "mfgp/random.hpp"

namespace mfgp {

namespace functions {

double synthetic_a_low(double x) { return std::sin(8.0 * std::numbers::pi * x); }

double synthetic_a_high(double x) {
  const double f1 = synthetic_a_low(x);
  return (x - std::numbers::sqrt2) * f1 * f1;
}

double synthetic_b_low(double x) { return std::cos(15.0 * x); }

double synthetic_b_high(double x) { return x * std::exp(synthetic_b_low(2.0 * x - 0.2)) - 1.0; }

// x = (r_w, r, T_u, H_u, T_l, H_l, L, K_w)
double borehole_high(const Eigen::Ref<const Eigen::VectorXd>& x) {
  const double log_ratio = std::log(x(1) / x(0));
  const double numerator = 2.0 * std::numbers::pi * x(2) * (x(3) - x(5));
  const double denominator =
      log_ratio * (1.0 + 2.0 * x(6) * x(2) / (log_ratio * x(0) * x(0) * x(7)) + x(2) / x(4));
  return numerator / denominator;
}

double borehole_low(const Eigen::Ref<const Eigen::VectorXd>& x) {
  const double log_ratio = std::log(x(1) / x(0));
  const double numerator = 5.0 * x(2) * (x(3) - x(5));
  const double denominator =
      log_ratio * (1.5 + 2.0 * x(6) * x(2) / (log_ratio * x(0) * x(0) * x(7)) + x(2) / x(4));
  return numerator / denominator;
}

double branin_high(const Eigen::Ref<const Eigen::VectorXd>& x) {
  constexpr double pi = std::numbers::pi;
  const double x1 = x(0);
  const double x2 = x(1);
  const double a = x2 - 5.1 / (4.0 * pi * pi) * x1 * x1 + 5.0 / pi * x1 - 6.0;
  return a * a + 10.0 * (1.0 - 1.0 / (8.0 * pi)) * std::cos(x1) + 10.0;
}

double branin_medium(const Eigen::Ref<const Eigen::VectorXd>& x) {
  const Eigen::Vector2d shifted(x(0) - 2.0, x(1) - 2.0);
  return 10.0 * std::sqrt(branin_high(shifted)) + 2.0 * (x(0) - 0.5) - 3.0 * (3.0 * x(1) - 1.0) -
         1.0;
}

double branin_low(const Eigen::Ref<const Eigen::VectorXd>& x) {
  const Eigen::Vector2d scaled(1.2 * (x(0) + 2.0), 1.2 * (x(1) + 2.0));
  return branin_medium(scaled) - 3.0 * x(1) + 1.0;
}

}  // namespace functions

namespace {

using ScalarFn = std::function<double(const Eigen::Ref<const Eigen::VectorXd>&)>;

ScalarFn lift(double (*f)(double)) {
  return [f](const Eigen::Ref<const Eigen::VectorXd>& x) { return f(x(0)); };
}

double identity(double x) { return x; }
double tanh_fn(double x) { return std::tanh(x); }
double sin4(double x) { return std::sin(4.0 * std::numbers::pi * x); }

struct GeneratorDef {
  std::string id;
  InputBox box;
  std::vector<ScalarFn> levels;  // lowest fidelity first
  std::vector<int> counts;
  std::vector<double> noise_std;
  std::vector<std::string> labels;
};

InputBox unit_interval() { return {Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1)}; }

InputBox borehole_box() {
  InputBox box{Eigen::VectorXd(8), Eigen::VectorXd(8)};
  box.lower << 0.05, 100.0, 63070.0, 990.0, 63.1, 700.0, 1120.0, 9855.0;
  box.upper << 0.15, 50000.0, 115600.0, 1110.0, 116.0, 820.0, 1680.0, 12045.0;
  return box;
}

InputBox branin_box() {
  InputBox box{Eigen::VectorXd(2), Eigen::VectorXd(2)};
  box.lower << -5.0, 0.0;
  box.upper << 10.0, 15.0;
  return box;
}

GeneratorDef composition(const std::string& id, double (*low)(double)) {
  return {id, unit_interval(), {lift(low), lift(functions::synthetic_a_high)}, {30, 10},
          {0.0, 0.0}, {"low", "high"}};
}

GeneratorDef lookup(std::string_view id) {
  if (id == "synthetic-a") {
    return {"synthetic-a", unit_interval(),
            {lift(functions::synthetic_a_low), lift(functions::synthetic_a_high)}, {30, 10},
            {0.0, 0.0}, {"low", "high"}};
  }
  if (id == "synthetic-b") {
    return {"synthetic-b", unit_interval(),
            {lift(functions::synthetic_b_low), lift(functions::synthetic_b_high)}, {30, 15},
            {0.0, 0.0}, {"low", "high"}};
  }
  if (id == "denoising") {
    return {"denoising", unit_interval(),
            {lift(functions::synthetic_a_high), lift(functions::synthetic_a_high)}, {30, 15},
            {0.1, 0.001}, {"noisy", "precise"}};
  }
  if (id == "composition-identity") return composition("composition-identity", identity);
  if (id == "composition-tanh") return composition("composition-tanh", tanh_fn);
  if (id == "composition-sin4") return composition("composition-sin4", sin4);
  if (id == "composition-sin8") return composition("composition-sin8", functions::synthetic_a_low);
  if (id == "borehole") {
    return {"borehole", borehole_box(), {functions::borehole_low, functions::borehole_high},
            {150, 40}, {0.0, 0.0}, {"low", "high"}};
  }
  if (id == "branin") {
    return {"branin", branin_box(),
            {functions::branin_low, functions::branin_medium, functions::branin_high},
            {80, 40, 20}, {0.0, 0.0, 0.0}, {"low", "medium", "high"}};
  }
  throw InputError("unknown generator '" + std::string(id) + "'");
}

// Random stream ids; each (level, purpose) pair draws from its own stream.
constexpr std::uint64_t kInputStream = 1;
constexpr std::uint64_t kNoiseStream = 2;
constexpr std::uint64_t kTestStream = 99;

std::uint64_t level_stream(std::size_t level, std::uint64_t purpose) {
  return 16 * static_cast<std::uint64_t>(level) + purpose;
}

Eigen::MatrixXd uniform_inputs(const InputBox& box, int count, Rng& rng) {
  Eigen::MatrixXd x(count, box.dimension());
  for (int i = 0; i < count; ++i) {
    for (Eigen::Index c = 0; c < box.dimension(); ++c) {
      x(i, c) = rng.uniform(box.lower(c), box.upper(c));
    }
  }
  return x;
}

}  // namespace

bool InputBox::contains(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != lower.size()) return false;
  return (x.array() >= lower.array()).all() && (x.array() <= upper.array()).all();
}

const std::vector<std::string>& generator_ids() {
  static const std::vector<std::string> ids = {
      "synthetic-a",      "synthetic-b",      "denoising",
      "composition-identity", "composition-tanh", "composition-sin4",
      "composition-sin8", "borehole",         "branin"};
  return ids;
}

std::size_t generator_levels(std::string_view generator) {
  return lookup(generator).levels.size();
}

InputBox generator_box(std::string_view generator) { return lookup(generator).box; }

Eigen::VectorXd evaluate_level(std::string_view generator, std::size_t level,
                               const Eigen::MatrixXd& x) {
  const GeneratorDef def = lookup(generator);
  if (level >= def.levels.size()) throw InputError("generator level out of range");
  if (x.cols() != def.box.dimension()) throw InputError("input dimension does not match generator");
  Eigen::VectorXd y(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) y(i) = def.levels[level](x.row(i).transpose());
  return y;
}

FidelityDataset generate(const ScenarioSpec& spec) {
  const GeneratorDef def = lookup(spec.generator);
  const std::size_t levels = def.levels.size();
  const auto counts = spec.counts.empty() ? def.counts : spec.counts;
  const auto noise = spec.noise_std.empty() ? def.noise_std : spec.noise_std;
  if (counts.size() != levels || noise.size() != levels) {
    throw InputError("generator '" + def.id + "' has " + std::to_string(levels) +
                     " levels; got " + std::to_string(counts.size()) + " counts and " +
                     std::to_string(noise.size()) + " noise levels");
  }
  FidelityDataset data;
  for (std::size_t l = 0; l < levels; ++l) {
    if (counts[l] < 1) throw InputError("sample counts must be at least 1");
    if (!(noise[l] >= 0.0)) throw InputError("noise std must be non-negative");
    // Composition variants share high-fidelity draws with synthetic-a, which
    // holds because the stream ids depend only on (seed, level, purpose).
    Rng input_rng(spec.seed, level_stream(l, kInputStream));
    Rng noise_rng(spec.seed, level_stream(l, kNoiseStream));
    FidelityLevel level;
    level.inputs = uniform_inputs(def.box, counts[l], input_rng);
    level.outputs.resize(counts[l]);
    for (int i = 0; i < counts[l]; ++i) {
      level.outputs(i) = def.levels[l](level.inputs.row(i).transpose());
      if (noise[l] > 0.0) level.outputs(i) += noise[l] * noise_rng.normal();
    }
    level.noise_std = noise[l];
    level.label = def.labels[l];
    data.levels.push_back(std::move(level));
  }
  return data;
}

TestSet make_test_set(const ScenarioSpec& spec, int count) {
  if (count < 1) throw InputError("test set needs at least one point");
  const GeneratorDef def = lookup(spec.generator);
  TestSet out;
  if (def.box.dimension() == 1) {
    out.inputs.resize(count, 1);
    for (int i = 0; i < count; ++i) {
      out.inputs(i, 0) = count == 1 ? 0.5
                                    : def.box.lower(0) + (def.box.upper(0) - def.box.lower(0)) *
                                                             static_cast<double>(i) / (count - 1);
    }
  } else {
    Rng rng(spec.seed, kTestStream);
    out.inputs = uniform_inputs(def.box, count, rng);
  }
  out.truth.resize(count);
  for (int i = 0; i < count; ++i) out.truth(i) = def.levels.back()(out.inputs.row(i).transpose());
  return out;
}

FidelityDataset gen_synthetic_a(std::uint64_t seed, int n_low, int n_high) {
  return generate({"synthetic-a", seed, {n_low, n_high}, {}});
}

FidelityDataset gen_synthetic_b(std::uint64_t seed, int n_low, int n_high) {
  return generate({"synthetic-b", seed, {n_low, n_high}, {}});
}

std::vector<FidelityDataset> gen_compositional_variants(std::uint64_t seed, double low_noise_std,
                                                        int n_low, int n_high) {
  std::vector<FidelityDataset> out;
  for (const char* id :
       {"composition-identity", "composition-tanh", "composition-sin4", "composition-sin8"}) {
    out.push_back(generate({id, seed, {n_low, n_high}, {low_noise_std, 0.0}}));
  }
  return out;
}

FidelityDataset gen_denoising(std::uint64_t seed, int n_low, int n_high) {
  return generate({"denoising", seed, {n_low, n_high}, {}});
}

FidelityDataset gen_borehole(std::uint64_t seed, int n_low, int n_high) {
  return generate({"borehole", seed, {n_low, n_high}, {}});
}

FidelityDataset gen_branin(std::uint64_t seed, int n_low, int n_mid, int n_high) {
  return generate({"branin", seed, {n_low, n_mid, n_high}, {}});
}

}  // namespace mfgp
