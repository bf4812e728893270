#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "mfgp/errors.hpp"
#include "mfgp/gp.hpp"
#include "mfgp/kernel.hpp"
#include "mfgp/linalg.hpp"
#include "mfgp/random.hpp"

using namespace mfgp;

namespace {

Eigen::MatrixXd column(std::initializer_list<double> v) {
  Eigen::MatrixXd x(v.size(), 1);
  Eigen::Index i = 0;
  for (double e : v) x(i++, 0) = e;
  return x;
}

// Dense-inverse LML, written out without Cholesky.
double dense_lml(const Eigen::MatrixXd& k, const Eigen::VectorXd& y, double noise) {
  const Eigen::MatrixXd c = k + noise * Eigen::MatrixXd::Identity(k.rows(), k.rows());
  const double quad = y.dot(c.inverse() * y);
  return -0.5 * quad - 0.5 * std::log(c.determinant()) -
         0.5 * y.size() * std::log(2.0 * std::numbers::pi);
}

}  // namespace

TEST_CASE("SE and SC base kernels") {
  const BaseKernel se{KernelFamily::SE, 2.0, 0.5};
  const BaseKernel sc{KernelFamily::SC, 2.0, 0.5};
  CHECK(kernel_from_distance(se, 0.0) == doctest::Approx(2.0));
  CHECK(kernel_from_distance(se, 0.5) == doctest::Approx(2.0 * std::exp(-0.5)));
  CHECK(kernel_from_distance(sc, 0.0) == doctest::Approx(2.0));
  CHECK(kernel_from_distance(sc, 0.5 * std::numbers::pi) == doctest::Approx(0.0).epsilon(1e-12));

  Eigen::Vector2d a(0.0, 0.0), b(0.3, 0.4);
  CHECK(kernel_eval(se, a, b) == doctest::Approx(2.0 * std::exp(-0.25 / 0.5)));
  CHECK_THROWS_AS(kernel_eval(sc, a, b), InputError);
  CHECK_THROWS_AS(kernel_eval(se, a, Eigen::Vector3d::Zero()), InputError);
  CHECK_THROWS_AS(validate(BaseKernel{KernelFamily::SE, -1.0, 1.0}), InputError);
  CHECK(parse_family("SC") == KernelFamily::SC);
  CHECK_THROWS_AS(parse_family("RBF"), InputError);
}

TEST_CASE("gram is symmetric and matches pointwise evaluation") {
  const Eigen::MatrixXd x = column({0.0, 0.1, 0.4, 0.9});
  for (auto fam : {KernelFamily::SE, KernelFamily::SC}) {
    const BaseKernel k{fam, 1.3, 0.7};
    const Eigen::MatrixXd g = gram(k, x);
    CHECK(asymmetry(g) == 0.0);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        CHECK(g(i, j) == doctest::Approx(kernel_eval(k, x.row(i).transpose(), x.row(j).transpose())));
      }
    }
  }
}

TEST_CASE("gram derivatives match finite differences in log space") {
  const Eigen::MatrixXd x = column({0.0, 0.2, 0.5, 1.1});
  for (auto fam : {KernelFamily::SE, KernelFamily::SC}) {
    const BaseKernel k{fam, 1.7, 0.4};
    const GramDerivatives d = gram_derivatives(k, x, x);
    const double h = 1e-6;
    BaseKernel up = k, dn = k;
    up.lengthscale *= std::exp(h);
    dn.lengthscale *= std::exp(-h);
    const Eigen::MatrixXd fd = (gram(up, x) - gram(dn, x)) / (2 * h);
    CHECK((fd - d.d_log_lengthscale).cwiseAbs().maxCoeff() < 1e-7);
    CHECK((d.d_log_variance - gram(k, x)).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("jittered Cholesky tries no jitter first and escalates") {
  const Eigen::Matrix2d pd{{2.0, 0.5}, {0.5, 1.0}};
  JitteredCholesky c(pd);
  CHECK(c.jitter() == 0.0);
  CHECK(c.log_determinant() == doctest::Approx(std::log(pd.determinant())));
  CHECK((c.inverse() - pd.inverse()).cwiseAbs().maxCoeff() < 1e-12);

  const Eigen::Matrix2d singular = Eigen::Matrix2d::Ones();
  JitteredCholesky s(singular);
  CHECK(s.jitter() > 0.0);
  CHECK(s.jitter() <= 1e-6 * 1.0 + 1e-18);

  Eigen::Matrix2d indefinite{{1.0, 2.0}, {2.0, 1.0}};
  CHECK_THROWS_AS(JitteredCholesky{indefinite}, NumericalError);
}

TEST_CASE("log marginal likelihood matches dense-inverse oracle") {
  const Eigen::MatrixXd x = column({0.05, 0.3, 0.45, 0.7, 0.95});
  const Eigen::VectorXd y = (Eigen::VectorXd(5) << 0.3, -0.2, 0.1, 0.8, -0.5).finished();
  const BaseKernel k{KernelFamily::SE, 1.1, 0.3};
  const double noise = 0.05;
  CHECK(log_marginal_likelihood(gram(k, x), y, noise) ==
        doctest::Approx(dense_lml(gram(k, x), y, noise)).epsilon(1e-12));
}

TEST_CASE("LML gradient matches finite differences") {
  const Eigen::MatrixXd x = column({0.0, 0.25, 0.5, 0.6, 0.9});
  const Eigen::VectorXd y = (Eigen::VectorXd(5) << 0.1, 0.4, -0.3, -0.1, 0.6).finished();
  const BaseKernel k{KernelFamily::SE, 0.8, 0.35};
  const double noise = 0.02;
  auto cov = [&](const BaseKernel& kk, double s) {
    Eigen::MatrixXd c = gram(kk, x);
    c.diagonal().array() += s;
    return c;
  };
  const GramDerivatives d = gram_derivatives(k, x, x);
  const std::vector<Eigen::MatrixXd> dk = {d.d_log_variance, d.d_log_lengthscale,
                                           noise * Eigen::MatrixXd::Identity(5, 5)};
  const LmlWithGradient g = lml_with_gradient(cov(k, noise), y, dk);
  CHECK(g.value == doctest::Approx(log_marginal_likelihood(gram(k, x), y, noise)));
  const double h = 1e-5;
  auto lml_at = [&](double dv, double dl, double ds) {
    BaseKernel kk{KernelFamily::SE, k.variance * std::exp(dv), k.lengthscale * std::exp(dl)};
    return log_marginal_likelihood(gram(kk, x), y, noise * std::exp(ds));
  };
  CHECK(g.gradient(0) == doctest::Approx((lml_at(h, 0, 0) - lml_at(-h, 0, 0)) / (2 * h)).epsilon(1e-6));
  CHECK(g.gradient(1) == doctest::Approx((lml_at(0, h, 0) - lml_at(0, -h, 0)) / (2 * h)).epsilon(1e-6));
  CHECK(g.gradient(2) == doctest::Approx((lml_at(0, 0, h) - lml_at(0, 0, -h)) / (2 * h)).epsilon(1e-6));
}

TEST_CASE("posterior matches hand-rolled conditioning") {
  const Eigen::MatrixXd x = column({0.1, 0.4, 0.8});
  const Eigen::VectorXd y = (Eigen::VectorXd(3) << 1.0, -0.5, 0.25).finished();
  const Eigen::MatrixXd q = column({0.0, 0.4, 0.6, 3.0});
  const BaseKernel k{KernelFamily::SE, 1.5, 0.3};
  const double noise = 1e-3;

  Eigen::MatrixXd kxx(3, 3), kqx(4, 3), kqq(4, 4);
  auto se = [&](double a, double b) { return 1.5 * std::exp(-(a - b) * (a - b) / (2 * 0.09)); };
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) kxx(i, j) = se(x(i, 0), x(j, 0)) + (i == j ? noise : 0.0);
  }
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 3; ++j) kqx(i, j) = se(q(i, 0), x(j, 0));
    for (int j = 0; j < 4; ++j) kqq(i, j) = se(q(i, 0), q(j, 0));
  }
  const Eigen::MatrixXd inv = kxx.inverse();
  const Eigen::VectorXd mean = kqx * inv * y;
  const Eigen::MatrixXd cov = kqq - kqx * inv * kqx.transpose();

  const PosteriorResult r = posterior_predict(k, x, y, noise, q);
  CHECK((r.moments.mean - mean).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((r.moments.covariance - cov).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(r.prediction.noise_variance == noise);
  // Far from the data the posterior reverts to the prior.
  CHECK(r.prediction.variance(3) == doctest::Approx(1.5).epsilon(1e-6));
}

TEST_CASE("posterior with no training data is the prior") {
  const Eigen::MatrixXd q = column({0.0, 0.5});
  const BaseKernel k{KernelFamily::SE, 2.0, 1.0};
  const PosteriorResult r = posterior_predict(k, Eigen::MatrixXd(0, 1), Eigen::VectorXd(0), 0.1, q);
  CHECK(r.moments.mean.isZero());
  CHECK((r.moments.covariance - gram(k, q)).isZero());
}

TEST_CASE("noiseless interpolation at training inputs") {
  const Eigen::MatrixXd x = column({0.0, 0.3, 0.7});
  const Eigen::VectorXd y = (Eigen::VectorXd(3) << 0.2, -0.4, 0.9).finished();
  const PosteriorResult r = posterior_predict({KernelFamily::SE, 1.0, 0.2}, x, y, 0.0, x);
  CHECK((r.prediction.mean - y).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(r.prediction.variance.maxCoeff() < 1e-8);
}

TEST_CASE("prior samples reproduce the Gram covariance") {
  const Eigen::MatrixXd x = column({0.0, 0.2, 0.5});
  const Eigen::MatrixXd k = gram({KernelFamily::SE, 1.0, 0.3}, x);
  const int n = 20000;
  const Eigen::MatrixXd s = sample_prior(k, n, 11);
  REQUIRE(s.rows() == n);
  REQUIRE(s.cols() == 3);
  const Eigen::MatrixXd emp = s.transpose() * s / n;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const double se = std::sqrt((k(i, i) * k(j, j) + k(i, j) * k(i, j)) / n);
      CHECK(std::abs(emp(i, j) - k(i, j)) < 4 * se);
    }
  }
  CHECK(sample_prior(k, 5, 3) == sample_prior(k, 5, 3));
  CHECK(sample_prior(k, 5, 3) != sample_prior(k, 5, 4));
}

TEST_CASE("rng streams are reproducible and distinct") {
  Rng a(5, 1), b(5, 1), c(5, 2);
  const auto x = a.next_u64();
  CHECK(x == b.next_u64());
  CHECK(x != c.next_u64());
  Rng u(1);
  double sum = 0.0, sq = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double z = u.normal();
    sum += z;
    sq += z * z;
  }
  CHECK(std::abs(sum / n) < 0.02);
  CHECK(std::abs(sq / n - 1.0) < 0.02);
  for (int i = 0; i < 1000; ++i) {
    const double v = u.uniform();
    CHECK((v >= 0.0 && v < 1.0));
  }
}
