#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "soctuner/gp.hpp"

using namespace soctuner;

namespace {

Eigen::MatrixXd uniform(Eigen::Index n, Eigen::Index d, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = u(rng);
  return x;
}

Eigen::VectorXd toy(const Eigen::MatrixXd& x) {
  Eigen::VectorXd y(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    y(i) = 3.0 + std::sin(4.0 * x(i, 0)) + 0.5 * x(i, 1) * x(i, 1) - x(i, 2);
  return y;
}

KernelParams params3() { return KernelParams{1.7, {0.4, 0.9, 0.6}, 2e-2}; }

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("posterior matches the dense explicit-inverse oracle") {
  const auto x = uniform(30, 3, 1);
  const auto y = toy(x);
  const auto q = uniform(50, 3, 2, -0.2, 1.2);
  const auto p = params3();
  const GaussianProcess gp(x, y, p);
  const auto pred = gp.predict(q);
  const Eigen::VectorXd ys = (y.array() - gp.target_mean()) / gp.target_scale();
  const auto ref = oracle::gp_posterior(x, ys, q, p.signal_variance, p.length_scales, p.noise_variance);
  const double s = gp.target_scale();
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    const double mean = ref.mean(i) * s + gp.target_mean();
    const double var = ref.var(i) * s * s;
    CHECK(std::abs(pred.mean(i) - mean) <= 1e-6 * std::max(1.0, std::abs(mean)));
    CHECK(std::abs(pred.latent_variance(i) - var) <= 1e-6 * std::max(1e-3, std::abs(var)));
  }
  CHECK(pred.noise_variance == doctest::Approx(p.noise_variance * s * s));
}

TEST_CASE("target standardization uses the population sd") {
  Eigen::MatrixXd x(4, 1);
  x << 0, 1, 2, 3;
  Eigen::VectorXd y(4);
  y << 1, 3, 5, 7;
  const GaussianProcess gp(x, y, KernelParams{1.0, {1.0}, 0.01});
  CHECK(gp.target_mean() == 4.0);
  CHECK(gp.target_scale() == doctest::Approx(std::sqrt(5.0)));
  CHECK_FALSE(gp.constant_targets());
}

TEST_CASE("log marginal likelihood matches the oracle and finite differences") {
  const auto x = uniform(25, 3, 3);
  Eigen::VectorXd y = toy(x);
  y = (y.array() - y.mean()) / std::sqrt((y.array() - y.mean()).square().mean());
  for (const auto& p : {params3(), KernelParams{0.3, {0.2, 2.0, 1.1}, 1e-3}, KernelParams{4.0, {1.0, 0.5, 0.3}, 0.2}}) {
    const auto l = log_marginal_likelihood(x, y, p);
    CHECK(rel(l.value, oracle::gp_lml(x, y, p.signal_variance, p.length_scales, p.noise_variance)) < 1e-9);
    const Eigen::VectorXd theta = p.to_log();
    const double h = 1e-5;
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
      Eigen::VectorXd up = theta, dn = theta;
      up(k) += h;
      dn(k) -= h;
      const double fd = (log_marginal_likelihood(x, y, KernelParams::from_log(up), false).value -
                         log_marginal_likelihood(x, y, KernelParams::from_log(dn), false).value) /
                        (2 * h);
      CHECK(std::abs(l.gradient(k) - fd) <= 1e-4 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST_CASE("posterior variance never exceeds the prior") {
  const auto x = uniform(20, 3, 4);
  const GaussianProcess gp(x, toy(x), params3());
  const auto pred = gp.predict(uniform(200, 3, 5, -1.0, 2.0));
  const double prior = params3().signal_variance * gp.target_scale() * gp.target_scale();
  for (Eigen::Index i = 0; i < pred.latent_variance.size(); ++i) {
    CHECK(pred.latent_variance(i) <= prior + 1e-9);
    CHECK(pred.latent_variance(i) >= 0.0);
  }
}

TEST_CASE("adding a training point never increases variance") {
  const auto x = uniform(21, 3, 6);
  const auto y = toy(x);
  const auto q = uniform(100, 3, 7);
  const auto p = params3();
  const GaussianProcess small(x.topRows(20), y.head(20), p);
  const GaussianProcess big(x, y, p);
  // Compare in standardized units so the two target scales do not interfere.
  const auto a = small.predict(q), b = big.predict(q);
  const double sa = small.target_scale() * small.target_scale(), sb = big.target_scale() * big.target_scale();
  for (Eigen::Index i = 0; i < q.rows(); ++i) CHECK(b.latent_variance(i) / sb <= a.latent_variance(i) / sa + 1e-9);
}

TEST_CASE("far queries recover the prior") {
  const auto x = uniform(15, 3, 8);
  const GaussianProcess gp(x, toy(x), params3());
  Eigen::MatrixXd q = Eigen::MatrixXd::Constant(3, 3, 30.0);
  q(1, 0) = -40.0;
  const auto pred = gp.predict(q);
  const double s2 = gp.target_scale() * gp.target_scale();
  for (Eigen::Index i = 0; i < 3; ++i) {
    CHECK(std::abs(pred.mean(i) - gp.target_mean()) < 1e-3);
    const double total = pred.latent_variance(i) + pred.noise_variance;
    CHECK(std::abs(total - (params3().signal_variance + params3().noise_variance) * s2) < 1e-3);
  }
}

TEST_CASE("batch posterior equals pointwise posterior") {
  const auto x = uniform(15, 3, 9);
  const GaussianProcess gp(x, toy(x), params3());
  const auto q = uniform(10, 3, 10);
  const auto batch = gp.predict(q);
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    const auto one = gp.predict(q.row(i));
    CHECK(one.mean(0) == doctest::Approx(batch.mean(i)).epsilon(1e-12));
    CHECK(one.latent_variance(0) == doctest::Approx(batch.latent_variance(i)).epsilon(1e-9));
  }
}

TEST_CASE("fit interpolates at the noise floor and improves the likelihood") {
  const auto x = uniform(25, 3, 11);
  const auto y = toy(x);
  FitOptions o;
  o.seed = 1;
  const auto gp = fit_gp(x, y, o);
  CHECK(gp.params().noise_variance >= kNoiseFloor * (1 - 1e-12));
  const auto pred = gp.predict(x);
  const double noise_sd = std::sqrt(gp.params().noise_variance) * gp.target_scale();
  for (Eigen::Index i = 0; i < x.rows(); ++i) CHECK(std::abs(pred.mean(i) - y(i)) <= 3.0 * noise_sd + 1e-9);

  KernelParams start{1.0, {0.5, 0.5, 0.5}, 1e-2};
  const GaussianProcess unfit(x, y, start);
  CHECK(gp.log_marginal_likelihood() >= unfit.log_marginal_likelihood());

  const GaussianProcess exact(x, y, KernelParams{1.0, {0.5, 0.8, 0.8}, 1e-8});
  const auto at = exact.predict(x);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    CHECK(std::abs(at.mean(i) - y(i)) / exact.target_scale() < 1e-6);
}

TEST_CASE("fit is deterministic and validates its input") {
  const auto x = uniform(12, 3, 12);
  const auto y = toy(x);
  const auto a = fit_gp(x, y), b = fit_gp(x, y);
  CHECK(a.params().to_log() == b.params().to_log());
  CHECK_THROWS_AS(fit_gp(x.topRows(1), y.head(1)), GpError);
  CHECK_THROWS_AS(fit_gp(x, y.head(5)), GpError);
}

TEST_CASE("identical targets are flagged, not fatal") {
  const auto x = uniform(8, 3, 13);
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(8, 2.5);
  const auto gp = fit_gp(x, y);
  CHECK(gp.constant_targets());
  const auto pred = gp.predict(uniform(4, 3, 14));
  for (Eigen::Index i = 0; i < 4; ++i) CHECK(pred.mean(i) == doctest::Approx(2.5));
}

TEST_CASE("objectives are modeled independently") {
  const auto x = uniform(15, 2, 15);
  Eigen::MatrixXd y(15, 2);
  for (Eigen::Index i = 0; i < 15; ++i) {
    y(i, 0) = x(i, 0) * x(i, 0);
    y(i, 1) = std::cos(3 * x(i, 1));
  }
  Eigen::MatrixXd swapped(15, 2);
  swapped.col(0) = y.col(1);
  swapped.col(1) = y.col(0);
  FitOptions o;
  o.restarts = 1;
  const auto a = fit(x, y, o), b = fit(x, swapped, o);
  const auto q = uniform(6, 2, 16);
  const auto pa = posterior(a, q), pb = posterior(b, q);
  CHECK(pa[0].mean.isApprox(pb[1].mean, 1e-8));
  CHECK(pa[1].mean.isApprox(pb[0].mean, 1e-8));
  CHECK_THROWS_AS(posterior(SurrogateState{}, q), GpError);
}

TEST_CASE("joint samples: degenerate, Monte Carlo mean and determinism") {
  const auto x = uniform(10, 3, 17);
  const auto y = toy(x);
  const SurrogateState exact({GaussianProcess(x, y, KernelParams{1.0, {0.2, 0.2, 0.2}, 1e-14})});
  const auto one = sample_posterior(exact, x.topRows(1), 1, 3);
  CHECK(std::abs(one[0](0, 0) - y(0)) < 1e-6);

  const SurrogateState st({GaussianProcess(x, y, params3())});
  Eigen::MatrixXd q(1, 3);
  q << 0.3, 0.9, 0.1;
  const auto draws = sample_posterior(st, q, 10000, 5);
  const auto pred = posterior(st, q)[0];
  const double sd = pred.latent_sd()(0);
  CHECK(std::abs(draws[0].col(0).mean() - pred.mean(0)) <= 4.0 * sd / 100.0);

  const auto pool = uniform(40, 3, 18);
  CHECK(sample_posterior(st, pool, 4, 9)[0] == sample_posterior(st, pool, 4, 9)[0]);
  CHECK(sample_posterior(st, pool, 4, 9)[0] != sample_posterior(st, pool, 4, 10)[0]);
  CHECK_THROWS_AS(sample_posterior(st, uniform(kMaxJointPoints + 1, 3, 19), 1, 0), GpError);
  CHECK_THROWS_AS(sample_posterior(st, Eigen::MatrixXd(0, 3), 1, 0), GpError);
}

TEST_CASE("joint samples over repeated training points stay finite") {
  const auto x = uniform(12, 3, 20);
  const SurrogateState st({GaussianProcess(x, toy(x), KernelParams{1.0, {2.0, 2.0, 2.0}, 1e-6})});
  Eigen::MatrixXd q(36, 3);
  q << x, x, x;
  const auto d = sample_posterior(st, q, 3, 1);
  CHECK(d[0].allFinite());
}
