#include <doctest.h>

#include <random>
#include <set>

#include "oracles.hpp"
#include "soctuner/init_sampling.hpp"
#include "support.hpp"

using namespace soctuner;

namespace {

Eigen::MatrixXd random_coords(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = u(rng);
  return x;
}

IcdSpace pool_of(const Eigen::MatrixXd& coords) {
  IcdSpace s;
  s.coords = coords;
  for (Eigen::Index i = 0; i < coords.rows(); ++i) s.points.push_back(DesignPoint{{static_cast<std::size_t>(i)}});
  s.importance = ImportanceVector::uniform(static_cast<std::size_t>(coords.cols()));
  return s;
}

}  // namespace

TEST_CASE("gram matrix is symmetric with unit diagonal") {
  const auto x = random_coords(50, 3, 1);
  const auto k = gaussian_gram(x, 0.7);
  CHECK((k - k.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  for (Eigen::Index i = 0; i < k.rows(); ++i) CHECK(k(i, i) == 1.0);
  const double d2 = (x.row(0) - x.row(1)).squaredNorm();
  CHECK(k(0, 1) == doctest::Approx(std::exp(-d2 / (2 * 0.49))));
}

TEST_CASE("median heuristic") {
  Eigen::MatrixXd x(3, 1);
  x << 0, 1, 3;
  CHECK(median_pairwise_distance(x) == doctest::Approx(2.0));
  CHECK(median_pairwise_distance(Eigen::MatrixXd::Zero(4, 2)) == 1.0);
}

TEST_CASE("three one-dimensional points, b=1") {
  Eigen::MatrixXd x(3, 1);
  x << 0.0, 0.1, 1.0;
  const auto pool = pool_of(x);
  const auto r = soc_init(pool, 1);
  const auto k = gaussian_gram(x, r.bandwidth);
  std::size_t best = 0;
  for (std::size_t j = 1; j < 3; ++j)
    if (k.col(j).squaredNorm() / (k(j, j) + 0.1) > k.col(best).squaredNorm() / (k(best, best) + 0.1)) best = j;
  CHECK(r.order == std::vector<std::size_t>{best});
  CHECK(r.order == oracle::ted(k, 0.1, 1));
}

TEST_CASE("soc_init matches the naive recompute reference") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Eigen::Index n = 40 + static_cast<Eigen::Index>(seed) * 16;
    const auto x = random_coords(n, 4, 10 + seed);
    const auto pool = pool_of(x);
    const auto r = soc_init(pool, 15, TedOptions{0.1, std::nullopt, 5000, seed});
    CHECK(r.order == oracle::ted(gaussian_gram(x, r.bandwidth), 0.1, 15));
  }
}

TEST_CASE("deflation keeps K symmetric with nonnegative diagonal") {
  const auto x = random_coords(120, 3, 5);
  TedSelector sel(gaussian_gram(x, median_pairwise_distance(x)), 0.1);
  for (int i = 0; i < 30; ++i) {
    sel.step();
    const auto& k = sel.kernel();
    CHECK((k - k.transpose()).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(k.diagonal().minCoeff() >= -1e-9);
  }
  CHECK(sel.remaining() == 90);
}

TEST_CASE("b equal to the pool returns everything, distinct") {
  const auto x = random_coords(25, 2, 6);
  const auto r = soc_init(pool_of(x), 25);
  std::set<std::size_t> seen(r.order.begin(), r.order.end());
  CHECK(seen.size() == 25);
  CHECK_THROWS(soc_init(pool_of(x), 26));
}

TEST_CASE("b=20 on a 500-point pool is deterministic and distinct") {
  const auto& s = table1_space();
  const auto pts = unique_points(s.sample_uniform(500, 3));
  const auto pool = transform(s, pts, ImportanceVector::uniform(s.dimension()));
  const auto a = soc_init(pool, 20);
  const auto b = soc_init(pool, 20);
  CHECK(a.order == b.order);
  CHECK(a.points == b.points);
  CHECK(std::set<DesignPoint>(a.points.begin(), a.points.end()).size() == 20);
  for (std::size_t i = 0; i < a.order.size(); ++i) CHECK(a.points[i] == pts[a.order[i]]);
}

TEST_CASE("scaling coordinates and bandwidth together keeps the sequence") {
  const auto x = random_coords(80, 3, 7);
  const auto a = soc_init(pool_of(x), 12, TedOptions{0.1, 0.5, 5000, 0});
  const auto b = soc_init(pool_of(4.0 * x), 12, TedOptions{0.1, 2.0, 5000, 0});
  CHECK(a.order == b.order);
}

TEST_CASE("non-finite kernels and bad mu are rejected") {
  Eigen::MatrixXd k = Eigen::MatrixXd::Identity(3, 3);
  k(0, 1) = std::nan("");
  CHECK_THROWS(TedSelector(k, 0.1));
  CHECK_THROWS(TedSelector(Eigen::MatrixXd::Identity(2, 2), 0.0));
}

TEST_CASE("oversized pools are subsampled") {
  const auto x = random_coords(300, 2, 8);
  const auto r = soc_init(pool_of(x), 10, TedOptions{0.1, std::nullopt, 100, 3});
  CHECK(r.order.size() == 10);
  for (std::size_t pos : r.order) CHECK(pos < 300);
}
