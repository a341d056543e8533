#include "soctuner/init_sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

namespace soctuner {

Eigen::MatrixXd gaussian_gram(const Eigen::MatrixXd& coords, double bandwidth) {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth))
    throw std::invalid_argument("gaussian_gram: bandwidth must be positive and finite");
  const Eigen::Index n = coords.rows();
  Eigen::MatrixXd k(n, n);
  const double scale = -0.5 / (bandwidth * bandwidth);
  for (Eigen::Index j = 0; j < n; ++j) {
    k(j, j) = 1.0;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double v = std::exp(scale * (coords.row(i) - coords.row(j)).squaredNorm());
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

double median_pairwise_distance(const Eigen::MatrixXd& coords, std::size_t max_rows,
                                std::uint64_t seed) {
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(coords.rows()));
  std::iota(rows.begin(), rows.end(), 0);
  if (rows.size() > max_rows) {
    std::mt19937_64 rng(seed);
    std::shuffle(rows.begin(), rows.end(), rng);
    rows.resize(max_rows);
  }
  std::vector<double> dist;
  dist.reserve(rows.size() * (rows.size() - 1) / 2);
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = a + 1; b < rows.size(); ++b)
      dist.push_back((coords.row(rows[a]) - coords.row(rows[b])).norm());
  if (dist.empty()) return 1.0;
  auto mid = dist.begin() + static_cast<std::ptrdiff_t>(dist.size() / 2);
  std::nth_element(dist.begin(), mid, dist.end());
  double median = *mid;
  if (dist.size() % 2 == 0) median = 0.5 * (median + *std::max_element(dist.begin(), mid));
  return median > 0.0 ? median : 1.0;
}

TedSelector::TedSelector(Eigen::MatrixXd kernel, double mu)
    : kernel_(std::move(kernel)), mu_(mu), remaining_(static_cast<std::size_t>(kernel_.rows())) {
  if (kernel_.rows() != kernel_.cols()) throw std::invalid_argument("ted: kernel must be square");
  if (!(mu_ > 0.0)) throw std::invalid_argument("ted: mu must be positive");
  if (!kernel_.allFinite()) throw std::invalid_argument("ted: kernel has non-finite entries");
  taken_.assign(remaining_, 0);
}

std::size_t TedSelector::step() {
  if (remaining_ == 0) throw std::logic_error("ted: pool exhausted");
  const Eigen::RowVectorXd norms = kernel_.colwise().squaredNorm();
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (Eigen::Index x = 0; x < kernel_.cols(); ++x) {
    if (taken_[static_cast<std::size_t>(x)]) continue;
    const double score = norms(x) / (kernel_(x, x) + mu_);
    if (score > best_score) {
      best_score = score;
      best = static_cast<std::size_t>(x);
    }
  }
  if (!std::isfinite(best_score)) throw std::runtime_error("ted: non-finite selection score");

  const auto z = static_cast<Eigen::Index>(best);
  const Eigen::VectorXd column = kernel_.col(z);
  const double denom = column(z) + mu_;
  kernel_.noalias() -= column * column.transpose() / denom;

  taken_[best] = 1;
  order_.push_back(best);
  --remaining_;
  return best;
}

TedResult soc_init(const IcdSpace& pool, std::size_t b, const TedOptions& options) {
  if (b == 0) throw std::invalid_argument("soc_init: b must be at least 1");
  if (b > pool.size())
    throw std::invalid_argument(
        fmt::format("soc_init: b = {} exceeds the pool size {}", b, pool.size()));
  if (!(options.mu > 0.0)) throw std::invalid_argument("soc_init: mu must be positive");

  // Work on a uniform subsample when the dense kernel would be too large.
  std::vector<std::size_t> members(pool.size());
  std::iota(members.begin(), members.end(), 0);
  if (members.size() > options.max_pool) {
    std::mt19937_64 rng(options.seed);
    std::shuffle(members.begin(), members.end(), rng);
    members.resize(std::max(options.max_pool, b));
    std::sort(members.begin(), members.end());
  }
  Eigen::MatrixXd coords(static_cast<Eigen::Index>(members.size()), pool.coords.cols());
  for (std::size_t r = 0; r < members.size(); ++r)
    coords.row(static_cast<Eigen::Index>(r)) = pool.coords.row(static_cast<Eigen::Index>(members[r]));

  TedResult result;
  result.bandwidth = options.bandwidth ? *options.bandwidth
                                       : median_pairwise_distance(coords, 2000, options.seed);
  TedSelector selector(gaussian_gram(coords, result.bandwidth), options.mu);
  for (std::size_t i = 0; i < b; ++i) {
    const std::size_t pos = members[selector.step()];
    result.order.push_back(pos);
    result.points.push_back(pool.points[pos]);
  }
  return result;
}

}  // namespace soctuner
