#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "soctuner/importance.hpp"

namespace soctuner {

/// Gaussian Gram matrix exp(-|a-b|^2 / (2 bandwidth^2)) over the rows of `coords`.
Eigen::MatrixXd gaussian_gram(const Eigen::MatrixXd& coords, double bandwidth);

/// Median of all pairwise row distances (at most `max_rows` rows are used, picked
/// with `seed`). Returns 1 when the median is zero.
double median_pairwise_distance(const Eigen::MatrixXd& coords, std::size_t max_rows = 2000,
                                std::uint64_t seed = 0);

/// Greedy transductive experimental design over a fixed similarity matrix.
///
/// Each step picks the unselected column maximizing |K_x|^2 / (K_xx + mu)
/// (lowest index on ties) and deflates K <- K - K_z K_z^T / (K_zz + mu).
class TedSelector {
 public:
  TedSelector(Eigen::MatrixXd kernel, double mu);

  /// Selects and returns the next pool index.
  std::size_t step();
  std::size_t remaining() const { return remaining_; }
  const Eigen::MatrixXd& kernel() const { return kernel_; }
  const std::vector<std::size_t>& selected() const { return order_; }

 private:
  Eigen::MatrixXd kernel_;
  double mu_;
  std::vector<char> taken_;
  std::vector<std::size_t> order_;
  std::size_t remaining_;
};

struct TedOptions {
  double mu = 0.1;
  std::optional<double> bandwidth;  // median heuristic when unset
  std::size_t max_pool = 5000;      // larger pools are subsampled uniformly first
  std::uint64_t seed = 0;
};

struct TedResult {
  std::vector<std::size_t> order;   // positions in the input pool, in selection order
  std::vector<DesignPoint> points;  // matching original-space points
  double bandwidth = 1.0;
};

/// Pick b diverse points from the importance-weighted pool.
TedResult soc_init(const IcdSpace& pool, std::size_t b, const TedOptions& options = {});

}  // namespace soctuner
