#include "soctuner/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

#include "soctuner/pareto.hpp"

namespace soctuner {

namespace {

double log_pdf(double x) { return -0.5 * x * x - 0.5 * std::log(2.0 * std::numbers::pi); }

constexpr double kTail = -30.0;

double log_cdf(double x) {
  if (x > 0.0) return std::log1p(-0.5 * std::erfc(x / std::numbers::sqrt2));
  return std::log(0.5 * std::erfc(-x / std::numbers::sqrt2));
}

/// cdf(x) = pdf(x) / (-x) * (1 + tail), asymptotic for x -> -inf.
double mills_tail(double x) {
  const double u = 1.0 / (x * x);
  return u * (-1.0 + u * (3.0 + u * (-15.0 + u * (105.0 - u * 945.0))));
}

}  // namespace

double objective_gain(double mean, double sd, const FrontSample& front, std::size_t objective) {
  const double s = std::max(sd, kSigmaFloor);
  double total = 0.0;
  for (std::size_t k = 0; k < front.samples(); ++k) {
    const double gamma =
        (front.maxima(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(objective)) - mean) / s;
    total += information_gain_term(gamma);
  }
  return total;
}

double information_gain_term(double gamma) {
  if (gamma < kTail) {
    // Expanded so the two O(gamma^2) parts cancel analytically.
    const double t = mills_tail(gamma);
    return 0.5 * gamma * gamma * t / (1.0 + t) + 0.5 * std::log(2.0 * std::numbers::pi) +
           std::log(-gamma) - std::log1p(t);
  }
  const double lc = log_cdf(gamma);
  const double ratio = std::exp(log_pdf(gamma) - lc);
  return std::max(0.0, 0.5 * gamma * ratio - lc);
}

double acquisition_value(std::span<const double> mean, std::span<const double> sd,
                         const FrontSample& front) {
  if (mean.size() != front.objectives() || sd.size() != front.objectives())
    throw std::invalid_argument("acquisition_value: objective count mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < mean.size(); ++i) total += objective_gain(mean[i], sd[i], front, i);
  return total;
}

FrontSample sample_front_maxima(const SurrogateState& state, const Eigen::MatrixXd& pool,
                                std::size_t samples, std::uint64_t seed) {
  const auto draws = sample_posterior(state, pool, samples, seed);
  const std::size_t objectives = draws.size();
  const auto q = static_cast<std::size_t>(pool.rows());
  FrontSample front;
  front.maxima.resize(static_cast<Eigen::Index>(samples), static_cast<Eigen::Index>(objectives));
  std::vector<MetricsVector> costs(q, MetricsVector(objectives));
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t j = 0; j < q; ++j)
      for (std::size_t i = 0; i < objectives; ++i)
        costs[j][i] = draws[i](static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(j));
    // Non-dominated under cost minimization == non-dominated after negation.
    const auto front_idx = pareto_indices(costs);
    for (std::size_t i = 0; i < objectives; ++i) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t j : front_idx) best = std::max(best, -costs[j][i]);
      front.maxima(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(i)) = best;
    }
  }
  return front;
}

std::vector<double> acquisition_values(const SurrogateState& state,
                                       const Eigen::MatrixXd& candidates,
                                       const FrontSample& front) {
  const auto preds = posterior(state, candidates);
  const std::size_t objectives = preds.size();
  if (front.objectives() != objectives)
    throw std::invalid_argument("acquisition_values: objective count mismatch");
  std::vector<double> out(static_cast<std::size_t>(candidates.rows()), 0.0);
  for (std::size_t i = 0; i < objectives; ++i) {
    const Eigen::VectorXd sd = preds[i].latent_sd();
    const double resolved = kResolvedRelativeSd * state.model(i).target_scale();
    for (std::size_t r = 0; r < out.size(); ++r) {
      const auto row = static_cast<Eigen::Index>(r);
      if (sd(row) <= resolved) continue;
      out[r] += objective_gain(-preds[i].mean(row), sd(row), front, i);
    }
  }
  return out;
}

Selection imoo_select(const SurrogateState& state, const Eigen::MatrixXd& candidates,
                      const FrontSample& front) {
  if (candidates.rows() == 0) throw std::invalid_argument("imoo_select: empty candidate pool");
  const auto values = acquisition_values(state, candidates, front);
  Selection best{0, values[0]};
  for (std::size_t r = 1; r < values.size(); ++r)
    if (values[r] > best.value) best = {r, values[r]};
  return best;
}

Selection imoo_select(const SurrogateState& state, const Eigen::MatrixXd& candidates,
                      std::size_t samples, std::uint64_t seed) {
  if (candidates.rows() == 0) throw std::invalid_argument("imoo_select: empty candidate pool");
  Eigen::MatrixXd front_pool = candidates;
  if (static_cast<std::size_t>(candidates.rows()) > kMaxJointPoints) {
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(candidates.rows()));
    std::iota(rows.begin(), rows.end(), 0);
    std::mt19937_64 rng(seed ^ 0x5bd1e995ULL);
    std::shuffle(rows.begin(), rows.end(), rng);
    rows.resize(kMaxJointPoints);
    std::sort(rows.begin(), rows.end());
    front_pool.resize(static_cast<Eigen::Index>(rows.size()), candidates.cols());
    for (std::size_t k = 0; k < rows.size(); ++k)
      front_pool.row(static_cast<Eigen::Index>(k)) = candidates.row(rows[k]);
  }
  return imoo_select(state, candidates, sample_front_maxima(state, front_pool, samples, seed));
}

}  // namespace soctuner
