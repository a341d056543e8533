#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "soctuner/gp.hpp"

namespace soctuner {

/// Per-draw maxima of the sampled Pareto front, maximization convention
/// (negated costs). Row s, column i: objective i's maximum in draw s.
struct FrontSample {
  Eigen::MatrixXd maxima;

  std::size_t samples() const { return static_cast<std::size_t>(maxima.rows()); }
  std::size_t objectives() const { return static_cast<std::size_t>(maxima.cols()); }
};

/// Draw S joint posterior samples over `pool`, keep each draw's non-dominated
/// subset and record the per-objective maxima over it.
FrontSample sample_front_maxima(const SurrogateState& state, const Eigen::MatrixXd& pool,
                                std::size_t samples, std::uint64_t seed);

/// Lower bound applied to posterior standard deviations.
inline constexpr double kSigmaFloor = 1e-9;

/// Posterior sd, relative to an objective's target scale, at or below which the
/// objective counts as resolved at that candidate and contributes nothing.
inline constexpr double kResolvedRelativeSd = 1e-2;

/// Truncated-Gaussian entropy reduction for one objective and one front draw:
///   gamma * pdf(gamma) / (2 * cdf(gamma)) - ln cdf(gamma),  clamped at 0.
double information_gain_term(double gamma);

/// Sum of information_gain_term over objectives and draws, with
/// gamma = (y*_{s,i} - mean_i) / sd_i.  `mean` is in maximization convention.
double acquisition_value(std::span<const double> mean, std::span<const double> sd,
                         const FrontSample& front);

/// Sum of information_gain_term over the draws for one objective.
double objective_gain(double mean, double sd, const FrontSample& front, std::size_t objective);

/// Acquisition of every row of `candidates` under `state` (costs are negated internally).
/// Objectives resolved at a candidate (see kResolvedRelativeSd) are skipped.
std::vector<double> acquisition_values(const SurrogateState& state,
                                       const Eigen::MatrixXd& candidates,
                                       const FrontSample& front);

struct Selection {
  std::size_t index = 0;  // row of the chosen candidate
  double value = 0.0;     // its acquisition value
};

/// Argmax of the acquisition over candidates; lowest index wins ties.
Selection imoo_select(const SurrogateState& state, const Eigen::MatrixXd& candidates,
                      const FrontSample& front);

/// Convenience form that samples the front over the candidates themselves
/// (uniformly subsampled to the joint-draw cap when needed).
Selection imoo_select(const SurrogateState& state, const Eigen::MatrixXd& candidates,
                      std::size_t samples, std::uint64_t seed);

}  // namespace soctuner
