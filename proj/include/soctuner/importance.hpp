#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "soctuner/design_space.hpp"
#include "soctuner/evaluators.hpp"

namespace soctuner {

/// Per-parameter nonnegative weights summing to 1, in space parameter order.
struct ImportanceVector {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  static ImportanceVector uniform(std::size_t dimension);
};

/// Sum-to-one normalization; an all-zero input becomes the uniform vector.
ImportanceVector normalize_importance(std::span<const double> raw);

struct IcdOptions {
  /// Z-score each metric axis over the trials before measuring cluster distances.
  bool standardize = true;
};

struct IcdResult {
  ImportanceVector importance;
  std::vector<double> raw;  // inter-cluster distances before normalization
  std::vector<std::string> warnings;
  std::vector<DesignPoint> trials;
  std::vector<MetricsVector> metrics;
};

/// Inter-cluster-distance importance from already-evaluated trials.
///
/// For each parameter the trials are grouped by the candidate they take; the
/// score is the mean Euclidean distance between the groups' mean metric
/// vectors over all unordered group pairs. Parameters whose trials cover fewer
/// than two candidates score 0 and produce a warning.
IcdResult icd_from_trials(const DesignSpace& space, std::span<const DesignPoint> trials,
                          std::span<const MetricsVector> metrics, IcdOptions options = {});

/// Samples n points uniformly, evaluates them and runs icd_from_trials.
IcdResult icd(const DesignSpace& space, const Evaluator& evaluator, std::size_t n,
              std::uint64_t seed, IcdOptions options = {}, unsigned threads = 1);

/// Result of threshold pruning. Point indices stay in the original space's
/// numbering; pruned parameters are pinned to their medium candidate.
struct PrunedSpace {
  DesignSpace space;           // pruned parameters reduced to their medium candidate
  std::vector<bool> mask;      // true where the parameter was fixed
  std::vector<std::size_t> fixed_index;  // original candidate index of each fixed parameter

  std::size_t num_pruned() const;
  /// Map a point of `space` back to original indices.
  DesignPoint lift(const DesignPoint& pruned_point) const;
  /// Pin the pruned coordinates of an original-space point.
  DesignPoint project(const DesignPoint& original_point) const;
  /// True when the original-space point already sits on every pinned value.
  bool matches(const DesignPoint& original_point) const;
};

/// Parameters with importance below `threshold` keep only candidate floor((t-1)/2).
PrunedSpace prune(const DesignSpace& space, const ImportanceVector& importance, double threshold);

/// Percentage of the original cardinality removed by pruning.
double cardinality_reduction_percent(const DesignSpace& original, const DesignSpace& pruned);

/// Pool in importance-weighted coordinates; row r of `coords` is
/// importance ⊙ encode(points[r]). Original points are kept verbatim.
struct IcdSpace {
  std::vector<DesignPoint> points;
  Eigen::MatrixXd coords;
  ImportanceVector importance;
  std::vector<bool> pruned;

  std::size_t size() const { return points.size(); }
};

IcdSpace transform(const DesignSpace& space, std::span<const DesignPoint> pool,
                   const ImportanceVector& importance, std::vector<bool> pruned = {});

/// Two-column CSV: parameter,value.
void write_importance_csv(std::ostream& out, const DesignSpace& space,
                          const ImportanceVector& importance);
ImportanceVector read_importance_csv(std::istream& in, const DesignSpace& space);

}  // namespace soctuner
