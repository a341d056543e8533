#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "soctuner/design_space.hpp"
#include "soctuner/evaluators.hpp"

namespace soctuner {

/// a dominates b: no worse on every axis, strictly better on one (minimization).
/// Throws std::invalid_argument on dimension mismatch.
bool dominates(std::span<const double> a, std::span<const double> b);

struct ArchiveEntry {
  DesignPoint point;
  MetricsVector metrics;
};

/// Mutually non-dominated set of evaluated points. Single writer.
class ParetoArchive {
 public:
  /// Returns true when the entry was added. Dominated entries and repeated
  /// design points are rejected; entries the newcomer dominates are evicted.
  bool insert(const DesignPoint& point, const MetricsVector& metrics);

  const std::vector<ArchiveEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::vector<MetricsVector> metrics() const;
  std::vector<DesignPoint> points() const;

 private:
  std::vector<ArchiveEntry> entries_;
};

/// Positions of the non-dominated vectors, ascending. Of several identical
/// vectors only the first is reported.
std::vector<std::size_t> pareto_indices(std::span<const MetricsVector> metrics);

ParetoArchive pareto_extract(std::span<const ArchiveEntry> entries);
ParetoArchive pareto_extract(std::span<const DesignPoint> points,
                             std::span<const MetricsVector> metrics);

/// Average distance from each reference vector to its nearest learned vector.
/// With `normalize`, both sets are min-max scaled per axis by the reference's range first
/// (axes with zero range are left unscaled).
double adrs(std::span<const MetricsVector> reference, std::span<const MetricsVector> learned,
            bool normalize = true);

}  // namespace soctuner
