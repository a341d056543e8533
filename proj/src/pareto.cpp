#include "soctuner/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace soctuner {

bool dominates(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw std::invalid_argument(
        fmt::format("dominates: dimension mismatch ({} vs {})", a.size(), b.size()));
  bool strictly = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) return false;
    if (a[i] < b[i]) strictly = true;
  }
  return strictly;
}

bool ParetoArchive::insert(const DesignPoint& point, const MetricsVector& metrics) {
  for (const auto& e : entries_) {
    if (e.point == point) return false;
    if (dominates(e.metrics, metrics)) return false;
  }
  std::erase_if(entries_, [&](const ArchiveEntry& e) { return dominates(metrics, e.metrics); });
  entries_.push_back({point, metrics});
  return true;
}

std::vector<MetricsVector> ParetoArchive::metrics() const {
  std::vector<MetricsVector> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.metrics);
  return out;
}

std::vector<DesignPoint> ParetoArchive::points() const {
  std::vector<DesignPoint> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.point);
  return out;
}

std::vector<std::size_t> pareto_indices(std::span<const MetricsVector> metrics) {
  // Sort lexicographically so any dominator of i precedes it; then a single
  // pass against the running front suffices.
  std::vector<std::size_t> order(metrics.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return metrics[a] < metrics[b]; });

  std::vector<std::size_t> front;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& m = metrics[order[k]];
    if (k > 0 && metrics[order[k - 1]] == m) continue;  // stable sort keeps first occurrence first
    bool dominated = false;
    for (std::size_t f : front) {
      if (dominates(metrics[f], m)) {
        dominated = true;
        break;
      }
    }
    if (!dominated) front.push_back(order[k]);
  }
  std::sort(front.begin(), front.end());
  return front;
}

ParetoArchive pareto_extract(std::span<const ArchiveEntry> entries) {
  std::vector<MetricsVector> metrics;
  metrics.reserve(entries.size());
  for (const auto& e : entries) metrics.push_back(e.metrics);
  ParetoArchive archive;
  for (std::size_t i : pareto_indices(metrics)) archive.insert(entries[i].point, entries[i].metrics);
  return archive;
}

ParetoArchive pareto_extract(std::span<const DesignPoint> points,
                             std::span<const MetricsVector> metrics) {
  if (points.size() != metrics.size())
    throw std::invalid_argument("pareto_extract: point and metric counts differ");
  ParetoArchive archive;
  for (std::size_t i : pareto_indices(metrics)) archive.insert(points[i], metrics[i]);
  return archive;
}

double adrs(std::span<const MetricsVector> reference, std::span<const MetricsVector> learned,
            bool normalize) {
  if (reference.empty() || learned.empty()) throw std::invalid_argument("adrs: empty set");
  const std::size_t dim = reference.front().size();
  for (const auto& r : reference)
    if (r.size() != dim) throw std::invalid_argument("adrs: reference dimension mismatch");
  for (const auto& l : learned)
    if (l.size() != dim) throw std::invalid_argument("adrs: learned dimension mismatch");

  std::vector<double> scale(dim, 1.0);
  if (normalize) {
    for (std::size_t k = 0; k < dim; ++k) {
      double mn = std::numeric_limits<double>::infinity();
      double mx = -mn;
      for (const auto& r : reference) {
        mn = std::min(mn, r[k]);
        mx = std::max(mx, r[k]);
      }
      scale[k] = mx > mn ? mx - mn : 1.0;
    }
  }

  double total = 0.0;
  for (const auto& g : reference) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& w : learned) {
      double d2 = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        const double diff = (g[k] - w[k]) / scale[k];
        d2 += diff * diff;
      }
      best = std::min(best, d2);
    }
    total += std::sqrt(best);
  }
  return total / static_cast<double>(reference.size());
}

}  // namespace soctuner
