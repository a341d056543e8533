#include "soctuner/importance.hpp"

#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "soctuner/csv.hpp"

namespace soctuner {

ImportanceVector ImportanceVector::uniform(std::size_t dimension) {
  return {std::vector<double>(dimension, dimension ? 1.0 / static_cast<double>(dimension) : 0.0)};
}

ImportanceVector normalize_importance(std::span<const double> raw) {
  double total = 0.0;
  for (double r : raw) {
    if (!(r >= 0.0) || !std::isfinite(r))
      throw std::invalid_argument("importance values must be finite and nonnegative");
    total += r;
  }
  if (total <= 0.0) return ImportanceVector::uniform(raw.size());
  ImportanceVector v;
  v.values.reserve(raw.size());
  for (double r : raw) v.values.push_back(r / total);
  return v;
}

IcdResult icd_from_trials(const DesignSpace& space, std::span<const DesignPoint> trials,
                          std::span<const MetricsVector> metrics, IcdOptions options) {
  if (trials.size() < 2) throw std::invalid_argument("icd: at least 2 trials are required");
  if (trials.size() != metrics.size())
    throw std::invalid_argument("icd: trial and metric counts differ");
  const std::size_t n = trials.size();
  const std::size_t dy = metrics.front().size();

  Eigen::MatrixXd y(n, dy);
  for (std::size_t r = 0; r < n; ++r) {
    space.validate(trials[r]);
    if (metrics[r].size() != dy) throw std::invalid_argument("icd: ragged metric vectors");
    for (std::size_t k = 0; k < dy; ++k) y(r, k) = metrics[r][k];
  }
  if (options.standardize) {
    for (Eigen::Index k = 0; k < y.cols(); ++k) {
      const double mean = y.col(k).mean();
      const double sd = std::sqrt((y.col(k).array() - mean).square().mean());
      if (sd > 0.0)
        y.col(k) = (y.col(k).array() - mean) / sd;
      else
        y.col(k).setZero();
    }
  }

  IcdResult result;
  result.raw.assign(space.dimension(), 0.0);
  for (std::size_t i = 0; i < space.dimension(); ++i) {
    // Candidate index -> (sum of metric rows, count); std::map keeps candidate order.
    std::map<std::size_t, std::pair<Eigen::VectorXd, std::size_t>> groups;
    for (std::size_t r = 0; r < n; ++r) {
      auto [it, fresh] = groups.try_emplace(trials[r][i], Eigen::VectorXd::Zero(dy), 0);
      it->second.first += y.row(r).transpose();
      ++it->second.second;
    }
    if (groups.size() < 2) {
      result.warnings.push_back(fmt::format(
          "parameter '{}': trials cover {} candidate(s), importance set to 0",
          space.parameter(i).name, groups.size()));
      continue;
    }
    std::vector<Eigen::VectorXd> means;
    for (const auto& [cand, acc] : groups) means.push_back(acc.first / static_cast<double>(acc.second));
    double sum = 0.0;
    for (std::size_t p = 0; p < means.size(); ++p)
      for (std::size_t q = p + 1; q < means.size(); ++q) sum += (means[p] - means[q]).norm();
    const double pairs = static_cast<double>(means.size() * (means.size() - 1) / 2);
    result.raw[i] = sum / pairs;
  }
  result.importance = normalize_importance(result.raw);
  result.trials.assign(trials.begin(), trials.end());
  result.metrics.assign(metrics.begin(), metrics.end());
  return result;
}

IcdResult icd(const DesignSpace& space, const Evaluator& evaluator, std::size_t n,
              std::uint64_t seed, IcdOptions options, unsigned threads) {
  if (n < 2) throw std::invalid_argument("icd: at least 2 trials are required");
  const auto trials = space.sample_uniform(n, seed);
  const auto metrics = evaluate_batch(evaluator, trials, threads);
  return icd_from_trials(space, trials, metrics, options);
}

// ---------------------------------------------------------------------------

std::size_t PrunedSpace::num_pruned() const {
  std::size_t count = 0;
  for (bool m : mask) count += m;
  return count;
}

DesignPoint PrunedSpace::lift(const DesignPoint& pruned_point) const {
  space.validate(pruned_point);
  DesignPoint out = pruned_point;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) out.assignment[i] = fixed_index[i];
  return out;
}

DesignPoint PrunedSpace::project(const DesignPoint& original_point) const {
  DesignPoint out = original_point;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) out.assignment[i] = fixed_index[i];
  return out;
}

bool PrunedSpace::matches(const DesignPoint& original_point) const {
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i] && original_point[i] != fixed_index[i]) return false;
  return true;
}

PrunedSpace prune(const DesignSpace& space, const ImportanceVector& importance, double threshold) {
  if (importance.size() != space.dimension())
    throw std::invalid_argument("prune: importance vector does not match the space");
  if (!(threshold >= 0.0)) throw std::invalid_argument("prune: threshold must be nonnegative");
  PrunedSpace out;
  out.mask.assign(space.dimension(), false);
  out.fixed_index.assign(space.dimension(), 0);
  std::vector<ParameterDef> params = space.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!(importance[i] < threshold)) continue;
    auto& p = params[i];
    const std::size_t mid = p.medium_index();
    out.mask[i] = true;
    out.fixed_index[i] = mid;
    p.labels = {p.labels[mid]};
    p.levels = {p.levels[mid]};
  }
  out.space = DesignSpace(std::move(params), space.seed());
  return out;
}

double cardinality_reduction_percent(const DesignSpace& original, const DesignSpace& pruned) {
  const double ratio = std::pow(10.0, pruned.log10_cardinality() - original.log10_cardinality());
  return 100.0 * (1.0 - ratio);
}

IcdSpace transform(const DesignSpace& space, std::span<const DesignPoint> pool,
                   const ImportanceVector& importance, std::vector<bool> pruned) {
  if (importance.size() != space.dimension())
    throw std::invalid_argument("transform: importance vector does not match the space");
  IcdSpace out;
  out.points.assign(pool.begin(), pool.end());
  out.importance = importance;
  out.pruned = pruned.empty() ? std::vector<bool>(space.dimension(), false) : std::move(pruned);
  out.coords.resize(static_cast<Eigen::Index>(pool.size()), static_cast<Eigen::Index>(space.dimension()));
  for (std::size_t r = 0; r < pool.size(); ++r) {
    const auto x = space.encode(pool[r]);
    for (std::size_t i = 0; i < x.size(); ++i)
      out.coords(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) = importance[i] * x[i];
  }
  return out;
}

void write_importance_csv(std::ostream& out, const DesignSpace& space,
                          const ImportanceVector& importance) {
  out << "parameter,value\n";
  for (std::size_t i = 0; i < space.dimension(); ++i)
    out << csv::escape(space.parameter(i).name) << ',' << csv::format_number(importance[i]) << '\n';
}

ImportanceVector read_importance_csv(std::istream& in, const DesignSpace& space) {
  std::string line;
  if (!std::getline(in, line) || csv::split(line) != std::vector<std::string>{"parameter", "value"})
    throw std::runtime_error("importance csv: expected header 'parameter,value'");
  ImportanceVector v{std::vector<double>(space.dimension(), 0.0)};
  std::vector<bool> seen(space.dimension(), false);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = csv::split(line);
    if (fields.size() != 2) throw std::runtime_error("importance csv: expected 2 fields per row");
    const std::size_t idx = space.find(fields[0]);
    if (idx == space.dimension())
      throw std::runtime_error(fmt::format("importance csv: unknown parameter '{}'", fields[0]));
    if (!csv::parse_number(fields[1], v.values[idx]))
      throw std::runtime_error(fmt::format("importance csv: bad value for '{}'", fields[0]));
    seen[idx] = true;
  }
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (!seen[i])
      throw std::runtime_error(fmt::format("importance csv: missing parameter '{}'", space.parameter(i).name));
  return v;
}

}  // namespace soctuner
