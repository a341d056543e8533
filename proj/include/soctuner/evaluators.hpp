#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "soctuner/design_space.hpp"

namespace soctuner {

/// Objective values, minimization convention on every axis.
using MetricsVector = std::vector<double>;

enum class EvaluatorKind { tabular, analytic_soc, benchmark };

std::string to_string(EvaluatorKind kind);

struct EvaluatorDescriptor {
  EvaluatorKind kind = EvaluatorKind::analytic_soc;
  std::vector<std::string> metric_names;
  std::vector<std::string> metric_units;
  double cost_hint_seconds = 0.0;

  std::size_t num_objectives() const { return metric_names.size(); }
};

class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(const std::string& what, std::vector<std::size_t> indices = {})
      : std::runtime_error(what), indices_(std::move(indices)) {}
  /// Batch positions that failed (empty for single-point evaluation).
  const std::vector<std::size_t>& indices() const { return indices_; }

 private:
  std::vector<std::size_t> indices_;
};

/// Read-only after construction; evaluate() must be safe to call concurrently.
class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual const EvaluatorDescriptor& descriptor() const = 0;
  virtual const DesignSpace& space() const = 0;
  virtual MetricsVector evaluate(const DesignPoint& point) const = 0;
};

/// Pointwise evaluation spread over `threads` workers; output order follows input order.
/// Failures are collected and rethrown as one EvaluationError listing every bad index.
std::vector<MetricsVector> evaluate_batch(const Evaluator& evaluator,
                                          std::span<const DesignPoint> points,
                                          unsigned threads = 1);

/// Exact-match lookup over a pre-measured dataset.
class TabularEvaluator final : public Evaluator {
 public:
  TabularEvaluator(DesignSpace space, std::vector<std::string> metric_names,
                   std::vector<DesignPoint> points, std::vector<MetricsVector> metrics);

  const EvaluatorDescriptor& descriptor() const override { return descriptor_; }
  const DesignSpace& space() const override { return space_; }
  MetricsVector evaluate(const DesignPoint& point) const override;

  /// Dataset rows in file order (duplicates removed).
  const std::vector<DesignPoint>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }

 private:
  DesignSpace space_;
  EvaluatorDescriptor descriptor_;
  std::vector<DesignPoint> points_;
  std::unordered_map<DesignPoint, MetricsVector, DesignPointHash> rows_;
};

struct TabularDataset {
  std::shared_ptr<const TabularEvaluator> evaluator;
  std::vector<DesignPoint> pool;
};

/// Parse the dataset CSV: parameter columns (candidate literals) then metric columns.
TabularDataset load_tabular(const DesignSpace& space, std::istream& in);
TabularDataset load_tabular_file(const DesignSpace& space, const std::string& path);

/// Write points and metrics in the dataset CSV layout accepted by load_tabular.
void write_dataset(std::ostream& out, const DesignSpace& space,
                   std::span<const std::string> metric_names,
                   std::span<const DesignPoint> points,
                   std::span<const MetricsVector> metrics);

/// Invented analytic SoC cost model over the Table-1 parameters.
///
/// Parameters are looked up by name; any that the space lacks take a fixed
/// default. The model is cheap, deterministic and conflict-bearing:
///
///   dim      = Tilerow/col * Meshrow/col, PEs = dim^2
///   compute  = W / PEs * (1 + dim/512) * dataflow * precision * queue stalls
///   memory   = traffic(scratchpad/accumulator reuse) / DMA bandwidth
///              * L2 miss penalty * TLB penalty
///   latency  = compute + memory + host cycles            [cycles]
///   area     = base + host + PEs * PE area(bit widths) + SRAM + queues + RoCC   [mm^2]
///   power    = static + host + activity * k * area       [mW]
///
/// It makes no fidelity claim about real silicon.
class AnalyticSocEvaluator final : public Evaluator {
 public:
  explicit AnalyticSocEvaluator(DesignSpace space);

  const EvaluatorDescriptor& descriptor() const override { return descriptor_; }
  const DesignSpace& space() const override { return space_; }
  MetricsVector evaluate(const DesignPoint& point) const override;

 private:
  double value(const DesignPoint& point, std::size_t slot) const;

  DesignSpace space_;
  EvaluatorDescriptor descriptor_;
  std::vector<std::size_t> slots_;  // parameter index per model input, or npos
};

/// Discretized two-objective ZDT1 problem:
///   f1 = x1,  g = 1 + 9 * mean(x2..xd),  f2 = g * (1 - sqrt(f1 / g)).
/// Every coordinate is a parameter with `levels` evenly spaced candidates in [0,1].
class BenchmarkEvaluator final : public Evaluator {
 public:
  BenchmarkEvaluator(std::size_t dimension, std::size_t levels);

  static DesignSpace make_space(std::size_t dimension, std::size_t levels);

  const EvaluatorDescriptor& descriptor() const override { return descriptor_; }
  const DesignSpace& space() const override { return space_; }
  MetricsVector evaluate(const DesignPoint& point) const override;

  /// True Pareto front of the discretized space: g = 1, f1 on every level.
  std::vector<MetricsVector> reference_front() const;

 private:
  DesignSpace space_;
  EvaluatorDescriptor descriptor_;
  std::size_t levels_;
};

}  // namespace soctuner
