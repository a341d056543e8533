#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "soctuner/design_space.hpp"
#include "soctuner/evaluators.hpp"
#include "soctuner/gp.hpp"
#include "soctuner/importance.hpp"
#include "soctuner/pareto.hpp"

namespace soctuner {

/// How the exploration pool follows pruning.
enum class PoolPolicy {
  /// Fixed candidate rows (tabular data): keep rows that already sit on the
  /// pinned values, falling back to all rows when too few remain.
  dataset_rows,
  /// Seeded uniform sample of the space. Pruned coordinates are pinned.
  uniform_sample,
};

struct RunConfig {
  std::size_t iterations = 40;     // T, BO rounds
  std::size_t icd_trials = 30;     // n
  double mu = 0.1;                 // TED regularizer
  std::size_t init_samples = 20;   // b
  double v_th = 0.07;              // pruning threshold
  std::size_t front_samples = 10;  // S
  std::uint64_t seed = 0;
  std::size_t pool_size = 2000;    // uniform_sample policy only
  unsigned threads = 1;
  bool standardize_icd = true;
  std::size_t fit_restarts = 3;
  std::size_t fit_iterations = 200;

  std::size_t budget() const { return icd_trials + init_samples + iterations; }
  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// What to explore: an evaluator, optionally a fixed candidate pool (tabular
/// runs) and optionally a ground-truth front for ADRS tracking.
struct Problem {
  std::shared_ptr<const Evaluator> evaluator;
  std::optional<std::vector<DesignPoint>> pool;
  std::optional<std::vector<MetricsVector>> reference_front;

  PoolPolicy policy() const { return pool ? PoolPolicy::dataset_rows : PoolPolicy::uniform_sample; }
};

struct JournalRecord {
  std::size_t evaluation = 0;  // running evaluator-call count, from 0
  std::size_t iteration = 0;   // 0 for ICD trials and initialization, then 1..T
  std::string phase;           // "icd", "init", "bo" or "random"
  DesignPoint point;
  MetricsVector metrics;
  std::size_t archive_size = 0;
  std::optional<double> adrs;          // all evaluations so far vs the reference
  std::optional<double> archive_adrs;  // current Pareto archive vs the reference
  std::optional<double> acquisition;
  std::vector<KernelParams> hyperparameters;
  double wall_ms = 0.0;
};

struct RunJournal {
  std::vector<JournalRecord> records;
  std::vector<std::string> notes;

  std::size_t evaluations() const { return records.size(); }
  /// ADRS after the last evaluation of each iteration (records with ADRS only).
  std::vector<std::pair<std::size_t, double>> adrs_by_iteration() const;

  void write_jsonl(std::ostream& out, const DesignSpace& space,
                   std::span<const std::string> metric_names, bool wall_time = true) const;
  static RunJournal read_jsonl(std::istream& in, const DesignSpace& space);
};

/// One JSON object (no trailing newline) for a journal record.
std::string journal_line(const JournalRecord& record, const DesignSpace& space,
                         std::span<const std::string> metric_names, bool wall_time = true);
std::string journal_note_line(const std::string& note);

/// Called after every evaluation, in order; lets callers persist the journal as it grows.
using RecordSink = std::function<void(const JournalRecord&)>;

struct RunResult {
  ParetoArchive archive;
  RunJournal journal;
  ImportanceVector importance;
  std::vector<bool> pruned;
  std::vector<DesignPoint> evaluated;
  std::vector<MetricsVector> observed;
  /// Candidate pool before pruning; every evaluated point for the baseline.
  std::vector<DesignPoint> base_pool;
  /// Pool the optimizer searched after pruning.
  std::vector<DesignPoint> exploration_pool;
  std::optional<double> final_adrs;  // archive vs reference
};

/// Importance analysis, pruning, importance-weighted TED initialization and
/// information-gain BO. Every evaluation is journaled; the call count is
/// n + b + T unless the pool runs out first (then a note says so).
RunResult run(const Problem& problem, const RunConfig& config, const RecordSink& sink = {});

/// Same budget on uniformly random distinct pool points.
RunResult run_random_baseline(const Problem& problem, const RunConfig& config,
                              const RecordSink& sink = {});

/// iteration,adrs
void write_adrs_csv(std::ostream& out, const RunJournal& journal);
std::vector<std::pair<std::size_t, double>> read_adrs_csv(std::istream& in);

/// Parameter columns then metric columns; loadable with load_tabular.
void write_archive_csv(std::ostream& out, const DesignSpace& space,
                       std::span<const std::string> metric_names, const ParetoArchive& archive);

}  // namespace soctuner
