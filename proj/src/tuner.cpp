#include "soctuner/tuner.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <random>
#include <stdexcept>
#include <unordered_set>

#include <fmt/format.h>

#include "soctuner/acquisition.hpp"
#include "soctuner/init_sampling.hpp"
#include "soctuner/random.hpp"

namespace soctuner {

void RunConfig::validate() const {
  if (icd_trials < 2) throw std::invalid_argument("run config: 'n' (ICD trials) must be at least 2");
  if (init_samples < 1) throw std::invalid_argument("run config: 'b' (initial samples) must be at least 1");
  if (!(mu > 0.0)) throw std::invalid_argument("run config: 'mu' must be positive");
  if (!(v_th >= 0.0)) throw std::invalid_argument("run config: 'v_th' must be nonnegative");
  if (front_samples < 1) throw std::invalid_argument("run config: 'S' (front samples) must be at least 1");
  if (pool_size < 1) throw std::invalid_argument("run config: 'pool_size' must be at least 1");
}

namespace {

// Stream tags for derive_seed.
enum Stream : std::uint64_t { kPool = 1, kTrials, kTed, kBaseline, kFit = 100, kFront = 100000 };

using Clock = std::chrono::steady_clock;

/// Bookkeeping shared by the optimizer and the baseline.
class Recorder {
 public:
  Recorder(const Problem& problem, RunResult& result, const RecordSink& sink)
      : problem_(problem), result_(result), sink_(sink), start_(Clock::now()) {}

  void record(std::size_t iteration, const std::string& phase, const DesignPoint& point,
              MetricsVector metrics, std::optional<double> acquisition = std::nullopt,
              std::vector<KernelParams> hyper = {}) {
    result_.archive.insert(point, metrics);
    result_.evaluated.push_back(point);
    result_.observed.push_back(metrics);
    JournalRecord rec;
    rec.evaluation = result_.journal.records.size();
    rec.iteration = iteration;
    rec.phase = phase;
    rec.point = point;
    rec.metrics = std::move(metrics);
    rec.archive_size = result_.archive.size();
    if (problem_.reference_front) {
      rec.adrs = adrs(*problem_.reference_front, result_.observed);
      rec.archive_adrs = adrs(*problem_.reference_front, result_.archive.metrics());
    }
    rec.acquisition = acquisition;
    rec.hyperparameters = std::move(hyper);
    rec.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start_).count();
    result_.journal.records.push_back(std::move(rec));
    if (sink_) sink_(result_.journal.records.back());
  }

  void record_batch(std::size_t iteration, const std::string& phase,
                    const std::vector<DesignPoint>& points, unsigned threads) {
    const auto metrics = evaluate_batch(*problem_.evaluator, points, threads);
    for (std::size_t i = 0; i < points.size(); ++i) record(iteration, phase, points[i], metrics[i]);
  }

  void finish() {
    if (problem_.reference_front && !result_.archive.empty())
      result_.final_adrs = adrs(*problem_.reference_front, result_.archive.metrics());
  }

 private:
  const Problem& problem_;
  RunResult& result_;
  const RecordSink& sink_;
  Clock::time_point start_;
};

std::vector<DesignPoint> base_pool(const Problem& problem, const RunConfig& config) {
  if (problem.pool) return unique_points(*problem.pool);
  return unique_points(problem.evaluator->space().sample_uniform(
      config.pool_size, derive_seed(config.seed, kPool)));
}

std::vector<std::size_t> shuffled(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

void check_problem(const Problem& problem) {
  if (!problem.evaluator) throw std::invalid_argument("problem has no evaluator");
  if (problem.reference_front && problem.reference_front->empty())
    throw std::invalid_argument("reference front is empty");
}

Eigen::MatrixXd weighted_coords(const DesignSpace& space, std::span<const DesignPoint> points,
                                const ImportanceVector& v) {
  return transform(space, points, v).coords;
}

}  // namespace

RunResult run(const Problem& problem, const RunConfig& config, const RecordSink& sink) {
  config.validate();
  check_problem(problem);
  const DesignSpace& space = problem.evaluator->space();
  RunResult result;
  Recorder recorder(problem, result, sink);
  auto& notes = result.journal.notes;

  result.base_pool = base_pool(problem, config);
  const auto& pool0 = result.base_pool;

  // Importance analysis on n distinct pool points.
  const std::size_t n = std::min(config.icd_trials, pool0.size());
  if (n < config.icd_trials)
    notes.push_back(fmt::format("pool holds {} points; ICD uses {} of the {} requested trials",
                                pool0.size(), n, config.icd_trials));
  std::vector<DesignPoint> trials;
  for (std::size_t i : shuffled(pool0.size(), derive_seed(config.seed, kTrials))) {
    if (trials.size() == n) break;
    trials.push_back(pool0[i]);
  }
  recorder.record_batch(0, "icd", trials, config.threads);
  if (n >= 2) {
    const auto icd = icd_from_trials(space, trials, std::span(result.observed).first(n),
                                     IcdOptions{config.standardize_icd});
    result.importance = icd.importance;
    for (const auto& w : icd.warnings) notes.push_back(w);
  } else {
    result.importance = ImportanceVector::uniform(space.dimension());
    notes.push_back("fewer than 2 ICD trials; importance falls back to uniform");
  }

  // Pruning and the exploration pool.
  const PrunedSpace pruned = prune(space, result.importance, config.v_th);
  result.pruned = pruned.mask;
  std::unordered_set<DesignPoint, DesignPointHash> evaluated(trials.begin(), trials.end());
  std::vector<DesignPoint> pool;
  if (problem.policy() == PoolPolicy::dataset_rows) {
    for (const auto& p : pool0)
      if (pruned.matches(p) && !evaluated.contains(p)) pool.push_back(p);
    std::size_t open = 0;
    for (const auto& p : pool0) open += !evaluated.contains(p);
    if (pool.size() < std::min(config.init_samples, open)) {
      notes.push_back(fmt::format(
          "only {} dataset rows match the {} pruned parameters; searching all rows instead",
          pool.size(), pruned.num_pruned()));
      pool.clear();
      for (const auto& p : pool0)
        if (!evaluated.contains(p)) pool.push_back(p);
    } else if (pool.size() < open) {
      notes.push_back(fmt::format("pruning restricts the dataset pool from {} to {} rows", open,
                                  pool.size()));
    }
  } else {
    std::vector<DesignPoint> projected;
    projected.reserve(pool0.size());
    for (const auto& p : pool0) projected.push_back(pruned.project(p));
    for (auto& p : unique_points(projected))
      if (!evaluated.contains(p)) pool.push_back(std::move(p));
  }
  result.exploration_pool = pool;

  // Initialization by TED in the importance-weighted space.
  const std::size_t b = std::min(config.init_samples, pool.size());
  if (b < config.init_samples)
    notes.push_back(fmt::format("pool holds {} unevaluated points; initialization uses {} of {}",
                                pool.size(), b, config.init_samples));
  if (b > 0) {
    const IcdSpace icd_pool = transform(space, pool, result.importance, pruned.mask);
    TedOptions ted;
    ted.mu = config.mu;
    ted.seed = derive_seed(config.seed, kTed);
    const auto init = soc_init(icd_pool, b, ted);
    recorder.record_batch(0, "init", init.points, config.threads);
    std::vector<char> taken(pool.size(), 0);
    for (std::size_t pos : init.order) taken[pos] = 1;
    std::vector<DesignPoint> rest;
    for (std::size_t i = 0; i < pool.size(); ++i)
      if (!taken[i]) rest.push_back(pool[i]);
    pool = std::move(rest);
  }

  // Bayesian optimization.
  const std::size_t dy = problem.evaluator->descriptor().num_objectives();
  Eigen::MatrixXd candidates = weighted_coords(space, pool, result.importance);
  std::optional<std::vector<KernelParams>> warm;
  for (std::size_t t = 1; t <= config.iterations; ++t) {
    if (pool.empty()) {
      notes.push_back(fmt::format("candidate pool exhausted after {} of {} BO iterations", t - 1,
                                  config.iterations));
      break;
    }
    const Eigen::MatrixXd x = weighted_coords(space, result.evaluated, result.importance);
    Eigen::MatrixXd y(static_cast<Eigen::Index>(result.observed.size()), static_cast<Eigen::Index>(dy));
    for (std::size_t r = 0; r < result.observed.size(); ++r)
      for (std::size_t k = 0; k < dy; ++k)
        y(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = result.observed[r][k];

    FitOptions fo;
    fo.restarts = config.fit_restarts;
    fo.max_iterations = config.fit_iterations;
    fo.seed = derive_seed(config.seed, kFit + t);
    const SurrogateState state = fit(x, y, fo, warm ? &*warm : nullptr);
    warm = state.params();

    // Front draws over the evaluated points plus a seeded share of the candidates.
    const std::size_t room = kMaxJointPoints > static_cast<std::size_t>(x.rows())
                                 ? kMaxJointPoints - static_cast<std::size_t>(x.rows())
                                 : 0;
    std::vector<std::size_t> picks = shuffled(pool.size(), derive_seed(config.seed, kFront + 2 * t));
    picks.resize(std::min(room, picks.size()));
    std::sort(picks.begin(), picks.end());
    const auto train_rows = std::min<Eigen::Index>(x.rows(), static_cast<Eigen::Index>(kMaxJointPoints));
    Eigen::MatrixXd front_pool(train_rows + static_cast<Eigen::Index>(picks.size()), x.cols());
    front_pool.topRows(train_rows) = x.topRows(train_rows);
    for (std::size_t k = 0; k < picks.size(); ++k)
      front_pool.row(train_rows + static_cast<Eigen::Index>(k)) =
          candidates.row(static_cast<Eigen::Index>(picks[k]));
    const FrontSample front = sample_front_maxima(state, front_pool, config.front_samples,
                                                  derive_seed(config.seed, kFront + 2 * t + 1));

    const Selection sel = imoo_select(state, candidates, front);
    const DesignPoint chosen = pool[sel.index];
    recorder.record(t, "bo", chosen, problem.evaluator->evaluate(chosen), sel.value, state.params());

    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(sel.index));
    const Eigen::Index last = candidates.rows() - 1;
    const auto row = static_cast<Eigen::Index>(sel.index);
    if (row < last)
      candidates.middleRows(row, last - row) = candidates.bottomRows(last - row).eval();
    candidates.conservativeResize(last, Eigen::NoChange);
  }

  // The archive already holds the non-dominated evaluated points; rebuild it by
  // extraction so the result matches pareto_extract exactly.
  result.archive = pareto_extract(result.evaluated, result.observed);
  recorder.finish();
  return result;
}

RunResult run_random_baseline(const Problem& problem, const RunConfig& config,
                              const RecordSink& sink) {
  config.validate();
  check_problem(problem);
  RunResult result;
  Recorder recorder(problem, result, sink);
  result.base_pool = base_pool(problem, config);
  result.exploration_pool = result.base_pool;
  result.importance = ImportanceVector::uniform(problem.evaluator->space().dimension());
  result.pruned.assign(problem.evaluator->space().dimension(), false);

  const std::size_t budget = config.budget();
  const std::size_t head = config.icd_trials + config.init_samples;
  const auto order = shuffled(result.base_pool.size(), derive_seed(config.seed, kBaseline));
  const std::size_t count = std::min(budget, order.size());
  if (count < budget)
    result.journal.notes.push_back(fmt::format(
        "pool holds {} points; random search evaluates {} of the {} budgeted", order.size(), count, budget));

  std::vector<DesignPoint> first;
  for (std::size_t k = 0; k < std::min(head, count); ++k) first.push_back(result.base_pool[order[k]]);
  recorder.record_batch(0, "random", first, config.threads);
  for (std::size_t k = head; k < count; ++k) {
    const auto& p = result.base_pool[order[k]];
    recorder.record(k - head + 1, "random", p, problem.evaluator->evaluate(p));
  }
  result.archive = pareto_extract(result.evaluated, result.observed);
  recorder.finish();
  return result;
}

void write_archive_csv(std::ostream& out, const DesignSpace& space,
                       std::span<const std::string> metric_names, const ParetoArchive& archive) {
  write_dataset(out, space, metric_names, archive.points(), archive.metrics());
}

}  // namespace soctuner
