#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "soctuner/tuner.hpp"
#include "support.hpp"

using namespace soctuner;

namespace {

RunConfig small_config(std::uint64_t seed = 0) {
  RunConfig c;
  c.icd_trials = 6;
  c.init_samples = 5;
  c.iterations = 4;
  c.front_samples = 3;
  c.pool_size = 150;
  c.fit_restarts = 1;
  c.fit_iterations = 30;
  c.seed = seed;
  return c;
}

Problem benchmark(std::size_t d = 3, std::size_t levels = 5) {
  auto ev = std::make_shared<BenchmarkEvaluator>(d, levels);
  return Problem{ev, std::nullopt, ev->reference_front()};
}

Problem tabular(std::size_t rows, std::uint64_t seed) {
  const auto& s = table1_space();
  AnalyticSocEvaluator analytic(s);
  const auto pts = unique_points(s.sample_uniform(rows, seed));
  const auto ys = evaluate_batch(analytic, pts);
  std::stringstream io;
  write_dataset(io, s, analytic.descriptor().metric_names, pts, ys);
  auto ds = load_tabular(s, io);
  const auto front = pareto_extract(pts, ys).metrics();
  return Problem{ds.evaluator, ds.pool, front};
}

std::string journal_text(const RunResult& r, const Problem& p) {
  std::ostringstream out;
  r.journal.write_jsonl(out, p.evaluator->space(), p.evaluator->descriptor().metric_names, false);
  return out.str();
}

}  // namespace

TEST_CASE("config validation names the field") {
  auto msg = [](auto mutate) {
    RunConfig c;
    mutate(c);
    try {
      c.validate();
    } catch (const std::invalid_argument& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(msg([](RunConfig& c) { c.icd_trials = 1; }).find("'n'") != std::string::npos);
  CHECK(msg([](RunConfig& c) { c.init_samples = 0; }).find("'b'") != std::string::npos);
  CHECK(msg([](RunConfig& c) { c.mu = 0; }).find("'mu'") != std::string::npos);
  CHECK(msg([](RunConfig& c) { c.v_th = -1; }).find("'v_th'") != std::string::npos);
  CHECK(msg([](RunConfig& c) { c.front_samples = 0; }).find("'S'") != std::string::npos);
  CHECK(msg([](RunConfig&) {}).empty());
  CHECK(RunConfig{}.budget() == 30 + 20 + 40);
}

TEST_CASE("budget, soundness, restoration and anytime ADRS on the benchmark") {
  const auto p = benchmark();
  const auto c = small_config(1);
  const auto r = run(p, c);
  CHECK(r.journal.evaluations() == c.budget());
  CHECK(r.evaluated.size() == c.budget());
  CHECK(std::set<DesignPoint>(r.evaluated.begin(), r.evaluated.end()).size() == c.budget());

  std::set<DesignPoint> pool(r.base_pool.begin(), r.base_pool.end());
  std::set<DesignPoint> seen(r.evaluated.begin(), r.evaluated.end());
  for (const auto& e : r.archive.entries()) {
    CHECK(seen.contains(e.point));
    CHECK(p.evaluator->evaluate(e.point) == e.metrics);
  }
  for (const auto& q : r.evaluated) CHECK(pool.contains(q));

  const auto curve = r.journal.adrs_by_iteration();
  CHECK(curve.front().first == 0);
  CHECK(curve.back().first == c.iterations);
  for (std::size_t i = 1; i < curve.size(); ++i) {
    CHECK(curve[i].first == curve[i - 1].first + 1);
    CHECK(curve[i].second <= curve[i - 1].second);
  }
  for (std::size_t i = 1; i < r.journal.records.size(); ++i)
    CHECK(*r.journal.records[i].adrs <= *r.journal.records[i - 1].adrs);

  const auto expected = pareto_extract(r.evaluated, r.observed);
  CHECK(r.archive.points() == expected.points());
  CHECK(*r.final_adrs == doctest::Approx(adrs(*p.reference_front, r.archive.metrics())));

  std::size_t icd = 0, init = 0, bo = 0;
  for (const auto& rec : r.journal.records) {
    icd += rec.phase == "icd";
    init += rec.phase == "init";
    if (rec.phase == "bo") {
      ++bo;
      CHECK(rec.acquisition.has_value());
      CHECK(rec.hyperparameters.size() == 2);
    } else {
      CHECK(rec.iteration == 0);
    }
  }
  CHECK(icd == c.icd_trials);
  CHECK(init == c.init_samples);
  CHECK(bo == c.iterations);
}

TEST_CASE("runs are reproducible") {
  const auto p = benchmark();
  const auto c = small_config(4);
  const auto a = run(p, c), b = run(p, c);
  CHECK(journal_text(a, p) == journal_text(b, p));
  auto d = c;
  d.seed = 5;
  CHECK(journal_text(run(p, d), p) != journal_text(a, p));
}

TEST_CASE("T=0 archive is the front of the ICD and initial points") {
  const auto p = benchmark();
  auto c = small_config(2);
  c.iterations = 0;
  const auto r = run(p, c);
  CHECK(r.journal.evaluations() == c.icd_trials + c.init_samples);
  std::vector<MetricsVector> ys;
  for (const auto& q : r.evaluated) ys.push_back(p.evaluator->evaluate(q));
  const auto idx = oracle::pareto(ys);
  CHECK(r.archive.size() == idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) CHECK(r.archive.points()[k] == r.evaluated[idx[k]]);
}

TEST_CASE("pool of exactly n+b rows is exhausted and noted") {
  const auto c = small_config(3);
  const auto p = tabular(c.icd_trials + c.init_samples, 3);
  auto cc = c;
  cc.v_th = 0.0;
  const auto r = run(p, cc);
  CHECK(r.journal.evaluations() == p.pool->size());
  const auto front = pareto_extract(*p.pool, evaluate_batch(*p.evaluator, *p.pool));
  auto a = r.archive.points(), b = front.points();
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  CHECK(a == b);
  CHECK(*r.final_adrs == 0.0);
  bool noted = false;
  for (const auto& n : r.journal.notes) noted |= n.find("exhausted") != std::string::npos;
  CHECK(noted);
}

TEST_CASE("tabular runs stay on dataset rows and journal the full budget") {
  const auto p = tabular(300, 9);
  auto c = small_config(6);
  c.v_th = 0.07;
  const auto r = run(p, c);
  CHECK(r.journal.evaluations() == c.budget());
  std::set<DesignPoint> rows(p.pool->begin(), p.pool->end());
  for (const auto& q : r.evaluated) CHECK(rows.contains(q));
}

TEST_CASE("pruning pins the uniform pool") {
  const auto& s = table1_space();
  auto ev = std::make_shared<AnalyticSocEvaluator>(s);
  Problem p{ev, std::nullopt, std::nullopt};
  auto c = small_config(7);
  c.icd_trials = 30;
  c.iterations = 2;
  c.pool_size = 200;
  const auto r = run(p, c);
  CHECK(r.journal.evaluations() == c.budget());
  CHECK_FALSE(r.final_adrs.has_value());
  const auto pr = prune(s, r.importance, c.v_th);
  CHECK(pr.mask == r.pruned);
  for (const auto& q : r.exploration_pool) CHECK(pr.matches(q));
  for (std::size_t k = c.icd_trials; k < r.evaluated.size(); ++k) CHECK(pr.matches(r.evaluated[k]));
}

TEST_CASE("random baseline: budget, exhaustion and seeds") {
  const auto p = benchmark();
  const auto c = small_config(1);
  const auto r = run_random_baseline(p, c);
  CHECK(r.journal.evaluations() == c.budget());
  for (const auto& rec : r.journal.records) CHECK(rec.phase == "random");
  const auto curve = r.journal.adrs_by_iteration();
  for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i].second <= curve[i - 1].second);
  auto d = c;
  d.seed = 2;
  CHECK(run_random_baseline(p, d).evaluated != r.evaluated);

  const auto tiny = tabular(8, 1);
  const auto ex = run_random_baseline(tiny, c);
  CHECK(ex.journal.evaluations() == 8);
  CHECK(ex.journal.notes.size() == 1);
  const auto front = pareto_extract(*tiny.pool, evaluate_batch(*tiny.evaluator, *tiny.pool));
  auto a = ex.archive.points(), b = front.points();
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  CHECK(a == b);
}

TEST_CASE("journal and csv round trips") {
  const auto p = benchmark();
  const auto r = run(p, small_config(8));
  const auto& space = p.evaluator->space();
  const auto& names = p.evaluator->descriptor().metric_names;
  std::stringstream js;
  r.journal.write_jsonl(js, space, names);
  const auto back = RunJournal::read_jsonl(js, space);
  REQUIRE(back.records.size() == r.journal.records.size());
  for (std::size_t i = 0; i < back.records.size(); ++i) {
    CHECK(back.records[i].point == r.journal.records[i].point);
    CHECK(back.records[i].metrics == r.journal.records[i].metrics);
    CHECK(back.records[i].adrs == r.journal.records[i].adrs);
  }
  std::stringstream ac;
  write_adrs_csv(ac, r.journal);
  CHECK(read_adrs_csv(ac) == r.journal.adrs_by_iteration());
  std::stringstream pc;
  write_archive_csv(pc, space, names, r.archive);
  const auto ds = load_tabular(space, pc);
  CHECK(ds.pool == r.archive.points());
}

TEST_CASE("evaluation failure reaches the caller after the sink saw earlier records") {
  const auto s = testing::grid_space(2, 4);
  auto ev = std::make_shared<testing::FunctionEvaluator>(s, std::vector<std::string>{"a", "b"},
                                                         [](const std::vector<double>& x) {
                                                           if (x[0] > 0.9 && x[1] > 0.9) throw EvaluationError("boom");
                                                           return MetricsVector{x[0], 1 - x[1]};
                                                         });
  Problem p{ev, std::nullopt, std::nullopt};
  auto c = small_config(0);
  c.icd_trials = 2;
  c.init_samples = 2;
  c.iterations = 14;
  c.pool_size = 400;
  std::size_t seen = 0;
  CHECK_THROWS_AS(run(p, c, [&](const JournalRecord&) { ++seen; }), EvaluationError);
  CHECK(seen > 0);
}
