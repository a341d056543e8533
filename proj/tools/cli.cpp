#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "soctuner/random.hpp"
#include "soctuner/tuner.hpp"

namespace soctuner::cli {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for(const std::exception_ptr& error) {
  try {
    std::rethrow_exception(error);
  } catch (const EvaluationError&) {
    return kExitEvaluation;
  } catch (...) {
    return kExitConfig;
  }
}

namespace {

/// Fully resolved settings for one subcommand.
struct Settings {
  std::shared_ptr<const Evaluator> evaluator;
  std::optional<std::vector<DesignPoint>> pool;
  std::optional<std::vector<MetricsVector>> reference;
  RunConfig run;
  std::size_t rows = 100;
  fs::path out = "out";
  bool force = false;
  bool baseline = false;
  bool quiet = false;
};

std::string read_file(const fs::path& path, const std::string& field) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("'{}': cannot open '{}'", field, path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::size_t as_count(long long value, const std::string& field, long long min) {
  if (value < min) throw ConfigError(fmt::format("'{}' must be at least {} (got {})", field, min, value));
  return static_cast<std::size_t>(value);
}

/// The `run` section of the config document.
struct FileRun {
  std::optional<std::string> evaluator, dataset, out;
  std::optional<long long> T, n, b, S, seed, rows, pool_size, threads, bench_dimension, bench_levels;
  std::optional<double> mu, v_th;
};

FileRun parse_run_section(const json& doc) {
  FileRun r;
  if (!doc.contains("run")) return r;
  const json& run = doc["run"];
  if (!run.is_object()) throw ConfigError("'run' must be an object");
  for (const auto& [key, value] : run.items()) {
    auto integer = [&](std::optional<long long>& dst) {
      if (!value.is_number_integer()) throw ConfigError(fmt::format("'run.{}' must be an integer", key));
      dst = value.get<long long>();
    };
    auto real = [&](std::optional<double>& dst) {
      if (!value.is_number()) throw ConfigError(fmt::format("'run.{}' must be a number", key));
      dst = value.get<double>();
    };
    auto text = [&](std::optional<std::string>& dst) {
      if (!value.is_string()) throw ConfigError(fmt::format("'run.{}' must be a string", key));
      dst = value.get<std::string>();
    };
    if (key == "evaluator") text(r.evaluator);
    else if (key == "dataset") text(r.dataset);
    else if (key == "out") text(r.out);
    else if (key == "T") integer(r.T);
    else if (key == "n") integer(r.n);
    else if (key == "b") integer(r.b);
    else if (key == "S") integer(r.S);
    else if (key == "seed") integer(r.seed);
    else if (key == "rows") integer(r.rows);
    else if (key == "pool_size") integer(r.pool_size);
    else if (key == "threads") integer(r.threads);
    else if (key == "benchmark_dimension") integer(r.bench_dimension);
    else if (key == "benchmark_levels") integer(r.bench_levels);
    else if (key == "mu") real(r.mu);
    else if (key == "v_th") real(r.v_th);
    else throw ConfigError(fmt::format("'run.{}' is not a known field", key));
  }
  return r;
}

template <class T>
std::optional<T> pick(const std::optional<T>& flag, const std::optional<T>& file) {
  return flag ? flag : file;
}

Settings resolve(const Overrides& o) {
  Settings s;
  json doc = json::object();
  if (o.space) {
    const auto text = read_file(*o.space, "space");
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError(fmt::format("'space': malformed document '{}' at byte {}", *o.space, e.byte));
    }
    if (!doc.is_object()) throw ConfigError(fmt::format("'space': '{}' is not a JSON object", *o.space));
  }
  const FileRun file = parse_run_section(doc);

  auto& rc = s.run;
  if (auto v = pick(o.T, file.T)) rc.iterations = as_count(*v, "T", 0);
  if (auto v = pick(o.n, file.n)) rc.icd_trials = as_count(*v, "n", 2);
  if (auto v = pick(o.b, file.b)) rc.init_samples = as_count(*v, "b", 1);
  if (auto v = pick(o.S, file.S)) rc.front_samples = as_count(*v, "S", 1);
  if (auto v = pick(o.seed, file.seed)) rc.seed = static_cast<std::uint64_t>(as_count(*v, "seed", 0));
  if (auto v = pick(o.pool_size, file.pool_size)) rc.pool_size = as_count(*v, "pool_size", 1);
  if (auto v = pick(o.threads, file.threads)) rc.threads = static_cast<unsigned>(as_count(*v, "threads", 1));
  if (auto v = pick(o.rows, file.rows)) s.rows = as_count(*v, "rows", 1);
  if (auto v = pick(o.mu, file.mu)) {
    if (!(*v > 0.0)) throw ConfigError(fmt::format("'mu' must be positive (got {})", *v));
    rc.mu = *v;
  }
  if (auto v = pick(o.v_th, file.v_th)) {
    if (!(*v >= 0.0)) throw ConfigError(fmt::format("'v_th' must be nonnegative (got {})", *v));
    rc.v_th = *v;
  }

  if (auto v = pick(o.out, file.out)) s.out = *v;
  else if (const char* env = std::getenv(kOutEnv); env && *env) s.out = env;
  s.force = o.force;
  s.baseline = o.baseline;
  s.quiet = o.quiet;

  const auto dataset = pick(o.dataset, file.dataset);
  const std::string kind = pick(o.evaluator, file.evaluator).value_or(dataset ? "tabular" : "analytic");
  if (kind != "tabular" && kind != "analytic" && kind != "benchmark")
    throw ConfigError(fmt::format("'evaluator' must be tabular, analytic or benchmark (got '{}')", kind));

  if (kind == "benchmark") {
    if (doc.contains("parameters"))
      throw ConfigError("'parameters': the benchmark evaluator defines its own space");
    const auto d = as_count(file.bench_dimension.value_or(6), "run.benchmark_dimension", 2);
    const auto levels = as_count(file.bench_levels.value_or(10), "run.benchmark_levels", 2);
    auto ev = std::make_shared<BenchmarkEvaluator>(d, levels);
    s.reference = ev->reference_front();
    s.evaluator = std::move(ev);
    return s;
  }

  DesignSpace space;
  try {
    space = doc.contains("parameters") ? load_space(doc.dump()) : table1_space();
  } catch (const SpaceError& e) {
    throw ConfigError(fmt::format("'space': {}", e.what()));
  }
  if (kind == "analytic") {
    s.evaluator = std::make_shared<AnalyticSocEvaluator>(space);
    return s;
  }
  if (!dataset || dataset->empty())
    throw ConfigError("'dataset': the tabular evaluator needs a dataset path (--dataset or run.dataset)");
  if (!fs::exists(*dataset)) throw ConfigError(fmt::format("'dataset': no such file '{}'", *dataset));
  std::istringstream in(read_file(*dataset, "dataset"));
  TabularDataset ds;
  try {
    ds = load_tabular(space, in);
  } catch (const std::exception& e) {
    throw ConfigError(fmt::format("'dataset' {}: {}", *dataset, e.what()));
  }
  if (ds.pool.empty()) throw ConfigError(fmt::format("'dataset' {}: no data rows", *dataset));
  std::vector<MetricsVector> ys;
  for (const auto& p : ds.pool) ys.push_back(ds.evaluator->evaluate(p));
  s.reference = pareto_extract(ds.pool, ys).metrics();
  s.pool = std::move(ds.pool);
  s.evaluator = std::move(ds.evaluator);
  return s;
}

/// Creates the output directory and refuses to clobber files unless forced.
void prepare_outputs(const Settings& s, const std::vector<std::string>& names) {
  for (const auto& name : names) {
    const fs::path p = s.out / name;
    if (fs::exists(p) && !s.force)
      throw ConfigError(fmt::format("'out': '{}' exists; pass --force to overwrite", p.string()));
  }
  std::error_code ec;
  fs::create_directories(s.out, ec);
  if (ec) throw ConfigError(fmt::format("'out': cannot create '{}': {}", s.out.string(), ec.message()));
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError(fmt::format("'out': cannot write '{}'", p.string()));
  return f;
}

std::string summarize_point(const DesignSpace& space, const DesignPoint& p) {
  std::string out;
  const auto labels = space.labels_of(p);
  for (std::size_t i = 0; i < labels.size(); ++i)
    out += fmt::format("{}{}={}", i ? " " : "", space.parameter(i).name, labels[i]);
  return out;
}

}  // namespace

int cmd_explore(const Overrides& o, std::ostream& out) {
  const Settings s = resolve(o);
  const auto& space = s.evaluator->space();
  const auto& names = s.evaluator->descriptor().metric_names;
  std::vector<std::string> files{"pareto.csv", "journal.jsonl", "importance.csv"};
  if (s.reference) files.push_back("adrs.csv");
  prepare_outputs(s, files);

  const Problem problem{s.evaluator, s.pool, s.reference};
  std::ofstream journal = open_out(s.out / "journal.jsonl");
  const RecordSink sink = [&](const JournalRecord& r) {
    journal << journal_line(r, space, names) << '\n';
    journal.flush();
  };
  const RunResult r = s.baseline ? run_random_baseline(problem, s.run, sink) : run(problem, s.run, sink);
  for (const auto& note : r.journal.notes) journal << journal_note_line(note) << '\n';
  journal.close();

  {
    auto f = open_out(s.out / "pareto.csv");
    write_archive_csv(f, space, names, r.archive);
  }
  {
    auto f = open_out(s.out / "importance.csv");
    write_importance_csv(f, space, r.importance);
  }
  if (s.reference) {
    auto f = open_out(s.out / "adrs.csv");
    write_adrs_csv(f, r.journal);
  }

  if (!s.quiet) {
    std::size_t pruned = 0;
    for (bool m : r.pruned) pruned += m;
    out << fmt::format("{:<22}{}\n", "strategy", s.baseline ? "random" : "soc-tuner");
    out << fmt::format("{:<22}{}\n", "evaluator", to_string(s.evaluator->descriptor().kind));
    out << fmt::format("{:<22}{} (budget {})\n", "evaluations", r.journal.evaluations(), s.run.budget());
    out << fmt::format("{:<22}{} of {}\n", "pruned parameters", pruned, space.dimension());
    out << fmt::format("{:<22}{}\n", "pareto points", r.archive.size());
    if (r.final_adrs) out << fmt::format("{:<22}{:.6f}\n", "final adrs", *r.final_adrs);
    for (const auto& n : r.journal.notes) out << "note: " << n << '\n';
    out << '\n';
    std::string header;
    for (const auto& n : names) header += fmt::format("{:>14}", n);
    out << header << "  point\n";
    for (const auto& e : r.archive.entries()) {
      std::string row;
      for (double v : e.metrics) row += fmt::format("{:>14.6g}", v);
      out << row << "  " << summarize_point(space, e.point) << '\n';
    }
    out << fmt::format("\nwrote {}\n", s.out.string());
  }
  return kExitOk;
}

int cmd_gen_dataset(const Overrides& o, std::ostream& out) {
  const Settings s = resolve(o);
  if (s.evaluator->descriptor().kind == EvaluatorKind::tabular)
    throw ConfigError("'evaluator': gen-dataset needs the analytic or benchmark evaluator");
  prepare_outputs(s, {"dataset.csv"});
  const auto& space = s.evaluator->space();
  const auto points = space.sample_uniform(s.rows, s.run.seed);
  const auto metrics = evaluate_batch(*s.evaluator, points, s.run.threads);
  // Duplicate draws carry identical metrics, which the loader accepts.
  auto f = open_out(s.out / "dataset.csv");
  write_dataset(f, space, s.evaluator->descriptor().metric_names, points, metrics);
  if (!s.quiet) out << fmt::format("wrote {} rows to {}\n", points.size(), (s.out / "dataset.csv").string());
  return kExitOk;
}

int cmd_importance(const Overrides& o, std::ostream& out) {
  const Settings s = resolve(o);
  prepare_outputs(s, {"importance.csv", "pruning.json"});
  const auto& space = s.evaluator->space();
  IcdResult icd_result;
  if (s.pool) {
    std::vector<std::size_t> idx(s.pool->size());
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(s.run.seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(std::min(idx.size(), s.run.icd_trials));
    if (idx.size() < 2) throw ConfigError("'dataset': importance needs at least 2 rows");
    std::vector<DesignPoint> trials;
    for (std::size_t i : idx) trials.push_back((*s.pool)[i]);
    icd_result = icd_from_trials(space, trials, evaluate_batch(*s.evaluator, trials, s.run.threads),
                                 IcdOptions{s.run.standardize_icd});
  } else {
    icd_result = icd(space, *s.evaluator, s.run.icd_trials, s.run.seed,
                     IcdOptions{s.run.standardize_icd}, s.run.threads);
  }
  const PrunedSpace pruned = prune(space, icd_result.importance, s.run.v_th);
  const double reduction = cardinality_reduction_percent(space, pruned.space);

  {
    auto f = open_out(s.out / "importance.csv");
    write_importance_csv(f, space, icd_result.importance);
  }
  nlohmann::ordered_json report;
  report["n"] = icd_result.trials.size();
  report["v_th"] = s.run.v_th;
  report["seed"] = s.run.seed;
  nlohmann::ordered_json fixed = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < space.dimension(); ++i)
    if (pruned.mask[i])
      fixed.push_back({{"parameter", space.parameter(i).name},
                       {"value", space.parameter(i).labels[pruned.fixed_index[i]]},
                       {"importance", icd_result.importance[i]}});
  report["fixed"] = fixed;
  report["log10_cardinality_before"] = space.log10_cardinality();
  report["log10_cardinality_after"] = pruned.space.log10_cardinality();
  report["reduction_percent"] = reduction;
  report["warnings"] = icd_result.warnings;
  {
    auto f = open_out(s.out / "pruning.json");
    f << report.dump(2) << '\n';
  }

  if (!s.quiet) {
    out << fmt::format("{:<24}{:>10}  {}\n", "parameter", "importance", "pruned");
    for (std::size_t i = 0; i < space.dimension(); ++i)
      out << fmt::format("{:<24}{:>10.4f}  {}\n", space.parameter(i).name, icd_result.importance[i],
                         pruned.mask[i] ? "fixed to " + space.parameter(i).labels[pruned.fixed_index[i]] : "");
    out << fmt::format("\n{} of {} parameters fixed; cardinality reduced by {:.2f}%\n", pruned.num_pruned(),
                       space.dimension(), reduction);
    for (const auto& w : icd_result.warnings) out << "warning: " << w << '\n';
  }
  return kExitOk;
}

int main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Importance-guided multi-objective design space exploration"};
  app.require_subcommand(1, 1);
  Overrides o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--space", o.space, "design-space / config JSON (defaults to the bundled table1 space)");
    sub->add_option("--dataset", o.dataset, "dataset CSV for the tabular evaluator");
    sub->add_option("--evaluator", o.evaluator, "tabular | analytic | benchmark")
        ->check(CLI::IsMember({"tabular", "analytic", "benchmark"}));
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_option("--out", o.out, fmt::format("output directory (default ${} or ./out)", kOutEnv));
    sub->add_option("--threads", o.threads, "evaluation worker threads");
    sub->add_flag("--force", o.force, "overwrite existing output files");
    sub->add_flag("-q,--quiet", o.quiet, "print nothing on success");
  };
  auto run_flags = [&](CLI::App* sub) {
    sub->add_option("--n", o.n, "ICD trial count");
    sub->add_option("--v-th", o.v_th, "pruning threshold");
  };

  auto* explore = app.add_subcommand("explore", "run the tuner and write pareto/journal/adrs/importance files");
  common(explore);
  run_flags(explore);
  explore->add_option("--T", o.T, "BO iterations");
  explore->add_option("--b", o.b, "initial TED samples");
  explore->add_option("--mu", o.mu, "TED regularizer");
  explore->add_option("--S", o.S, "sampled Pareto fronts per iteration");
  explore->add_option("--pool-size", o.pool_size, "candidate pool size for sampled spaces");
  explore->add_flag("--baseline", o.baseline, "spend the same budget on random pool points instead");

  auto* gen = app.add_subcommand("gen-dataset", "sample points and write a dataset CSV");
  common(gen);
  gen->add_option("-N,--rows", o.rows, "number of rows");

  auto* imp = app.add_subcommand("importance", "ICD importance and pruning report");
  common(imp);
  run_flags(imp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (explore->parsed()) return cmd_explore(o, out);
    if (gen->parsed()) return cmd_gen_dataset(o, out);
    return cmd_importance(o, out);
  } catch (...) {
    const auto error = std::current_exception();
    const int code = exit_code_for(error);
    try {
      std::rethrow_exception(error);
    } catch (const std::exception& e) {
      err << (code == kExitEvaluation ? "evaluation failed: " : "config error: ") << e.what() << '\n';
    }
    return code;
  }
}

}  // namespace soctuner::cli
