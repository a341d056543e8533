#include "soctuner/evaluators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <thread>

#include <fmt/format.h>

#include "soctuner/csv.hpp"

namespace soctuner {

std::string to_string(EvaluatorKind kind) {
  switch (kind) {
    case EvaluatorKind::tabular: return "tabular";
    case EvaluatorKind::analytic_soc: return "analytic";
    case EvaluatorKind::benchmark: return "benchmark";
  }
  return "unknown";
}

std::vector<MetricsVector> evaluate_batch(const Evaluator& evaluator,
                                          std::span<const DesignPoint> points,
                                          unsigned threads) {
  std::vector<MetricsVector> out(points.size());
  std::vector<std::string> errors(points.size());
  std::vector<char> failed(points.size(), 0);

  auto work = [&](std::size_t begin, std::size_t step) {
    for (std::size_t i = begin; i < points.size(); i += step) {
      try {
        out[i] = evaluator.evaluate(points[i]);
      } catch (const std::exception& e) {
        failed[i] = 1;
        errors[i] = e.what();
      }
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(1, points.size()));
  if (workers == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
  }

  std::vector<std::size_t> bad;
  std::string message;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!failed[i]) continue;
    bad.push_back(i);
    message += fmt::format("{}[{}] {}", message.empty() ? "" : "; ", i, errors[i]);
  }
  if (!bad.empty())
    throw EvaluationError(fmt::format("{} of {} evaluations failed: {}", bad.size(),
                                      points.size(), message),
                          std::move(bad));
  return out;
}

// ---------------------------------------------------------------------------
// Tabular

TabularEvaluator::TabularEvaluator(DesignSpace space, std::vector<std::string> metric_names,
                                   std::vector<DesignPoint> points,
                                   std::vector<MetricsVector> metrics)
    : space_(std::move(space)) {
  if (points.size() != metrics.size())
    throw EvaluationError("tabular evaluator: point and metric counts differ");
  descriptor_.kind = EvaluatorKind::tabular;
  descriptor_.metric_names = std::move(metric_names);
  descriptor_.metric_units.assign(descriptor_.metric_names.size(), "");
  for (std::size_t i = 0; i < points.size(); ++i) {
    space_.validate(points[i]);
    if (metrics[i].size() != descriptor_.num_objectives())
      throw EvaluationError(fmt::format("tabular evaluator: row {} has {} metrics, expected {}", i,
                                        metrics[i].size(), descriptor_.num_objectives()));
    auto [it, inserted] = rows_.emplace(points[i], metrics[i]);
    if (inserted) {
      points_.push_back(points[i]);
    } else if (it->second != metrics[i]) {
      throw EvaluationError(fmt::format("tabular evaluator: row {} repeats a design point with different metrics", i));
    }
  }
}

MetricsVector TabularEvaluator::evaluate(const DesignPoint& point) const {
  auto it = rows_.find(point);
  if (it == rows_.end()) {
    const auto labels = space_.contains(point) ? space_.labels_of(point) : std::vector<std::string>{};
    throw EvaluationError(fmt::format("design point ({}) is not in the dataset",
                                      fmt::join(labels, ",")));
  }
  return it->second;
}

TabularDataset load_tabular(const DesignSpace& space, std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw EvaluationError("dataset: empty file, header row expected");
  const auto header = csv::split(line);

  // Column of each parameter, and the metric columns in file order.
  std::vector<std::size_t> param_col(space.dimension(), header.size());
  std::vector<std::size_t> metric_cols;
  std::vector<std::string> metric_names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::size_t p = space.find(header[c]);
    if (p < space.dimension()) {
      if (param_col[p] != header.size())
        throw EvaluationError(fmt::format("dataset: column '{}' appears twice", header[c]));
      if (!metric_cols.empty())
        throw EvaluationError(fmt::format("dataset: parameter column '{}' follows metric columns", header[c]));
      param_col[p] = c;
    } else {
      metric_cols.push_back(c);
      metric_names.push_back(header[c]);
    }
  }
  std::vector<std::string> missing;
  for (std::size_t p = 0; p < space.dimension(); ++p)
    if (param_col[p] == header.size()) missing.push_back(space.parameter(p).name);
  if (!missing.empty())
    throw EvaluationError(fmt::format("dataset: missing parameter columns: {}", fmt::join(missing, ", ")));
  if (metric_cols.empty()) throw EvaluationError("dataset: no metric columns after the parameters");

  std::vector<DesignPoint> points;
  std::vector<MetricsVector> metrics;
  std::vector<std::size_t> line_of;
  std::unordered_map<DesignPoint, std::size_t, DesignPointHash> first_row;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = csv::split(line);
    if (fields.size() != header.size())
      throw EvaluationError(fmt::format("dataset line {}: {} fields, header has {}", line_no,
                                        fields.size(), header.size()));
    DesignPoint point;
    point.assignment.resize(space.dimension());
    for (std::size_t p = 0; p < space.dimension(); ++p) {
      const auto& def = space.parameter(p);
      std::size_t idx = def.find_label(fields[param_col[p]]);
      if (idx == def.size() && !def.symbolic) {
        // Accept numerically equal spellings such as "8.0" for "8".
        double v = 0.0;
        if (csv::parse_number(fields[param_col[p]], v)) {
          auto it = std::find(def.levels.begin(), def.levels.end(), v);
          idx = static_cast<std::size_t>(it - def.levels.begin());
        }
      }
      if (idx == def.size())
        throw EvaluationError(fmt::format("dataset line {}: '{}' is not a candidate of '{}'",
                                          line_no, fields[param_col[p]], def.name));
      point.assignment[p] = idx;
    }
    MetricsVector m(metric_cols.size());
    for (std::size_t k = 0; k < metric_cols.size(); ++k) {
      if (!csv::parse_number(fields[metric_cols[k]], m[k]))
        throw EvaluationError(fmt::format("dataset line {}: metric '{}' value '{}' is not a finite number",
                                          line_no, metric_names[k], fields[metric_cols[k]]));
    }
    auto [it, inserted] = first_row.emplace(point, points.size());
    if (!inserted) {
      if (metrics[it->second] != m)
        throw EvaluationError(fmt::format(
            "dataset lines {} and {}: same design point with conflicting metrics",
            line_of[it->second], line_no));
      continue;
    }
    points.push_back(std::move(point));
    metrics.push_back(std::move(m));
    line_of.push_back(line_no);
  }
  if (points.empty()) throw EvaluationError("dataset: no data rows");

  auto evaluator = std::make_shared<const TabularEvaluator>(space, metric_names, points, metrics);
  return TabularDataset{evaluator, evaluator->points()};
}

TabularDataset load_tabular_file(const DesignSpace& space, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw EvaluationError(fmt::format("cannot open dataset '{}'", path));
  return load_tabular(space, in);
}

void write_dataset(std::ostream& out, const DesignSpace& space,
                   std::span<const std::string> metric_names,
                   std::span<const DesignPoint> points,
                   std::span<const MetricsVector> metrics) {
  std::vector<std::string> row;
  for (const auto& p : space.parameters()) row.push_back(p.name);
  row.insert(row.end(), metric_names.begin(), metric_names.end());
  csv::write_row(out, row);
  for (std::size_t i = 0; i < points.size(); ++i) {
    row = space.labels_of(points[i]);
    for (double v : metrics[i]) row.push_back(csv::format_number(v));
    csv::write_row(out, row);
  }
}

// ---------------------------------------------------------------------------
// Analytic SoC model

namespace {

enum Slot : std::size_t {
  kHostCore, kL2Bank, kL2Way, kL2Capa, kTile, kMesh, kDataflow, kInputType, kAccType,
  kOutType, kSpBank, kSpCapa, kAccBank, kAccCapa, kLdQueue, kStQueue, kExQueue, kLdRes,
  kStRes, kExRes, kMemReq, kDMABus, kDMABytes, kTLBSize, kNumSlots
};

struct SlotInfo {
  const char* name;
  double fallback;  // level used when the space lacks the parameter
};

constexpr std::array<SlotInfo, kNumSlots> kSlots{{
    {"HostCore", 1},   {"L2Bank", 2},    {"L2Way", 8},     {"L2Capa", 256},
    {"Tilerow/col", 2}, {"Meshrow/col", 16}, {"Dataflow", 0}, {"InputType", 8},
    {"AccType", 16},   {"OutType", 20},  {"SpBank", 8},    {"SpCapa", 128},
    {"AccBank", 2},    {"AccCapa", 128}, {"LdQueue", 4},   {"StQueue", 4},
    {"ExQueue", 4},    {"LdRes", 4},     {"StRes", 4},     {"ExRes", 4},
    {"MemReq", 32},    {"DMABus", 64},   {"DMABytes", 64}, {"TLBSize", 8},
}};

constexpr double kWorkloadMacs = 1.8e9;
constexpr double kHostOps = 4.0e6;
constexpr std::array<double, 3> kHostCpi{0.8, 1.2, 1.7};          // c1, c2, c3
constexpr std::array<double, 3> kHostArea{2.4, 1.1, 0.7};         // mm^2
constexpr std::array<double, 3> kHostPower{60.0, 30.0, 18.0};     // mW
constexpr std::array<double, 3> kDataflowCycles{1.00, 1.08, 0.94};  // WS, OS, BOTH
constexpr std::array<double, 3> kDataflowArea{1.00, 1.00, 1.12};
constexpr std::array<double, 3> kDataflowActivity{0.55, 0.60, 0.65};
constexpr double kSramAreaPerByte = 1.1e-6;    // mm^2
constexpr double kPeArea = 2.2e-5;             // mm^2 for an 8-bit MAC
constexpr double kPowerPerArea = 95.0;         // mW per mm^2 at unit activity

std::size_t clamp_code(double code) {
  return static_cast<std::size_t>(std::clamp(std::lround(code), 0L, 2L));
}

}  // namespace

AnalyticSocEvaluator::AnalyticSocEvaluator(DesignSpace space) : space_(std::move(space)) {
  descriptor_.kind = EvaluatorKind::analytic_soc;
  descriptor_.metric_names = {"latency", "power", "area"};
  descriptor_.metric_units = {"cycles", "mW", "mm2"};
  slots_.resize(kNumSlots);
  for (std::size_t s = 0; s < kNumSlots; ++s) {
    const std::size_t idx = space_.find(kSlots[s].name);
    slots_[s] = idx < space_.dimension() ? idx : static_cast<std::size_t>(-1);
  }
}

double AnalyticSocEvaluator::value(const DesignPoint& point, std::size_t slot) const {
  const std::size_t idx = slots_[slot];
  if (idx == static_cast<std::size_t>(-1)) return kSlots[slot].fallback;
  return space_.parameter(idx).levels[point[idx]];
}

MetricsVector AnalyticSocEvaluator::evaluate(const DesignPoint& point) const {
  space_.validate(point);
  auto v = [&](Slot s) { return value(point, s); };

  const std::size_t host = clamp_code(v(kHostCore));
  const std::size_t dataflow = clamp_code(v(kDataflow));
  const double in_bits = v(kInputType), acc_bits = v(kAccType), out_bits = v(kOutType);

  const double dim = v(kTile) * v(kMesh);
  const double pes = dim * dim;

  const double precision = 1.0 + 0.1 * std::log2(std::max(in_bits, acc_bits) / 8.0);
  const double queue_stall = 1.0 + 0.6 / v(kLdQueue) + 0.3 / v(kStQueue) + 0.6 / v(kExQueue) +
                             0.4 / v(kLdRes) + 0.2 / v(kStRes) + 0.4 / v(kExRes);
  const double compute = kWorkloadMacs / pes * (1.0 + dim / 512.0) *
                         kDataflowCycles[dataflow] * precision * queue_stall;

  const double sp_bytes = v(kSpBank) * v(kSpCapa) * 16.0;
  const double acc_bytes = v(kAccBank) * v(kAccCapa) * 16.0 * (acc_bits / 8.0);
  const double l2_kib = v(kL2Bank) * v(kL2Capa);
  const double reuse = 4.0 + 8.0 * std::sqrt((sp_bytes + acc_bytes) / 1024.0);
  const double traffic = kWorkloadMacs * (in_bits + out_bits) / 8.0 / reuse;
  const double miss = 0.5 / (1.0 + l2_kib / 256.0) * (1.0 + 2.0 / v(kL2Way));
  const double bandwidth = v(kDMABus) / 8.0 * (0.5 + v(kMemReq) / 64.0) *
                           (0.75 + v(kDMABytes) / 256.0);
  const double memory = traffic / bandwidth * (1.0 + 2.0 * miss) * (1.0 + 2.0 / v(kTLBSize));

  const double latency = compute + memory + kHostOps * kHostCpi[host];

  const double pe_area = kPeArea * std::pow(in_bits / 8.0, 0.8) * std::sqrt(acc_bits / 8.0) *
                         (0.9 + 0.1 * out_bits / 8.0) * kDataflowArea[dataflow];
  const double sram = (sp_bytes + acc_bytes + l2_kib * 1024.0) * kSramAreaPerByte;
  const double queues = 0.002 * (v(kLdQueue) + v(kStQueue) + v(kExQueue) + v(kLdRes) +
                                 v(kStRes) + v(kExRes));
  const double rocc = 0.004 * v(kDMABus) + 0.002 * v(kDMABytes) + 0.003 * v(kMemReq) +
                      0.01 * v(kTLBSize) + 0.01 * v(kL2Way);
  const double area = 0.5 + kHostArea[host] + pes * pe_area + sram + queues + rocc;

  const double activity = kDataflowActivity[dataflow] * std::pow(in_bits / 16.0, 0.2);
  const double power = 12.0 + kHostPower[host] + activity * kPowerPerArea * area;

  return {latency, power, area};
}

// ---------------------------------------------------------------------------
// Benchmark

BenchmarkEvaluator::BenchmarkEvaluator(std::size_t dimension, std::size_t levels)
    : space_(make_space(dimension, levels)), levels_(levels) {
  descriptor_.kind = EvaluatorKind::benchmark;
  descriptor_.metric_names = {"f1", "f2"};
  descriptor_.metric_units = {"", ""};
}

DesignSpace BenchmarkEvaluator::make_space(std::size_t dimension, std::size_t levels) {
  if (dimension < 2) throw SpaceError("benchmark space needs at least 2 coordinates");
  if (levels < 2) throw SpaceError("benchmark space needs at least 2 levels per coordinate");
  std::vector<ParameterDef> params(dimension);
  for (std::size_t i = 0; i < dimension; ++i) {
    auto& p = params[i];
    p.name = fmt::format("x{}", i + 1);
    p.group = "benchmark";
    for (std::size_t j = 0; j < levels; ++j) {
      const double level = static_cast<double>(j) / static_cast<double>(levels - 1);
      p.levels.push_back(level);
      p.labels.push_back(csv::format_number(level));
    }
  }
  return DesignSpace(std::move(params));
}

MetricsVector BenchmarkEvaluator::evaluate(const DesignPoint& point) const {
  space_.validate(point);
  const auto level = [&](std::size_t i) { return space_.parameter(i).levels[point[i]]; };
  const double f1 = level(0);
  double tail = 0.0;
  for (std::size_t i = 1; i < point.size(); ++i) tail += level(i);
  const double g = 1.0 + 9.0 * tail / static_cast<double>(point.size() - 1);
  const double f2 = g * (1.0 - std::sqrt(f1 / g));
  return {f1, f2};
}

std::vector<MetricsVector> BenchmarkEvaluator::reference_front() const {
  std::vector<MetricsVector> front;
  for (std::size_t j = 0; j < levels_; ++j) {
    const double f1 = space_.parameter(0).levels[j];
    front.push_back({f1, 1.0 - std::sqrt(f1)});
  }
  return front;
}

}  // namespace soctuner
