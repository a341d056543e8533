#include "soctuner/design_space.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <unordered_set>

#include <fmt/format.h>
#include <json.hpp>

namespace soctuner {

using nlohmann::json;

std::size_t ParameterDef::find_label(std::string_view label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  return static_cast<std::size_t>(it - labels.begin());
}

std::size_t DesignPointHash::operator()(const DesignPoint& p) const noexcept {
  std::size_t h = 0xcbf29ce484222325ULL;
  for (auto a : p.assignment) {
    h ^= a + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

DesignSpace::DesignSpace(std::vector<ParameterDef> parameters, std::uint64_t seed)
    : parameters_(std::move(parameters)), seed_(seed) {
  std::set<std::string> names;
  for (std::size_t i = 0; i < parameters_.size(); ++i) {
    const auto& p = parameters_[i];
    const auto where = fmt::format("parameters[{}] '{}'", i, p.name);
    if (p.name.empty()) throw SpaceError(fmt::format("{}: empty parameter name", where));
    if (!names.insert(p.name).second)
      throw SpaceError(fmt::format("{}: duplicate parameter name '{}'", where, p.name));
    if (p.labels.empty()) throw SpaceError(fmt::format("{}: empty candidate list", where));
    if (p.labels.size() != p.levels.size())
      throw SpaceError(fmt::format("{}: labels and levels differ in length", where));
    std::set<double> seen_levels;
    std::set<std::string> seen_labels;
    for (std::size_t j = 0; j < p.labels.size(); ++j) {
      if (!std::isfinite(p.levels[j]))
        throw SpaceError(fmt::format("{}: candidate {} is not finite", where, j));
      if (!seen_levels.insert(p.levels[j]).second || !seen_labels.insert(p.labels[j]).second)
        throw SpaceError(fmt::format("{}: duplicate candidate '{}'", where, p.labels[j]));
    }
  }
}

std::size_t DesignSpace::find(std::string_view name) const {
  for (std::size_t i = 0; i < parameters_.size(); ++i)
    if (parameters_[i].name == name) return i;
  return parameters_.size();
}

std::uint64_t DesignSpace::cardinality() const {
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t total = 1;
  for (const auto& p : parameters_) {
    const std::uint64_t t = p.size();
    if (total > kMax / t) return kMax;
    total *= t;
  }
  return total;
}

double DesignSpace::log10_cardinality() const {
  double total = 0.0;
  for (const auto& p : parameters_) total += std::log10(static_cast<double>(p.size()));
  return total;
}

bool DesignSpace::contains(const DesignPoint& point) const {
  if (point.size() != parameters_.size()) return false;
  for (std::size_t i = 0; i < point.size(); ++i)
    if (point[i] >= parameters_[i].size()) return false;
  return true;
}

void DesignSpace::validate(const DesignPoint& point) const {
  if (point.size() != parameters_.size())
    throw SpaceError(fmt::format("design point has {} entries, space has {} parameters",
                                 point.size(), parameters_.size()));
  for (std::size_t i = 0; i < point.size(); ++i)
    if (point[i] >= parameters_[i].size())
      throw SpaceError(fmt::format("index {} out of range for parameter '{}' ({} candidates)",
                                   point[i], parameters_[i].name, parameters_[i].size()));
}

namespace {

double scaled_level(const ParameterDef& p, std::size_t j) {
  const auto [lo, hi] = std::minmax_element(p.levels.begin(), p.levels.end());
  if (*hi == *lo) return 0.0;
  return (p.levels[j] - *lo) / (*hi - *lo);
}

}  // namespace

std::vector<double> DesignSpace::encode(const DesignPoint& point) const {
  validate(point);
  std::vector<double> out(point.size());
  for (std::size_t i = 0; i < point.size(); ++i) out[i] = scaled_level(parameters_[i], point[i]);
  return out;
}

DesignPoint DesignSpace::decode(std::span<const double> coords) const {
  if (coords.size() != parameters_.size())
    throw SpaceError(fmt::format("coordinate vector has {} entries, space has {} parameters",
                                 coords.size(), parameters_.size()));
  DesignPoint point;
  point.assignment.resize(coords.size());
  for (std::size_t i = 0; i < coords.size(); ++i) {
    const auto& p = parameters_[i];
    std::size_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double d = std::abs(scaled_level(p, j) - coords[i]);
      if (d < best_dist) {
        best_dist = d;
        best = j;
      }
    }
    point.assignment[i] = best;
  }
  return point;
}

std::vector<DesignPoint> DesignSpace::sample_uniform(std::size_t n, std::uint64_t seed) const {
  if (n == 0) throw SpaceError("sample_uniform: n must be at least 1");
  std::mt19937_64 rng(seed);
  std::vector<DesignPoint> out(n);
  for (auto& point : out) {
    point.assignment.resize(parameters_.size());
    for (std::size_t i = 0; i < parameters_.size(); ++i) {
      std::uniform_int_distribution<std::size_t> pick(0, parameters_[i].size() - 1);
      point.assignment[i] = pick(rng);
    }
  }
  return out;
}

std::vector<std::string> DesignSpace::labels_of(const DesignPoint& point) const {
  validate(point);
  std::vector<std::string> out(point.size());
  for (std::size_t i = 0; i < point.size(); ++i) out[i] = parameters_[i].labels[point[i]];
  return out;
}

DesignSpace load_space(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw SpaceError(fmt::format("malformed design-space document at byte {}: {}", e.byte,
                                 e.what()));
  }
  if (!doc.is_object() || !doc.contains("parameters") || !doc["parameters"].is_array())
    throw SpaceError("design-space document needs a top-level 'parameters' list");

  std::uint64_t seed = 0;
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) throw SpaceError("'seed' must be an unsigned integer");
    seed = doc["seed"].get<std::uint64_t>();
  }

  std::vector<ParameterDef> params;
  const auto& list = doc["parameters"];
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto& entry = list[i];
    const auto where = fmt::format("parameters[{}]", i);
    if (!entry.is_object()) throw SpaceError(fmt::format("{}: expected an object", where));
    if (!entry.contains("name") || !entry["name"].is_string())
      throw SpaceError(fmt::format("{}: missing string field 'name'", where));
    ParameterDef p;
    p.name = entry["name"].get<std::string>();
    const auto named = fmt::format("{} '{}'", where, p.name);
    if (entry.contains("group")) {
      if (!entry["group"].is_string())
        throw SpaceError(fmt::format("{}: 'group' must be a string", named));
      p.group = entry["group"].get<std::string>();
    }
    if (!entry.contains("candidates") || !entry["candidates"].is_array())
      throw SpaceError(fmt::format("{}: missing list field 'candidates'", named));
    const auto& cands = entry["candidates"];
    if (cands.empty()) throw SpaceError(fmt::format("{}: empty candidate list", named));

    const bool any_string = std::any_of(cands.begin(), cands.end(),
                                        [](const json& c) { return c.is_string(); });
    p.symbolic = any_string;
    for (std::size_t j = 0; j < cands.size(); ++j) {
      const auto& c = cands[j];
      if (any_string) {
        if (!c.is_string())
          throw SpaceError(fmt::format("{}: candidate {} mixes numbers with labels", named, j));
        p.labels.push_back(c.get<std::string>());
        p.levels.push_back(static_cast<double>(j));
      } else if (c.is_number()) {
        const double level = c.get<double>();
        p.labels.push_back(c.is_number_integer() ? c.dump() : fmt::format("{}", level));
        p.levels.push_back(level);
      } else {
        throw SpaceError(fmt::format("{}: candidate {} is neither a number nor a string", named, j));
      }
    }
    params.push_back(std::move(p));
  }
  return DesignSpace(std::move(params), seed);
}

DesignSpace load_space_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpaceError(fmt::format("cannot open design-space file '{}'", path));
  std::stringstream buf;
  buf << in.rdbuf();
  return load_space(buf.str());
}

const DesignSpace& table1_space() {
  static const DesignSpace space = load_space(table1_document());
  return space;
}

std::vector<DesignPoint> unique_points(std::span<const DesignPoint> points) {
  std::unordered_set<DesignPoint, DesignPointHash> seen;
  std::vector<DesignPoint> out;
  out.reserve(points.size());
  for (const auto& p : points)
    if (seen.insert(p).second) out.push_back(p);
  return out;
}

}  // namespace soctuner
