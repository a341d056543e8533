#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace soctuner {

/// Raised for malformed design-space documents and invalid points.
class SpaceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One tunable parameter with its ordered candidate list.
///
/// Numeric parameters keep their literal values as levels. Symbolic
/// parameters (e.g. dataflow "WS"/"OS"/"BOTH") get ordinal levels 0..t-1
/// in listed order.
struct ParameterDef {
  std::string name;
  std::string group;
  std::vector<std::string> labels;  // candidate literals, as written in files
  std::vector<double> levels;       // numeric level per candidate
  bool symbolic = false;

  std::size_t size() const { return labels.size(); }
  /// Index of the lower-middle candidate, floor((t-1)/2).
  std::size_t medium_index() const { return (size() - 1) / 2; }
  /// Candidate index whose literal matches `label`, or size() if absent.
  std::size_t find_label(std::string_view label) const;
};

/// A full assignment: one candidate index per parameter.
struct DesignPoint {
  std::vector<std::size_t> assignment;

  std::size_t size() const { return assignment.size(); }
  std::size_t operator[](std::size_t i) const { return assignment[i]; }
  friend bool operator==(const DesignPoint&, const DesignPoint&) = default;
  friend auto operator<=>(const DesignPoint&, const DesignPoint&) = default;
};

struct DesignPointHash {
  std::size_t operator()(const DesignPoint& p) const noexcept;
};

class DesignSpace {
 public:
  DesignSpace() = default;
  explicit DesignSpace(std::vector<ParameterDef> parameters, std::uint64_t seed = 0);

  std::size_t dimension() const { return parameters_.size(); }
  /// Default sampling seed carried by the document.
  std::uint64_t seed() const { return seed_; }
  const std::vector<ParameterDef>& parameters() const { return parameters_; }
  const ParameterDef& parameter(std::size_t i) const { return parameters_.at(i); }
  /// Index of the named parameter, or dimension() if not present.
  std::size_t find(std::string_view name) const;

  /// Product of candidate counts, saturating at UINT64_MAX.
  std::uint64_t cardinality() const;
  double log10_cardinality() const;

  bool contains(const DesignPoint& point) const;
  void validate(const DesignPoint& point) const;

  /// Min-max scaled levels in [0,1]^d. Single-candidate parameters map to 0.
  std::vector<double> encode(const DesignPoint& point) const;
  /// Nearest scaled level per coordinate.
  DesignPoint decode(std::span<const double> coords) const;

  /// n independent uniform draws; a pure function of (space, n, seed).
  std::vector<DesignPoint> sample_uniform(std::size_t n, std::uint64_t seed) const;

  std::vector<std::string> labels_of(const DesignPoint& point) const;

 private:
  std::vector<ParameterDef> parameters_;
  std::uint64_t seed_ = 0;
};

/// Parse the JSON design-space document (top-level `parameters` list).
DesignSpace load_space(std::string_view document);
DesignSpace load_space_file(const std::string& path);

/// The bundled 24-parameter SoC space document.
std::string_view table1_document();
const DesignSpace& table1_space();

/// Drop duplicate points, keeping the first occurrence.
std::vector<DesignPoint> unique_points(std::span<const DesignPoint> points);

}  // namespace soctuner
