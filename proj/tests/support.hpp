#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "soctuner/design_space.hpp"
#include "soctuner/evaluators.hpp"

namespace testing {

/// Evaluator backed by a plain function of the encoded coordinates.
class FunctionEvaluator final : public soctuner::Evaluator {
 public:
  using Fn = std::function<soctuner::MetricsVector(const std::vector<double>&)>;

  FunctionEvaluator(soctuner::DesignSpace space, std::vector<std::string> names, Fn fn)
      : space_(std::move(space)), fn_(std::move(fn)) {
    descriptor_.kind = soctuner::EvaluatorKind::benchmark;
    descriptor_.metric_names = std::move(names);
    descriptor_.metric_units.assign(descriptor_.metric_names.size(), "");
  }

  const soctuner::EvaluatorDescriptor& descriptor() const override { return descriptor_; }
  const soctuner::DesignSpace& space() const override { return space_; }
  soctuner::MetricsVector evaluate(const soctuner::DesignPoint& p) const override {
    return fn_(space_.encode(p));
  }

 private:
  soctuner::DesignSpace space_;
  soctuner::EvaluatorDescriptor descriptor_;
  Fn fn_;
};

inline soctuner::ParameterDef numeric(std::string name, std::vector<double> levels) {
  soctuner::ParameterDef p;
  p.name = std::move(name);
  p.group = "systolic";
  for (double l : levels) {
    p.labels.push_back(std::to_string(static_cast<long long>(l)));
    p.levels.push_back(l);
  }
  return p;
}

/// d parameters with candidates 0..t-1.
inline soctuner::DesignSpace grid_space(std::size_t d, std::size_t t) {
  std::vector<soctuner::ParameterDef> ps;
  for (std::size_t i = 0; i < d; ++i) {
    std::vector<double> levels;
    for (std::size_t j = 0; j < t; ++j) levels.push_back(static_cast<double>(j));
    ps.push_back(numeric("p" + std::to_string(i), levels));
  }
  return soctuner::DesignSpace(std::move(ps));
}

}  // namespace testing
