#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace soctuner {

class GpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Lower bound the fitter enforces on the noise variance (standardized units).
inline constexpr double kNoiseFloor = 1e-6;
/// Cap on the number of points in a joint posterior draw.
inline constexpr std::size_t kMaxJointPoints = 512;

/// ARD squared-exponential kernel plus Gaussian observation noise, in
/// standardized target units:
///   k(a, b) = signal_variance * exp(-0.5 * sum_d ((a_d - b_d) / length_scales_d)^2)
struct KernelParams {
  double signal_variance = 1.0;
  std::vector<double> length_scales;
  double noise_variance = 1e-2;

  /// [log signal, log length scales..., log noise]
  Eigen::VectorXd to_log() const;
  static KernelParams from_log(const Eigen::VectorXd& log_params);
};

Eigen::MatrixXd ard_kernel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                           const KernelParams& params);

struct LmlValue {
  double value = 0.0;
  Eigen::VectorXd gradient;  // with respect to KernelParams::to_log()
};

/// Log marginal likelihood of (already standardized) targets and its gradient
/// in log-parameter space.
LmlValue log_marginal_likelihood(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                                 const KernelParams& params, bool with_gradient = true);

struct FitOptions {
  std::size_t restarts = 3;
  std::size_t max_iterations = 200;
  double noise_floor = kNoiseFloor;
  std::uint64_t seed = 0;
};

struct Prediction {
  Eigen::VectorXd mean;             // target units
  Eigen::VectorXd latent_variance;  // variance of f at the query
  double noise_variance = 0.0;      // observation noise, target units

  Eigen::VectorXd predictive_sd() const;
  Eigen::VectorXd latent_sd() const;
};

/// Exact GP regression for one objective. Targets are standardized on
/// construction (zero prior mean in standardized units) and outputs are
/// reported in the original units. Immutable once built.
class GaussianProcess {
 public:
  GaussianProcess(Eigen::MatrixXd inputs, const Eigen::VectorXd& targets, KernelParams params);

  const KernelParams& params() const { return params_; }
  const Eigen::MatrixXd& inputs() const { return inputs_; }
  const Eigen::VectorXd& standardized_targets() const { return targets_; }
  double target_mean() const { return target_mean_; }
  double target_scale() const { return target_scale_; }
  /// True when every training target was identical.
  bool constant_targets() const { return constant_; }
  /// Diagonal jitter the factorization needed (0 when none).
  double jitter() const { return jitter_; }
  double log_marginal_likelihood() const { return lml_; }

  Prediction predict(const Eigen::MatrixXd& queries) const;
  /// Joint posterior mean and covariance of f over the queries, target units.
  void joint(const Eigen::MatrixXd& queries, Eigen::VectorXd& mean, Eigen::MatrixXd& cov) const;

 private:
  Eigen::MatrixXd inputs_;
  Eigen::VectorXd targets_;
  KernelParams params_;
  double target_mean_ = 0.0;
  double target_scale_ = 1.0;
  bool constant_ = false;
  double jitter_ = 0.0;
  double lml_ = 0.0;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  Eigen::VectorXd alpha_;
};

/// Maximize the log marginal likelihood by projected gradient ascent with
/// backtracking in log-parameter space, from several starting points.
GaussianProcess fit_gp(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                       const FitOptions& options = {},
                       const std::optional<KernelParams>& warm_start = std::nullopt);

/// Independent GPs, one per objective column of the targets.
class SurrogateState {
 public:
  SurrogateState() = default;
  explicit SurrogateState(std::vector<GaussianProcess> models) : models_(std::move(models)) {}

  bool fitted() const { return !models_.empty(); }
  std::size_t num_objectives() const { return models_.size(); }
  const GaussianProcess& model(std::size_t i) const { return models_.at(i); }
  const std::vector<GaussianProcess>& models() const { return models_; }
  std::vector<KernelParams> params() const;

 private:
  std::vector<GaussianProcess> models_;
};

/// Fit every objective; `warm_start`, when given, seeds each objective's search.
SurrogateState fit(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                   const FitOptions& options = {},
                   const std::vector<KernelParams>* warm_start = nullptr);

/// Per-objective predictions.
std::vector<Prediction> posterior(const SurrogateState& state, const Eigen::MatrixXd& queries);

/// S joint draws of f over the queries for every objective: result[i] is S x |queries|
/// in target units. Throws GpError above kMaxJointPoints queries.
std::vector<Eigen::MatrixXd> sample_posterior(const SurrogateState& state,
                                              const Eigen::MatrixXd& queries,
                                              std::size_t samples, std::uint64_t seed);

}  // namespace soctuner
