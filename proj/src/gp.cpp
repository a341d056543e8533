#include "soctuner/gp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

namespace soctuner {

namespace {

constexpr double kJitterLadder[] = {1e-10, 1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4};

/// Cholesky of `k`, escalating diagonal jitter on failure. Returns the jitter used.
double factorize(const Eigen::MatrixXd& k, Eigen::LLT<Eigen::MatrixXd>& llt) {
  llt.compute(k);
  if (llt.info() == Eigen::Success) return 0.0;
  const auto n = k.rows();
  for (double jitter : kJitterLadder) {
    llt.compute(k + jitter * Eigen::MatrixXd::Identity(n, n));
    if (llt.info() == Eigen::Success) return jitter;
  }
  throw GpError("covariance matrix is not positive definite even with 1e-4 jitter");
}

void check_params(const KernelParams& p, Eigen::Index dim) {
  if (static_cast<Eigen::Index>(p.length_scales.size()) != dim)
    throw GpError(fmt::format("kernel has {} length scales for {}-dimensional inputs",
                              p.length_scales.size(), dim));
  if (!(p.signal_variance > 0.0) || !(p.noise_variance > 0.0))
    throw GpError("kernel variances must be positive");
  for (double l : p.length_scales)
    if (!(l > 0.0) || !std::isfinite(l)) throw GpError("length scales must be positive");
}

}  // namespace

Eigen::VectorXd KernelParams::to_log() const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(length_scales.size()) + 2);
  out(0) = std::log(signal_variance);
  for (std::size_t d = 0; d < length_scales.size(); ++d)
    out(static_cast<Eigen::Index>(d) + 1) = std::log(length_scales[d]);
  out(out.size() - 1) = std::log(noise_variance);
  return out;
}

KernelParams KernelParams::from_log(const Eigen::VectorXd& log_params) {
  KernelParams p;
  p.signal_variance = std::exp(log_params(0));
  p.length_scales.resize(static_cast<std::size_t>(log_params.size() - 2));
  for (std::size_t d = 0; d < p.length_scales.size(); ++d)
    p.length_scales[d] = std::exp(log_params(static_cast<Eigen::Index>(d) + 1));
  p.noise_variance = std::exp(log_params(log_params.size() - 1));
  return p;
}

Eigen::MatrixXd ard_kernel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                           const KernelParams& params) {
  check_params(params, a.cols());
  if (a.cols() != b.cols()) throw GpError("ard_kernel: input dimensions differ");
  Eigen::RowVectorXd inv(a.cols());
  for (Eigen::Index d = 0; d < a.cols(); ++d)
    inv(d) = 1.0 / params.length_scales[static_cast<std::size_t>(d)];
  const Eigen::MatrixXd as = a.array().rowwise() * inv.array();
  const Eigen::MatrixXd bs = b.array().rowwise() * inv.array();
  Eigen::MatrixXd sq = (-2.0 * as * bs.transpose()).colwise() + as.rowwise().squaredNorm();
  sq.rowwise() += bs.rowwise().squaredNorm().transpose();
  return params.signal_variance * (-0.5 * sq.array().max(0.0)).exp().matrix();
}

LmlValue log_marginal_likelihood(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                                 const KernelParams& params, bool with_gradient) {
  const Eigen::Index n = inputs.rows();
  const Eigen::Index dim = inputs.cols();
  const Eigen::MatrixXd kf = ard_kernel(inputs, inputs, params);
  Eigen::MatrixXd k = kf;
  k.diagonal().array() += params.noise_variance;

  Eigen::LLT<Eigen::MatrixXd> llt;
  factorize(k, llt);
  const Eigen::VectorXd alpha = llt.solve(targets);
  const Eigen::MatrixXd l = llt.matrixL();

  LmlValue out;
  out.value = -0.5 * targets.dot(alpha) - l.diagonal().array().log().sum() -
              0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
  if (!with_gradient) return out;

  const Eigen::MatrixXd w =
      alpha * alpha.transpose() - llt.solve(Eigen::MatrixXd::Identity(n, n));
  const Eigen::MatrixXd wk = w.cwiseProduct(kf);
  out.gradient.resize(dim + 2);
  out.gradient(0) = 0.5 * wk.sum();
  for (Eigen::Index d = 0; d < dim; ++d) {
    const double ls = params.length_scales[static_cast<std::size_t>(d)];
    double acc = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const double diff = (inputs(i, d) - inputs(j, d)) / ls;
        acc += wk(i, j) * diff * diff;
      }
    }
    out.gradient(d + 1) = 0.5 * acc;
  }
  out.gradient(dim + 1) = 0.5 * params.noise_variance * w.trace();
  return out;
}

Eigen::VectorXd Prediction::predictive_sd() const {
  return (latent_variance.array() + noise_variance).sqrt().matrix();
}

Eigen::VectorXd Prediction::latent_sd() const { return latent_variance.array().sqrt().matrix(); }

GaussianProcess::GaussianProcess(Eigen::MatrixXd inputs, const Eigen::VectorXd& targets,
                                 KernelParams params)
    : inputs_(std::move(inputs)), params_(std::move(params)) {
  if (inputs_.rows() != targets.size()) throw GpError("GP: input and target counts differ");
  if (inputs_.rows() < 1) throw GpError("GP: no training points");
  if (!inputs_.allFinite() || !targets.allFinite()) throw GpError("GP: non-finite training data");
  check_params(params_, inputs_.cols());

  const Eigen::Index n = targets.size();
  target_mean_ = targets.mean();
  const double sd = std::sqrt((targets.array() - target_mean_).square().sum() / static_cast<double>(n));
  constant_ = !(sd > 1e-12 * std::max(1.0, std::abs(target_mean_)));
  target_scale_ = constant_ ? 1.0 : sd;
  targets_ = (targets.array() - target_mean_) / target_scale_;

  Eigen::MatrixXd k = ard_kernel(inputs_, inputs_, params_);
  k.diagonal().array() += params_.noise_variance;
  jitter_ = factorize(k, chol_);
  alpha_ = chol_.solve(targets_);
  const Eigen::MatrixXd l = chol_.matrixL();
  lml_ = -0.5 * targets_.dot(alpha_) - l.diagonal().array().log().sum() -
         0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

Prediction GaussianProcess::predict(const Eigen::MatrixXd& queries) const {
  const Eigen::MatrixXd kq = ard_kernel(inputs_, queries, params_);  // n x q
  const Eigen::MatrixXd v = chol_.matrixL().solve(kq);
  Prediction out;
  out.mean = (kq.transpose() * alpha_).array() * target_scale_ + target_mean_;
  out.latent_variance =
      ((params_.signal_variance - v.colwise().squaredNorm().array()).max(0.0) *
       (target_scale_ * target_scale_))
          .matrix()
          .transpose();
  out.noise_variance = params_.noise_variance * target_scale_ * target_scale_;
  return out;
}

void GaussianProcess::joint(const Eigen::MatrixXd& queries, Eigen::VectorXd& mean,
                            Eigen::MatrixXd& cov) const {
  const Eigen::MatrixXd kq = ard_kernel(inputs_, queries, params_);
  const Eigen::MatrixXd v = chol_.matrixL().solve(kq);
  const double s2 = target_scale_ * target_scale_;
  mean = (kq.transpose() * alpha_).array() * target_scale_ + target_mean_;
  cov = (ard_kernel(queries, queries, params_) - v.transpose() * v) * s2;
  cov = 0.5 * (cov + cov.transpose());
}

// ---------------------------------------------------------------------------
// Hyperparameter fitting

namespace {

struct Bounds {
  Eigen::VectorXd lo, hi;
  Eigen::VectorXd clamp(const Eigen::VectorXd& x) const { return x.cwiseMax(lo).cwiseMin(hi); }
};

Bounds make_bounds(const Eigen::VectorXd& span, double noise_floor) {
  const Eigen::Index dim = span.size();
  Bounds b{Eigen::VectorXd(dim + 2), Eigen::VectorXd(dim + 2)};
  b.lo(0) = std::log(1e-6);
  b.hi(0) = std::log(1e2);
  for (Eigen::Index d = 0; d < dim; ++d) {
    const double s = span(d) > 0.0 ? span(d) : 1.0;
    b.lo(d + 1) = std::log(1e-2 * s);
    b.hi(d + 1) = std::log(1e2 * s);
  }
  b.lo(dim + 1) = std::log(noise_floor);
  b.hi(dim + 1) = std::log(1.0);
  return b;
}

struct Ascent {
  Eigen::VectorXd x;
  double value = -std::numeric_limits<double>::infinity();
};

Ascent gradient_ascent(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& y,
                       Eigen::VectorXd x, const Bounds& bounds, std::size_t max_iterations) {
  auto eval = [&](const Eigen::VectorXd& z, bool grad) -> std::optional<LmlValue> {
    try {
      return log_marginal_likelihood(inputs, y, KernelParams::from_log(z), grad);
    } catch (const GpError&) {
      return std::nullopt;
    }
  };

  x = bounds.clamp(x);
  auto current = eval(x, true);
  if (!current) return {};
  double step = 0.1;
  for (std::size_t it = 0; it < max_iterations; ++it) {
    const Eigen::VectorXd& g = current->gradient;
    // Projected gradient: ignore components pushing against an active bound.
    Eigen::VectorXd dir = g;
    for (Eigen::Index k = 0; k < dir.size(); ++k)
      if ((x(k) <= bounds.lo(k) && dir(k) < 0) || (x(k) >= bounds.hi(k) && dir(k) > 0)) dir(k) = 0;
    if (dir.norm() < 1e-6) break;

    bool accepted = false;
    while (step > 1e-10) {
      const Eigen::VectorXd cand = bounds.clamp(x + step * dir);
      const double predicted = dir.dot(cand - x);
      auto next = eval(cand, true);
      if (next && next->value >= current->value + 1e-4 * predicted && next->value > current->value) {
        const double gain = next->value - current->value;
        x = cand;
        current = std::move(next);
        step = std::min(step * 1.5, 10.0);
        accepted = true;
        if (gain < 1e-9 * (1.0 + std::abs(current->value))) it = max_iterations;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  return {x, current->value};
}

}  // namespace

GaussianProcess fit_gp(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                       const FitOptions& options, const std::optional<KernelParams>& warm_start) {
  if (inputs.rows() < 2) throw GpError("fit: at least 2 training points are required");
  if (inputs.rows() != targets.size()) throw GpError("fit: input and target counts differ");
  const Eigen::Index dim = inputs.cols();

  // Standardize once so the search works in the same units as the final model.
  const GaussianProcess probe(inputs, targets,
                              KernelParams{1.0, std::vector<double>(static_cast<std::size_t>(dim), 1.0), 1.0});
  const Eigen::VectorXd& y = probe.standardized_targets();

  const Eigen::VectorXd span = inputs.colwise().maxCoeff() - inputs.colwise().minCoeff();
  const Bounds bounds = make_bounds(span, options.noise_floor);

  KernelParams base;
  base.signal_variance = 1.0;
  base.noise_variance = 1e-2;
  base.length_scales.resize(static_cast<std::size_t>(dim));
  for (Eigen::Index d = 0; d < dim; ++d)
    base.length_scales[static_cast<std::size_t>(d)] = 0.5 * (span(d) > 0.0 ? span(d) : 1.0);

  std::vector<Eigen::VectorXd> starts;
  if (warm_start && static_cast<Eigen::Index>(warm_start->length_scales.size()) == dim)
    starts.push_back(warm_start->to_log());
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> jitter(0.0, 0.5);
  for (std::size_t r = 0; r < std::max<std::size_t>(1, options.restarts); ++r) {
    Eigen::VectorXd s = base.to_log();
    if (r > 0)
      for (Eigen::Index k = 0; k < s.size(); ++k) s(k) += jitter(rng);
    starts.push_back(s);
  }

  Ascent best;
  for (const auto& s : starts) {
    Ascent a = gradient_ascent(inputs, y, s, bounds, options.max_iterations);
    if (a.value > best.value) best = a;
  }
  if (!std::isfinite(best.value)) throw GpError("fit: no starting point produced a valid model");
  return GaussianProcess(inputs, targets, KernelParams::from_log(best.x));
}

std::vector<KernelParams> SurrogateState::params() const {
  std::vector<KernelParams> out;
  for (const auto& m : models_) out.push_back(m.params());
  return out;
}

SurrogateState fit(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                   const FitOptions& options, const std::vector<KernelParams>* warm_start) {
  if (targets.rows() != inputs.rows()) throw GpError("fit: input and target counts differ");
  std::vector<GaussianProcess> models;
  for (Eigen::Index k = 0; k < targets.cols(); ++k) {
    std::optional<KernelParams> warm;
    if (warm_start && static_cast<std::size_t>(k) < warm_start->size())
      warm = (*warm_start)[static_cast<std::size_t>(k)];
    FitOptions o = options;
    o.seed = options.seed + static_cast<std::uint64_t>(k);
    models.push_back(fit_gp(inputs, targets.col(k), o, warm));
  }
  return SurrogateState(std::move(models));
}

std::vector<Prediction> posterior(const SurrogateState& state, const Eigen::MatrixXd& queries) {
  if (!state.fitted()) throw GpError("posterior: surrogate has not been fitted");
  std::vector<Prediction> out;
  for (const auto& m : state.models()) out.push_back(m.predict(queries));
  return out;
}

std::vector<Eigen::MatrixXd> sample_posterior(const SurrogateState& state,
                                              const Eigen::MatrixXd& queries,
                                              std::size_t samples, std::uint64_t seed) {
  if (!state.fitted()) throw GpError("sample_posterior: surrogate has not been fitted");
  if (queries.rows() < 1) throw GpError("sample_posterior: empty query pool");
  if (samples < 1) throw GpError("sample_posterior: at least one sample is required");
  if (static_cast<std::size_t>(queries.rows()) > kMaxJointPoints)
    throw GpError(fmt::format("sample_posterior: {} queries exceed the joint cap of {}",
                              queries.rows(), kMaxJointPoints));

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::Index q = queries.rows();
  std::vector<Eigen::MatrixXd> out;
  for (const auto& m : state.models()) {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    m.joint(queries, mean, cov);
    const double s2 = m.target_scale() * m.target_scale();
    // Jitter is specified in standardized units.
    Eigen::LLT<Eigen::MatrixXd> llt;
    llt.compute(cov);
    if (llt.info() != Eigen::Success) {
      bool ok = false;
      for (double jitter : kJitterLadder) {
        llt.compute(cov + jitter * s2 * Eigen::MatrixXd::Identity(q, q));
        if (llt.info() == Eigen::Success) {
          ok = true;
          break;
        }
      }
      if (!ok) throw GpError("sample_posterior: joint covariance is not positive definite");
    }
    const Eigen::MatrixXd l = llt.matrixL();
    Eigen::MatrixXd draws(static_cast<Eigen::Index>(samples), q);
    Eigen::VectorXd z(q);
    for (std::size_t s = 0; s < samples; ++s) {
      for (Eigen::Index j = 0; j < q; ++j) z(j) = normal(rng);
      draws.row(static_cast<Eigen::Index>(s)) = (mean + l * z).transpose();
    }
    out.push_back(std::move(draws));
  }
  return out;
}

}  // namespace soctuner
