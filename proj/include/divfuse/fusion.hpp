#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "divfuse/error.hpp"
#include "divfuse/kde.hpp"
#include "divfuse/stats.hpp"

namespace divfuse {

// The learned affine map y -> C*y + D aligning a source feature column with
// the reference column's distribution.
struct AffineParams {
  double scale = 1.0;  // C
  double offset = 0.0; // D

  void validate() const {
    if (!std::isfinite(scale) || scale == 0.0)
      fail(errc::degenerate_sample, "affine scale must be finite and nonzero");
    if (!std::isfinite(offset))
      fail(errc::degenerate_sample, "affine offset must be finite");
  }

  AffineParams inverse() const {
    validate();
    return {1.0 / scale, -offset / scale};
  }
};

inline std::vector<double> apply_affine(const std::vector<double>& values,
                                        const AffineParams& params) {
  params.validate();
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    out[i] = params.scale * values[i] + params.offset;
  return out;
}

enum class DistributionClass { Gaussian, NonGaussian };

inline const char* to_string(DistributionClass d) {
  return d == DistributionClass::Gaussian ? "Gaussian" : "NonGaussian";
}

enum class BandwidthRule { silverman, fixed };

struct FusionConfig {
  double learning_rate = 0.05;  // tau
  std::size_t max_iters = 1000;
  double grad_tol = 1e-6;
  double kl_tol = 1e-8;          // relative change of the KL estimate
  double density_floor = 1e-12;  // epsilon inside logs/denominators
  BandwidthRule bandwidth_rule = BandwidthRule::silverman;
  double fixed_bandwidth = 0.1;  // used when bandwidth_rule == fixed
  bool line_search = true;

  void validate() const {
    if (!(learning_rate > 0.0)) fail(errc::invalid_spec, "learning_rate must be > 0");
    if (max_iters < 1) fail(errc::invalid_spec, "max_iters must be >= 1");
    if (!(grad_tol > 0.0) || !(kl_tol > 0.0) || !(density_floor > 0.0))
      fail(errc::invalid_spec, "tolerances must be > 0");
    if (bandwidth_rule == BandwidthRule::fixed && !(fixed_bandwidth > 0.0))
      fail(errc::invalid_spec, "fixed bandwidth must be > 0");
  }
};

enum class FusionBranch { GaussianClosedForm, KlDescent };

inline const char* to_string(FusionBranch b) {
  return b == FusionBranch::GaussianClosedForm ? "GaussianClosedForm" : "KlDescent";
}

// Diagnostics of one fuse() call. kl_trace starts at the descent's starting
// objective; with line search enabled it is non-increasing and its last entry
// equals final_kl.
struct FusionReport {
  std::size_t iterations = 0;
  std::vector<double> kl_trace;
  double initial_kl = 0.0;
  double final_kl = 0.0;
  bool converged = false;
  FusionBranch branch = FusionBranch::GaussianClosedForm;
};

struct FusionResult {
  AffineParams params;
  FusionReport report;
};

// Moment matching: C = sd(X)/sd(Y), D = mean(X) - C*mean(Y). Exact optimum
// for Gaussian pairs; the transformed sample reproduces X's sample moments.
inline AffineParams gaussian_closed_form(const std::vector<double>& reference,
                                         const std::vector<double>& source) {
  const MomentSummary mx = moment_summary(reference);
  const MomentSummary my = moment_summary(source);
  const double scale = std::sqrt(mx.variance / my.variance);
  return {scale, mx.mean - scale * my.mean};
}

namespace detail {

// exp(x) for x in [-50, 0]: Cody-Waite range reduction and a degree-13
// series, then a power-of-two scale. Branch-free in the hot loop and
// deterministic across toolchains.
inline double exp_neg(double x) {
  constexpr double inv_ln2 = 1.4426950408889634074;
  constexpr double ln2_hi = 6.93147180369123816490e-01;
  constexpr double ln2_lo = 1.90821492927058770002e-10;
  if (x < -700.0) return 0.0;
  const double kd = std::nearbyint(x * inv_ln2);
  const double r = (x - kd * ln2_hi) - kd * ln2_lo;
  double p = 1.0 / 6227020800.0; // 1/13!
  p = p * r + 1.0 / 479001600.0;
  p = p * r + 1.0 / 39916800.0;
  p = p * r + 1.0 / 3628800.0;
  p = p * r + 1.0 / 362880.0;
  p = p * r + 1.0 / 40320.0;
  p = p * r + 1.0 / 5040.0;
  p = p * r + 1.0 / 720.0;
  p = p * r + 1.0 / 120.0;
  p = p * r + 1.0 / 24.0;
  p = p * r + 1.0 / 6.0;
  p = p * r + 0.5;
  p = p * r + 1.0;
  p = p * r + 1.0;
  const auto k = static_cast<std::int64_t>(kd);
  return p * std::bit_cast<double>(static_cast<std::uint64_t>(1023 + k) << 52);
}

// Kernel arguments beyond this many squared-and-halved sigmas contribute
// less than exp(-45) ~ 3e-20 per pair and are skipped.
constexpr double k_kernel_cut = 45.0;

// Shared state of one KL objective: the reference sample (quadrature nodes),
// its cached log-density term, and the source sample sorted for window
// lookups. The transform z = C*y + D is monotone in y, so a single sort of
// the source serves every (C, D).
struct KlObjective {
  const std::vector<double>* xs = nullptr;
  std::vector<double> ys;    // ascending
  double sigma_y = 0.0;
  double floor = 0.0;
  double fx_log_mean = 0.0;  // (1/N) sum_i log fX(x_i)

  KlObjective(const KdeModel& reference_kde, const std::vector<double>& source,
              double sigma, double density_floor)
      : xs(&reference_kde.points), ys(source), sigma_y(sigma), floor(density_floor) {
    if (ys.empty()) fail(errc::degenerate_sample, "empty source sample");
    if (!(sigma_y > 0.0)) fail(errc::degenerate_sample, "bandwidth must be positive");
    std::sort(ys.begin(), ys.end());
    double acc = 0.0;
    for (double x : reference_kde.points) acc += std::log(kde_eval(reference_kde, x));
    fx_log_mean = acc / static_cast<double>(reference_kde.points.size());
  }

  // Source index window with |x - (C*y + D)| <= radius.
  std::pair<std::size_t, std::size_t> window(double x, double c, double d,
                                             double radius) const {
    if (c == 0.0) return {0, ys.size()}; // every point maps to D
    double y_lo = (x - d - radius) / c;
    double y_hi = (x - d + radius) / c;
    if (c < 0.0) std::swap(y_lo, y_hi);
    const auto begin = std::lower_bound(ys.begin(), ys.end(), y_lo);
    const auto end = std::upper_bound(begin, ys.end(), y_hi);
    return {static_cast<std::size_t>(begin - ys.begin()),
            static_cast<std::size_t>(end - ys.begin())};
  }

  double loss(const AffineParams& p) const {
    const double inv2s2 = 1.0 / (2.0 * sigma_y * sigma_y);
    const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * sigma_y *
                               static_cast<double>(ys.size()));
    const double radius = std::sqrt(2.0 * k_kernel_cut) * sigma_y;
    double log_fy_sum = 0.0;
    for (double x : *xs) {
      const auto [lo, hi] = window(x, p.scale, p.offset, radius);
      double fy = 0.0;
      for (std::size_t j = lo; j < hi; ++j) {
        const double u = x - (p.scale * ys[j] + p.offset);
        fy += exp_neg(-u * u * inv2s2);
      }
      log_fy_sum += std::log(std::max(fy * norm, floor));
    }
    return fx_log_mean - log_fy_sum / static_cast<double>(xs->size());
  }

  struct Eval {
    double loss = 0.0;
    double grad_scale = 0.0;
    double grad_offset = 0.0;
  };

  Eval loss_and_gradient(const AffineParams& p) const {
    const double inv_s2 = 1.0 / (sigma_y * sigma_y);
    const double inv2s2 = 0.5 * inv_s2;
    const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * sigma_y *
                               static_cast<double>(ys.size()));
    const double radius = std::sqrt(2.0 * k_kernel_cut) * sigma_y;
    Eval ev;
    double log_fy_sum = 0.0;
    for (double x : *xs) {
      const auto [lo, hi] = window(x, p.scale, p.offset, radius);
      double fy = 0.0;
      double du = 0.0;  // sum w * u
      double duy = 0.0; // sum w * u * y
      for (std::size_t j = lo; j < hi; ++j) {
        const double u = x - (p.scale * ys[j] + p.offset);
        const double w = exp_neg(-u * u * inv2s2);
        fy += w;
        const double wu = w * u;
        du += wu;
        duy += wu * ys[j];
      }
      fy *= norm;
      log_fy_sum += std::log(std::max(fy, floor));
      // points at the floor are locally constant and contribute no gradient
      if (fy > floor) {
        const double scale_term = norm * inv_s2 / fy;
        ev.grad_scale -= duy * scale_term;
        ev.grad_offset -= du * scale_term;
      }
    }
    const double inv_n = 1.0 / static_cast<double>(xs->size());
    ev.loss = fx_log_mean - log_fy_sum * inv_n;
    ev.grad_scale *= inv_n;
    ev.grad_offset *= inv_n;
    return ev;
  }
};

// Analytic KL between two Gaussians fitted to sample moments; used for the
// closed-form branch's report so that branch stays O(n).
inline double gaussian_moment_kl(const MomentSummary& from, const MomentSummary& to) {
  return std::log(std::sqrt(to.variance / from.variance)) +
         (from.variance + (from.mean - to.mean) * (from.mean - to.mean)) /
             (2.0 * to.variance) -
         0.5;
}

inline double pick_bandwidth(const std::vector<double>& sample, const FusionConfig& cfg) {
  return cfg.bandwidth_rule == BandwidthRule::fixed ? cfg.fixed_bandwidth
                                                    : bandwidth_silverman(sample);
}

} // namespace detail

// Plug-in KL estimate over the reference sample points:
//   (1/N) sum_i log( fX(x_i) / max(fY(x_i; C, D), eps) )
// where fY is the KDE of the transformed source with bandwidth sigma_y.
inline double kl_divergence(const KdeModel& reference_kde,
                            const std::vector<double>& source,
                            const AffineParams& params, double sigma_y,
                            double floor) {
  const detail::KlObjective objective(reference_kde, source, sigma_y, floor);
  return objective.loss(params);
}

// Analytic gradient of the kl_divergence estimator with respect to (C, D):
//   -(1/N) sum_i grad fY(x_i) / fY(x_i)   over points above the floor.
// Floored points are locally constant in the estimator, so skipping them
// keeps this the exact derivative of the implemented loss.
inline std::pair<double, double> kl_gradient(const KdeModel& reference_kde,
                                             const std::vector<double>& source,
                                             const AffineParams& params,
                                             double sigma_y, double floor) {
  const detail::KlObjective objective(reference_kde, source, sigma_y, floor);
  const auto ev = objective.loss_and_gradient(params);
  return {ev.grad_scale, ev.grad_offset};
}

// Learn the affine transform mapping `source` onto `reference`. Gaussian
// features use the closed form directly; non-Gaussian features run gradient
// descent on the KDE KL estimate, warm-started from the closed form. The
// source bandwidth is fixed at the warm start so the objective does not move
// under the optimizer.
inline FusionResult fuse(const std::vector<double>& reference,
                         const std::vector<double>& source,
                         DistributionClass dist,
                         const FusionConfig& config = FusionConfig{}) {
  config.validate();
  const MomentSummary mx = moment_summary(reference);
  const MomentSummary my = moment_summary(source);
  const AffineParams warm = gaussian_closed_form(reference, source);

  FusionResult result;
  result.params = warm;

  if (dist == DistributionClass::Gaussian) {
    // Moment-based KL before (identity map) and after the closed form, which
    // sends the source moments exactly onto the reference moments.
    result.report.branch = FusionBranch::GaussianClosedForm;
    result.report.initial_kl = detail::gaussian_moment_kl(my, mx);
    result.report.final_kl = 0.0;
    result.report.kl_trace = {result.report.final_kl};
    result.report.iterations = 0;
    result.report.converged = true;
    return result;
  }

  result.report.branch = FusionBranch::KlDescent;
  const double sigma_x = detail::pick_bandwidth(reference, config);
  const KdeModel reference_kde(reference, sigma_x);
  const double sigma_y = detail::pick_bandwidth(apply_affine(source, warm), config);
  const detail::KlObjective objective(reference_kde, source, sigma_y,
                                      config.density_floor);

  AffineParams params = warm;
  detail::KlObjective::Eval ev = objective.loss_and_gradient(params);
  if (!std::isfinite(ev.loss)) fail(errc::non_finite_loss, "non-finite KL at warm start");
  result.report.initial_kl = ev.loss;
  result.report.kl_trace.push_back(ev.loss);

  bool converged = false;
  double step_scale = 1.0; // line-search memory, multiplies the learning rate
  for (std::size_t iter = 0; iter < config.max_iters; ++iter) {
    if (std::hypot(ev.grad_scale, ev.grad_offset) < config.grad_tol) {
      converged = true;
      break;
    }

    double step = config.learning_rate * (config.line_search ? step_scale : 1.0);
    auto candidate_at = [&](double s) {
      return AffineParams{params.scale - s * ev.grad_scale,
                          params.offset - s * ev.grad_offset};
    };
    AffineParams candidate = candidate_at(step);
    double kl_candidate = objective.loss(candidate);

    if (config.line_search) {
      if (std::isfinite(kl_candidate) && kl_candidate <= ev.loss) {
        // grow the step while it keeps improving
        for (int growth = 0; growth < 40; ++growth) {
          const double bigger = step * 2.0;
          const AffineParams probe = candidate_at(bigger);
          const double kl_probe = objective.loss(probe);
          if (!std::isfinite(kl_probe) || kl_probe >= kl_candidate) break;
          step = bigger;
          candidate = probe;
          kl_candidate = kl_probe;
        }
      } else {
        int halvings = 0;
        while ((!std::isfinite(kl_candidate) || kl_candidate > ev.loss) && halvings < 30) {
          step *= 0.5;
          candidate = candidate_at(step);
          kl_candidate = objective.loss(candidate);
          ++halvings;
        }
        if (!std::isfinite(kl_candidate) || kl_candidate > ev.loss) {
          // no admissible decrease along the gradient: treat as converged
          converged = true;
          break;
        }
      }
      step_scale = step / config.learning_rate;
    } else if (!std::isfinite(kl_candidate)) {
      fail(errc::non_finite_loss, "divergent step with line search disabled");
    }

    const double change = std::abs(ev.loss - kl_candidate);
    params = candidate;
    ev = objective.loss_and_gradient(params);
    ev.loss = kl_candidate; // bitwise consistent with the accepted trace entry
    result.report.kl_trace.push_back(kl_candidate);
    if (change < config.kl_tol * std::max(std::abs(kl_candidate), 1.0)) {
      converged = true;
      break;
    }
  }

  params.validate();
  result.params = params;
  result.report.iterations = result.report.kl_trace.size() - 1;
  result.report.final_kl = result.report.kl_trace.back();
  result.report.converged = converged;
  return result;
}

} // namespace divfuse
