#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "divfuse/error.hpp"
#include "divfuse/stats.hpp"

namespace divfuse {

// Gaussian kernel density estimate: equal-weight mixture of N kernels of
// width `bandwidth` centered on the sample points.
struct KdeModel {
  std::vector<double> points;
  double bandwidth = 0.0;

  KdeModel() = default;
  KdeModel(std::vector<double> pts, double bw)
      : points(std::move(pts)), bandwidth(bw) {
    if (points.empty()) fail(errc::degenerate_sample, "KDE over empty sample");
    if (!(bandwidth > 0.0)) fail(errc::degenerate_sample, "bandwidth must be positive");
    for (double p : points)
      if (!std::isfinite(p)) fail(errc::non_finite_value, "non-finite KDE point");
  }
};

// Rule-of-thumb bandwidth: 0.9 * min(std, IQR/1.34) * n^(-1/5). A zero IQR
// falls back to the std (and vice versa); both zero is a degenerate sample.
inline double bandwidth_silverman(const std::vector<double>& samples) {
  if (samples.size() < 2)
    fail(errc::degenerate_sample, "need at least 2 samples for a bandwidth");
  double mean = 0.0;
  double std = 0.0;
  population_moments(samples, mean, std);
  const double iqr_scaled = interquartile_range(samples) / 1.34;
  double spread = 0.0;
  if (std > 0.0 && iqr_scaled > 0.0)
    spread = std::min(std, iqr_scaled);
  else
    spread = std::max(std, iqr_scaled);
  if (!(spread > 0.0)) fail(errc::degenerate_sample, "zero-spread sample");
  return 0.9 * spread * std::pow(static_cast<double>(samples.size()), -0.2);
}

inline double kde_eval(const KdeModel& model, double x) {
  const double sigma = model.bandwidth;
  const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
  const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * sigma *
                             static_cast<double>(model.points.size()));
  double sum = 0.0;
  for (double p : model.points) {
    const double u = x - p;
    sum += std::exp(-u * u * inv2s2);
  }
  return norm * sum;
}

// Uniformly sampled density curve on [lo, hi], used for plots and plot tests.
inline std::vector<std::pair<double, double>>
sample_density_curve(const KdeModel& model, double lo, double hi, std::size_t n_points = 512) {
  std::vector<std::pair<double, double>> curve;
  curve.reserve(n_points);
  const double step = n_points > 1 ? (hi - lo) / static_cast<double>(n_points - 1) : 0.0;
  for (std::size_t i = 0; i < n_points; ++i) {
    const double x = lo + step * static_cast<double>(i);
    curve.emplace_back(x, kde_eval(model, x));
  }
  return curve;
}

} // namespace divfuse
