#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "divfuse/error.hpp"

namespace divfuse {

// Sample mean and unbiased (1/(n-1)) variance of a scalar feature column.
struct MomentSummary {
  double mean = 0.0;
  double variance = 0.0;

  double stddev() const { return std::sqrt(variance); }
};

inline MomentSummary moment_summary(const std::vector<double>& samples) {
  if (samples.size() < 2)
    fail(errc::degenerate_sample, "need at least 2 samples for moments");
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= static_cast<double>(samples.size());
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  const double variance = ss / static_cast<double>(samples.size() - 1);
  if (!(variance > 0.0))
    fail(errc::degenerate_sample, "zero-variance sample");
  return {mean, variance};
}

// Population-normalized moments (1/n), used by z-scoring.
inline void population_moments(const std::vector<double>& v, double& mean, double& std) {
  mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  std = std::sqrt(ss / static_cast<double>(v.size()));
}

// Linear-interpolated quantile (same convention as numpy's default).
inline double quantile(std::vector<double> sorted, double q) {
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double h = q * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, n - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline double interquartile_range(const std::vector<double>& v) {
  return quantile(v, 0.75) - quantile(v, 0.25);
}

// Z-score against the sample's own population moments: output has mean 0 and
// population std 1.
inline std::vector<double> zscore_normalize(const std::vector<double>& values) {
  if (values.size() < 2)
    fail(errc::degenerate_sample, "need at least 2 samples to normalize");
  double mean = 0.0;
  double std = 0.0;
  population_moments(values, mean, std);
  if (!(std > 0.0)) fail(errc::degenerate_sample, "zero-variance sample");
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - mean) / std;
  return out;
}

inline double sample_skewness(const std::vector<double>& v) {
  double mean = 0.0;
  double std = 0.0;
  population_moments(v, mean, std);
  double m3 = 0.0;
  for (double x : v) m3 += std::pow(x - mean, 3);
  m3 /= static_cast<double>(v.size());
  return m3 / (std * std * std);
}

inline double sample_kurtosis(const std::vector<double>& v) {
  double mean = 0.0;
  double std = 0.0;
  population_moments(v, mean, std);
  double m4 = 0.0;
  for (double x : v) m4 += std::pow(x - mean, 4);
  m4 /= static_cast<double>(v.size());
  return m4 / (std * std * std * std);
}

} // namespace divfuse
