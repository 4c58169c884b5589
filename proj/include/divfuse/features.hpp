#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "divfuse/error.hpp"
#include "divfuse/fft.hpp"
#include "divfuse/stats.hpp"

namespace divfuse {

// The nine per-window features, in report order.
enum class FeatureKind {
  ApproximateEntropy,
  SampleEntropy,
  PermutationEntropy,
  SpectralEntropy,
  SvdEntropy,
  PetrosianFD,
  KatzFD,
  HiguchiFD,
  DetrendedFD,
};

inline constexpr std::array<FeatureKind, 9> all_feature_kinds = {
    FeatureKind::ApproximateEntropy, FeatureKind::SampleEntropy,
    FeatureKind::PermutationEntropy, FeatureKind::SpectralEntropy,
    FeatureKind::SvdEntropy,         FeatureKind::PetrosianFD,
    FeatureKind::KatzFD,             FeatureKind::HiguchiFD,
    FeatureKind::DetrendedFD,
};

inline const char* to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::ApproximateEntropy: return "ApproximateEntropy";
    case FeatureKind::SampleEntropy: return "SampleEntropy";
    case FeatureKind::PermutationEntropy: return "PermutationEntropy";
    case FeatureKind::SpectralEntropy: return "SpectralEntropy";
    case FeatureKind::SvdEntropy: return "SvdEntropy";
    case FeatureKind::PetrosianFD: return "PetrosianFD";
    case FeatureKind::KatzFD: return "KatzFD";
    case FeatureKind::HiguchiFD: return "HiguchiFD";
    case FeatureKind::DetrendedFD: return "DetrendedFD";
  }
  return "Unknown";
}

inline FeatureKind feature_kind_from_string(const std::string& name) {
  for (FeatureKind k : all_feature_kinds)
    if (name == to_string(k)) return k;
  fail(errc::parse_error, "unknown feature kind '" + name + "'");
}

struct FeatureParams {
  std::size_t embed_dim = 2;      // m for ApEn/SampEn
  double tolerance_ratio = 0.2;   // r as a fraction of the window std
  std::size_t perm_order = 3;
  std::size_t perm_delay = 1;
  std::size_t svd_order = 3;
  std::size_t svd_delay = 1;
  std::size_t higuchi_kmax = 10;
  std::size_t dfa_min_scale = 4;
  std::size_t dfa_max_scale = 0;  // 0 -> len/10
  double spectral_rate = 500.0;   // Hz of the window

  void validate() const {
    if (embed_dim < 1) fail(errc::invalid_spec, "embed_dim must be >= 1");
    if (!(tolerance_ratio > 0.0)) fail(errc::invalid_spec, "tolerance_ratio must be > 0");
    if (perm_order < 2) fail(errc::invalid_spec, "perm_order must be >= 2");
    if (perm_delay < 1 || svd_delay < 1) fail(errc::invalid_spec, "delays must be >= 1");
    if (svd_order < 2) fail(errc::invalid_spec, "svd_order must be >= 2");
    if (higuchi_kmax < 2) fail(errc::invalid_spec, "higuchi_kmax must be >= 2");
    if (dfa_min_scale < 4) fail(errc::invalid_spec, "dfa scales start at 4");
    if (!(spectral_rate > 0.0)) fail(errc::invalid_rate, "spectral_rate must be > 0");
  }
};

namespace detail {

inline double window_std(const std::vector<double>& x) {
  double mean = 0.0;
  double std = 0.0;
  population_moments(x, mean, std);
  return std;
}

// phi(k) of the Takens-style template self-match count, Chebyshev distance,
// self-matches included.
inline double apen_phi(const std::vector<double>& x, std::size_t k, double r) {
  const std::size_t n_templates = x.size() - k + 1;
  double acc = 0.0;
  for (std::size_t i = 0; i < n_templates; ++i) {
    std::size_t count = 0;
    for (std::size_t j = 0; j < n_templates; ++j) {
      double dist = 0.0;
      for (std::size_t l = 0; l < k; ++l)
        dist = std::max(dist, std::abs(x[i + l] - x[j + l]));
      if (dist <= r) ++count;
    }
    acc += std::log(static_cast<double>(count) / static_cast<double>(n_templates));
  }
  return acc / static_cast<double>(n_templates);
}

inline double approximate_entropy(const std::vector<double>& x, std::size_t m, double r_ratio) {
  if (x.size() < m + 3) fail(errc::too_short, "window too short for ApEn");
  const double sd = window_std(x);
  if (!(sd > 0.0)) fail(errc::degenerate_signal, "zero-variance window");
  const double r = r_ratio * sd;
  return apen_phi(x, m, r) - apen_phi(x, m + 1, r);
}

inline double sample_entropy(const std::vector<double>& x, std::size_t m, double r_ratio) {
  if (x.size() < m + 3) fail(errc::too_short, "window too short for SampEn");
  const double sd = window_std(x);
  if (!(sd > 0.0)) fail(errc::degenerate_signal, "zero-variance window");
  const double r = r_ratio * sd;
  const std::size_t n_templates = x.size() - m;
  std::size_t match_m = 0;
  std::size_t match_m1 = 0;
  for (std::size_t i = 0; i < n_templates; ++i) {
    for (std::size_t j = i + 1; j < n_templates; ++j) {
      double dist = 0.0;
      for (std::size_t l = 0; l < m; ++l)
        dist = std::max(dist, std::abs(x[i + l] - x[j + l]));
      if (dist <= r) {
        ++match_m;
        if (std::abs(x[i + m] - x[j + m]) <= r) ++match_m1;
      }
    }
  }
  if (match_m == 0 || match_m1 == 0)
    fail(errc::degenerate_signal, "no template matches for SampEn");
  return -std::log(static_cast<double>(match_m1) / static_cast<double>(match_m));
}

// Shannon entropy of ordinal-pattern frequencies, normalized by log(order!).
// Ties rank by position, which keeps the statistic deterministic.
inline double permutation_entropy(const std::vector<double>& x, std::size_t order,
                                  std::size_t delay) {
  const std::size_t span = (order - 1) * delay;
  if (x.size() < span + 2) fail(errc::too_short, "window too short for PermEn");
  const std::size_t n_patterns = x.size() - span;
  std::map<std::vector<std::size_t>, std::size_t> counts;
  std::vector<std::size_t> rank(order);
  for (std::size_t i = 0; i < n_patterns; ++i) {
    std::iota(rank.begin(), rank.end(), std::size_t{0});
    std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
      return x[i + a * delay] < x[i + b * delay];
    });
    ++counts[rank];
  }
  double h = 0.0;
  for (const auto& [pattern, count] : counts) {
    const double p = static_cast<double>(count) / static_cast<double>(n_patterns);
    h -= p * std::log(p);
  }
  double max_h = 0.0;
  for (std::size_t k = 2; k <= order; ++k) max_h += std::log(static_cast<double>(k));
  return std::clamp(h / max_h, 0.0, 1.0);
}

// Shannon entropy of the normalized one-sided periodogram of the mean-removed
// window, normalized by log(#bins).
inline double spectral_entropy(const std::vector<double>& x) {
  if (x.size() < 8) fail(errc::too_short, "window too short for spectral entropy");
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  std::vector<double> centered(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) centered[i] = x[i] - mean;

  const auto spectrum = fft_real(centered);
  const std::size_t n = x.size();
  const std::size_t n_bins = n / 2 + 1;
  std::vector<double> psd(n_bins);
  double total = 0.0;
  for (std::size_t k = 0; k < n_bins; ++k) {
    double p = std::norm(spectrum[k]);
    if (k != 0 && !(n % 2 == 0 && k == n / 2)) p *= 2.0; // one-sided doubling
    psd[k] = p;
    total += p;
  }
  if (!(total > 0.0)) fail(errc::degenerate_signal, "zero-power window");
  double h = 0.0;
  for (double p : psd) {
    const double q = p / total;
    if (q > 0.0) h -= q * std::log(q);
  }
  return std::clamp(h / std::log(static_cast<double>(n_bins)), 0.0, 1.0);
}

// Jacobi eigenvalue sweep for a small symmetric matrix (row-major k x k).
inline std::vector<double> symmetric_eigenvalues(std::vector<double> a, std::size_t k) {
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < k; ++p)
      for (std::size_t q = p + 1; q < k; ++q) off += a[p * k + q] * a[p * k + q];
    if (off < 1e-24) break;
    for (std::size_t p = 0; p < k; ++p) {
      for (std::size_t q = p + 1; q < k; ++q) {
        const double apq = a[p * k + q];
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (a[q * k + q] - a[p * k + p]) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t i = 0; i < k; ++i) {
          const double aip = a[i * k + p];
          const double aiq = a[i * k + q];
          a[i * k + p] = c * aip - s * aiq;
          a[i * k + q] = s * aip + c * aiq;
        }
        for (std::size_t i = 0; i < k; ++i) {
          const double api = a[p * k + i];
          const double aqi = a[q * k + i];
          a[p * k + i] = c * api - s * aqi;
          a[q * k + i] = s * api + c * aqi;
        }
      }
    }
  }
  std::vector<double> eig(k);
  for (std::size_t i = 0; i < k; ++i) eig[i] = a[i * k + i];
  return eig;
}

// Entropy of normalized singular values of the delay-embedding matrix of the
// mean-removed window, normalized by log(order).
inline double svd_entropy(const std::vector<double>& x, std::size_t order, std::size_t delay) {
  const std::size_t span = (order - 1) * delay;
  if (x.size() < span + order) fail(errc::too_short, "window too short for SVD entropy");
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());

  const std::size_t rows = x.size() - span;
  // Gram matrix of the embedding, order x order.
  std::vector<double> gram(order * order, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t a = 0; a < order; ++a) {
      const double va = x[i + a * delay] - mean;
      for (std::size_t b = a; b < order; ++b) {
        gram[a * order + b] += va * (x[i + b * delay] - mean);
      }
    }
  }
  for (std::size_t a = 0; a < order; ++a)
    for (std::size_t b = 0; b < a; ++b) gram[a * order + b] = gram[b * order + a];

  auto eig = symmetric_eigenvalues(gram, order);
  std::vector<double> sv(order);
  double total = 0.0;
  for (std::size_t i = 0; i < order; ++i) {
    sv[i] = std::sqrt(std::max(eig[i], 0.0));
    total += sv[i];
  }
  if (!(total > 0.0)) fail(errc::degenerate_signal, "zero-variance window");
  double h = 0.0;
  for (double s : sv) {
    const double q = s / total;
    if (q > 0.0) h -= q * std::log(q);
  }
  return std::clamp(h / std::log(static_cast<double>(order)), 0.0, 1.0);
}

inline double petrosian_fd(const std::vector<double>& x) {
  if (x.size() < 3) fail(errc::too_short, "window too short for Petrosian FD");
  std::size_t sign_changes = 0;
  auto sgn = [](double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); };
  int prev = sgn(x[1] - x[0]);
  for (std::size_t i = 2; i < x.size(); ++i) {
    const int cur = sgn(x[i] - x[i - 1]);
    if (cur != prev) ++sign_changes;
    prev = cur;
  }
  const double n = static_cast<double>(x.size());
  const double log_n = std::log10(n);
  return log_n / (log_n + std::log10(n / (n + 0.4 * static_cast<double>(sign_changes))));
}

inline double katz_fd(const std::vector<double>& x) {
  if (x.size() < 3) fail(errc::too_short, "window too short for Katz FD");
  double path = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) path += std::abs(x[i] - x[i - 1]);
  if (!(path > 0.0)) fail(errc::degenerate_signal, "zero path length");
  double extent = 0.0;
  for (double v : x) extent = std::max(extent, std::abs(v - x[0]));
  const double log_n = std::log10(static_cast<double>(x.size() - 1));
  return log_n / (log_n + std::log10(extent / path));
}

inline double least_squares_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline double higuchi_fd(const std::vector<double>& x, std::size_t kmax) {
  const std::size_t n = x.size();
  if (n < 2 * kmax) fail(errc::too_short, "window too short for Higuchi FD");
  std::vector<double> log_k;
  std::vector<double> log_l;
  for (std::size_t k = 1; k <= kmax; ++k) {
    double lk = 0.0;
    for (std::size_t m = 0; m < k; ++m) {
      const std::size_t n_seg = (n - 1 - m) / k;
      if (n_seg == 0) continue;
      double length = 0.0;
      for (std::size_t i = 1; i <= n_seg; ++i)
        length += std::abs(x[m + i * k] - x[m + (i - 1) * k]);
      length *= static_cast<double>(n - 1) /
                (static_cast<double>(n_seg) * static_cast<double>(k) * static_cast<double>(k));
      lk += length;
    }
    lk /= static_cast<double>(k);
    if (!(lk > 0.0)) fail(errc::degenerate_signal, "zero curve length");
    log_k.push_back(std::log(static_cast<double>(k)));
    log_l.push_back(std::log(lk));
  }
  return -least_squares_slope(log_k, log_l);
}

// Log-spaced integer window sizes from min_scale to max_scale, ratio 1.2.
inline std::vector<std::size_t> dfa_scales(std::size_t min_scale, std::size_t max_scale) {
  std::vector<std::size_t> scales;
  double s = static_cast<double>(min_scale);
  while (static_cast<std::size_t>(s) <= max_scale) {
    const std::size_t si = static_cast<std::size_t>(s);
    if (scales.empty() || scales.back() != si) scales.push_back(si);
    s *= 1.2;
  }
  return scales;
}

inline double detrended_fluctuation(const std::vector<double>& x, std::size_t min_scale,
                                    std::size_t max_scale_cfg) {
  const std::size_t n = x.size();
  const std::size_t max_scale = max_scale_cfg > 0 ? max_scale_cfg : n / 10;
  if (n < 50 || max_scale <= min_scale)
    fail(errc::too_short, "window too short for DFA");
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  std::vector<double> profile(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += x[i] - mean;
    profile[i] = acc;
  }

  const auto scales = dfa_scales(min_scale, max_scale);
  if (scales.size() < 2) fail(errc::too_short, "too few DFA scales");
  std::vector<double> log_s;
  std::vector<double> log_f;
  for (std::size_t s : scales) {
    const std::size_t n_win = n / s;
    double ss_residual = 0.0;
    std::size_t n_points = 0;
    for (std::size_t w = 0; w < n_win; ++w) {
      // linear detrend of profile[w*s .. w*s+s)
      const double* seg = profile.data() + w * s;
      double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
      for (std::size_t i = 0; i < s; ++i) {
        const double xi = static_cast<double>(i);
        sx += xi;
        sy += seg[i];
        sxx += xi * xi;
        sxy += xi * seg[i];
      }
      const double denom = static_cast<double>(s) * sxx - sx * sx;
      const double slope = (static_cast<double>(s) * sxy - sx * sy) / denom;
      const double intercept = (sy - slope * sx) / static_cast<double>(s);
      for (std::size_t i = 0; i < s; ++i) {
        const double r = seg[i] - (slope * static_cast<double>(i) + intercept);
        ss_residual += r * r;
      }
      n_points += s;
    }
    const double f = std::sqrt(ss_residual / static_cast<double>(n_points));
    if (!(f > 0.0)) fail(errc::degenerate_signal, "zero fluctuation");
    log_s.push_back(std::log(static_cast<double>(s)));
    log_f.push_back(std::log(f));
  }
  return least_squares_slope(log_s, log_f);
}

} // namespace detail

// Compute one feature value on a window. Throws DegenerateSignal / TooShort
// for windows the feature is undefined on.
inline double extract_feature(const std::vector<double>& window, FeatureKind kind,
                              const FeatureParams& params = FeatureParams{}) {
  params.validate();
  for (double v : window)
    if (!std::isfinite(v)) fail(errc::non_finite_value, "non-finite window value");
  const double value = [&] {
    switch (kind) {
      case FeatureKind::ApproximateEntropy:
        return detail::approximate_entropy(window, params.embed_dim, params.tolerance_ratio);
      case FeatureKind::SampleEntropy:
        return detail::sample_entropy(window, params.embed_dim, params.tolerance_ratio);
      case FeatureKind::PermutationEntropy:
        return detail::permutation_entropy(window, params.perm_order, params.perm_delay);
      case FeatureKind::SpectralEntropy:
        return detail::spectral_entropy(window);
      case FeatureKind::SvdEntropy:
        return detail::svd_entropy(window, params.svd_order, params.svd_delay);
      case FeatureKind::PetrosianFD:
        return detail::petrosian_fd(window);
      case FeatureKind::KatzFD:
        return detail::katz_fd(window);
      case FeatureKind::HiguchiFD:
        return detail::higuchi_fd(window, params.higuchi_kmax);
      case FeatureKind::DetrendedFD:
        return detail::detrended_fluctuation(window, params.dfa_min_scale,
                                             params.dfa_max_scale);
    }
    fail(errc::invalid_spec, "unknown feature kind");
  }();
  if (!std::isfinite(value))
    fail(errc::degenerate_signal, std::string(to_string(kind)) + " is undefined here");
  return value;
}

} // namespace divfuse
