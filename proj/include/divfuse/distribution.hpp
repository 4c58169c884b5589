#pragma once

#include <vector>

#include "divfuse/error.hpp"
#include "divfuse/features.hpp"
#include "divfuse/fusion.hpp"
#include "divfuse/stats.hpp"

namespace divfuse {

enum class DistributionPolicy { paper_default, auto_test };

// Jarque-Bera statistic: n/6 * (S^2 + (K-3)^2/4), chi-squared(2) under
// normality.
inline double jarque_bera(const std::vector<double>& values) {
  const double n = static_cast<double>(values.size());
  const double s = sample_skewness(values);
  const double k = sample_kurtosis(values);
  return n / 6.0 * (s * s + (k - 3.0) * (k - 3.0) / 4.0);
}

inline constexpr double k_jarque_bera_crit_95 = 5.991464547107979; // chi2(2), alpha = 0.05

// Fixed grouping used by the reports: six features treated as Gaussian,
// three as non-Gaussian.
inline DistributionClass default_distribution_class(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::PermutationEntropy:
    case FeatureKind::PetrosianFD:
    case FeatureKind::SvdEntropy:
      return DistributionClass::NonGaussian;
    default:
      return DistributionClass::Gaussian;
  }
}

// paper_default ignores the data and returns the fixed grouping; auto_test
// runs the skewness/kurtosis normality test at alpha = 0.05.
inline DistributionClass classify_distribution(FeatureKind kind,
                                               const std::vector<double>& values,
                                               DistributionPolicy policy) {
  if (policy == DistributionPolicy::paper_default)
    return default_distribution_class(kind);
  if (values.size() < 20)
    fail(errc::too_few_samples, "auto_test needs at least 20 values");
  return jarque_bera(values) <= k_jarque_bera_crit_95 ? DistributionClass::Gaussian
                                                      : DistributionClass::NonGaussian;
}

} // namespace divfuse
