#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <tuple>
#include <vector>

#include "divfuse/error.hpp"

namespace divfuse {

struct BinaryCounts {
  std::size_t tp = 0;
  std::size_t tn = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

struct ThresholdMetrics {
  double accuracy = 0.0;
  double fpr = 0.0;
  double fnr = 0.0;
};

namespace detail {

inline void check_two_classes(const std::vector<int>& labels) {
  bool has_pos = false;
  bool has_neg = false;
  for (int y : labels) (y != 0 ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg) fail(errc::single_class_input, "need both classes");
}

} // namespace detail

inline BinaryCounts confusion_counts(const std::vector<double>& scores,
                                     const std::vector<int>& labels, double threshold) {
  BinaryCounts c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] > threshold;
    if (labels[i] != 0)
      predicted ? ++c.tp : ++c.fn;
    else
      predicted ? ++c.fp : ++c.tn;
  }
  return c;
}

// accuracy = (TP+TN)/total, fpr = FP/(FP+TN), fnr = FN/(FN+TP); a sample is
// predicted positive when its score exceeds the threshold.
inline ThresholdMetrics compute_metrics(const std::vector<double>& scores,
                                        const std::vector<int>& labels,
                                        double threshold = 0.5) {
  if (scores.size() != labels.size() || scores.empty())
    fail(errc::width_mismatch, "scores vs labels");
  detail::check_two_classes(labels);
  const BinaryCounts c = confusion_counts(scores, labels, threshold);
  ThresholdMetrics m;
  const double total = static_cast<double>(scores.size());
  m.accuracy = static_cast<double>(c.tp + c.tn) / total;
  m.fpr = static_cast<double>(c.fp) / static_cast<double>(c.fp + c.tn);
  m.fnr = static_cast<double>(c.fn) / static_cast<double>(c.fn + c.tp);
  return m;
}

// Threshold sweep over the unique scores, (0,0) to (1,1); auc is the
// trapezoid area, which matches the normalized pairwise-comparison count.
struct RocCurve {
  std::vector<std::pair<double, double>> points; // (fpr, tpr)
  double auc = 0.0;
};

inline RocCurve roc_curve(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size() || scores.empty())
    fail(errc::width_mismatch, "scores vs labels");
  detail::check_two_classes(labels);

  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  std::size_t n_pos = 0;
  for (int y : labels) n_pos += static_cast<std::size_t>(y != 0);
  const std::size_t n_neg = labels.size() - n_pos;

  RocCurve curve;
  curve.points.emplace_back(0.0, 0.0);
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t i = 0;
  double auc2 = 0.0; // twice the area, accumulated trapezoid by trapezoid
  while (i < order.size()) {
    const double s = scores[order[i]];
    std::size_t d_tp = 0;
    std::size_t d_fp = 0;
    while (i < order.size() && scores[order[i]] == s) {
      if (labels[order[i]] != 0)
        ++d_tp;
      else
        ++d_fp;
      ++i;
    }
    const double fpr_prev = static_cast<double>(fp) / static_cast<double>(n_neg);
    const double tpr_prev = static_cast<double>(tp) / static_cast<double>(n_pos);
    tp += d_tp;
    fp += d_fp;
    const double fpr = static_cast<double>(fp) / static_cast<double>(n_neg);
    const double tpr = static_cast<double>(tp) / static_cast<double>(n_pos);
    auc2 += (fpr - fpr_prev) * (tpr + tpr_prev);
    curve.points.emplace_back(fpr, tpr);
  }
  curve.auc = 0.5 * auc2;
  return curve;
}

} // namespace divfuse
