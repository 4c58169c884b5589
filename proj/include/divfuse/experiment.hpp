#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "divfuse/error.hpp"
#include "divfuse/feature_matrix.hpp"
#include "divfuse/gbdt.hpp"
#include "divfuse/metrics.hpp"
#include "divfuse/parallel.hpp"
#include "divfuse/rng.hpp"

namespace divfuse {

struct ExperimentConfig {
  std::size_t n_runs = 100;
  std::size_t n_per_class = 1000;
  double train_fraction = 0.7;
  std::uint64_t base_seed = 42;

  void validate() const {
    if (n_runs < 1) fail(errc::invalid_spec, "n_runs must be >= 1");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
      fail(errc::invalid_spec, "train_fraction must be in (0, 1)");
    if (n_per_class < 10) fail(errc::invalid_spec, "n_per_class must be >= 10");
  }
};

struct RunMetrics {
  double accuracy = 0.0;
  double fpr = 0.0;
  double fnr = 0.0;
};

// Means over the repeated-experiment protocol plus the per-run values.
struct Metrics {
  double accuracy = 0.0;
  double fpr = 0.0;
  double fnr = 0.0;
  double auc = 0.0;
  std::vector<RunMetrics> per_run;
};

// Evaluation-split scores pooled across runs, for ROC rendering.
struct RocPool {
  std::vector<double> scores;
  std::vector<int> labels;
};

// Column-major view of the feature subset used by one experiment arm.
struct ArmData {
  std::vector<double> healthy; // row-major, n_healthy x width
  std::vector<double> disease; // row-major, n_disease x width
  std::size_t width = 0;
};

inline ArmData make_arm(const FeatureMatrix& healthy, const FeatureMatrix& disease,
                        const std::vector<FeatureKind>& subset) {
  if (subset.empty()) fail(errc::empty_features, "empty feature subset");
  ArmData arm;
  arm.width = subset.size();
  arm.healthy.reserve(healthy.rows() * subset.size());
  for (std::size_t r = 0; r < healthy.rows(); ++r)
    for (FeatureKind k : subset) arm.healthy.push_back(healthy.at(r, k));
  arm.disease.reserve(disease.rows() * subset.size());
  for (std::size_t r = 0; r < disease.rows(); ++r)
    for (FeatureKind k : subset) arm.disease.push_back(disease.at(r, k));
  return arm;
}

namespace detail {

struct RunOutcome {
  RunMetrics metrics;
  double auc = 0.0;
  std::vector<double> eval_scores;
  std::vector<int> eval_labels;
};

// One experiment: seeded balanced draw, stratified split, train, score.
inline RunOutcome single_run(const ArmData& arm, std::size_t n_healthy_rows,
                             std::size_t n_disease_rows, const ExperimentConfig& exp,
                             const GbdtConfig& gbdt, std::uint64_t seed) {
  Rng rng(seed);
  const auto healthy_idx = rng.sample_without_replacement(n_healthy_rows, exp.n_per_class);
  const auto disease_idx = rng.sample_without_replacement(n_disease_rows, exp.n_per_class);

  const auto n_train =
      static_cast<std::size_t>(std::llround(exp.train_fraction *
                                            static_cast<double>(exp.n_per_class)));
  if (n_train == 0 || n_train >= exp.n_per_class)
    fail(errc::invalid_spec, "train_fraction leaves an empty split");

  const std::size_t w = arm.width;
  std::vector<double> train_x;
  std::vector<int> train_y;
  std::vector<double> eval_x;
  std::vector<int> eval_y;
  train_x.reserve(2 * n_train * w);
  eval_x.reserve(2 * (exp.n_per_class - n_train) * w);

  // healthy = positive class (label 1), disease = negative (label 0)
  for (std::size_t i = 0; i < exp.n_per_class; ++i) {
    const double* row = &arm.healthy[healthy_idx[i] * w];
    auto& x = i < n_train ? train_x : eval_x;
    auto& y = i < n_train ? train_y : eval_y;
    x.insert(x.end(), row, row + w);
    y.push_back(1);
  }
  for (std::size_t i = 0; i < exp.n_per_class; ++i) {
    const double* row = &arm.disease[disease_idx[i] * w];
    auto& x = i < n_train ? train_x : eval_x;
    auto& y = i < n_train ? train_y : eval_y;
    x.insert(x.end(), row, row + w);
    y.push_back(0);
  }

  const GbdtModel model = train_gbdt(train_x, w, train_y, gbdt);
  RunOutcome out;
  out.eval_scores = predict_proba(model, eval_x, w);
  out.eval_labels = std::move(eval_y);
  const ThresholdMetrics m = compute_metrics(out.eval_scores, out.eval_labels);
  out.metrics = {m.accuracy, m.fpr, m.fnr};
  out.auc = roc_curve(out.eval_scores, out.eval_labels).auc;
  return out;
}

} // namespace detail

// The repeated-experiment protocol: n_runs independent runs, run r seeded
// with base_seed + r, each drawing n_per_class rows per class without
// replacement and splitting train/evaluation by train_fraction. Healthy is
// the positive class. Runs are independent and may execute in parallel; the
// aggregation is by run index, so results are reproducible bit for bit.
inline Metrics run_experiments(const FeatureMatrix& healthy, const FeatureMatrix& disease,
                               const std::vector<FeatureKind>& subset,
                               const ExperimentConfig& exp, const GbdtConfig& gbdt,
                               RocPool* pool = nullptr) {
  exp.validate();
  gbdt.validate();
  if (healthy.rows() < exp.n_per_class || disease.rows() < exp.n_per_class)
    fail(errc::insufficient_rows,
         "need at least n_per_class rows per class (healthy " +
             std::to_string(healthy.rows()) + ", disease " + std::to_string(disease.rows()) +
             ", n_per_class " + std::to_string(exp.n_per_class) + ")");

  const ArmData arm = make_arm(healthy, disease, subset);
  std::vector<detail::RunOutcome> outcomes(exp.n_runs);
  parallel_for(exp.n_runs, [&](std::size_t r) {
    outcomes[r] = detail::single_run(arm, healthy.rows(), disease.rows(), exp, gbdt,
                                     exp.base_seed + r);
  });

  Metrics metrics;
  metrics.per_run.reserve(exp.n_runs);
  for (const auto& o : outcomes) {
    metrics.per_run.push_back(o.metrics);
    metrics.accuracy += o.metrics.accuracy;
    metrics.fpr += o.metrics.fpr;
    metrics.fnr += o.metrics.fnr;
    metrics.auc += o.auc;
    if (pool) {
      pool->scores.insert(pool->scores.end(), o.eval_scores.begin(), o.eval_scores.end());
      pool->labels.insert(pool->labels.end(), o.eval_labels.begin(), o.eval_labels.end());
    }
  }
  const double n = static_cast<double>(exp.n_runs);
  metrics.accuracy /= n;
  metrics.fpr /= n;
  metrics.fnr /= n;
  metrics.auc /= n;
  return metrics;
}

} // namespace divfuse
