#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "divfuse/distribution.hpp"
#include "divfuse/experiment.hpp"
#include "divfuse/feature_matrix.hpp"
#include "divfuse/fusion.hpp"
#include "divfuse/manifest.hpp"
#include "divfuse/parallel.hpp"
#include "divfuse/preprocess.hpp"
#include "divfuse/svg.hpp"
#include "divfuse/synth.hpp"

namespace divfuse {

struct PipelineConfig {
  std::string reference_manifest;
  std::string source_manifest;
  std::string disease_manifest;
  std::string output_dir = "out";
  DistributionPolicy distribution_policy = DistributionPolicy::paper_default;
  PreprocConfig preproc;
  FeatureParams feature_params;
  FusionConfig fusion;
  GbdtConfig gbdt;
  ExperimentConfig experiment;

  void validate() const {
    if (reference_manifest.empty() || source_manifest.empty() || disease_manifest.empty())
      fail(errc::invalid_manifest, "all three manifests are required");
    if (reference_manifest == source_manifest || reference_manifest == disease_manifest ||
        source_manifest == disease_manifest)
      fail(errc::invalid_manifest, "manifests must be distinct");
    preproc.validate();
    feature_params.validate();
    fusion.validate();
    gbdt.validate();
    experiment.validate();
  }
};

namespace detail {

inline void merge_json_section(const nlohmann::json& doc, const char* key,
                               const auto& apply) {
  if (doc.contains(key)) apply(doc.at(key));
}

} // namespace detail

// Pipeline config file: JSON in the same dialect as the manifests, every
// section optional with library defaults.
inline PipelineConfig load_pipeline_config(const std::string& path) {
  if (!std::filesystem::exists(path)) fail(errc::missing_file, path);
  std::ifstream in(path);
  if (!in) fail(errc::io_error, "cannot open " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    fail(errc::parse_error, path + ": " + e.what());
  }
  PipelineConfig cfg;
  try {
    cfg.reference_manifest = doc.value("reference_manifest", "");
    cfg.source_manifest = doc.value("source_manifest", "");
    cfg.disease_manifest = doc.value("disease_manifest", "");
    cfg.output_dir = doc.value("output_dir", "out");
    const std::string policy = doc.value("distribution_policy", "paper_default");
    if (policy == "paper_default")
      cfg.distribution_policy = DistributionPolicy::paper_default;
    else if (policy == "auto_test")
      cfg.distribution_policy = DistributionPolicy::auto_test;
    else
      fail(errc::invalid_manifest, "distribution_policy '" + policy + "'");

    detail::merge_json_section(doc, "preproc", [&](const nlohmann::json& s) {
      cfg.preproc.target_rate = s.value("target_rate_hz", cfg.preproc.target_rate);
      cfg.preproc.denoise_theta = s.value("denoise_theta", cfg.preproc.denoise_theta);
      cfg.preproc.window_len = s.value("window_len", cfg.preproc.window_len);
      cfg.preproc.peak_refractory = s.value("peak_refractory_s", cfg.preproc.peak_refractory);
    });
    detail::merge_json_section(doc, "features", [&](const nlohmann::json& s) {
      cfg.feature_params.embed_dim = s.value("embed_dim", cfg.feature_params.embed_dim);
      cfg.feature_params.tolerance_ratio =
          s.value("tolerance_ratio", cfg.feature_params.tolerance_ratio);
      cfg.feature_params.perm_order = s.value("perm_order", cfg.feature_params.perm_order);
      cfg.feature_params.perm_delay = s.value("perm_delay", cfg.feature_params.perm_delay);
      cfg.feature_params.svd_order = s.value("svd_order", cfg.feature_params.svd_order);
      cfg.feature_params.svd_delay = s.value("svd_delay", cfg.feature_params.svd_delay);
      cfg.feature_params.higuchi_kmax =
          s.value("higuchi_kmax", cfg.feature_params.higuchi_kmax);
      cfg.feature_params.dfa_min_scale =
          s.value("dfa_min_scale", cfg.feature_params.dfa_min_scale);
      cfg.feature_params.dfa_max_scale =
          s.value("dfa_max_scale", cfg.feature_params.dfa_max_scale);
      cfg.feature_params.spectral_rate =
          s.value("spectral_rate_hz", cfg.feature_params.spectral_rate);
    });
    detail::merge_json_section(doc, "fusion", [&](const nlohmann::json& s) {
      cfg.fusion.learning_rate = s.value("learning_rate", cfg.fusion.learning_rate);
      cfg.fusion.max_iters = s.value("max_iters", cfg.fusion.max_iters);
      cfg.fusion.grad_tol = s.value("grad_tol", cfg.fusion.grad_tol);
      cfg.fusion.kl_tol = s.value("kl_tol", cfg.fusion.kl_tol);
      cfg.fusion.density_floor = s.value("density_floor", cfg.fusion.density_floor);
      cfg.fusion.line_search = s.value("line_search", cfg.fusion.line_search);
      const std::string rule = s.value("bandwidth_rule", "silverman");
      if (rule == "silverman") {
        cfg.fusion.bandwidth_rule = BandwidthRule::silverman;
      } else if (rule == "fixed") {
        cfg.fusion.bandwidth_rule = BandwidthRule::fixed;
        cfg.fusion.fixed_bandwidth = s.value("fixed_bandwidth", cfg.fusion.fixed_bandwidth);
      } else {
        fail(errc::invalid_manifest, "bandwidth_rule '" + rule + "'");
      }
    });
    detail::merge_json_section(doc, "gbdt", [&](const nlohmann::json& s) {
      cfg.gbdt.n_trees = s.value("n_trees", cfg.gbdt.n_trees);
      cfg.gbdt.max_depth = s.value("max_depth", cfg.gbdt.max_depth);
      cfg.gbdt.learning_rate = s.value("learning_rate", cfg.gbdt.learning_rate);
      cfg.gbdt.min_leaf = s.value("min_leaf", cfg.gbdt.min_leaf);
      cfg.gbdt.n_bins = s.value("n_bins", cfg.gbdt.n_bins);
    });
    detail::merge_json_section(doc, "experiment", [&](const nlohmann::json& s) {
      cfg.experiment.n_runs = s.value("n_runs", cfg.experiment.n_runs);
      cfg.experiment.n_per_class = s.value("n_per_class", cfg.experiment.n_per_class);
      cfg.experiment.train_fraction =
          s.value("train_fraction", cfg.experiment.train_fraction);
      cfg.experiment.base_seed = s.value("base_seed", cfg.experiment.base_seed);
    });
  } catch (const nlohmann::json::exception& e) {
    fail(errc::invalid_manifest, path + ": " + e.what());
  }
  return cfg;
}

struct FeatureFusionOutcome {
  FeatureKind kind = FeatureKind::ApproximateEntropy;
  DistributionClass dist = DistributionClass::Gaussian;
  AffineParams params;
  FusionReport report;
};

// The two treatment arms derived from one (reference, source, disease)
// triple. The normalization arm standardizes every cohort per dataset; the
// fusion arm maps the source cohort onto the reference and leaves the
// reference and disease cohorts in their original units.
struct ArmMatrices {
  FeatureMatrix norm_healthy;
  FeatureMatrix norm_disease;
  FeatureMatrix fused_healthy;
  FeatureMatrix raw_disease;
  std::vector<FeatureFusionOutcome> fusions;
};

namespace detail {

inline FeatureMatrix concat_rows(const FeatureMatrix& a, const FeatureMatrix& b) {
  FeatureMatrix out = a;
  out.values.insert(out.values.end(), b.values.begin(), b.values.end());
  out.record_ids.insert(out.record_ids.end(), b.record_ids.begin(), b.record_ids.end());
  out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
  out.sources.insert(out.sources.end(), b.sources.begin(), b.sources.end());
  return out;
}

inline void set_column(FeatureMatrix& m, FeatureKind kind, const std::vector<double>& col) {
  const auto c = static_cast<std::size_t>(kind);
  for (std::size_t r = 0; r < m.rows(); ++r) m.values[r * FeatureMatrix::cols() + c] = col[r];
}

} // namespace detail

// Learn the per-feature transforms and assemble both arms. Only the listed
// kinds are processed; other columns pass through untouched. Distribution
// classification (under auto_test) runs on the reference cohort's column.
inline ArmMatrices build_arms(const FeatureMatrix& reference, const FeatureMatrix& source,
                              const FeatureMatrix& disease,
                              const std::vector<FeatureKind>& kinds,
                              DistributionPolicy policy, const FusionConfig& fusion_cfg) {
  FeatureMatrix norm_ref = reference;
  FeatureMatrix norm_src = source;
  FeatureMatrix fused_src = source;
  ArmMatrices arms;
  arms.norm_disease = disease;
  arms.raw_disease = disease;
  arms.fusions.resize(kinds.size());

  parallel_for(kinds.size(), [&](std::size_t i) {
    const FeatureKind kind = kinds[i];
    const auto ref_col = reference.column(kind);
    const auto src_col = source.column(kind);
    const auto dis_col = disease.column(kind);

    FeatureFusionOutcome outcome;
    outcome.kind = kind;
    outcome.dist = classify_distribution(kind, ref_col, policy);
    const FusionResult fused = fuse(ref_col, src_col, outcome.dist, fusion_cfg);
    outcome.params = fused.params;
    outcome.report = fused.report;
    arms.fusions[i] = outcome;

    detail::set_column(fused_src, kind, apply_affine(src_col, fused.params));
    detail::set_column(norm_ref, kind, zscore_normalize(ref_col));
    detail::set_column(norm_src, kind, zscore_normalize(src_col));
    detail::set_column(arms.norm_disease, kind, zscore_normalize(dis_col));
  });

  arms.norm_healthy = detail::concat_rows(norm_ref, norm_src);
  arms.fused_healthy = detail::concat_rows(reference, fused_src);
  return arms;
}

struct PairedMetrics {
  Metrics normalization;
  Metrics fusion;
};

struct PipelineComparison {
  PairedMetrics metrics;
  std::vector<FeatureFusionOutcome> fusions;
  RocPool normalization_pool;
  RocPool fusion_pool;
};

// Paired evaluation of the two arms on one feature subset, identical seeds.
inline PipelineComparison compare_pipelines(const FeatureMatrix& reference,
                                            const FeatureMatrix& source,
                                            const FeatureMatrix& disease,
                                            const std::vector<FeatureKind>& subset,
                                            DistributionPolicy policy,
                                            const FusionConfig& fusion_cfg,
                                            const ExperimentConfig& exp,
                                            const GbdtConfig& gbdt) {
  const ArmMatrices arms = build_arms(reference, source, disease, subset, policy, fusion_cfg);
  PipelineComparison out;
  out.fusions = arms.fusions;
  out.metrics.normalization = run_experiments(arms.norm_healthy, arms.norm_disease, subset,
                                              exp, gbdt, &out.normalization_pool);
  out.metrics.fusion = run_experiments(arms.fused_healthy, arms.raw_disease, subset, exp,
                                       gbdt, &out.fusion_pool);
  return out;
}

// One row of the paired report table.
struct TableRow {
  std::string distribution;
  std::string feature;
  Metrics normalization;
  Metrics fusion;
};

inline void write_table_csv(const std::vector<TableRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(errc::io_error, "cannot write " + path);
  out << "distribution,feature,norm_accuracy_pct,norm_fpr_pct,norm_fnr_pct,norm_auc,"
         "fusion_accuracy_pct,fusion_fpr_pct,fusion_fnr_pct,fusion_auc\n";
  char buf[200];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, "%s,%s,%.2f,%.2f,%.2f,%.4f,%.2f,%.2f,%.2f,%.4f\n",
                  row.distribution.c_str(), row.feature.c_str(),
                  100.0 * row.normalization.accuracy, 100.0 * row.normalization.fpr,
                  100.0 * row.normalization.fnr, row.normalization.auc,
                  100.0 * row.fusion.accuracy, 100.0 * row.fusion.fpr,
                  100.0 * row.fusion.fnr, row.fusion.auc);
    out << buf;
  }
  if (!out) fail(errc::io_error, "write failed: " + path);
}

inline nlohmann::json fusion_outcome_json(const FeatureFusionOutcome& f) {
  nlohmann::json j;
  j["feature"] = to_string(f.kind);
  j["distribution"] = to_string(f.dist);
  j["branch"] = to_string(f.report.branch);
  j["C"] = f.params.scale;
  j["D"] = f.params.offset;
  j["initial_kl"] = f.report.initial_kl;
  j["final_kl"] = f.report.final_kl;
  j["iterations"] = f.report.iterations;
  j["converged"] = f.report.converged;
  return j;
}

struct ReportBundle {
  std::string table_csv;
  std::string fusion_report;
  std::vector<std::string> density_svgs;
  std::string roc_svg;
  std::vector<TableRow> rows;
  std::vector<FeatureFusionOutcome> fusions;
};

namespace detail {

[[noreturn]] inline void stage_fail(const std::string& stage, const Error& e) {
  throw Error(e.code(), "[stage " + stage + "] " + e.what());
}

struct Cohort {
  std::string name;
  FeatureMatrix features;
};

inline Cohort load_cohort(const std::string& manifest_path, const PipelineConfig& cfg) {
  DatasetManifest manifest;
  try {
    manifest = load_manifest(manifest_path);
  } catch (const Error& e) {
    stage_fail("ingest " + manifest_path, e);
  }

  std::vector<Record> records(manifest.entries.size());
  try {
    parallel_for(manifest.entries.size(), [&](std::size_t i) {
      records[i] = load_record(manifest, manifest.entries[i]);
    });
  } catch (const Error& e) {
    stage_fail("ingest " + manifest.name, e);
  }

  std::vector<BeatWindow> windows(records.size());
  std::vector<ClassLabel> labels(records.size());
  try {
    parallel_for(records.size(), [&](std::size_t i) {
      try {
        windows[i] = preprocess_record(records[i], cfg.preproc, manifest.lead_select);
        labels[i] = records[i].label;
      } catch (const Error& e) {
        throw Error(e.code(), "record " + records[i].id + ": " + e.what());
      }
    });
  } catch (const Error& e) {
    stage_fail("preprocess " + manifest.name, e);
  }

  Cohort cohort;
  cohort.name = manifest.name;
  try {
    FeatureParams params = cfg.feature_params;
    params.spectral_rate = cfg.preproc.target_rate;
    cohort.features = extract_matrix(windows, labels, manifest.name, params);
  } catch (const Error& e) {
    stage_fail("extract " + manifest.name, e);
  }
  return cohort;
}

inline std::string join_path(const std::string& dir, const std::string& file) {
  return (std::filesystem::path(dir) / file).string();
}

inline KdeModel column_kde(const std::vector<double>& col) {
  return KdeModel(col, bandwidth_silverman(col));
}

} // namespace detail

// Paired table (9 features + Combined), per-feature fusion report, density
// plots, and the Combined ROC overlay, all written under output_dir.
inline ReportBundle run_report(const FeatureMatrix& reference, const FeatureMatrix& source,
                               const FeatureMatrix& disease, const PipelineConfig& cfg) {
  std::filesystem::create_directories(cfg.output_dir);
  const std::vector<FeatureKind> all_kinds(all_feature_kinds.begin(), all_feature_kinds.end());
  const ArmMatrices arms = build_arms(reference, source, disease, all_kinds,
                                      cfg.distribution_policy, cfg.fusion);

  ReportBundle bundle;
  bundle.fusions = arms.fusions;

  // one experiment per feature, then the Combined set, identical seeds per arm
  std::vector<std::vector<FeatureKind>> subsets;
  for (FeatureKind k : all_kinds) subsets.push_back({k});
  subsets.push_back(all_kinds);

  RocPool norm_pool;
  RocPool fused_pool;
  for (const auto& subset : subsets) {
    const bool combined = subset.size() > 1;
    TableRow row;
    row.feature = combined ? "Combined" : to_string(subset[0]);
    if (combined) {
      row.distribution = "Mixed";
    } else {
      row.distribution = to_string(arms.fusions[static_cast<std::size_t>(subset[0])].dist);
    }
    RocPool* np = combined ? &norm_pool : nullptr;
    RocPool* fp = combined ? &fused_pool : nullptr;
    row.normalization = run_experiments(arms.norm_healthy, arms.norm_disease, subset,
                                        cfg.experiment, cfg.gbdt, np);
    row.fusion = run_experiments(arms.fused_healthy, arms.raw_disease, subset,
                                 cfg.experiment, cfg.gbdt, fp);
    bundle.rows.push_back(row);
  }

  bundle.table_csv = detail::join_path(cfg.output_dir, "table.csv");
  write_table_csv(bundle.rows, bundle.table_csv);

  nlohmann::json report;
  report["features"] = nlohmann::json::array();
  for (const auto& f : arms.fusions) report["features"].push_back(fusion_outcome_json(f));
  bundle.fusion_report = detail::join_path(cfg.output_dir, "fusion_report.json");
  {
    std::ofstream out(bundle.fusion_report);
    if (!out) fail(errc::io_error, "cannot write " + bundle.fusion_report);
    out << report.dump(2) << '\n';
  }

  for (FeatureKind kind : all_kinds) {
    const auto ref_col = reference.column(kind);
    const auto src_col = source.column(kind);
    const FeatureFusionOutcome& f = arms.fusions[static_cast<std::size_t>(kind)];
    const auto fused_col = apply_affine(src_col, f.params);
    const std::string path = detail::join_path(
        cfg.output_dir, std::string("density_") + to_string(kind) + ".svg");
    render_density_svg(detail::column_kde(ref_col), detail::column_kde(src_col),
                       detail::column_kde(ref_col), detail::column_kde(fused_col), path,
                       to_string(kind));
    bundle.density_svgs.push_back(path);
  }

  bundle.roc_svg = detail::join_path(cfg.output_dir, "roc_combined.svg");
  render_roc_svg({{"normalization", roc_curve(norm_pool.scores, norm_pool.labels)},
                  {"fusion", roc_curve(fused_pool.scores, fused_pool.labels)}},
                 bundle.roc_svg);
  return bundle;
}

// Full workflow from three dataset manifests.
inline ReportBundle cmd_run(const PipelineConfig& cfg) {
  cfg.validate();
  const detail::Cohort reference = detail::load_cohort(cfg.reference_manifest, cfg);
  const detail::Cohort source = detail::load_cohort(cfg.source_manifest, cfg);
  const detail::Cohort disease = detail::load_cohort(cfg.disease_manifest, cfg);
  try {
    return run_report(reference.features, source.features, disease.features, cfg);
  } catch (const Error& e) {
    detail::stage_fail("report", e);
  }
}

enum class BenchProfile { gaussian_shift, bimodal_affine, identity };

inline BenchProfile bench_profile_from_string(const std::string& s) {
  if (s == "gaussian_shift") return BenchProfile::gaussian_shift;
  if (s == "bimodal_affine") return BenchProfile::bimodal_affine;
  if (s == "identity") return BenchProfile::identity;
  fail(errc::invalid_spec, "unknown profile '" + s + "'");
}

struct BenchSpec {
  FeatureKind kind = FeatureKind::PermutationEntropy;
  AffineParams truth{1.0, 0.0}; // transform fuse() should recover
  SynthSpec reference;
  SynthSpec source;
  SynthSpec disease;
};

// Synthetic single-feature datasets with a known ground-truth transform.
// The source is emitted through the inverse of `truth`, so mapping it back
// onto the reference should recover `truth`. Disease cohorts either shift
// the healthy distribution by 1.5 mixture sigmas (separable location signal)
// or, for the identity profile, keep its moments and change only its shape.
inline BenchSpec make_bench_spec(BenchProfile profile, std::uint64_t seed,
                                 std::size_t n_healthy = 2500, std::size_t n_disease = 2500) {
  const std::vector<double> weights{0.5, 0.5};
  const std::vector<double> means{-2.0, 2.0};
  const std::vector<double> sigmas{0.5, 0.5};
  const double mix_sigma = std::sqrt(0.25 + 4.0); // component spread + mode spread
  const double shift = 1.5 * mix_sigma;

  BenchSpec spec;
  switch (profile) {
    case BenchProfile::bimodal_affine:
      spec.kind = FeatureKind::PermutationEntropy; // non-Gaussian branch
      spec.truth = {2.0, 3.0};
      spec.reference = SynthSpec::mixture_spec(n_healthy, weights, means, sigmas,
                                               {1.0, 0.0}, seed + 1);
      spec.source = SynthSpec::mixture_spec(n_healthy, weights, means, sigmas,
                                            spec.truth.inverse(), seed + 2);
      spec.disease = SynthSpec::mixture_spec(n_disease, weights, means, sigmas,
                                             {1.0, shift}, seed + 3);
      break;
    case BenchProfile::identity:
      spec.kind = FeatureKind::PermutationEntropy;
      spec.truth = {1.0, 0.0};
      spec.reference = SynthSpec::mixture_spec(n_healthy, weights, means, sigmas,
                                               {1.0, 0.0}, seed + 1);
      spec.source = SynthSpec::mixture_spec(n_healthy, weights, means, sigmas,
                                            {1.0, 0.0}, seed + 2);
      // same mean and variance as the healthy mixture, unimodal shape
      spec.disease = SynthSpec::gaussian_spec(n_disease, 0.0, mix_sigma, {1.0, 0.0}, seed + 3);
      break;
    case BenchProfile::gaussian_shift:
      spec.kind = FeatureKind::ApproximateEntropy; // Gaussian branch
      spec.truth = {2.0, 3.0};
      spec.reference = SynthSpec::gaussian_spec(n_healthy, 1.0, 1.0, {1.0, 0.0}, seed + 1);
      spec.source = SynthSpec::gaussian_spec(n_healthy, 1.0, 1.0, spec.truth.inverse(),
                                             seed + 2);
      spec.disease = SynthSpec::gaussian_spec(n_disease, 1.0, 1.0, {1.0, 1.5}, seed + 3);
      break;
  }
  return spec;
}

namespace detail {

inline FeatureMatrix bench_matrix(const std::vector<double>& values, FeatureKind kind,
                                  ClassLabel label, const std::string& source_name) {
  FeatureMatrix m;
  std::vector<double> row(FeatureMatrix::cols(), 0.0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    row[static_cast<std::size_t>(kind)] = values[i];
    m.append_row(source_name + "_" + std::to_string(i), source_name, label, row);
  }
  return m;
}

} // namespace detail

struct BenchResult {
  BenchSpec spec;
  PipelineComparison comparison;
  ReportBundle bundle;
};

// Desk-scale benchmark: generate the profile's datasets, run both arms on
// the synthetic feature, and write a report annotated with ground-truth and
// recovered transform parameters.
inline BenchResult cmd_synth_bench(BenchProfile profile, std::uint64_t seed,
                                   const std::string& output_dir,
                                   const ExperimentConfig& exp = ExperimentConfig{},
                                   const GbdtConfig& gbdt = GbdtConfig{},
                                   const FusionConfig& fusion_cfg = FusionConfig{}) {
  std::filesystem::create_directories(output_dir);
  BenchResult result;
  result.spec = make_bench_spec(profile, seed);

  const auto reference = synth_dataset(result.spec.reference);
  const auto source = synth_dataset(result.spec.source);
  const auto disease = synth_dataset(result.spec.disease);

  const FeatureMatrix ref_m = detail::bench_matrix(reference.values, result.spec.kind,
                                                   ClassLabel::Healthy, "reference");
  const FeatureMatrix src_m =
      detail::bench_matrix(source.values, result.spec.kind, ClassLabel::Healthy, "source");
  const FeatureMatrix dis_m =
      detail::bench_matrix(disease.values, result.spec.kind, ClassLabel::Arrhythmia, "disease");

  const std::vector<FeatureKind> subset{result.spec.kind};
  result.comparison = compare_pipelines(ref_m, src_m, dis_m, subset,
                                        DistributionPolicy::paper_default, fusion_cfg, exp,
                                        gbdt);

  ReportBundle& bundle = result.bundle;
  bundle.fusions = result.comparison.fusions;
  TableRow row;
  row.feature = to_string(result.spec.kind);
  row.distribution = to_string(result.comparison.fusions[0].dist);
  row.normalization = result.comparison.metrics.normalization;
  row.fusion = result.comparison.metrics.fusion;
  bundle.rows.push_back(row);
  bundle.table_csv = detail::join_path(output_dir, "table.csv");
  write_table_csv(bundle.rows, bundle.table_csv);

  nlohmann::json report;
  report["profile"] = profile == BenchProfile::gaussian_shift ? "gaussian_shift"
                      : profile == BenchProfile::bimodal_affine ? "bimodal_affine"
                                                                : "identity";
  report["seed"] = seed;
  report["ground_truth"] = {{"C", result.spec.truth.scale}, {"D", result.spec.truth.offset}};
  report["features"] = nlohmann::json::array();
  for (const auto& f : result.comparison.fusions)
    report["features"].push_back(fusion_outcome_json(f));
  bundle.fusion_report = detail::join_path(output_dir, "fusion_report.json");
  {
    std::ofstream out(bundle.fusion_report);
    if (!out) fail(errc::io_error, "cannot write " + bundle.fusion_report);
    out << report.dump(2) << '\n';
  }

  const auto ref_col = ref_m.column(result.spec.kind);
  const auto src_col = src_m.column(result.spec.kind);
  const auto fused_col = apply_affine(src_col, result.comparison.fusions[0].params);
  const std::string density_path = detail::join_path(
      output_dir, std::string("density_") + to_string(result.spec.kind) + ".svg");
  render_density_svg(detail::column_kde(ref_col), detail::column_kde(src_col),
                     detail::column_kde(ref_col), detail::column_kde(fused_col), density_path,
                     to_string(result.spec.kind));
  bundle.density_svgs.push_back(density_path);

  bundle.roc_svg = detail::join_path(output_dir, "roc.svg");
  render_roc_svg(
      {{"normalization", roc_curve(result.comparison.normalization_pool.scores,
                                   result.comparison.normalization_pool.labels)},
       {"fusion", roc_curve(result.comparison.fusion_pool.scores,
                            result.comparison.fusion_pool.labels)}},
      bundle.roc_svg);
  return result;
}

} // namespace divfuse
