// divfuse: dataset fusion workflow CLI.
//
// Subcommands mirror the pipeline stages so intermediate CSV artifacts stay
// inspectable: ingest, preprocess, extract, fuse, classify, plus the
// end-to-end `run` and the synthetic `synth-bench`.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "divfuse/divfuse.hpp"

namespace {

using namespace divfuse;

int cmd_ingest(const std::string& manifest_path, const std::string& out_path) {
  const DatasetManifest manifest = load_manifest(manifest_path);
  const auto records = load_dataset(manifest);
  std::ofstream out(out_path);
  if (!out) fail(errc::io_error, "cannot write " + out_path);
  out << "record_id,source,label,rate_hz,leads,samples\n";
  for (const auto& r : records) {
    out << r.id << ',' << manifest.name << ',' << to_string(r.label) << ',' << r.rate << ','
        << r.leads << ',' << r.samples << '\n';
  }
  std::cout << "ingested " << records.size() << " records from " << manifest.name << "\n";
  return 0;
}

int cmd_preprocess(const std::string& manifest_path, const std::string& out_path,
                   const PreprocConfig& preproc) {
  const DatasetManifest manifest = load_manifest(manifest_path);
  const auto records = load_dataset(manifest);
  std::vector<BeatWindow> windows(records.size());
  std::vector<ClassLabel> labels(records.size());
  parallel_for(records.size(), [&](std::size_t i) {
    windows[i] = preprocess_record(records[i], preproc, manifest.lead_select);
    labels[i] = records[i].label;
  });
  write_windows_csv(windows, labels, manifest.name, out_path);
  std::cout << "wrote " << windows.size() << " windows to " << out_path << "\n";
  return 0;
}

int cmd_extract(const std::string& in_path, const std::string& out_path,
                FeatureParams params) {
  const WindowSet set = read_windows_csv(in_path);
  ExtractionReport report;
  const FeatureMatrix matrix =
      extract_matrix(set.windows, set.labels, set.source_name, params, &report);
  write_feature_csv(matrix, out_path);
  std::cout << "extracted " << matrix.rows() << " rows (" << report.dropped
            << " dropped) to " << out_path << "\n";
  return 0;
}

int cmd_fuse(const std::string& in_path, const std::string& reference_path,
             const std::string& out_path, const std::string& report_path,
             DistributionPolicy policy) {
  const FeatureMatrix source = read_feature_csv(in_path);
  const FeatureMatrix reference = read_feature_csv(reference_path);
  FeatureMatrix fused = source;
  nlohmann::json report;
  report["features"] = nlohmann::json::array();
  for (FeatureKind kind : all_feature_kinds) {
    const auto ref_col = reference.column(kind);
    const auto src_col = source.column(kind);
    FeatureFusionOutcome outcome;
    outcome.kind = kind;
    outcome.dist = classify_distribution(kind, ref_col, policy);
    const FusionResult result = fuse(ref_col, src_col, outcome.dist, FusionConfig{});
    outcome.params = result.params;
    outcome.report = result.report;
    const auto fused_col = apply_affine(src_col, result.params);
    for (std::size_t r = 0; r < fused.rows(); ++r)
      fused.values[r * FeatureMatrix::cols() + static_cast<std::size_t>(kind)] = fused_col[r];
    report["features"].push_back(fusion_outcome_json(outcome));
  }
  write_feature_csv(fused, out_path);
  if (!report_path.empty()) {
    std::ofstream out(report_path);
    if (!out) fail(errc::io_error, "cannot write " + report_path);
    out << report.dump(2) << '\n';
  }
  std::cout << "fused " << fused.rows() << " rows onto " << reference_path << "\n";
  return 0;
}

// Split a labeled feature CSV into the two class cohorts.
std::pair<FeatureMatrix, FeatureMatrix> split_by_label(const FeatureMatrix& merged) {
  FeatureMatrix healthy;
  FeatureMatrix disease;
  std::vector<double> row(FeatureMatrix::cols());
  for (std::size_t r = 0; r < merged.rows(); ++r) {
    for (std::size_t c = 0; c < FeatureMatrix::cols(); ++c) row[c] = merged.at(r, c);
    auto& target = merged.labels[r] == ClassLabel::Healthy ? healthy : disease;
    target.append_row(merged.record_ids[r], merged.sources[r], merged.labels[r], row);
  }
  if (healthy.rows() == 0 || disease.rows() == 0)
    fail(errc::single_class_input, "merged CSV must contain both labels");
  return {std::move(healthy), std::move(disease)};
}

int cmd_classify(const std::string& in_path, const std::string& healthy_path,
                 const std::string& disease_path, const std::string& out_path,
                 const ExperimentConfig& exp, const GbdtConfig& gbdt) {
  FeatureMatrix healthy;
  FeatureMatrix disease;
  if (!in_path.empty()) {
    std::tie(healthy, disease) = split_by_label(read_feature_csv(in_path));
  } else {
    healthy = read_feature_csv(healthy_path);
    disease = read_feature_csv(disease_path);
  }
  std::ofstream out(out_path);
  if (!out) fail(errc::io_error, "cannot write " + out_path);
  out << "distribution,feature,accuracy_pct,fpr_pct,fnr_pct,auc\n";
  char buf[160];
  auto emit = [&](const std::string& dist, const std::string& name, const Metrics& m) {
    std::snprintf(buf, sizeof buf, "%s,%s,%.2f,%.2f,%.2f,%.4f\n", dist.c_str(), name.c_str(),
                  100.0 * m.accuracy, 100.0 * m.fpr, 100.0 * m.fnr, m.auc);
    out << buf;
  };
  for (FeatureKind kind : all_feature_kinds) {
    const Metrics m = run_experiments(healthy, disease, {kind}, exp, gbdt);
    emit(to_string(default_distribution_class(kind)), to_string(kind), m);
  }
  const std::vector<FeatureKind> all(all_feature_kinds.begin(), all_feature_kinds.end());
  emit("Mixed", "Combined", run_experiments(healthy, disease, all, exp, gbdt));
  std::cout << "wrote metrics to " << out_path << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"divergence-based dataset fusion for feature-level ECG analysis"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "full pipeline from three dataset manifests");
  run->add_option("--config", config_path, "pipeline config JSON")->required();

  std::string profile = "bimodal_affine";
  std::uint64_t seed = 42;
  std::string bench_out = "bench_out";
  std::size_t bench_runs = 100;
  std::size_t bench_per_class = 1000;
  auto* bench = app.add_subcommand("synth-bench",
                                   "synthetic benchmark with known ground-truth transform");
  bench->add_option("--profile", profile, "gaussian_shift | bimodal_affine | identity");
  bench->add_option("--seed", seed, "base seed");
  bench->add_option("--out", bench_out, "output directory");
  bench->add_option("--runs", bench_runs, "experiment repetitions");
  bench->add_option("--per-class", bench_per_class, "samples drawn per class and run");

  std::string manifest_path;
  std::string out_path;
  auto* ingest = app.add_subcommand("ingest", "load a manifest and emit a record summary");
  ingest->add_option("--manifest", manifest_path, "dataset manifest JSON")->required();
  ingest->add_option("--out", out_path, "output CSV")->required();

  PreprocConfig preproc;
  std::string pre_manifest;
  std::string pre_out;
  auto* pre = app.add_subcommand("preprocess", "manifest to beat-window CSV");
  pre->add_option("--manifest", pre_manifest, "dataset manifest JSON")->required();
  pre->add_option("--out", pre_out, "windows CSV")->required();
  pre->add_option("--target-rate", preproc.target_rate, "resampling target, Hz");
  pre->add_option("--theta", preproc.denoise_theta, "denoise threshold fraction");
  pre->add_option("--window-len", preproc.window_len, "window length, samples");
  pre->add_option("--refractory", preproc.peak_refractory, "peak refractory, seconds");

  FeatureParams feature_params;
  std::string ex_in;
  std::string ex_out;
  auto* extract = app.add_subcommand("extract", "beat-window CSV to feature CSV");
  extract->add_option("--in", ex_in, "windows CSV")->required();
  extract->add_option("--out", ex_out, "features CSV")->required();
  extract->add_option("--rate", feature_params.spectral_rate, "window sampling rate, Hz");

  std::string fuse_in;
  std::string fuse_ref;
  std::string fuse_out;
  std::string fuse_report;
  std::string policy_name = "paper_default";
  auto* fuse_cmd = app.add_subcommand("fuse", "map source features onto a reference");
  fuse_cmd->add_option("--in", fuse_in, "source features CSV")->required();
  fuse_cmd->add_option("--reference", fuse_ref, "reference features CSV")->required();
  fuse_cmd->add_option("--out", fuse_out, "fused features CSV")->required();
  fuse_cmd->add_option("--report", fuse_report, "fusion report JSON");
  fuse_cmd->add_option("--policy", policy_name, "paper_default | auto_test");

  ExperimentConfig exp;
  GbdtConfig gbdt;
  std::string cls_in;
  std::string cls_healthy;
  std::string cls_disease;
  std::string cls_out;
  auto* classify = app.add_subcommand("classify", "repeated-experiment metrics");
  classify->add_option("--in", cls_in, "merged labeled features CSV (both classes)");
  classify->add_option("--healthy", cls_healthy, "healthy features CSV")
      ->excludes("--in");
  classify->add_option("--disease", cls_disease, "disease features CSV")
      ->excludes("--in");
  classify->add_option("--out", cls_out, "metrics CSV")->required();
  classify->add_option("--runs", exp.n_runs, "number of runs");
  classify->add_option("--per-class", exp.n_per_class, "samples per class and run");
  classify->add_option("--seed", exp.base_seed, "base seed");
  classify->add_option("--train-fraction", exp.train_fraction, "training fraction");
  classify->add_option("--trees", gbdt.n_trees, "boosting rounds");
  classify->add_option("--depth", gbdt.max_depth, "tree depth");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const PipelineConfig cfg = load_pipeline_config(config_path);
      const ReportBundle bundle = cmd_run(cfg);
      std::cout << "report: " << bundle.table_csv << "\n";
      return 0;
    }
    if (bench->parsed()) {
      ExperimentConfig bench_exp;
      bench_exp.n_runs = bench_runs;
      bench_exp.n_per_class = bench_per_class;
      bench_exp.base_seed = seed;
      const BenchResult result = cmd_synth_bench(bench_profile_from_string(profile), seed,
                                                 bench_out, bench_exp);
      const auto& f = result.comparison.fusions[0];
      std::printf("profile %s: truth (C=%.4f, D=%.4f), recovered (C=%.4f, D=%.4f), %s\n",
                  profile.c_str(), result.spec.truth.scale, result.spec.truth.offset,
                  f.params.scale, f.params.offset, to_string(f.report.branch));
      std::printf("normalization accuracy %.2f%%, fusion accuracy %.2f%%\n",
                  100.0 * result.comparison.metrics.normalization.accuracy,
                  100.0 * result.comparison.metrics.fusion.accuracy);
      std::cout << "report: " << result.bundle.table_csv << "\n";
      return 0;
    }
    if (ingest->parsed()) return cmd_ingest(manifest_path, out_path);
    if (pre->parsed()) return cmd_preprocess(pre_manifest, pre_out, preproc);
    if (extract->parsed()) return cmd_extract(ex_in, ex_out, feature_params);
    if (fuse_cmd->parsed()) {
      const DistributionPolicy policy = policy_name == "auto_test"
                                            ? DistributionPolicy::auto_test
                                            : DistributionPolicy::paper_default;
      return cmd_fuse(fuse_in, fuse_ref, fuse_out, fuse_report, policy);
    }
    if (classify->parsed()) {
      if (cls_in.empty() && (cls_healthy.empty() || cls_disease.empty()))
        fail(divfuse::errc::invalid_spec,
             "classify needs --in or both --healthy and --disease");
      return cmd_classify(cls_in, cls_healthy, cls_disease, cls_out, exp, gbdt);
    }
  } catch (const divfuse::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
