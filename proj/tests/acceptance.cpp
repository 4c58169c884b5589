// Acceptance suite: one check per release criterion, one PASS/FAIL line
// each, nonzero exit when anything fails. Synthetic oracles throughout; the
// external-corpus check at the end is optional and skips when the data is
// not wired up.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "divfuse/divfuse.hpp"
#include "test_oracles.hpp"

using namespace divfuse;
namespace fs = std::filesystem;

namespace {

struct CheckResult {
  bool pass = false;
  bool skipped = false;
  std::string detail;
};

int g_failures = 0;

void run_check(const std::string& name, const std::function<CheckResult()>& fn) {
  const auto start = std::chrono::steady_clock::now();
  CheckResult result;
  try {
    result = fn();
  } catch (const std::exception& e) {
    result.pass = false;
    result.detail = std::string("exception: ") + e.what();
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const char* verdict = result.skipped ? "SKIP" : (result.pass ? "PASS" : "FAIL");
  std::printf("%s: %-28s (%6.2f s) %s\n", verdict, name.c_str(), seconds,
              result.detail.c_str());
  std::fflush(stdout);
  if (!result.pass && !result.skipped) ++g_failures;
}

std::vector<double> mixture_draws(std::size_t n, std::uint64_t seed,
                                  AffineParams distortion = {1.0, 0.0}) {
  return synth_dataset(SynthSpec::mixture_spec(n, {0.5, 0.5}, {-2.0, 2.0}, {0.5, 0.5},
                                               distortion, seed))
      .values;
}

double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

// --- criteria ---------------------------------------------------------------

CheckResult gaussian_closed_form_recovery() {
  const auto x =
      synth_dataset(SynthSpec::gaussian_spec(10000, 0.0, 1.0, {1.0, 0.0}, 301)).values;
  const auto y =
      synth_dataset(SynthSpec::gaussian_spec(10000, 3.0, 2.0, {1.0, 0.0}, 302)).values;
  const auto start = std::chrono::steady_clock::now();
  const FusionResult r = fuse(x, y, DistributionClass::Gaussian);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  CheckResult out;
  const bool c_ok = std::abs(r.params.scale - 0.5) < 0.05;
  const bool d_ok = std::abs(r.params.offset + 1.5) < 0.1;
  const bool branch_ok =
      r.report.branch == FusionBranch::GaussianClosedForm && r.report.iterations == 0;
  const bool time_ok = seconds < 1.0;
  out.pass = c_ok && d_ok && branch_ok && time_ok;
  char buf[160];
  std::snprintf(buf, sizeof buf, "C=%.4f D=%.4f iters=%zu fuse=%.3fs", r.params.scale,
                r.params.offset, r.report.iterations, seconds);
  out.detail = buf;
  return out;
}

CheckResult non_gaussian_recovery() {
  const auto x = mixture_draws(5000, 311);
  const auto y = mixture_draws(5000, 312, AffineParams{2.0, 3.0}.inverse());
  const auto start = std::chrono::steady_clock::now();
  const FusionResult r = fuse(x, y, DistributionClass::NonGaussian);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  CheckResult out;
  const bool c_ok = std::abs(r.params.scale - 2.0) / 2.0 < 0.05;
  const bool d_ok = std::abs(r.params.offset - 3.0) / 3.0 < 0.05;
  const bool kl_ok = r.report.final_kl <= 0.05;
  const bool time_ok = seconds < 30.0;
  out.pass = c_ok && d_ok && kl_ok && time_ok;
  char buf[200];
  std::snprintf(buf, sizeof buf, "C=%.4f D=%.4f finalKL=%.5f iters=%zu fuse=%.2fs",
                r.params.scale, r.params.offset, r.report.final_kl, r.report.iterations,
                seconds);
  out.detail = buf;
  return out;
}

CheckResult gradient_correctness() {
  constexpr int n_configs = 100;
  std::vector<double> worst(n_configs, 0.0);
  parallel_for(n_configs, [&](std::size_t cfg) {
    Rng rng(4000 + cfg);
    const auto x = mixture_draws(200, 5000 + cfg);
    const auto y = mixture_draws(200, 6000 + cfg);
    const double sigma_y = bandwidth_silverman(y);
    const KdeModel fx(x, bandwidth_silverman(x));
    const AffineParams p{rng.uniform(0.5, 2.0), rng.uniform(-2.0, 2.0)};
    const auto [ac, ad] = kl_gradient(fx, y, p, sigma_y, 1e-12);
    const auto [fc, fd] = oracles::finite_difference_gradient(
        [&](double c, double d) { return kl_divergence(fx, y, {c, d}, sigma_y, 1e-12); },
        p.scale, p.offset);
    worst[cfg] = std::max(relative_error(ac, fc), relative_error(ad, fd));
  });
  double max_err = 0.0;
  for (double e : worst) max_err = std::max(max_err, e);
  CheckResult out;
  out.pass = max_err < 1e-4;
  char buf[120];
  std::snprintf(buf, sizeof buf, "max rel err %.3e over %d configs", max_err, n_configs);
  out.detail = buf;
  return out;
}

CheckResult descent_monotonicity() {
  constexpr int n_runs = 100;
  std::vector<int> monotone(n_runs, 0);
  parallel_for(n_runs, [&](std::size_t run) {
    Rng rng(7000 + run);
    const auto x = mixture_draws(400, 7100 + run);
    const AffineParams truth{rng.uniform(0.5, 2.5), rng.uniform(-3.0, 3.0)};
    const auto y = mixture_draws(400, 7200 + run, truth.inverse());
    const FusionResult r = fuse(x, y, DistributionClass::NonGaussian);
    bool ok = true;
    for (std::size_t i = 1; i < r.report.kl_trace.size(); ++i)
      ok = ok && r.report.kl_trace[i] <= r.report.kl_trace[i - 1];
    monotone[run] = ok ? 1 : 0;
  });
  int n_ok = 0;
  for (int ok : monotone) n_ok += ok;
  CheckResult out;
  out.pass = n_ok == n_runs;
  out.detail = std::to_string(n_ok) + "/" + std::to_string(n_runs) + " traces non-increasing";
  return out;
}

// Plug-in KL of the fused pair and of the per-cohort z-scored pair, for the
// invariant that fusion never aligns worse than standardization.
std::pair<double, double> fused_vs_zscore_kl(const BenchResult& r) {
  const auto reference = synth_dataset(r.spec.reference).values;
  const auto source = synth_dataset(r.spec.source).values;
  const AffineParams fused = r.comparison.fusions[0].params;
  const KdeModel fx(reference, bandwidth_silverman(reference));
  const double fused_kl =
      kl_divergence(fx, source, fused, bandwidth_silverman(apply_affine(source, fused)),
                    1e-12);
  const auto z_ref = zscore_normalize(reference);
  const auto z_src = zscore_normalize(source);
  const KdeModel fz(z_ref, bandwidth_silverman(z_ref));
  const double zscore_kl =
      kl_divergence(fz, z_src, {1.0, 0.0}, bandwidth_silverman(z_src), 1e-12);
  return {fused_kl, zscore_kl};
}

CheckResult directional_table_analogue() {
  const std::string dir = (fs::temp_directory_path() / "divfuse_accept_bimodal").string();
  const BenchResult r = cmd_synth_bench(BenchProfile::bimodal_affine, 42, dir);
  fs::remove_all(dir);
  const double fusion_acc = r.comparison.metrics.fusion.accuracy;
  const double norm_acc = r.comparison.metrics.normalization.accuracy;
  const auto [fused_kl, zscore_kl] = fused_vs_zscore_kl(r);
  CheckResult out;
  out.pass = (fusion_acc - norm_acc) >= 0.10 && fused_kl <= zscore_kl;
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "fusion %.1f%% vs normalization %.1f%% (gap %.1f pts), KL %.4f <= %.4f",
                100.0 * fusion_acc, 100.0 * norm_acc, 100.0 * (fusion_acc - norm_acc),
                fused_kl, zscore_kl);
  out.detail = buf;
  return out;
}

CheckResult identity_safety() {
  const std::string dir = (fs::temp_directory_path() / "divfuse_accept_identity").string();
  const BenchResult r = cmd_synth_bench(BenchProfile::identity, 42, dir);
  fs::remove_all(dir);
  const double fusion_acc = r.comparison.metrics.fusion.accuracy;
  const double norm_acc = r.comparison.metrics.normalization.accuracy;
  const auto [fused_kl, zscore_kl] = fused_vs_zscore_kl(r);
  CheckResult out;
  out.pass = std::abs(fusion_acc - norm_acc) <= 0.02 && fused_kl <= zscore_kl;
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "fusion %.2f%% vs normalization %.2f%% (|gap| %.2f pts), KL %.4f <= %.4f",
                100.0 * fusion_acc, 100.0 * norm_acc, 100.0 * std::abs(fusion_acc - norm_acc),
                fused_kl, zscore_kl);
  out.detail = buf;
  return out;
}

CheckResult feature_oracles() {
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::string> problems;

  std::vector<double> ramp(500);
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = static_cast<double>(i);
  if (std::abs(extract_feature(ramp, FeatureKind::PermutationEntropy)) > 1e-12)
    problems.push_back("ramp permutation entropy");
  if (std::abs(extract_feature(ramp, FeatureKind::PetrosianFD) - 1.0) > 1e-12)
    problems.push_back("monotone Petrosian FD");

  std::vector<double> line(500);
  for (std::size_t i = 0; i < line.size(); ++i)
    line[i] = 0.25 * static_cast<double>(i) + 1.0;
  if (std::abs(extract_feature(line, FeatureKind::KatzFD) - 1.0) > 1e-9)
    problems.push_back("line Katz FD");

  Rng rng(8000);
  std::vector<double> noise5k(5000);
  for (double& v : noise5k) v = rng.normal();
  const double alpha = extract_feature(noise5k, FeatureKind::DetrendedFD);
  if (!(alpha > 0.4 && alpha < 0.6)) problems.push_back("white-noise DFA exponent");

  std::vector<double> noise500(noise5k.begin(), noise5k.begin() + 500);
  const double hfd = extract_feature(noise500, FeatureKind::HiguchiFD);
  if (!(hfd > 1.8 && hfd < 2.05)) problems.push_back("white-noise Higuchi FD");

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CheckResult out;
  out.pass = problems.empty() && seconds < 10.0;
  std::ostringstream detail;
  detail.precision(3);
  detail << "dfa=" << alpha << " higuchi=" << hfd << " in " << seconds << "s";
  for (const auto& p : problems) detail << "; failed: " << p;
  out.detail = detail.str();
  return out;
}

CheckResult protocol_fidelity() {
  FeatureMatrix healthy;
  FeatureMatrix disease;
  {
    const auto h = synth_dataset(SynthSpec::gaussian_spec(2500, 1.0, 1.0, {1.0, 0.0}, 321));
    const auto d = synth_dataset(SynthSpec::gaussian_spec(2500, 0.0, 1.0, {1.0, 0.0}, 322));
    std::vector<double> row(FeatureMatrix::cols(), 0.0);
    for (std::size_t i = 0; i < h.values.size(); ++i) {
      row[0] = h.values[i];
      healthy.append_row("h" + std::to_string(i), "h", ClassLabel::Healthy, row);
      row[0] = d.values[i];
      disease.append_row("d" + std::to_string(i), "d", ClassLabel::Arrhythmia, row);
    }
  }
  const ExperimentConfig exp; // 100 runs, 1000 per class, seed 42
  const GbdtConfig gbdt;
  const Metrics a = run_experiments(healthy, disease, {all_feature_kinds[0]}, exp, gbdt);
  const Metrics b = run_experiments(healthy, disease, {all_feature_kinds[0]}, exp, gbdt);

  bool identical = a.per_run.size() == 100 && b.per_run.size() == 100 &&
                   a.accuracy == b.accuracy && a.fpr == b.fpr && a.fnr == b.fnr &&
                   a.auc == b.auc;
  for (std::size_t r = 0; identical && r < a.per_run.size(); ++r)
    identical = a.per_run[r].accuracy == b.per_run[r].accuracy &&
                a.per_run[r].fpr == b.per_run[r].fpr && a.per_run[r].fnr == b.per_run[r].fnr;

  // the balanced draw must refuse classes smaller than n_per_class
  bool guards = false;
  try {
    FeatureMatrix small;
    std::vector<double> row(FeatureMatrix::cols(), 0.0);
    for (int i = 0; i < 999; ++i) small.append_row("s", "s", ClassLabel::Healthy, row);
    run_experiments(small, disease, {all_feature_kinds[0]}, exp, gbdt);
  } catch (const Error& e) {
    guards = e.code() == errc::insufficient_rows;
  }

  // boosting must keep the training log-loss non-increasing at this scale
  bool monotone = true;
  for (std::uint64_t seed = exp.base_seed; seed < exp.base_seed + 10; ++seed) {
    Rng rng(seed);
    std::vector<double> x;
    std::vector<int> y;
    const auto hi = rng.sample_without_replacement(healthy.rows(), exp.n_per_class);
    const auto di = rng.sample_without_replacement(disease.rows(), exp.n_per_class);
    for (std::size_t i : hi) {
      x.push_back(healthy.at(i, all_feature_kinds[0]));
      y.push_back(1);
    }
    for (std::size_t i : di) {
      x.push_back(disease.at(i, all_feature_kinds[0]));
      y.push_back(0);
    }
    const GbdtModel model = train_gbdt(x, 1, y, gbdt);
    for (std::size_t r = 1; r < model.train_loss.size(); ++r)
      monotone = monotone && model.train_loss[r] <= model.train_loss[r - 1] + 1e-12;
  }

  CheckResult out;
  out.pass = identical && guards && monotone;
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "100 runs x 1000/class, rerun %s, short-class guard %s, boosting %s",
                identical ? "bitwise-identical" : "DIFFERS", guards ? "ok" : "MISSING",
                monotone ? "monotone" : "NON-MONOTONE");
  out.detail = buf;
  return out;
}

CheckResult kde_normalization() {
  Rng rng(9000);
  double worst = 0.0;
  for (int model_idx = 0; model_idx < 20; ++model_idx) {
    const std::size_t n = 50 + rng.below(350);
    std::vector<double> sample(n);
    const double mu = rng.uniform(-5.0, 5.0);
    const double sd = std::exp(rng.uniform(-1.0, 1.5));
    for (double& v : sample) v = rng.normal(mu, sd);
    const KdeModel model(sample, bandwidth_silverman(sample));
    const auto [lo_it, hi_it] = std::minmax_element(sample.begin(), sample.end());
    const double integral = oracles::trapezoid(
        [&](double x) { return kde_eval(model, x); }, *lo_it - 10.0 * model.bandwidth,
        *hi_it + 10.0 * model.bandwidth, 10000);
    worst = std::max(worst, std::abs(integral - 1.0));
  }
  CheckResult out;
  out.pass = worst < 1e-3;
  char buf[100];
  std::snprintf(buf, sizeof buf, "max |integral-1| = %.2e over 20 models", worst);
  out.detail = buf;
  return out;
}

CheckResult parser_roundtrips() {
  const fs::path dir = fs::temp_directory_path() / "divfuse_accept_parsers";
  fs::create_directories(dir);
  Rng rng(9100);
  std::size_t csv_exact = 0;
  std::size_t wfdb_exact = 0;
  constexpr std::size_t n_fixtures = 50;

  for (std::size_t f = 0; f < n_fixtures; ++f) {
    // csv fixture
    Record r;
    r.id = "fix";
    r.rate = 125.0 * (1.0 + static_cast<double>(rng.below(8)));
    r.leads = 1 + static_cast<std::size_t>(rng.below(12));
    r.samples = 2 + static_cast<std::size_t>(rng.below(300));
    r.signal.resize(r.leads * r.samples);
    for (double& v : r.signal) v = rng.normal(0.0, std::exp(rng.uniform(-2.0, 4.0)));
    const std::string csv_path = (dir / ("c" + std::to_string(f) + ".csv")).string();
    write_csv_record(r, csv_path);
    const Record back = read_csv_record(csv_path, r.rate, r.label);
    csv_exact += static_cast<std::size_t>(back.signal == r.signal &&
                                          back.leads == r.leads &&
                                          back.samples == r.samples);

    // wfdb fixture through the independent writer oracle
    const std::size_t leads = 1 + static_cast<std::size_t>(rng.below(12));
    const std::size_t samples = 2 + static_cast<std::size_t>(rng.below(300));
    std::vector<double> gains(leads);
    std::vector<double> baselines(leads);
    for (std::size_t l = 0; l < leads; ++l) {
      gains[l] = 50.0 * (1.0 + static_cast<double>(rng.below(40)));
      baselines[l] = static_cast<double>(rng.below(2049)) - 1024.0;
    }
    std::vector<std::int16_t> raw(leads * samples);
    for (auto& v : raw)
      v = static_cast<std::int16_t>(static_cast<std::int64_t>(rng.below(65536)) - 32768);
    const std::string name = "w" + std::to_string(f);
    oracles::write_wfdb_fixture(dir.string(), name, leads, samples, 500.0, gains, baselines,
                                raw);
    const Record wr = read_wfdb_record((dir / (name + ".hea")).string(), ClassLabel::Healthy);
    bool exact = wr.leads == leads && wr.samples == samples && wr.rate == 500.0;
    for (std::size_t s = 0; exact && s < samples; ++s)
      for (std::size_t l = 0; exact && l < leads; ++l)
        exact = wr.at(l, s) ==
                (static_cast<double>(raw[s * leads + l]) - baselines[l]) / gains[l];
    wfdb_exact += static_cast<std::size_t>(exact);
  }
  fs::remove_all(dir);

  CheckResult out;
  out.pass = csv_exact == n_fixtures && wfdb_exact == n_fixtures;
  char buf[120];
  std::snprintf(buf, sizeof buf, "csv %zu/%zu exact, wfdb %zu/%zu exact", csv_exact,
                n_fixtures, wfdb_exact, n_fixtures);
  out.detail = buf;
  return out;
}

// Optional: real-corpus direction check for the three non-Gaussian features.
// Wire it by exporting DIVFUSE_PTBXL_MANIFESTS=ref.json,src.json,dis.json
// (manifests over locally downloaded records).
CheckResult external_corpus_direction() {
  const char* env = std::getenv("DIVFUSE_PTBXL_MANIFESTS");
  CheckResult out;
  if (!env) {
    out.skipped = true;
    out.pass = true;
    out.detail = "optional; set DIVFUSE_PTBXL_MANIFESTS=ref.json,src.json,dis.json to run";
    return out;
  }
  std::vector<std::string> paths;
  std::stringstream ss(env);
  std::string item;
  while (std::getline(ss, item, ',')) paths.push_back(item);
  if (paths.size() != 3) {
    out.detail = "DIVFUSE_PTBXL_MANIFESTS must list three manifests";
    return out;
  }
  PipelineConfig cfg;
  cfg.reference_manifest = paths[0];
  cfg.source_manifest = paths[1];
  cfg.disease_manifest = paths[2];
  const detail::Cohort reference = detail::load_cohort(cfg.reference_manifest, cfg);
  const detail::Cohort source = detail::load_cohort(cfg.source_manifest, cfg);
  const detail::Cohort disease = detail::load_cohort(cfg.disease_manifest, cfg);

  std::ostringstream report;
  bool all_directional = true;
  for (FeatureKind kind :
       {FeatureKind::PetrosianFD, FeatureKind::PermutationEntropy, FeatureKind::SvdEntropy}) {
    const PipelineComparison cmp = compare_pipelines(
        reference.features, source.features, disease.features, {kind},
        DistributionPolicy::paper_default, cfg.fusion, cfg.experiment, cfg.gbdt);
    const bool directional =
        cmp.metrics.fusion.accuracy >= cmp.metrics.normalization.accuracy;
    all_directional = all_directional && directional;
    report << to_string(kind) << " " << (directional ? "+" : "-") << " ";
  }
  out.pass = all_directional;
  out.detail = report.str();
  return out;
}

} // namespace

int main() {
  std::printf("acceptance suite\n");
  run_check("gaussian-closed-form", gaussian_closed_form_recovery);
  run_check("non-gaussian-recovery", non_gaussian_recovery);
  run_check("gradient-correctness", gradient_correctness);
  run_check("descent-monotonicity", descent_monotonicity);
  run_check("directional-analogue", directional_table_analogue);
  run_check("identity-safety", identity_safety);
  run_check("feature-oracles", feature_oracles);
  run_check("protocol-fidelity", protocol_fidelity);
  run_check("kde-normalization", kde_normalization);
  run_check("parser-roundtrips", parser_roundtrips);
  run_check("external-corpus", external_corpus_direction);
  if (g_failures == 0)
    std::printf("acceptance: all criteria satisfied\n");
  else
    std::printf("acceptance: %d criteria FAILED\n", g_failures);
  return g_failures;
}
