#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "divfuse/error.hpp"

namespace divfuse {

struct GbdtConfig {
  std::size_t n_trees = 100;
  std::size_t max_depth = 4;
  double learning_rate = 0.1;
  std::size_t min_leaf = 20;
  std::size_t n_bins = 64;

  void validate() const {
    if (n_trees < 1) fail(errc::invalid_spec, "n_trees must be >= 1");
    if (max_depth < 1) fail(errc::invalid_spec, "max_depth must be >= 1");
    if (!(learning_rate > 0.0 && learning_rate <= 1.0))
      fail(errc::invalid_spec, "learning_rate must be in (0, 1]");
    if (n_bins < 2) fail(errc::invalid_spec, "n_bins must be >= 2");
  }
};

struct GbdtNode {
  int feature = -1;       // -1 marks a leaf
  double threshold = 0.0; // go left when x[feature] <= threshold
  int left = -1;
  int right = -1;
  double value = 0.0;     // leaf contribution, already scaled by the learning rate
};

struct GbdtTree {
  std::vector<GbdtNode> nodes;

  double predict(const double* x) const {
    int idx = 0;
    while (nodes[idx].feature >= 0) {
      idx = x[nodes[idx].feature] <= nodes[idx].threshold ? nodes[idx].left
                                                          : nodes[idx].right;
    }
    return nodes[idx].value;
  }
};

// Additive logistic model: log-odds = base_score + sum of tree outputs.
struct GbdtModel {
  std::vector<GbdtTree> trees;
  double base_score = 0.0;
  std::size_t n_features = 0;
  std::vector<double> train_loss; // mean log-loss after each boosting round
};

namespace detail {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

constexpr double k_gbdt_lambda = 1.0; // L2 regularization on leaf values

struct BinnedData {
  std::vector<std::uint16_t> bins;        // row-major n x d
  std::vector<std::vector<double>> edges; // per feature, ascending upper bin edges
  std::size_t n_bins_max = 0;
};

// Equal-frequency bin edges per feature; values <= edges[b] map to bin b.
inline BinnedData bin_features(const std::vector<double>& features, std::size_t n_rows,
                               std::size_t n_features, std::size_t n_bins) {
  BinnedData binned;
  binned.edges.resize(n_features);
  binned.bins.resize(n_rows * n_features);
  for (std::size_t f = 0; f < n_features; ++f) {
    std::vector<double> sorted(n_rows);
    for (std::size_t r = 0; r < n_rows; ++r) sorted[r] = features[r * n_features + f];
    std::sort(sorted.begin(), sorted.end());
    std::vector<double>& edges = binned.edges[f];
    for (std::size_t b = 1; b < n_bins; ++b) {
      const std::size_t pos = b * n_rows / n_bins;
      if (pos == 0 || pos >= n_rows) continue;
      // midpoint between adjacent order statistics, so splits fall between
      // distinct values rather than on them
      const double edge = 0.5 * (sorted[pos - 1] + sorted[pos]);
      if (edges.empty() || edge > edges.back()) edges.push_back(edge);
    }
    binned.n_bins_max = std::max(binned.n_bins_max, edges.size() + 1);
    for (std::size_t r = 0; r < n_rows; ++r) {
      const double v = features[r * n_features + f];
      const auto it = std::lower_bound(edges.begin(), edges.end(), v);
      binned.bins[r * n_features + f] = static_cast<std::uint16_t>(it - edges.begin());
    }
  }
  return binned;
}

} // namespace detail

// Histogram-based boosting with logistic loss and depth-limited regression
// trees. Deterministic: ties in split gain resolve to the lowest feature and
// bin index.
inline GbdtModel train_gbdt(const std::vector<double>& features, std::size_t n_features,
                            const std::vector<int>& labels,
                            const GbdtConfig& config = GbdtConfig{}) {
  config.validate();
  if (n_features == 0) fail(errc::empty_features, "no feature columns");
  const std::size_t n = labels.size();
  if (n == 0 || features.size() != n * n_features)
    fail(errc::empty_features, "feature matrix shape mismatch");
  std::size_t n_pos = 0;
  for (int y : labels) n_pos += static_cast<std::size_t>(y != 0);
  if (n_pos < 2 || n - n_pos < 2)
    fail(errc::single_class_input, "need at least 2 samples of each class");
  for (double v : features)
    if (!std::isfinite(v)) fail(errc::non_finite_value, "non-finite feature");

  const auto binned = detail::bin_features(features, n, n_features, config.n_bins);

  GbdtModel model;
  model.n_features = n_features;
  const double p_base =
      std::clamp(static_cast<double>(n_pos) / static_cast<double>(n), 1e-6, 1.0 - 1e-6);
  model.base_score = std::log(p_base / (1.0 - p_base));

  std::vector<double> score(n, model.base_score);
  std::vector<double> grad(n);
  std::vector<double> hess(n);

  struct BuildNode {
    std::vector<std::size_t> rows;
    int node_index;
    std::size_t depth;
  };

  for (std::size_t round = 0; round < config.n_trees; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = detail::sigmoid(score[i]);
      grad[i] = p - static_cast<double>(labels[i]);
      hess[i] = std::max(p * (1.0 - p), 1e-16);
    }

    GbdtTree tree;
    std::vector<BuildNode> queue;
    {
      std::vector<std::size_t> all(n);
      for (std::size_t i = 0; i < n; ++i) all[i] = i;
      tree.nodes.push_back(GbdtNode{});
      queue.push_back({std::move(all), 0, 0});
    }

    while (!queue.empty()) {
      BuildNode item = std::move(queue.back());
      queue.pop_back();
      double g_total = 0.0;
      double h_total = 0.0;
      for (std::size_t r : item.rows) {
        g_total += grad[r];
        h_total += hess[r];
      }

      int best_feature = -1;
      std::size_t best_bin = 0;
      double best_gain = 0.0;
      const double parent_score = g_total * g_total / (h_total + detail::k_gbdt_lambda);

      if (item.depth < config.max_depth && item.rows.size() >= 2 * config.min_leaf) {
        std::vector<double> hist_g(binned.n_bins_max);
        std::vector<double> hist_h(binned.n_bins_max);
        std::vector<std::size_t> hist_n(binned.n_bins_max);
        for (std::size_t f = 0; f < n_features; ++f) {
          const std::size_t n_edges = binned.edges[f].size();
          if (n_edges == 0) continue;
          std::fill(hist_g.begin(), hist_g.end(), 0.0);
          std::fill(hist_h.begin(), hist_h.end(), 0.0);
          std::fill(hist_n.begin(), hist_n.end(), std::size_t{0});
          for (std::size_t r : item.rows) {
            const std::uint16_t b = binned.bins[r * n_features + f];
            hist_g[b] += grad[r];
            hist_h[b] += hess[r];
            ++hist_n[b];
          }
          double g_left = 0.0;
          double h_left = 0.0;
          std::size_t n_left = 0;
          for (std::size_t b = 0; b < n_edges; ++b) {
            g_left += hist_g[b];
            h_left += hist_h[b];
            n_left += hist_n[b];
            if (n_left < config.min_leaf) continue;
            if (item.rows.size() - n_left < config.min_leaf) break;
            const double g_right = g_total - g_left;
            const double h_right = h_total - h_left;
            const double gain =
                g_left * g_left / (h_left + detail::k_gbdt_lambda) +
                g_right * g_right / (h_right + detail::k_gbdt_lambda) - parent_score;
            if (gain > best_gain + 1e-12) {
              best_gain = gain;
              best_feature = static_cast<int>(f);
              best_bin = b;
            }
          }
        }
      }

      if (best_feature < 0) {
        tree.nodes[item.node_index].feature = -1;
        tree.nodes[item.node_index].value =
            -config.learning_rate * g_total / (h_total + detail::k_gbdt_lambda);
        continue;
      }

      std::vector<std::size_t> left_rows;
      std::vector<std::size_t> right_rows;
      for (std::size_t r : item.rows) {
        if (binned.bins[r * n_features + static_cast<std::size_t>(best_feature)] <= best_bin)
          left_rows.push_back(r);
        else
          right_rows.push_back(r);
      }

      const int left_index = static_cast<int>(tree.nodes.size());
      tree.nodes.push_back(GbdtNode{});
      const int right_index = static_cast<int>(tree.nodes.size());
      tree.nodes.push_back(GbdtNode{});
      GbdtNode& node = tree.nodes[item.node_index];
      node.feature = best_feature;
      node.threshold = binned.edges[static_cast<std::size_t>(best_feature)][best_bin];
      node.left = left_index;
      node.right = right_index;
      queue.push_back({std::move(left_rows), left_index, item.depth + 1});
      queue.push_back({std::move(right_rows), right_index, item.depth + 1});
    }

    for (std::size_t i = 0; i < n; ++i)
      score[i] += tree.predict(&features[i * n_features]);
    model.trees.push_back(std::move(tree));

    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double p = std::clamp(detail::sigmoid(score[i]), 1e-15, 1.0 - 1e-15);
      loss -= labels[i] != 0 ? std::log(p) : std::log(1.0 - p);
    }
    model.train_loss.push_back(loss / static_cast<double>(n));
  }
  return model;
}

// Sigmoid of the additive log-odds for each row of `features`.
inline std::vector<double> predict_proba(const GbdtModel& model,
                                         const std::vector<double>& features,
                                         std::size_t n_features) {
  if (n_features != model.n_features)
    fail(errc::width_mismatch, "feature width " + std::to_string(n_features) +
                                   " vs model " + std::to_string(model.n_features));
  if (n_features == 0 || features.size() % n_features != 0)
    fail(errc::width_mismatch, "feature matrix shape");
  const std::size_t n = features.size() / n_features;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double z = model.base_score;
    for (const auto& tree : model.trees) z += tree.predict(&features[i * n_features]);
    out[i] = detail::sigmoid(z);
  }
  return out;
}

} // namespace divfuse
