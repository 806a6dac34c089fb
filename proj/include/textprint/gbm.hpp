#pragma once

// From-scratch gradient-boosted regression trees: binary log-loss and
// multiclass softmax boosting with Newton-step leaf values, exhaustive
// midpoint split search and per-node feature subsampling.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "textprint/errors.hpp"
#include "textprint/features.hpp"
#include "textprint/parallel.hpp"
#include "textprint/rng.hpp"

namespace textprint {

enum class MaxFeaturesRule { Sqrt, All, Fraction };

struct TrainConfig {
  double learning_rate = 0.2;
  int n_estimators = 90;
  int max_depth = 8;
  MaxFeaturesRule max_features = MaxFeaturesRule::Sqrt;
  double max_features_fraction = 1.0;  // used when max_features == Fraction
  double subsample = 0.8;
  int min_samples_leaf = 30;
  int min_samples_split = 400;
  std::uint64_t seed = 10;
};

inline void validate(const TrainConfig& c) {
  if (!(c.learning_rate > 0.0)) throw ConfigError("TrainConfig: learning_rate must be > 0");
  if (c.n_estimators < 1) throw ConfigError("TrainConfig: n_estimators must be >= 1");
  if (c.max_depth < 1) throw ConfigError("TrainConfig: max_depth must be >= 1");
  if (!(c.subsample > 0.0 && c.subsample <= 1.0)) {
    throw ConfigError("TrainConfig: subsample must be in (0,1]");
  }
  if (c.min_samples_leaf < 1) throw ConfigError("TrainConfig: min_samples_leaf must be >= 1");
  if (c.min_samples_split < 2) throw ConfigError("TrainConfig: min_samples_split must be >= 2");
  if (c.max_features == MaxFeaturesRule::Fraction &&
      !(c.max_features_fraction > 0.0 && c.max_features_fraction <= 1.0)) {
    throw ConfigError("TrainConfig: max_features_fraction must be in (0,1]");
  }
}

struct RegressionTree {
  struct Node {
    std::int32_t split_col = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0;
  };
  std::vector<Node> nodes;  // nodes[0] is the root

  bool has_internal_node() const {
    for (const auto& n : nodes) {
      if (n.split_col >= 0) return true;
    }
    return false;
  }

  int depth() const {
    if (nodes.empty()) return 0;
    int best = 0;
    std::vector<std::pair<std::int32_t, int>> stack{{0, 0}};
    while (!stack.empty()) {
      auto [idx, d] = stack.back();
      stack.pop_back();
      const Node& n = nodes[static_cast<std::size_t>(idx)];
      if (n.split_col < 0) {
        best = std::max(best, d);
      } else {
        stack.push_back({n.left, d + 1});
        stack.push_back({n.right, d + 1});
      }
    }
    return best;
  }

  // Split semantics: value <= threshold goes left.
  double predict_row(const FeatureMatrix& m, std::size_t row) const {
    std::int32_t cur = 0;
    while (nodes[static_cast<std::size_t>(cur)].split_col >= 0) {
      const Node& n = nodes[static_cast<std::size_t>(cur)];
      cur = m.value(row, static_cast<std::size_t>(n.split_col)) <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(cur)].value;
  }
};

namespace detail {

// Midpoint threshold with a guard against the degenerate rounding case of
// adjacent representable doubles, so `value <= t` always realizes the
// lo/hi partition exactly.
inline double split_threshold(double lo, double hi) {
  double t = (lo + hi) / 2.0;
  if (!(t < hi)) t = lo;
  return t;
}

inline std::size_t feature_draw_count(const TrainConfig& cfg, std::size_t total) {
  switch (cfg.max_features) {
    case MaxFeaturesRule::All:
      return total;
    case MaxFeaturesRule::Sqrt:
      return std::min<std::size_t>(
          total, static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(total)))));
    case MaxFeaturesRule::Fraction:
      return std::clamp<std::size_t>(
          static_cast<std::size_t>(
              std::ceil(cfg.max_features_fraction * static_cast<double>(total))),
          1, total);
  }
  return total;
}

}  // namespace detail

// Fits one regression tree to (residual, hessian) targets over the given
// training rows. Split criterion is squared-error reduction on residuals;
// leaf values are the Newton step sum(residual)/sum(hessian). A fresh
// feature subset is drawn per node. Deterministic given the rng state.
inline RegressionTree fit_regression_tree(const FeatureMatrix& matrix,
                                          const std::vector<std::size_t>& train_rows,
                                          const std::vector<double>& residual,
                                          const std::vector<double>& hessian,
                                          const TrainConfig& cfg, Rng& rng) {
  const std::size_t total_cols = matrix.total_columns();
  RegressionTree tree;

  struct WorkItem {
    std::int32_t node;
    std::vector<std::size_t> rows;
    int depth;
  };

  tree.nodes.emplace_back();
  std::vector<WorkItem> stack;
  stack.push_back({0, train_rows, 0});

  // Gather buffer reused across nodes to keep allocation churn down.
  std::vector<double> values;  // k x n column-major

  struct SlotBest {
    double gain = 0.0;
    double threshold = 0.0;
    bool found = false;
  };
  std::vector<SlotBest> slot_best;

  while (!stack.empty()) {
    WorkItem item = std::move(stack.back());
    stack.pop_back();
    const std::size_t n = item.rows.size();
    const auto node_idx = static_cast<std::size_t>(item.node);

    double sum_r = 0.0, sum_h = 0.0;
    for (std::size_t row : item.rows) {
      sum_r += residual[row];
      sum_h += hessian[row];
    }
    const double leaf_value = sum_h > 0.0 ? sum_r / sum_h : 0.0;
    auto make_leaf = [&] {
      tree.nodes[node_idx].split_col = -1;
      tree.nodes[node_idx].value = leaf_value;
    };

    const bool can_split = item.depth < cfg.max_depth &&
                           n >= static_cast<std::size_t>(cfg.min_samples_split) &&
                           n >= 2 * static_cast<std::size_t>(cfg.min_samples_leaf);
    if (!can_split) {
      make_leaf();
      continue;
    }

    std::vector<std::size_t> candidates;
    const std::size_t draw = detail::feature_draw_count(cfg, total_cols);
    if (draw >= total_cols) {
      candidates.resize(total_cols);
      std::iota(candidates.begin(), candidates.end(), std::size_t{0});
    } else {
      candidates = rng.sample_indices(total_cols, draw);
    }

    // Gather candidate columns densely for this node's rows. Sparse rows
    // merge against the ascending candidate list; dense columns copy direct.
    values.assign(candidates.size() * n, 0.0);
    std::size_t first_dense_slot = candidates.size();
    for (std::size_t s = 0; s < candidates.size(); ++s) {
      if (candidates[s] >= matrix.sparse_columns) {
        first_dense_slot = s;
        break;
      }
    }
    for (std::size_t li = 0; li < n; ++li) {
      const std::size_t row = item.rows[li];
      std::size_t s = 0;
      const auto begin = matrix.row_offsets[row];
      const auto end = matrix.row_offsets[row + 1];
      for (std::size_t k = begin; k < end && s < first_dense_slot; ++k) {
        const std::uint32_t col = matrix.entries[k].first;
        while (s < first_dense_slot && candidates[s] < col) ++s;
        if (s < first_dense_slot && candidates[s] == col) {
          values[s * n + li] = matrix.entries[k].second;
          ++s;
        }
      }
      for (std::size_t ds = first_dense_slot; ds < candidates.size(); ++ds) {
        values[ds * n + li] =
            matrix.dense[row * matrix.dense_columns + (candidates[ds] - matrix.sparse_columns)];
      }
    }

    // Exhaustive threshold scan at midpoints between consecutive distinct
    // sorted values. Small non-negative integer columns (n-gram counts)
    // scan through counting buckets instead of a sort. Candidate columns
    // scan independently, possibly in parallel; the serial reduction below
    // keeps the lowest column index on equal gains, so results do not
    // depend on the thread count.
    const double parent_term = sum_r * sum_r / static_cast<double>(n);
    const auto min_leaf = static_cast<std::size_t>(cfg.min_samples_leaf);
    constexpr double kMaxBucketValue = 4096.0;
    slot_best.assign(candidates.size(), SlotBest{});
    auto scan_slot = [&](std::size_t s) {
      thread_local std::vector<std::pair<double, double>> sorted;  // (value, residual)
      thread_local std::vector<std::uint32_t> bucket_count;
      thread_local std::vector<double> bucket_sum;
      SlotBest& best = slot_best[s];
      auto consider = [&](std::size_t n_left, double gain, double lo, double hi) {
        if (n_left < min_leaf || n - n_left < min_leaf) return;
        if (gain > best.gain) {
          best.gain = gain;
          best.threshold = detail::split_threshold(lo, hi);
          best.found = true;
        }
      };
      const double* column = values.data() + s * n;
      double vmax = 0.0;
      bool bucketable = true;
      for (std::size_t li = 0; li < n; ++li) {
        const double v = column[li];
        if (v < 0.0 || v > kMaxBucketValue || v != std::floor(v)) {
          bucketable = false;
          break;
        }
        vmax = std::max(vmax, v);
      }
      if (bucketable) {
        const auto width = static_cast<std::size_t>(vmax) + 1;
        bucket_count.assign(width, 0);
        bucket_sum.assign(width, 0.0);
        for (std::size_t li = 0; li < n; ++li) {
          const auto b = static_cast<std::size_t>(column[li]);
          ++bucket_count[b];
          bucket_sum[b] += residual[item.rows[li]];
        }
        double left_sum = 0.0;
        std::size_t n_left = 0;
        double prev_value = 0.0;
        bool have_prev = false;
        for (std::size_t v = 0; v < width; ++v) {
          if (bucket_count[v] == 0) continue;
          if (have_prev) {
            const double right_sum = sum_r - left_sum;
            const double gain =
                left_sum * left_sum / static_cast<double>(n_left) +
                right_sum * right_sum / static_cast<double>(n - n_left) - parent_term;
            consider(n_left, gain, prev_value, static_cast<double>(v));
          }
          left_sum += bucket_sum[v];
          n_left += bucket_count[v];
          prev_value = static_cast<double>(v);
          have_prev = true;
        }
      } else {
        sorted.resize(n);
        for (std::size_t li = 0; li < n; ++li) {
          sorted[li] = {column[li], residual[item.rows[li]]};
        }
        std::sort(sorted.begin(), sorted.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        double left_sum = 0.0;
        for (std::size_t i = 1; i < n; ++i) {
          left_sum += sorted[i - 1].second;
          if (sorted[i - 1].first == sorted[i].first) continue;
          const double right_sum = sum_r - left_sum;
          const double gain = left_sum * left_sum / static_cast<double>(i) +
                              right_sum * right_sum / static_cast<double>(n - i) - parent_term;
          consider(i, gain, sorted[i - 1].first, sorted[i].first);
        }
      }
    };
    // Per-node thread spawns only pay off on big nodes; small nodes scan
    // serially. Either path computes identical slot results.
    constexpr std::size_t kParallelScanWork = 1u << 17;
    if (max_threads() > 1 && n * candidates.size() >= kParallelScanWork) {
      parallel_for(candidates.size(), scan_slot);
    } else {
      for (std::size_t s = 0; s < candidates.size(); ++s) scan_slot(s);
    }

    double best_gain = 0.0;
    std::size_t best_slot = 0;
    double best_threshold = 0.0;
    bool found = false;
    for (std::size_t s = 0; s < candidates.size(); ++s) {
      if (slot_best[s].found && slot_best[s].gain > best_gain) {
        best_gain = slot_best[s].gain;
        best_slot = s;
        best_threshold = slot_best[s].threshold;
        found = true;
      }
    }

    if (!found) {
      make_leaf();
      continue;
    }

    std::vector<std::size_t> left_rows, right_rows;
    left_rows.reserve(n);
    right_rows.reserve(n);
    for (std::size_t li = 0; li < n; ++li) {
      if (values[best_slot * n + li] <= best_threshold) {
        left_rows.push_back(item.rows[li]);
      } else {
        right_rows.push_back(item.rows[li]);
      }
    }

    const auto left_idx = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    const auto right_idx = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    RegressionTree::Node& node = tree.nodes[node_idx];
    node.split_col = static_cast<std::int32_t>(candidates[best_slot]);
    node.threshold = best_threshold;
    node.left = left_idx;
    node.right = right_idx;
    // Left subtree is processed first so per-node feature draws are
    // reproducible regardless of tree shape.
    stack.push_back({right_idx, std::move(right_rows), item.depth + 1});
    stack.push_back({left_idx, std::move(left_rows), item.depth + 1});
  }
  return tree;
}

struct GbmModel {
  std::vector<std::string> labels;       // "human" first when present
  std::vector<double> init_scores;       // size 1 for binary, K for multiclass
  std::vector<std::vector<RegressionTree>> trees;  // [iteration][class slot]
  TrainConfig config;
  std::size_t n_columns = 0;
  std::uint64_t vocab_fingerprint = 0;

  std::size_t n_classes() const { return labels.size(); }
  bool binary() const { return labels.size() == 2; }
};

namespace detail {

inline double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline std::vector<std::string> ordered_label_map(const std::vector<std::string>& labels) {
  std::set<std::string> distinct(labels.begin(), labels.end());
  std::vector<std::string> out;
  if (distinct.erase("human") > 0) out.push_back("human");
  out.insert(out.end(), distinct.begin(), distinct.end());
  return out;
}

inline std::vector<int> label_indices(const std::vector<std::string>& labels,
                                      const std::vector<std::string>& label_map) {
  std::map<std::string, int> lookup;
  for (std::size_t i = 0; i < label_map.size(); ++i) {
    lookup[label_map[i]] = static_cast<int>(i);
  }
  std::vector<int> out;
  out.reserve(labels.size());
  for (const auto& l : labels) {
    auto it = lookup.find(l);
    if (it == lookup.end()) throw DataError("label \"" + l + "\" not present in the model");
    out.push_back(it->second);
  }
  return out;
}

inline void check_finite(const FeatureMatrix& m) {
  for (double v : m.dense) {
    if (!std::isfinite(v)) throw DataError("fit: non-finite feature value in dense block");
  }
}

inline std::vector<std::size_t> draw_subsample(std::size_t n, double fraction, Rng& rng) {
  if (fraction >= 1.0) {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    return all;
  }
  const auto count = std::max<std::size_t>(
      1, static_cast<std::size_t>(fraction * static_cast<double>(n)));
  return rng.sample_indices(n, count);
}

}  // namespace detail

inline GbmModel fit_gbm(const FeatureMatrix& matrix, const TrainConfig& config) {
  validate(config);
  if (matrix.rows == 0) throw DataError("fit: empty matrix");
  if (matrix.labels.size() != matrix.rows) throw ConfigError("fit: matrix has no aligned labels");
  detail::check_finite(matrix);

  GbmModel model;
  model.labels = detail::ordered_label_map(matrix.labels);
  if (model.labels.size() < 2) {
    throw DataError("fit: need at least 2 classes, got " + std::to_string(model.labels.size()));
  }
  model.config = config;
  model.n_columns = matrix.total_columns();
  model.vocab_fingerprint = matrix.vocab_fingerprint;

  const std::vector<int> y = detail::label_indices(matrix.labels, model.labels);
  const std::size_t n = matrix.rows;
  const auto k_classes = model.labels.size();
  Rng rng(substream(config.seed, "gbm"));

  if (model.binary()) {
    std::size_t positives = 0;
    for (int yi : y) positives += yi == 1 ? 1u : 0u;
    const double prior = static_cast<double>(positives) / static_cast<double>(n);
    const double init = std::log(prior / (1.0 - prior));
    model.init_scores = {init};

    std::vector<double> score(n, init), residual(n), hess(n);
    for (int it = 0; it < config.n_estimators; ++it) {
      const auto rows = detail::draw_subsample(n, config.subsample, rng);
      for (std::size_t i = 0; i < n; ++i) {
        const double p = detail::sigmoid(score[i]);
        residual[i] = static_cast<double>(y[i]) - p;
        hess[i] = p * (1.0 - p);
      }
      RegressionTree tree = fit_regression_tree(matrix, rows, residual, hess, config, rng);
      for (std::size_t i = 0; i < n; ++i) {
        score[i] += config.learning_rate * tree.predict_row(matrix, i);
      }
      model.trees.push_back({std::move(tree)});
    }
  } else {
    std::vector<std::size_t> class_count(k_classes, 0);
    for (int yi : y) ++class_count[static_cast<std::size_t>(yi)];
    model.init_scores.resize(k_classes);
    for (std::size_t k = 0; k < k_classes; ++k) {
      model.init_scores[k] =
          std::log(static_cast<double>(class_count[k]) / static_cast<double>(n));
    }

    std::vector<std::vector<double>> score(k_classes, std::vector<double>());
    for (std::size_t k = 0; k < k_classes; ++k) score[k].assign(n, model.init_scores[k]);
    std::vector<double> prob(n), residual(n), hess(n), row_max(n), row_norm(n);

    for (int it = 0; it < config.n_estimators; ++it) {
      const auto rows = detail::draw_subsample(n, config.subsample, rng);
      for (std::size_t i = 0; i < n; ++i) {
        double mx = score[0][i];
        for (std::size_t k = 1; k < k_classes; ++k) mx = std::max(mx, score[k][i]);
        double norm = 0.0;
        for (std::size_t k = 0; k < k_classes; ++k) norm += std::exp(score[k][i] - mx);
        row_max[i] = mx;
        row_norm[i] = norm;
      }
      std::vector<RegressionTree> iteration_trees;
      iteration_trees.reserve(k_classes);
      for (std::size_t k = 0; k < k_classes; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
          const double p = std::exp(score[k][i] - row_max[i]) / row_norm[i];
          residual[i] = (y[i] == static_cast<int>(k) ? 1.0 : 0.0) - p;
          hess[i] = p * (1.0 - p);
        }
        RegressionTree tree = fit_regression_tree(matrix, rows, residual, hess, config, rng);
        for (std::size_t i = 0; i < n; ++i) {
          score[k][i] += config.learning_rate * tree.predict_row(matrix, i);
        }
        iteration_trees.push_back(std::move(tree));
      }
      model.trees.push_back(std::move(iteration_trees));
    }
  }
  return model;
}

inline bool fingerprint_mismatch(const GbmModel& model, const FeatureMatrix& matrix) {
  return model.vocab_fingerprint != 0 && matrix.vocab_fingerprint != 0 &&
         model.vocab_fingerprint != matrix.vocab_fingerprint;
}

// Per-document class probabilities, rows summing to 1. Emits a warning when
// the matrix was built from a different vocabulary than the model.
inline std::vector<std::vector<double>> predict_proba(const GbmModel& model,
                                                      const FeatureMatrix& matrix) {
  if (matrix.total_columns() != model.n_columns) {
    throw ConfigError("predict: matrix has " + std::to_string(matrix.total_columns()) +
                      " columns but the model expects " + std::to_string(model.n_columns));
  }
  if (fingerprint_mismatch(model, matrix)) {
    std::cerr << "warning: feature matrix vocabulary fingerprint does not match the model's; "
                 "predictions may be meaningless\n";
  }
  std::vector<std::vector<double>> out(matrix.rows);
  const auto k_classes = model.n_classes();
  parallel_for(matrix.rows, [&](std::size_t i) {
    if (model.binary()) {
      double s = model.init_scores[0];
      for (const auto& iteration : model.trees) {
        s += model.config.learning_rate * iteration[0].predict_row(matrix, i);
      }
      const double p = detail::sigmoid(s);
      out[i] = {1.0 - p, p};
    } else {
      std::vector<double> scores(model.init_scores);
      for (const auto& iteration : model.trees) {
        for (std::size_t k = 0; k < k_classes; ++k) {
          scores[k] += model.config.learning_rate * iteration[k].predict_row(matrix, i);
        }
      }
      double mx = scores[0];
      for (double s : scores) mx = std::max(mx, s);
      double norm = 0.0;
      for (double s : scores) norm += std::exp(s - mx);
      out[i].resize(k_classes);
      for (std::size_t k = 0; k < k_classes; ++k) {
        out[i][k] = std::exp(scores[k] - mx) / norm;
      }
    }
  });
  return out;
}

// Argmax labels; exact ties resolve to the first label in the label map.
inline std::vector<std::string> predict(const GbmModel& model, const FeatureMatrix& matrix) {
  const auto proba = predict_proba(model, matrix);
  std::vector<std::string> out;
  out.reserve(proba.size());
  for (const auto& row : proba) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < row.size(); ++k) {
      if (row[k] > row[best]) best = k;
    }
    out.push_back(model.labels[best]);
  }
  return out;
}

inline constexpr double kProbabilityClip = 1e-12;

// Training log-loss after each boosting iteration, recomputed from the
// stored trees. Useful as an overfitting diagnostic.
inline std::vector<double> staged_training_loss(const GbmModel& model,
                                                const FeatureMatrix& matrix) {
  if (matrix.total_columns() != model.n_columns) {
    throw ConfigError("staged_training_loss: matrix width mismatch");
  }
  const std::vector<int> y = detail::label_indices(matrix.labels, model.labels);
  const std::size_t n = matrix.rows;
  const auto k_classes = model.n_classes();
  std::vector<double> losses;
  losses.reserve(model.trees.size());

  std::vector<std::vector<double>> score(k_classes == 2 ? 1 : k_classes);
  if (model.binary()) {
    score[0].assign(n, model.init_scores[0]);
  } else {
    for (std::size_t k = 0; k < k_classes; ++k) score[k].assign(n, model.init_scores[k]);
  }

  for (const auto& iteration : model.trees) {
    double loss = 0.0;
    if (model.binary()) {
      for (std::size_t i = 0; i < n; ++i) {
        score[0][i] += model.config.learning_rate * iteration[0].predict_row(matrix, i);
      }
      for (std::size_t i = 0; i < n; ++i) {
        double p = detail::sigmoid(score[0][i]);
        p = std::clamp(p, kProbabilityClip, 1.0 - kProbabilityClip);
        loss -= y[i] == 1 ? std::log(p) : std::log(1.0 - p);
      }
    } else {
      for (std::size_t k = 0; k < k_classes; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
          score[k][i] += model.config.learning_rate * iteration[k].predict_row(matrix, i);
        }
      }
      for (std::size_t i = 0; i < n; ++i) {
        double mx = score[0][i];
        for (std::size_t k = 1; k < k_classes; ++k) mx = std::max(mx, score[k][i]);
        double norm = 0.0;
        for (std::size_t k = 0; k < k_classes; ++k) norm += std::exp(score[k][i] - mx);
        double p = std::exp(score[static_cast<std::size_t>(y[i])][i] - mx) / norm;
        p = std::clamp(p, kProbabilityClip, 1.0 - kProbabilityClip);
        loss -= std::log(p);
      }
    }
    losses.push_back(loss / static_cast<double>(n));
  }
  return losses;
}

inline constexpr int kModelFormatVersion = 1;

namespace detail {

inline nlohmann::json tree_to_json(const RegressionTree& tree) {
  nlohmann::json split_col = nlohmann::json::array();
  nlohmann::json threshold = nlohmann::json::array();
  nlohmann::json left = nlohmann::json::array();
  nlohmann::json right = nlohmann::json::array();
  nlohmann::json value = nlohmann::json::array();
  for (const auto& n : tree.nodes) {
    split_col.push_back(n.split_col);
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
    value.push_back(n.value);
  }
  return {{"split_col", split_col},
          {"threshold", threshold},
          {"left", left},
          {"right", right},
          {"value", value}};
}

inline RegressionTree tree_from_json(const nlohmann::json& j) {
  RegressionTree tree;
  const auto& split_col = j.at("split_col");
  const auto& threshold = j.at("threshold");
  const auto& left = j.at("left");
  const auto& right = j.at("right");
  const auto& value = j.at("value");
  const std::size_t count = split_col.size();
  if (threshold.size() != count || left.size() != count || right.size() != count ||
      value.size() != count) {
    throw DataError("model file: inconsistent tree arrays");
  }
  tree.nodes.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    tree.nodes[i].split_col = split_col[i].get<std::int32_t>();
    tree.nodes[i].threshold = threshold[i].get<double>();
    tree.nodes[i].left = left[i].get<std::int32_t>();
    tree.nodes[i].right = right[i].get<std::int32_t>();
    tree.nodes[i].value = value[i].get<double>();
  }
  return tree;
}

inline std::string max_features_name(MaxFeaturesRule rule) {
  switch (rule) {
    case MaxFeaturesRule::Sqrt:
      return "sqrt";
    case MaxFeaturesRule::All:
      return "all";
    case MaxFeaturesRule::Fraction:
      return "fraction";
  }
  return "sqrt";
}

inline MaxFeaturesRule max_features_from_name(const std::string& name) {
  if (name == "sqrt") return MaxFeaturesRule::Sqrt;
  if (name == "all") return MaxFeaturesRule::All;
  if (name == "fraction") return MaxFeaturesRule::Fraction;
  throw DataError("unknown max_features rule: " + name);
}

}  // namespace detail

inline void save_gbm(const GbmModel& model, const std::string& path) {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& iteration : model.trees) {
    nlohmann::json per_class = nlohmann::json::array();
    for (const auto& tree : iteration) per_class.push_back(detail::tree_to_json(tree));
    trees.push_back(std::move(per_class));
  }
  nlohmann::json j = {
      {"version", kModelFormatVersion},
      {"labels", model.labels},
      {"init_scores", model.init_scores},
      {"n_columns", model.n_columns},
      {"vocab_fingerprint", model.vocab_fingerprint},
      {"config",
       {{"learning_rate", model.config.learning_rate},
        {"n_estimators", model.config.n_estimators},
        {"max_depth", model.config.max_depth},
        {"max_features", detail::max_features_name(model.config.max_features)},
        {"max_features_fraction", model.config.max_features_fraction},
        {"subsample", model.config.subsample},
        {"min_samples_leaf", model.config.min_samples_leaf},
        {"min_samples_split", model.config.min_samples_split},
        {"seed", model.config.seed}}},
      {"trees", trees}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model file: " + path);
  out << j.dump() << '\n';
}

inline GbmModel load_gbm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed model file " + path + ": " + e.what());
  }
  if (!j.contains("version") || j["version"].get<int>() != kModelFormatVersion) {
    throw DataError("model file " + path + ": unsupported version");
  }
  GbmModel model;
  try {
    model.labels = j.at("labels").get<std::vector<std::string>>();
    model.init_scores = j.at("init_scores").get<std::vector<double>>();
    model.n_columns = j.at("n_columns").get<std::size_t>();
    model.vocab_fingerprint = j.at("vocab_fingerprint").get<std::uint64_t>();
    const auto& c = j.at("config");
    model.config.learning_rate = c.at("learning_rate").get<double>();
    model.config.n_estimators = c.at("n_estimators").get<int>();
    model.config.max_depth = c.at("max_depth").get<int>();
    model.config.max_features = detail::max_features_from_name(c.at("max_features").get<std::string>());
    model.config.max_features_fraction = c.at("max_features_fraction").get<double>();
    model.config.subsample = c.at("subsample").get<double>();
    model.config.min_samples_leaf = c.at("min_samples_leaf").get<int>();
    model.config.min_samples_split = c.at("min_samples_split").get<int>();
    model.config.seed = c.at("seed").get<std::uint64_t>();
    for (const auto& iteration : j.at("trees")) {
      std::vector<RegressionTree> per_class;
      for (const auto& tj : iteration) per_class.push_back(detail::tree_from_json(tj));
      model.trees.push_back(std::move(per_class));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed model file " + path + ": " + e.what());
  }
  return model;
}

}  // namespace textprint
