#pragma once

// Metrics, bootstrap confidence intervals, and the evaluation protocols:
// in-domain, out-of-domain, out-of-model, family transfer, and multiclass
// author identification.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "textprint/corpus.hpp"
#include "textprint/errors.hpp"
#include "textprint/features.hpp"
#include "textprint/gbm.hpp"
#include "textprint/parallel.hpp"
#include "textprint/rng.hpp"

namespace textprint {

inline constexpr std::size_t kDefaultBootstrapResamples = 10000;
inline constexpr double kDefaultBootstrapLevel = 0.95;

struct ConfidenceInterval {
  double lo = 0.0;
  double hi = 0.0;
  double level = kDefaultBootstrapLevel;
  std::size_t discarded = 0;  // resamples where the metric was undefined
};

struct MetricsReport {
  double accuracy = 0.0;
  double f1 = 0.0;
  double auroc = 0.0;
  double human_rec = 0.0;
  double machine_rec = 0.0;
  double avg_rec = 0.0;
  std::string positive_label;
  std::map<std::string, std::map<std::string, std::size_t>> confusion;  // gold -> predicted
  std::map<std::string, ConfidenceInterval> ci;
};

// Mann-Whitney AUROC with average ranks for tied scores.
inline double auroc(const std::vector<int>& gold_positive, const std::vector<double>& scores) {
  if (gold_positive.size() != scores.size()) throw ConfigError("auroc: length mismatch");
  std::size_t n_pos = 0;
  for (int g : gold_positive) n_pos += g ? 1u : 0u;
  const std::size_t n_neg = gold_positive.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw DataError("auroc: gold labels contain a single class");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (std::size_t k = i; k <= j; ++k) {
      if (gold_positive[order[k]]) rank_sum_pos += avg_rank;
    }
    i = j + 1;
  }
  const double np = static_cast<double>(n_pos);
  const double nn = static_cast<double>(n_neg);
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

namespace detail {

struct BinaryLabels {
  std::string positive;  // conventionally the machine class
  std::string negative;  // conventionally "human"
};

inline BinaryLabels resolve_binary_labels(const std::vector<std::string>& gold,
                                          const std::vector<std::string>& predicted,
                                          const std::string& positive_class) {
  std::set<std::string> labels(gold.begin(), gold.end());
  labels.insert(predicted.begin(), predicted.end());
  if (labels.size() > 2) {
    throw DataError("compute_metrics: more than 2 classes; use the multiclass path");
  }
  if (labels.empty()) throw DataError("compute_metrics: no labels");
  BinaryLabels out;
  if (!positive_class.empty()) {
    if (!labels.count(positive_class) && labels.size() >= 2) {
      throw ConfigError("compute_metrics: positive class \"" + positive_class +
                        "\" not present in the labels");
    }
    out.positive = positive_class;
    for (const auto& l : labels) {
      if (l != positive_class) out.negative = l;
    }
    if (out.negative.empty()) out.negative = "human";
  } else if (labels.count("human")) {
    out.negative = "human";
    for (const auto& l : labels) {
      if (l != "human") out.positive = l;
    }
    if (out.positive.empty()) {
      throw DataError("compute_metrics: only the \"human\" class is present");
    }
  } else {
    throw ConfigError(
        "compute_metrics: no \"human\" label found; pass the positive class explicitly");
  }
  return out;
}

}  // namespace detail

// Binary classification metrics. F1 is for the positive (machine) class
// with the 0/0 -> 0 convention; AvgRec is the mean of the two class recalls.
inline MetricsReport compute_metrics(const std::vector<std::string>& gold,
                                     const std::vector<std::string>& predicted,
                                     const std::vector<double>& scores,
                                     const std::string& positive_class = "") {
  if (gold.empty()) throw DataError("compute_metrics: empty inputs");
  if (gold.size() != predicted.size() || gold.size() != scores.size()) {
    throw ConfigError("compute_metrics: gold/predicted/scores lengths differ");
  }
  const auto binary = detail::resolve_binary_labels(gold, predicted, positive_class);

  MetricsReport report;
  report.positive_label = binary.positive;
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    ++report.confusion[gold[i]][predicted[i]];
    const bool gold_pos = gold[i] == binary.positive;
    const bool pred_pos = predicted[i] == binary.positive;
    if (gold_pos && pred_pos) ++tp;
    if (!gold_pos && pred_pos) ++fp;
    if (gold_pos && !pred_pos) ++fn;
    if (!gold_pos && !pred_pos) ++tn;
  }
  const auto total = static_cast<double>(gold.size());
  report.accuracy = static_cast<double>(tp + tn) / total;
  const double precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  const double recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  report.f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;

  // Recall of the human class and the machine class. The negative label
  // stands in for "human" when that name is absent.
  const std::string human_label = binary.negative;
  std::size_t human_total = 0, human_hit = 0, machine_total = 0, machine_hit = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] == human_label) {
      ++human_total;
      if (predicted[i] == gold[i]) ++human_hit;
    } else {
      ++machine_total;
      if (predicted[i] == gold[i]) ++machine_hit;
    }
  }
  report.human_rec =
      human_total > 0 ? static_cast<double>(human_hit) / static_cast<double>(human_total) : 0.0;
  report.machine_rec = machine_total > 0
                           ? static_cast<double>(machine_hit) / static_cast<double>(machine_total)
                           : 0.0;
  report.avg_rec = (report.human_rec + report.machine_rec) / 2.0;

  std::vector<int> gold01;
  gold01.reserve(gold.size());
  for (const auto& g : gold) gold01.push_back(g == binary.positive ? 1 : 0);
  report.auroc = auroc(gold01, scores);
  return report;
}

namespace detail {

// Metric over one (gold, predicted, scores) sample; nullopt when undefined.
inline std::optional<double> metric_value(const std::string& metric,
                                          const std::vector<std::string>& gold,
                                          const std::vector<std::string>& predicted,
                                          const std::vector<double>& scores,
                                          const BinaryLabels& binary) {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const bool gold_pos = gold[i] == binary.positive;
    const bool pred_pos = predicted[i] == binary.positive;
    if (gold_pos && pred_pos) ++tp;
    if (!gold_pos && pred_pos) ++fp;
    if (gold_pos && !pred_pos) ++fn;
    if (!gold_pos && !pred_pos) ++tn;
  }
  const auto total = static_cast<double>(gold.size());
  if (metric == "accuracy") return static_cast<double>(tp + tn) / total;
  if (metric == "f1") {
    const double p = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    const double r = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
  }
  if (metric == "auroc") {
    if (tp + fn == 0 || fp + tn == 0) return std::nullopt;
    std::vector<int> gold01;
    gold01.reserve(gold.size());
    for (const auto& g : gold) gold01.push_back(g == binary.positive ? 1 : 0);
    return auroc(gold01, scores);
  }
  if (metric == "human_rec" || metric == "machine_rec" || metric == "avg_rec") {
    const std::size_t human_total = fp + tn;
    const std::size_t machine_total = tp + fn;
    if (metric == "human_rec") {
      if (human_total == 0) return std::nullopt;
      return static_cast<double>(tn) / static_cast<double>(human_total);
    }
    if (metric == "machine_rec") {
      if (machine_total == 0) return std::nullopt;
      return static_cast<double>(tp) / static_cast<double>(machine_total);
    }
    if (human_total == 0 || machine_total == 0) return std::nullopt;
    return (static_cast<double>(tn) / static_cast<double>(human_total) +
            static_cast<double>(tp) / static_cast<double>(machine_total)) /
           2.0;
  }
  throw ConfigError("unknown metric \"" + metric + "\"");
}

}  // namespace detail

// Percentile bootstrap over the test triples; the model is never retrained.
// Resamples where the metric is undefined are discarded and tallied.
inline ConfidenceInterval bootstrap_ci(const std::vector<std::string>& gold,
                                       const std::vector<std::string>& predicted,
                                       const std::vector<double>& scores,
                                       const std::string& metric,
                                       std::size_t n_resamples = kDefaultBootstrapResamples,
                                       double level = kDefaultBootstrapLevel,
                                       std::uint64_t seed = 0,
                                       const std::string& positive_class = "") {
  if (n_resamples < 1) throw ConfigError("bootstrap_ci: n_resamples must be >= 1");
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("bootstrap_ci: level must be in (0,1)");
  if (gold.empty()) throw DataError("bootstrap_ci: empty inputs");
  if (gold.size() != predicted.size() || gold.size() != scores.size()) {
    throw ConfigError("bootstrap_ci: input lengths differ");
  }
  const auto binary = detail::resolve_binary_labels(gold, predicted, positive_class);
  const std::size_t n = gold.size();

  std::vector<std::optional<double>> values(n_resamples);
  parallel_for(n_resamples, [&](std::size_t r) {
    Rng rng(substream(seed, "bootstrap", r));
    std::vector<std::string> g, p;
    std::vector<double> s;
    g.reserve(n);
    p.reserve(n);
    s.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto pick = static_cast<std::size_t>(rng.below(n));
      g.push_back(gold[pick]);
      p.push_back(predicted[pick]);
      s.push_back(scores[pick]);
    }
    values[r] = detail::metric_value(metric, g, p, s, binary);
  });

  std::vector<double> kept;
  kept.reserve(n_resamples);
  std::size_t discarded = 0;
  for (const auto& v : values) {
    if (v.has_value()) {
      kept.push_back(*v);
    } else {
      ++discarded;
    }
  }
  if (kept.empty()) throw DataError("bootstrap_ci: every resample left the metric undefined");
  std::sort(kept.begin(), kept.end());
  auto quantile = [&](double q) {
    const auto idx = static_cast<std::size_t>(
        std::llround(q * static_cast<double>(kept.size() - 1)));
    return kept[std::min(idx, kept.size() - 1)];
  };
  ConfidenceInterval ci;
  ci.level = level;
  ci.lo = quantile((1.0 - level) / 2.0);
  ci.hi = quantile(1.0 - (1.0 - level) / 2.0);
  ci.discarded = discarded;
  return ci;
}

// Shared configuration for the end-to-end protocols.
struct PipelineSpec {
  FeatureSpec features;
  TrainConfig train;
  double test_fraction = 0.2;
  std::size_t balance_cap = kDefaultBalanceCap;
  std::uint64_t seed = 10;
  const TaggerModel* tagger = nullptr;
  std::string positive_label;        // default: the non-human class
  std::size_t bootstrap_resamples = 0;  // 0 disables confidence intervals
  double bootstrap_level = kDefaultBootstrapLevel;
};

struct PipelineRun {
  Vocabulary vocab;
  GbmModel model;
  MetricsReport report;
  Corpus train;
  Corpus test;
  std::unordered_set<std::string> train_ids;
};

namespace detail {

inline MetricsReport evaluate_on(const GbmModel& model, const Vocabulary& vocab,
                                 const PipelineSpec& spec, const Corpus& test,
                                 std::vector<std::string>* out_gold = nullptr,
                                 std::vector<std::string>* out_predicted = nullptr,
                                 std::vector<double>* out_scores = nullptr) {
  const FeatureMatrix matrix = vectorize(test, vocab, spec.features, spec.tagger);
  const auto proba = predict_proba(model, matrix);
  const auto predicted = predict(model, matrix);
  // Score column of the positive class; the machine class sits at index 1
  // because the label map puts "human" first.
  std::size_t score_col = 1;
  if (!spec.positive_label.empty()) {
    for (std::size_t k = 0; k < model.labels.size(); ++k) {
      if (model.labels[k] == spec.positive_label) score_col = k;
    }
  }
  std::vector<double> scores;
  scores.reserve(proba.size());
  for (const auto& row : proba) scores.push_back(row[score_col]);
  const auto report = compute_metrics(matrix.labels, predicted, scores, spec.positive_label);
  if (out_gold) *out_gold = matrix.labels;
  if (out_predicted) *out_predicted = predicted;
  if (out_scores) *out_scores = scores;
  return report;
}

inline void attach_bootstrap(MetricsReport& report, const PipelineSpec& spec,
                             const std::vector<std::string>& gold,
                             const std::vector<std::string>& predicted,
                             const std::vector<double>& scores) {
  if (spec.bootstrap_resamples == 0) return;
  static const std::vector<std::string> kMetrics = {"accuracy",    "f1",         "auroc",
                                                    "human_rec",   "machine_rec", "avg_rec"};
  for (const auto& metric : kMetrics) {
    report.ci[metric] =
        bootstrap_ci(gold, predicted, scores, metric, spec.bootstrap_resamples,
                     spec.bootstrap_level, substream(spec.seed, "bootstrap-" + metric),
                     spec.positive_label);
  }
}

// balance -> random split -> vocabulary on train -> fit -> evaluate on test.
inline PipelineRun run_pipeline(const Corpus& corpus, const PipelineSpec& spec) {
  std::set<std::string> labels;
  for (const auto& doc : corpus.docs) labels.insert(doc.label);
  if (labels.size() != 2) {
    throw DataError("binary protocol: need exactly 2 label classes, got " +
                    std::to_string(labels.size()) + " (collapse labels first)");
  }
  const Corpus balanced = downsample_balance(corpus, spec.balance_cap, substream(spec.seed, "balance"));
  SplitSpec split;
  split.mode = SplitMode::RandomHoldout;
  split.test_fraction = spec.test_fraction;
  split.seed = substream(spec.seed, "split");
  auto [train, test] = partition(balanced, split);

  PipelineRun run;
  run.vocab = build_vocabulary(train, spec.features, spec.tagger);
  const FeatureMatrix train_matrix = vectorize(train, run.vocab, spec.features, spec.tagger);
  TrainConfig cfg = spec.train;
  cfg.seed = substream(spec.seed, "gbm");
  run.model = fit_gbm(train_matrix, cfg);

  std::vector<std::string> gold, predicted;
  std::vector<double> scores;
  run.report = evaluate_on(run.model, run.vocab, spec, test, &gold, &predicted, &scores);
  attach_bootstrap(run.report, spec, gold, predicted, scores);
  for (const auto& doc : train.docs) run.train_ids.insert(doc.id);
  run.train = std::move(train);
  run.test = std::move(test);
  return run;
}

inline Corpus filter_corpus(const Corpus& corpus, const std::string& name, auto&& keep) {
  Corpus out;
  out.name = name;
  for (const auto& doc : corpus.docs) {
    if (keep(doc)) out.docs.push_back(doc);
  }
  return out;
}

inline Corpus collapse_to_machine(const Corpus& corpus) {
  Corpus out = corpus;
  for (auto& doc : out.docs) {
    if (doc.label != "human") doc.label = "machine";
  }
  return out;
}

}  // namespace detail

// In-domain protocol: balance, random holdout split, vocabulary and model
// fit on train, metrics on test. Fully seeded end to end.
inline MetricsReport protocol_in_domain(const Corpus& corpus, const PipelineSpec& spec) {
  return detail::run_pipeline(corpus, spec).report;
}

struct TransferReport {
  MetricsReport baseline;
  MetricsReport condition;
  std::string condition_name;
  std::map<std::string, double> deltas;  // condition - baseline, per metric
};

namespace detail {

inline std::map<std::string, double> metric_deltas(const MetricsReport& baseline,
                                                   const MetricsReport& condition) {
  return {{"accuracy", condition.accuracy - baseline.accuracy},
          {"f1", condition.f1 - baseline.f1},
          {"auroc", condition.auroc - baseline.auroc},
          {"human_rec", condition.human_rec - baseline.human_rec},
          {"machine_rec", condition.machine_rec - baseline.machine_rec},
          {"avg_rec", condition.avg_rec - baseline.avg_rec}};
}

}  // namespace detail

// Out-of-domain protocol: the baseline model is trained and tested on the
// non-holdout domains, then re-evaluated unchanged on the held-out domains.
inline TransferReport protocol_ood(const Corpus& corpus,
                                   const std::vector<std::string>& holdout_domains,
                                   const PipelineSpec& spec) {
  if (holdout_domains.empty()) throw ConfigError("protocol_ood: no holdout domains given");
  std::set<std::string> available;
  for (const auto& doc : corpus.docs) {
    if (!doc.domain.empty()) available.insert(doc.domain);
  }
  if (available.size() < 2) throw DataError("protocol_ood: corpus needs at least 2 domains");
  const std::set<std::string> holdout(holdout_domains.begin(), holdout_domains.end());
  for (const auto& d : holdout) {
    if (!available.count(d)) {
      std::string keys;
      for (const auto& a : available) keys += (keys.empty() ? "" : ", ") + a;
      throw DataError("protocol_ood: unknown domain \"" + d + "\"; available: " + keys);
    }
  }

  const Corpus in_domain = detail::filter_corpus(
      corpus, corpus.name + "/in-domain",
      [&](const Document& d) { return holdout.count(d.domain) == 0; });
  const Corpus out_domain = detail::filter_corpus(
      corpus, corpus.name + "/held-out-domain",
      [&](const Document& d) { return holdout.count(d.domain) > 0; });
  if (in_domain.empty() || out_domain.empty()) {
    throw DataError("protocol_ood: holdout leaves an empty side");
  }

  auto run = detail::run_pipeline(in_domain, spec);
  // Balance the held-out slice so its metrics are comparable to the baseline.
  const Corpus condition_set =
      downsample_balance(out_domain, spec.balance_cap, substream(spec.seed, "ood-balance"));
  TransferReport report;
  report.baseline = run.report;
  report.condition = detail::evaluate_on(run.model, run.vocab, spec, condition_set);
  report.condition_name = "out-of-domain";
  report.deltas = detail::metric_deltas(report.baseline, report.condition);
  return report;
}

// Out-of-model protocol: train human-vs-train_model, evaluate on human vs a
// held-out generator. The machine-recall delta is the headline number.
inline TransferReport protocol_oom(const Corpus& corpus, const std::string& train_model,
                                   const std::string& test_model, const PipelineSpec& spec) {
  std::set<std::string> models;
  for (const auto& doc : corpus.docs) {
    if (!doc.model.empty()) models.insert(doc.model);
  }
  for (const auto& m : {train_model, test_model}) {
    if (!models.count(m)) {
      std::string keys;
      for (const auto& a : models) keys += (keys.empty() ? "" : ", ") + a;
      throw DataError("protocol_oom: unknown model \"" + m + "\"; available: " + keys);
    }
  }
  const Corpus humans = detail::filter_corpus(corpus, "humans", [](const Document& d) {
    return d.label == "human";
  });
  if (humans.empty()) throw DataError("protocol_oom: corpus has no human documents");

  Corpus train_slice = humans;
  train_slice.name = corpus.name + "/human-vs-" + train_model;
  for (const auto& doc : corpus.docs) {
    if (doc.label != "human" && doc.model == train_model) train_slice.docs.push_back(doc);
  }
  auto run = detail::run_pipeline(detail::collapse_to_machine(train_slice), spec);

  // Condition test set: the held-out humans from the baseline test split
  // plus unseen documents from the test model, balanced to the human count.
  Corpus condition;
  condition.name = corpus.name + "/human-vs-" + test_model;
  std::size_t n_human_test = 0;
  for (const auto& doc : run.test.docs) {
    if (doc.label == "human") {
      condition.docs.push_back(doc);
      ++n_human_test;
    }
  }
  std::vector<const Document*> candidates;
  for (const auto& doc : corpus.docs) {
    if (doc.label != "human" && doc.model == test_model && !run.train_ids.count(doc.id)) {
      candidates.push_back(&doc);
    }
  }
  if (candidates.empty()) {
    throw DataError("protocol_oom: no unseen documents for test model \"" + test_model + "\"");
  }
  const std::size_t take = std::min(n_human_test, candidates.size());
  Rng rng(substream(spec.seed, "oom-sample"));
  for (std::size_t pick : rng.sample_indices(candidates.size(), take)) {
    Document doc = *candidates[pick];
    doc.label = "machine";
    condition.docs.push_back(std::move(doc));
  }

  TransferReport report;
  report.baseline = run.report;
  report.condition = detail::evaluate_on(run.model, run.vocab, spec, condition);
  report.condition_name = "out-of-model:" + test_model;
  report.deltas = detail::metric_deltas(report.baseline, report.condition);
  return report;
}

struct FamilyTransferReport {
  TransferReport same_family_diff_domain;
  TransferReport diff_family_same_domain;
  std::size_t trials = 0;
};

inline constexpr std::size_t kDefaultFamilyTrials = 7;

namespace detail {

inline MetricsReport mean_report(const std::vector<MetricsReport>& reports) {
  MetricsReport mean;
  const auto n = static_cast<double>(reports.size());
  for (const auto& r : reports) {
    mean.accuracy += r.accuracy / n;
    mean.f1 += r.f1 / n;
    mean.auroc += r.auroc / n;
    mean.human_rec += r.human_rec / n;
    mean.machine_rec += r.machine_rec / n;
    mean.avg_rec += r.avg_rec / n;
  }
  if (!reports.empty()) mean.positive_label = reports.front().positive_label;
  return mean;
}

}  // namespace detail

// Family-transfer protocol. Per trial: train on one model's text in all but
// one domain, then compare the drop against (a) a same-family model in the
// held-out domain and (b) a different-family model in the seen domains.
// Reports per-metric deltas averaged over the trials.
inline FamilyTransferReport protocol_family(const Corpus& corpus, std::size_t trials,
                                            std::uint64_t seed, const PipelineSpec& spec) {
  if (trials == 0) throw ConfigError("protocol_family: trials must be >= 1");

  struct ModelInfo {
    std::string name;
    std::string family;
    std::set<std::string> domains;
  };
  std::map<std::string, ModelInfo> models;
  std::set<std::string> domains;
  for (const auto& doc : corpus.docs) {
    if (doc.label == "human" || doc.model.empty()) continue;
    auto& info = models[doc.model];
    info.name = doc.model;
    if (info.family.empty()) info.family = doc.model_family;
    if (!doc.domain.empty()) {
      info.domains.insert(doc.domain);
      domains.insert(doc.domain);
    }
  }
  std::map<std::string, std::vector<std::string>> by_family;
  for (const auto& [name, info] : models) by_family[info.family].push_back(name);
  if (domains.size() < 2) throw DataError("protocol_family: corpus needs at least 2 domains");

  // Eligible anchors: models with a same-family partner and a different
  // family to compare against.
  std::vector<std::string> eligible;
  for (const auto& [name, info] : models) {
    if (info.family.empty()) continue;
    if (by_family[info.family].size() < 2) continue;
    if (by_family.size() < 2) continue;
    eligible.push_back(name);
  }
  if (eligible.empty()) {
    throw DataError("protocol_family: no model has both a same-family partner and a "
                    "different-family counterpart");
  }

  Rng rng(substream(seed, "family"));
  std::vector<MetricsReport> baselines, same_family, diff_family;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const std::string anchor = eligible[static_cast<std::size_t>(rng.below(eligible.size()))];
    const ModelInfo& anchor_info = models[anchor];

    std::vector<std::string> partners;
    for (const auto& name : by_family[anchor_info.family]) {
      if (name != anchor) partners.push_back(name);
    }
    const std::string partner = partners[static_cast<std::size_t>(rng.below(partners.size()))];

    std::vector<std::string> outsiders;
    for (const auto& [name, info] : models) {
      if (!info.family.empty() && info.family != anchor_info.family) outsiders.push_back(name);
    }
    if (outsiders.empty()) throw DataError("protocol_family: no different-family model");
    const std::string outsider = outsiders[static_cast<std::size_t>(rng.below(outsiders.size()))];

    // Held-out domain: must exist for the partner and leave the anchor with
    // at least one training domain.
    std::vector<std::string> holdout_options;
    for (const auto& d : models[partner].domains) {
      bool anchor_has_other = false;
      for (const auto& ad : anchor_info.domains) {
        if (ad != d) anchor_has_other = true;
      }
      if (anchor_has_other) holdout_options.push_back(d);
    }
    if (holdout_options.empty()) {
      throw DataError("protocol_family: no valid held-out domain for anchor " + anchor);
    }
    const std::string held_domain =
        holdout_options[static_cast<std::size_t>(rng.below(holdout_options.size()))];

    PipelineSpec trial_spec = spec;
    trial_spec.seed = substream(seed, "family-trial", trial);

    Corpus train_slice = detail::filter_corpus(corpus, "trial-train", [&](const Document& d) {
      if (d.label == "human") return d.domain != held_domain;
      return d.model == anchor && d.domain != held_domain;
    });
    auto run = detail::run_pipeline(detail::collapse_to_machine(train_slice), trial_spec);

    auto build_condition = [&](const std::string& model_name, bool in_held_domain,
                               std::uint64_t salt) {
      Corpus condition;
      condition.name = "condition";
      std::size_t n_human = 0;
      for (const auto& doc : run.test.docs) {
        if (doc.label == "human") {
          condition.docs.push_back(doc);
          ++n_human;
        }
      }
      std::vector<const Document*> candidates;
      for (const auto& doc : corpus.docs) {
        if (doc.label == "human" || doc.model != model_name) continue;
        const bool held = doc.domain == held_domain;
        if (held != in_held_domain) continue;
        if (run.train_ids.count(doc.id)) continue;
        candidates.push_back(&doc);
      }
      if (candidates.empty()) {
        throw DataError("protocol_family: no condition documents for model " + model_name);
      }
      Rng pick_rng(substream(trial_spec.seed, "family-condition", salt));
      const std::size_t take = std::min(n_human, candidates.size());
      for (std::size_t pick : pick_rng.sample_indices(candidates.size(), take)) {
        Document doc = *candidates[pick];
        doc.label = "machine";
        condition.docs.push_back(std::move(doc));
      }
      return detail::evaluate_on(run.model, run.vocab, trial_spec, condition);
    };

    baselines.push_back(run.report);
    same_family.push_back(build_condition(partner, true, 1));
    diff_family.push_back(build_condition(outsider, false, 2));
  }

  FamilyTransferReport out;
  out.trials = trials;
  out.same_family_diff_domain.baseline = detail::mean_report(baselines);
  out.same_family_diff_domain.condition = detail::mean_report(same_family);
  out.same_family_diff_domain.condition_name = "same-family|different-domain";
  out.same_family_diff_domain.deltas = detail::metric_deltas(
      out.same_family_diff_domain.baseline, out.same_family_diff_domain.condition);
  out.diff_family_same_domain.baseline = detail::mean_report(baselines);
  out.diff_family_same_domain.condition = detail::mean_report(diff_family);
  out.diff_family_same_domain.condition_name = "different-family|same-domain";
  out.diff_family_same_domain.deltas = detail::metric_deltas(
      out.diff_family_same_domain.baseline, out.diff_family_same_domain.condition);
  return out;
}

struct MulticlassReport {
  std::vector<std::string> labels;
  std::map<std::string, double> per_class_f1;  // one-vs-rest
  double macro_f1 = 0.0;
  std::map<std::string, std::map<std::string, std::size_t>> confusion;  // gold -> predicted
};

// One-vs-rest F1 per class from a multiclass confusion matrix.
inline MulticlassReport compute_multiclass_metrics(const std::vector<std::string>& gold,
                                                   const std::vector<std::string>& predicted) {
  if (gold.empty() || gold.size() != predicted.size()) {
    throw ConfigError("compute_multiclass_metrics: bad input lengths");
  }
  MulticlassReport report;
  std::set<std::string> labels(gold.begin(), gold.end());
  labels.insert(predicted.begin(), predicted.end());
  report.labels.assign(labels.begin(), labels.end());
  for (std::size_t i = 0; i < gold.size(); ++i) ++report.confusion[gold[i]][predicted[i]];

  double sum_f1 = 0.0;
  for (const auto& label : report.labels) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      const bool g = gold[i] == label;
      const bool p = predicted[i] == label;
      if (g && p) ++tp;
      if (!g && p) ++fp;
      if (g && !p) ++fn;
    }
    const double precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    const double recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    const double f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    report.per_class_f1[label] = f1;
    sum_f1 += f1;
  }
  report.macro_f1 = sum_f1 / static_cast<double>(report.labels.size());
  return report;
}

// Multiclass author-identification protocol over >= 3 label classes.
inline MulticlassReport multiclass_report(const Corpus& corpus, const PipelineSpec& spec) {
  std::set<std::string> labels;
  for (const auto& doc : corpus.docs) labels.insert(doc.label);
  if (labels.size() < 3) {
    throw DataError("multiclass_report: need >= 3 classes, got " + std::to_string(labels.size()) +
                    "; use the binary protocol instead");
  }
  const Corpus balanced =
      downsample_balance(corpus, spec.balance_cap, substream(spec.seed, "balance"));
  SplitSpec split;
  split.mode = SplitMode::RandomHoldout;
  split.test_fraction = spec.test_fraction;
  split.seed = substream(spec.seed, "split");
  auto [train, test] = partition(balanced, split);

  const Vocabulary vocab = build_vocabulary(train, spec.features, spec.tagger);
  const FeatureMatrix train_matrix = vectorize(train, vocab, spec.features, spec.tagger);
  TrainConfig cfg = spec.train;
  cfg.seed = substream(spec.seed, "gbm");
  const GbmModel model = fit_gbm(train_matrix, cfg);

  const FeatureMatrix test_matrix = vectorize(test, vocab, spec.features, spec.tagger);
  const auto predicted = predict(model, test_matrix);
  return compute_multiclass_metrics(test_matrix.labels, predicted);
}

}  // namespace textprint
