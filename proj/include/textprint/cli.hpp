#pragma once

// Command-line entry point: wires corpus ingestion, the tagger, feature
// extraction, GBM training and the evaluation protocols into reproducible,
// config-driven pipelines. Exit codes: 0 success, 1 usage error, 2 data
// error, 3 internal error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "textprint/corpus.hpp"
#include "textprint/errors.hpp"
#include "textprint/eval.hpp"
#include "textprint/features.hpp"
#include "textprint/fingerprint.hpp"
#include "textprint/gbm.hpp"
#include "textprint/parallel.hpp"
#include "textprint/report_io.hpp"
#include "textprint/textproc.hpp"
#include "textprint/version.hpp"

namespace textprint::cli {

inline constexpr int kRunConfigVersion = 1;

// Everything a pipeline needs; config file values seed these defaults and
// command-line flags override them.
struct RunConfig {
  std::uint64_t seed = 10;
  std::size_t threads = 1;
  FeatureSpec features;
  TrainConfig train;
  double test_fraction = 0.2;
  std::size_t balance_cap = kDefaultBalanceCap;
  std::vector<std::string> fingerprint_axes = {"pos", "topk"};
  std::size_t topk = 100;
  std::string log_base = "2";
  std::size_t bootstrap = 0;
  double bootstrap_level = kDefaultBootstrapLevel;
  std::size_t trials = kDefaultFamilyTrials;
};

namespace detail {

inline std::string max_features_to_string(const TrainConfig& c) {
  switch (c.max_features) {
    case MaxFeaturesRule::All:
      return "all";
    case MaxFeaturesRule::Fraction: {
      std::ostringstream ss;
      ss << c.max_features_fraction;
      return ss.str();
    }
    default:
      return "sqrt";
  }
}

inline void apply_max_features(TrainConfig& c, const std::string& value) {
  if (value == "sqrt") {
    c.max_features = MaxFeaturesRule::Sqrt;
  } else if (value == "all") {
    c.max_features = MaxFeaturesRule::All;
  } else {
    try {
      c.max_features_fraction = std::stod(value);
    } catch (const std::exception&) {
      throw ConfigError("--max-features expects sqrt, all, or a fraction in (0,1]");
    }
    c.max_features = MaxFeaturesRule::Fraction;
  }
}

inline std::vector<std::string> groups_to_list(const FeatureSpec& spec) {
  std::vector<std::string> out;
  if (spec.use_char) out.push_back("char");
  if (spec.use_word) out.push_back("word");
  if (spec.use_pos) out.push_back("pos");
  return out;
}

inline void apply_groups(FeatureSpec& spec, const std::vector<std::string>& groups) {
  spec.use_char = spec.use_word = spec.use_pos = false;
  for (const auto& g : groups) {
    if (g == "char") {
      spec.use_char = true;
    } else if (g == "word") {
      spec.use_word = true;
    } else if (g == "pos") {
      spec.use_pos = true;
    } else {
      throw ConfigError("unknown feature group \"" + g + "\" (expected char, word, pos)");
    }
  }
}

inline RunConfig load_run_config(const std::string& path) {
  RunConfig cfg;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed config file " + path + ": " + e.what());
  }
  if (!j.contains("version") || j["version"].get<int>() != kRunConfigVersion) {
    throw DataError("config file " + path + ": unsupported version");
  }
  cfg.seed = j.value("seed", cfg.seed);
  cfg.threads = j.value("threads", cfg.threads);
  if (j.contains("features")) {
    const auto& f = j["features"];
    if (f.contains("char_range")) cfg.features.char_range = {f["char_range"][0], f["char_range"][1]};
    if (f.contains("word_range")) cfg.features.word_range = {f["word_range"][0], f["word_range"][1]};
    if (f.contains("pos_range")) cfg.features.pos_range = {f["pos_range"][0], f["pos_range"][1]};
    cfg.features.max_per_group = f.value("max_per_group", cfg.features.max_per_group);
    cfg.features.lowercase_words = f.value("lowercase", cfg.features.lowercase_words);
    if (f.contains("groups")) apply_groups(cfg.features, f["groups"].get<std::vector<std::string>>());
  }
  if (j.contains("train")) {
    const auto& t = j["train"];
    cfg.train.learning_rate = t.value("learning_rate", cfg.train.learning_rate);
    cfg.train.n_estimators = t.value("n_estimators", cfg.train.n_estimators);
    cfg.train.max_depth = t.value("max_depth", cfg.train.max_depth);
    cfg.train.subsample = t.value("subsample", cfg.train.subsample);
    cfg.train.min_samples_leaf = t.value("min_samples_leaf", cfg.train.min_samples_leaf);
    cfg.train.min_samples_split = t.value("min_samples_split", cfg.train.min_samples_split);
    if (t.contains("max_features")) apply_max_features(cfg.train, t["max_features"].get<std::string>());
  }
  if (j.contains("split")) {
    const auto& s = j["split"];
    cfg.test_fraction = s.value("test_fraction", cfg.test_fraction);
    cfg.balance_cap = s.value("balance_cap", cfg.balance_cap);
  }
  if (j.contains("fingerprint")) {
    const auto& f = j["fingerprint"];
    if (f.contains("axes")) cfg.fingerprint_axes = f["axes"].get<std::vector<std::string>>();
    cfg.topk = f.value("k", cfg.topk);
    cfg.log_base = f.value("log_base", cfg.log_base);
  }
  return cfg;
}

inline std::optional<std::string> find_config_flag(int argc, const char* const* argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) return std::string(argv[i + 1]);
    if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
  }
  return std::nullopt;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path);
  out << content;
}

inline std::map<std::string, std::string> parse_collapse(const std::vector<std::string>& pairs) {
  std::map<std::string, std::string> out;
  for (const auto& p : pairs) {
    const auto eq = p.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == p.size()) {
      throw ConfigError("--collapse expects OLD=NEW, got \"" + p + "\"");
    }
    out[p.substr(0, eq)] = p.substr(eq + 1);
  }
  return out;
}

inline Corpus apply_collapse(Corpus corpus, const std::map<std::string, std::string>& collapse) {
  if (collapse.empty()) return corpus;
  for (auto& doc : corpus.docs) {
    auto it = collapse.find(doc.label);
    if (it != collapse.end()) doc.label = it->second;
  }
  return corpus;
}

inline JsdLogBase parse_log_base(const std::string& value) {
  if (value == "2") return JsdLogBase::Two;
  if (value == "e") return JsdLogBase::E;
  throw ConfigError("--log-base expects 2 or e");
}

}  // namespace detail

inline int run(int argc, const char* const* argv) {
  RunConfig cfg;
  try {
    if (auto config_path = detail::find_config_flag(argc, argv)) {
      cfg = detail::load_run_config(*config_path);
    }
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  CLI::App app{"textprint: stylistic fingerprint toolkit for machine-generated text detection"};
  app.require_subcommand(1);

  std::string config_path_unused;
  std::string input, output, csv_output, model_path, vocab_path, tagger_path, dense_path;
  std::string dump_matrix_path, protocol, positive_label;
  std::vector<std::string> collapse_pairs, holdout_domains, groups = detail::groups_to_list(cfg.features);
  std::vector<std::string> axes = cfg.fingerprint_axes;
  std::string train_model, test_model;
  std::string max_features_str = detail::max_features_to_string(cfg.train);
  std::string log_base_str = cfg.log_base;
  int epochs = 5;
  double heldout = 0.0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path_unused, "JSON config file (flags override it)");
    sub->add_option("--seed", cfg.seed, "seed for every randomized stage")
        ->capture_default_str();
    sub->add_option("--threads", cfg.threads, "max worker threads (results are thread-count independent)")
        ->capture_default_str();
  };
  auto add_feature_flags = [&](CLI::App* sub) {
    sub->add_option("--char-range", cfg.features.char_range, "char n-gram orders (lo hi)")
        ->capture_default_str();
    sub->add_option("--word-range", cfg.features.word_range, "word n-gram orders (lo hi)")
        ->capture_default_str();
    sub->add_option("--pos-range", cfg.features.pos_range, "pos n-gram orders (lo hi)")
        ->capture_default_str();
    sub->add_option("--max-per-group", cfg.features.max_per_group, "feature cap per group")
        ->capture_default_str();
    sub->add_option("--groups", groups, "enabled feature groups")->delimiter(',')->capture_default_str();
    sub->add_flag("--lowercase,!--no-lowercase", cfg.features.lowercase_words,
                  "lowercase the char/word streams");
    sub->add_option("--tagger", tagger_path, "trained tagger model file (needed for pos features)");
  };
  auto add_train_flags = [&](CLI::App* sub) {
    sub->add_option("--learning-rate", cfg.train.learning_rate)->capture_default_str();
    sub->add_option("--n-estimators", cfg.train.n_estimators)->capture_default_str();
    sub->add_option("--max-depth", cfg.train.max_depth)->capture_default_str();
    sub->add_option("--max-features", max_features_str, "sqrt, all, or a fraction")
        ->capture_default_str();
    sub->add_option("--subsample", cfg.train.subsample)->capture_default_str();
    sub->add_option("--min-samples-leaf", cfg.train.min_samples_leaf)->capture_default_str();
    sub->add_option("--min-samples-split", cfg.train.min_samples_split)->capture_default_str();
  };

  CLI::App* cmd_version = app.add_subcommand("version", "print the tool version");

  CLI::App* cmd_ingest = app.add_subcommand("ingest", "validate a JSONL corpus and print summary stats");
  cmd_ingest->add_option("--input", input, "corpus JSONL")->required();
  cmd_ingest->add_option("--output", output, "write the summary JSON here as well");
  add_common(cmd_ingest);

  CLI::App* cmd_tagger_train = app.add_subcommand("tagger-train", "train the averaged-perceptron tagger");
  cmd_tagger_train->add_option("--input", input, "annotated JSONL ({\"tokens\":[],\"tags\":[]})")->required();
  cmd_tagger_train->add_option("--output", output, "tagger model file")->required();
  cmd_tagger_train->add_option("--epochs", epochs)->capture_default_str();
  cmd_tagger_train->add_option("--heldout", heldout, "fraction of sentences held out for an accuracy report")
      ->capture_default_str();
  add_common(cmd_tagger_train);

  CLI::App* cmd_tagger_apply = app.add_subcommand("tagger-apply", "tag a corpus and emit token/tag JSONL");
  cmd_tagger_apply->add_option("--model", model_path, "tagger model file")->required();
  cmd_tagger_apply->add_option("--input", input, "corpus JSONL")->required();
  cmd_tagger_apply->add_option("--output", output, "tagged JSONL output")->required();
  add_common(cmd_tagger_apply);

  CLI::App* cmd_train = app.add_subcommand("train", "build a vocabulary and fit the classifier");
  std::size_t train_balance_cap = 0;  // train default: no balancing
  cmd_train->add_option("--input", input, "corpus JSONL")->required();
  cmd_train->add_option("--out-model", model_path, "model output file")->required();
  cmd_train->add_option("--out-vocab", vocab_path, "vocabulary output file")->required();
  cmd_train->add_option("--balance-cap", train_balance_cap,
                        "downsample classes to this cap before training (0 = off)")
      ->capture_default_str();
  cmd_train->add_option("--dense", dense_path, "precomputed dense features (CSV or JSONL)");
  cmd_train->add_option("--dump-matrix", dump_matrix_path, "debug: sparse triplet CSV of the matrix");
  cmd_train->add_option("--collapse", collapse_pairs, "label collapse OLD=NEW (repeatable)");
  add_feature_flags(cmd_train);
  add_train_flags(cmd_train);
  add_common(cmd_train);

  CLI::App* cmd_predict = app.add_subcommand("predict", "classify documents with a trained model");
  cmd_predict->add_option("--model", model_path)->required();
  cmd_predict->add_option("--vocab", vocab_path)->required();
  cmd_predict->add_option("--input", input, "corpus JSONL")->required();
  cmd_predict->add_option("--output", output, "predictions JSONL")->required();
  cmd_predict->add_option("--tagger", tagger_path, "tagger model (needed for pos features)");
  cmd_predict->add_option("--dense", dense_path, "precomputed dense features (CSV or JSONL)");
  cmd_predict->add_option("--collapse", collapse_pairs, "label collapse OLD=NEW (repeatable)");
  add_common(cmd_predict);

  CLI::App* cmd_evaluate = app.add_subcommand("evaluate", "run an evaluation protocol");
  cmd_evaluate->add_option("--protocol", protocol, "in-domain | ood | oom | family | multiclass")
      ->required();
  cmd_evaluate->add_option("--input", input, "corpus JSONL")->required();
  cmd_evaluate->add_option("--output", output, "report JSON")->required();
  cmd_evaluate->add_option("--csv", csv_output, "also write a CSV report");
  cmd_evaluate->add_option("--test-fraction", cfg.test_fraction)->capture_default_str();
  cmd_evaluate->add_option("--balance-cap", cfg.balance_cap)->capture_default_str();
  cmd_evaluate->add_option("--bootstrap", cfg.bootstrap, "bootstrap resamples for CIs (0 = off)")
      ->capture_default_str();
  cmd_evaluate->add_option("--level", cfg.bootstrap_level, "confidence level")->capture_default_str();
  cmd_evaluate->add_option("--holdout-domains", holdout_domains, "ood: held-out domains")
      ->delimiter(',');
  cmd_evaluate->add_option("--train-model", train_model, "oom: model trained against");
  cmd_evaluate->add_option("--test-model", test_model, "oom: held-out model");
  cmd_evaluate->add_option("--trials", cfg.trials, "family: number of trials")->capture_default_str();
  cmd_evaluate->add_option("--positive-class", positive_label, "positive class for F1/AUROC");
  cmd_evaluate->add_option("--collapse", collapse_pairs, "label collapse OLD=NEW (repeatable)");
  add_feature_flags(cmd_evaluate);
  add_train_flags(cmd_evaluate);
  add_common(cmd_evaluate);

  CLI::App* cmd_fingerprint = app.add_subcommand("fingerprint", "divergence table: human vs each model");
  cmd_fingerprint->add_option("--input", input, "corpus JSONL")->required();
  cmd_fingerprint->add_option("--output", output, "divergence CSV")->required();
  cmd_fingerprint->add_option("--axes", axes, "pos, topk, channel:<name>")
      ->delimiter(',')
      ->capture_default_str();
  cmd_fingerprint->add_option("--k", cfg.topk, "top-k token support size")->capture_default_str();
  cmd_fingerprint->add_option("--log-base", log_base_str, "JSD log base: 2 or e")->capture_default_str();
  cmd_fingerprint->add_option("--tagger", tagger_path, "tagger model (needed for the pos axis)");
  add_common(cmd_fingerprint);

  CLI::App* cmd_radial = app.add_subcommand("radial", "per-slice POS frequencies for radial plots");
  cmd_radial->add_option("--input", input, "corpus JSONL")->required();
  cmd_radial->add_option("--output", output, "radial JSON")->required();
  cmd_radial->add_option("--tagger", tagger_path, "tagger model (needed without pos annotations)");
  add_common(cmd_radial);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    set_max_threads(cfg.threads);
    detail::apply_groups(cfg.features, groups);
    detail::apply_max_features(cfg.train, max_features_str);
    const auto collapse = detail::parse_collapse(collapse_pairs);

    std::optional<TaggerModel> tagger;
    if (!tagger_path.empty()) tagger = load_tagger(tagger_path);
    const TaggerModel* tagger_ptr = tagger.has_value() ? &*tagger : nullptr;

    if (app.got_subcommand(cmd_version)) {
      std::cout << "textprint " << kVersion << '\n';
      return 0;
    }

    if (app.got_subcommand(cmd_ingest)) {
      const Corpus corpus = load_jsonl(input);
      const auto summary = stats_to_json(corpus_stats(corpus));
      std::cout << summary.dump(2) << '\n';
      if (!output.empty()) detail::write_file(output, summary.dump(2) + "\n");
      return 0;
    }

    if (app.got_subcommand(cmd_tagger_train)) {
      auto sentences = load_annotated_jsonl(input);
      std::vector<TaggedSentence> heldout_set;
      if (heldout > 0.0) {
        if (heldout >= 1.0) throw ConfigError("--heldout must be in [0,1)");
        std::vector<std::size_t> order(sentences.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng(substream(cfg.seed, "tagger-heldout"));
        rng.shuffle(order);
        const auto n_held = static_cast<std::size_t>(heldout * static_cast<double>(sentences.size()));
        std::vector<TaggedSentence> train_set;
        for (std::size_t k = 0; k < order.size(); ++k) {
          (k < n_held ? heldout_set : train_set).push_back(sentences[order[k]]);
        }
        sentences = std::move(train_set);
      }
      const TaggerModel model = train_tagger(sentences, epochs, cfg.seed);
      save_tagger(model, output);
      nlohmann::json summary = {{"sentences", sentences.size()}, {"epochs", epochs}};
      if (!heldout_set.empty()) summary["heldout_accuracy"] = tagger_accuracy(model, heldout_set);
      std::cout << summary.dump(2) << '\n';
      return 0;
    }

    if (app.got_subcommand(cmd_tagger_apply)) {
      const TaggerModel tagger_model = load_tagger(model_path);
      const Corpus corpus = load_jsonl(input);
      std::ostringstream out;
      for (const auto& doc : corpus.docs) {
        const auto tokens = tokenize(doc.text);
        const auto tags = tag(tagger_model, tokens);
        nlohmann::json rec = {{"id", doc.id}};
        nlohmann::json toks = nlohmann::json::array(), tgs = nlohmann::json::array();
        for (const auto& t : tokens) toks.push_back(t.surface);
        for (int t : tags) tgs.push_back(std::string(tag_name(t)));
        rec["tokens"] = std::move(toks);
        rec["tags"] = std::move(tgs);
        out << rec.dump() << '\n';
      }
      detail::write_file(output, out.str());
      return 0;
    }

    if (app.got_subcommand(cmd_train)) {
      Corpus corpus = detail::apply_collapse(load_jsonl(input), collapse);
      if (train_balance_cap > 0) {
        corpus = downsample_balance(corpus, train_balance_cap, substream(cfg.seed, "balance"));
      }
      const Vocabulary vocab = build_vocabulary(corpus, cfg.features, tagger_ptr);
      FeatureMatrix matrix = vectorize(corpus, vocab, cfg.features, tagger_ptr);
      if (!dense_path.empty()) matrix = attach_dense(matrix, dense_path);
      if (!dump_matrix_path.empty()) save_matrix_csv(matrix, dump_matrix_path);
      TrainConfig train_cfg = cfg.train;
      train_cfg.seed = substream(cfg.seed, "gbm");
      const GbmModel model = fit_gbm(matrix, train_cfg);
      save_vocab(vocab, vocab_path);
      save_gbm(model, model_path);
      std::cout << nlohmann::json({{"documents", corpus.size()},
                                   {"columns", matrix.total_columns()},
                                   {"classes", model.labels}})
                       .dump(2)
                << '\n';
      return 0;
    }

    if (app.got_subcommand(cmd_predict)) {
      const GbmModel model = load_gbm(model_path);
      const Vocabulary vocab = load_vocab(vocab_path);
      const Corpus corpus = detail::apply_collapse(load_jsonl(input), collapse);
      FeatureMatrix matrix = vectorize(corpus, vocab, vocab.spec, tagger_ptr);
      if (!dense_path.empty()) matrix = attach_dense(matrix, dense_path);
      const auto proba = predict_proba(model, matrix);
      const auto labels = predict(model, matrix);
      std::ostringstream out;
      for (std::size_t i = 0; i < corpus.size(); ++i) {
        nlohmann::json probs = nlohmann::json::object();
        for (std::size_t k = 0; k < model.labels.size(); ++k) probs[model.labels[k]] = proba[i][k];
        out << nlohmann::json({{"id", corpus.docs[i].id}, {"predicted", labels[i]}, {"proba", probs}})
                   .dump()
            << '\n';
      }
      detail::write_file(output, out.str());
      return 0;
    }

    if (app.got_subcommand(cmd_evaluate)) {
      const Corpus corpus = detail::apply_collapse(load_jsonl(input), collapse);
      PipelineSpec spec;
      spec.features = cfg.features;
      spec.train = cfg.train;
      spec.test_fraction = cfg.test_fraction;
      spec.balance_cap = cfg.balance_cap;
      spec.seed = cfg.seed;
      spec.tagger = tagger_ptr;
      spec.positive_label = positive_label;
      spec.bootstrap_resamples = cfg.bootstrap;
      spec.bootstrap_level = cfg.bootstrap_level;

      nlohmann::json report_json;
      std::ostringstream csv;
      if (protocol == "in-domain") {
        const MetricsReport report = protocol_in_domain(corpus, spec);
        report_json = report_envelope(protocol, metrics_to_json(report));
        metrics_csv_header(csv);
        metrics_csv_row(csv, "in-domain", report);
      } else if (protocol == "ood") {
        if (holdout_domains.empty()) throw ConfigError("ood protocol needs --holdout-domains");
        const TransferReport report = protocol_ood(corpus, holdout_domains, spec);
        report_json = report_envelope(protocol, transfer_to_json(report));
        transfer_csv(csv, report);
      } else if (protocol == "oom") {
        if (train_model.empty() || test_model.empty()) {
          throw ConfigError("oom protocol needs --train-model and --test-model");
        }
        const TransferReport report = protocol_oom(corpus, train_model, test_model, spec);
        report_json = report_envelope(protocol, transfer_to_json(report));
        transfer_csv(csv, report);
      } else if (protocol == "family") {
        const FamilyTransferReport report = protocol_family(corpus, cfg.trials, cfg.seed, spec);
        report_json = report_envelope(protocol, family_to_json(report));
        metrics_csv_header(csv, "condition");
        metrics_csv_row(csv, "baseline", report.same_family_diff_domain.baseline);
        metrics_csv_row(csv, "same-family|different-domain", report.same_family_diff_domain.condition);
        metrics_csv_row(csv, "different-family|same-domain", report.diff_family_same_domain.condition);
      } else if (protocol == "multiclass") {
        const MulticlassReport report = multiclass_report(corpus, spec);
        report_json = report_envelope(protocol, multiclass_to_json(report));
        csv << "class,f1\n";
        csv.precision(17);
        for (const auto& [label, f1] : report.per_class_f1) csv << label << ',' << f1 << '\n';
        csv << "macro," << report.macro_f1 << '\n';
      } else {
        throw ConfigError("unknown protocol \"" + protocol +
                          "\" (expected in-domain, ood, oom, family, multiclass)");
      }
      detail::write_file(output, report_json.dump(2) + "\n");
      if (!csv_output.empty()) detail::write_file(csv_output, csv.str());
      std::cout << report_json.dump(2) << '\n';
      return 0;
    }

    if (app.got_subcommand(cmd_fingerprint)) {
      const Corpus corpus = load_jsonl(input);
      const DivergenceTable table =
          divergence_table(corpus, axes, tagger_ptr, cfg.topk, detail::parse_log_base(log_base_str));
      std::ostringstream out;
      save_divergence_csv(table, out);
      detail::write_file(output, out.str());
      return 0;
    }

    if (app.got_subcommand(cmd_radial)) {
      const Corpus corpus = load_jsonl(input);
      const RadialData data = radial_data(corpus, tagger_ptr);
      detail::write_file(output, radial_to_json(data).dump(2) + "\n");
      return 0;
    }

    std::cerr << "error: no subcommand selected\n";
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace textprint::cli
