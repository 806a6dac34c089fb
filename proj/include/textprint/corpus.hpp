#pragma once

// Corpus ingestion, balancing and partitioning. Documents are immutable
// after load; iteration order is ingestion order, which anchors every
// seeded operation downstream.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "textprint/errors.hpp"
#include "textprint/rng.hpp"
#include "textprint/textproc.hpp"

namespace textprint {

struct Document {
  std::string id;
  std::string text;  // whitespace-normalized at load
  std::string label;
  std::string model;
  std::string model_family;
  std::string domain;
  // channel name -> one categorical tag per token (validated lazily at use)
  std::map<std::string, std::vector<std::string>> annotations;
};

struct Corpus {
  std::string name;
  std::vector<Document> docs;

  std::size_t size() const { return docs.size(); }
  bool empty() const { return docs.empty(); }
};

enum class SplitMode { RandomHoldout, ByDomainHoldout, ByModelHoldout, ByFamilyHoldout };

struct SplitSpec {
  SplitMode mode = SplitMode::RandomHoldout;
  std::vector<std::string> holdout_keys;
  double test_fraction = 0.2;  // random mode only
  std::uint64_t seed = 0;
};

inline constexpr std::size_t kDefaultBalanceCap = 5000;

// Newlines and tabs become spaces, runs collapse, ends are trimmed.
inline std::string normalize_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    const bool ws = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    if (ws) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(c);
  }
  return out;
}

// JSONL schema: required "text", "label"; optional "id", "model",
// "model_family", "domain", "annotations". Unknown keys are ignored.
inline Corpus load_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus file: " + path);
  Corpus corpus;
  corpus.name = path;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& what) -> void {
    throw DataError(path + ":" + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) fail("line is not a JSON object");
    if (!j.contains("text") || !j["text"].is_string()) fail("missing \"text\"");
    if (!j.contains("label") || !j["label"].is_string()) fail("missing \"label\"");
    auto optional_string = [&](const char* key) -> std::string {
      if (!j.contains(key)) return {};
      if (!j[key].is_string()) fail(std::string("\"") + key + "\" must be a string");
      return j[key].get<std::string>();
    };
    Document doc;
    doc.text = normalize_whitespace(j["text"].get<std::string>());
    if (doc.text.empty()) fail("\"text\" is empty after whitespace normalization");
    doc.label = j["label"].get<std::string>();
    if (doc.label.empty()) fail("\"label\" is empty");
    doc.id = optional_string("id");
    if (doc.id.empty()) doc.id = "line-" + std::to_string(lineno);
    doc.model = optional_string("model");
    doc.model_family = optional_string("model_family");
    doc.domain = optional_string("domain");
    if (j.contains("annotations")) {
      if (!j["annotations"].is_object()) fail("\"annotations\" must be an object");
      for (const auto& [channel, tags] : j["annotations"].items()) {
        if (!tags.is_array()) fail("annotation channel \"" + channel + "\" must be an array");
        std::vector<std::string> seq;
        for (const auto& t : tags) {
          if (!t.is_string()) fail("annotation channel \"" + channel + "\" must hold strings");
          seq.push_back(t.get<std::string>());
        }
        doc.annotations.emplace(channel, std::move(seq));
      }
    }
    if (!seen_ids.insert(doc.id).second) fail("duplicate document id \"" + doc.id + "\"");
    corpus.docs.push_back(std::move(doc));
  }
  if (corpus.docs.empty()) throw DataError(path + ": empty corpus");
  return corpus;
}

namespace detail {

inline std::map<std::string, std::vector<std::size_t>> indices_by_label(const Corpus& corpus) {
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < corpus.docs.size(); ++i) groups[corpus.docs[i].label].push_back(i);
  return groups;
}

}  // namespace detail

// Uniform seeded downsampling without replacement; every class ends at
// min(cap, smallest class size) and keeps its original relative order.
inline Corpus downsample_balance(const Corpus& corpus, std::size_t cap, std::uint64_t seed) {
  if (cap == 0) throw ConfigError("downsample_balance: cap must be positive");
  const auto groups = detail::indices_by_label(corpus);
  if (groups.size() < 2) {
    throw DataError("downsample_balance: need at least 2 label classes, got " +
                    std::to_string(groups.size()));
  }
  std::size_t smallest = corpus.size();
  for (const auto& [label, idx] : groups) smallest = std::min(smallest, idx.size());
  const std::size_t target = std::min(cap, smallest);

  Rng rng(substream(seed, "downsample"));
  std::vector<char> keep(corpus.size(), 0);
  for (const auto& [label, idx] : groups) {
    for (std::size_t pick : rng.sample_indices(idx.size(), target)) keep[idx[pick]] = 1;
  }
  Corpus out;
  out.name = corpus.name;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (keep[i]) out.docs.push_back(corpus.docs[i]);
  }
  return out;
}

namespace detail {

inline const std::string& holdout_field(const Document& doc, SplitMode mode) {
  switch (mode) {
    case SplitMode::ByDomainHoldout:
      return doc.domain;
    case SplitMode::ByModelHoldout:
      return doc.model;
    default:
      return doc.model_family;
  }
}

inline std::string join_keys(const std::set<std::string>& keys) {
  std::string out;
  for (const auto& k : keys) {
    if (!out.empty()) out += ", ";
    out += k.empty() ? "<empty>" : k;
  }
  return out;
}

}  // namespace detail

// Train/test partition. Holdout modes route by metadata; in the model and
// family modes human-labeled documents are split randomly at the machine
// test share so both sides keep human examples.
inline std::pair<Corpus, Corpus> partition(const Corpus& corpus, const SplitSpec& spec) {
  std::vector<char> to_test(corpus.size(), 0);

  if (spec.mode == SplitMode::RandomHoldout) {
    if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) {
      throw ConfigError("partition: test_fraction must be in (0,1)");
    }
    std::vector<std::size_t> idx(corpus.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(substream(spec.seed, "split"));
    rng.shuffle(idx);
    const auto n_test = static_cast<std::size_t>(
        std::llround(spec.test_fraction * static_cast<double>(corpus.size())));
    for (std::size_t k = 0; k < std::min(n_test, corpus.size()); ++k) to_test[idx[k]] = 1;
  } else {
    if (spec.holdout_keys.empty()) throw ConfigError("partition: holdout keys must be non-empty");
    const std::unordered_set<std::string> keys(spec.holdout_keys.begin(), spec.holdout_keys.end());
    std::set<std::string> available;
    std::unordered_map<std::string, std::size_t> matches;
    const bool human_random = spec.mode != SplitMode::ByDomainHoldout;
    std::vector<std::size_t> humans;
    std::size_t machine_total = 0, machine_test = 0;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      const Document& doc = corpus.docs[i];
      if (human_random && doc.label == "human") {
        humans.push_back(i);
        continue;
      }
      const std::string& field = detail::holdout_field(doc, spec.mode);
      if (!field.empty()) available.insert(field);
      ++machine_total;
      if (keys.count(field)) {
        to_test[i] = 1;
        ++matches[field];
        ++machine_test;
      }
    }
    for (const auto& key : spec.holdout_keys) {
      if (matches[key] == 0) {
        throw DataError("partition: holdout key \"" + key + "\" matches no documents; available: " +
                        detail::join_keys(available));
      }
    }
    if (human_random && !humans.empty() && machine_total > 0) {
      const double share = static_cast<double>(machine_test) / static_cast<double>(machine_total);
      Rng rng(substream(spec.seed, "human-split"));
      rng.shuffle(humans);
      const auto n_test = static_cast<std::size_t>(
          std::llround(share * static_cast<double>(humans.size())));
      for (std::size_t k = 0; k < std::min(n_test, humans.size()); ++k) to_test[humans[k]] = 1;
    }
  }

  Corpus train, test;
  train.name = corpus.name + "/train";
  test.name = corpus.name + "/test";
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    (to_test[i] ? test : train).docs.push_back(corpus.docs[i]);
  }
  if (train.empty() || test.empty()) {
    throw DataError("partition: split leaves an empty side (train=" +
                    std::to_string(train.size()) + ", test=" + std::to_string(test.size()) + ")");
  }
  return {std::move(train), std::move(test)};
}

struct CorpusStats {
  std::size_t total = 0;
  std::map<std::string, std::size_t> per_label;
  std::map<std::string, std::size_t> per_domain;
  std::map<std::string, std::size_t> per_model;
  double mean_token_length = 0.0;
};

inline CorpusStats corpus_stats(const Corpus& corpus) {
  CorpusStats s;
  s.total = corpus.size();
  std::uint64_t tokens = 0;
  for (const auto& doc : corpus.docs) {
    ++s.per_label[doc.label];
    if (!doc.domain.empty()) ++s.per_domain[doc.domain];
    if (!doc.model.empty()) ++s.per_model[doc.model];
    tokens += tokenize(doc.text).size();
  }
  if (s.total > 0) s.mean_token_length = static_cast<double>(tokens) / static_cast<double>(s.total);
  return s;
}

// POS tags for one document: a supplied "pos" annotation channel wins
// (validated against the tagset and token count), otherwise the tagger runs.
inline std::vector<int> tags_for(const Document& doc, const TaggerModel* tagger) {
  const auto tokens = tokenize(doc.text);
  auto channel = doc.annotations.find("pos");
  if (channel != doc.annotations.end()) {
    const auto& seq = channel->second;
    if (seq.size() != tokens.size()) {
      throw DataError("document \"" + doc.id + "\": pos annotation length " +
                      std::to_string(seq.size()) + " != token count " +
                      std::to_string(tokens.size()));
    }
    std::vector<int> out;
    out.reserve(seq.size());
    for (const auto& t : seq) {
      const int ti = tag_index(t);
      if (ti < 0) throw DataError("document \"" + doc.id + "\": unknown pos tag \"" + t + "\"");
      out.push_back(ti);
    }
    return out;
  }
  if (tagger == nullptr || !tagger->trained) {
    throw DataError("document \"" + doc.id +
                    "\": no pos annotations and no tagger model supplied");
  }
  return tag(*tagger, tokens);
}

inline nlohmann::json stats_to_json(const CorpusStats& s) {
  return nlohmann::json{{"total", s.total},
                        {"per_label", s.per_label},
                        {"per_domain", s.per_domain},
                        {"per_model", s.per_model},
                        {"mean_token_length", s.mean_token_length}};
}

}  // namespace textprint
