#pragma once

// Deterministic tokenizer, the 17-tag Universal POS tagset, and a trainable
// averaged-perceptron tagger. Self-contained: no corpus dependency.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "textprint/errors.hpp"
#include "textprint/rng.hpp"
#include "textprint/utf8.hpp"

namespace textprint {

// Canonical tag order; also the axis order for POS fingerprints.
inline constexpr std::array<std::string_view, 17> kUposTags = {
    "ADJ",  "ADP",  "ADV",   "AUX",   "CCONJ", "DET",  "INTJ", "NOUN", "NUM",
    "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM",  "VERB", "X"};

inline constexpr int kNumTags = static_cast<int>(kUposTags.size());

inline int tag_index(std::string_view tag) {
  for (int i = 0; i < kNumTags; ++i) {
    if (kUposTags[static_cast<std::size_t>(i)] == tag) return i;
  }
  return -1;
}

inline std::string_view tag_name(int index) { return kUposTags[static_cast<std::size_t>(index)]; }

struct Token {
  std::string surface;
  std::string lower;  // case-folded surface
  std::size_t position = 0;
};

namespace detail {

inline bool hyphen_joins(const std::vector<char32_t>& cps, std::size_t i, bool in_word) {
  if (cps[i] != U'-') return false;
  if (!in_word) return false;
  if (i + 1 >= cps.size()) return false;
  const char32_t prev = cps[i - 1];
  const char32_t next = cps[i + 1];
  const bool prev_alnum = utf8::is_word_char(prev) && !utf8::is_apostrophe(prev);
  const bool next_alnum = utf8::is_word_char(next) && !utf8::is_apostrophe(next);
  return prev_alnum && next_alnum;
}

}  // namespace detail

// Maximal runs of letters/digits/apostrophes (plus hyphens between letters)
// form word tokens; every other non-space codepoint is its own token.
inline std::vector<Token> tokenize(std::string_view text) {
  const std::vector<char32_t> cps = utf8::decode(text);
  std::vector<Token> tokens;
  std::size_t start = 0;
  bool in_word = false;
  auto flush = [&](std::size_t end) {
    if (!in_word) return;
    std::string surface = utf8::encode(cps, start, end - start);
    std::string lower;
    lower.reserve(surface.size());
    for (std::size_t k = start; k < end; ++k) utf8::append(lower, utf8::fold_case(cps[k]));
    tokens.push_back(Token{std::move(surface), std::move(lower), tokens.size()});
    in_word = false;
  };
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const char32_t cp = cps[i];
    if (utf8::is_space(cp)) {
      flush(i);
      continue;
    }
    if (utf8::is_word_char(cp) || detail::hyphen_joins(cps, i, in_word)) {
      if (!in_word) {
        start = i;
        in_word = true;
      }
      continue;
    }
    // punctuation (including non-joining hyphens): one token per codepoint
    flush(i);
    std::string surface = utf8::encode(cps, i, 1);
    tokens.push_back(Token{surface, surface, tokens.size()});
  }
  flush(cps.size());
  return tokens;
}

inline std::vector<std::string> token_surfaces(std::string_view text) {
  std::vector<std::string> out;
  for (auto& t : tokenize(text)) out.push_back(t.surface);
  return out;
}

struct TaggedSentence {
  std::vector<std::string> tokens;
  std::vector<std::string> tags;
};

inline constexpr int kTaggerFormatVersion = 1;

struct TaggerModel {
  // feature string -> per-tag averaged weights
  std::unordered_map<std::string, std::array<double, 17>> weights;
  // shortcut for frequent, unambiguous words
  std::unordered_map<std::string, int> tag_prior;
  int version = kTaggerFormatVersion;
  bool trained = false;
};

namespace detail {

inline std::string word_lower(const std::string& w) { return utf8::fold_case(w); }

// Feature template: word identity, affixes, neighbouring words and the two
// previously assigned tags.
inline std::vector<std::string> tagger_features(const std::vector<std::string>& lowers,
                                                const std::vector<std::string>& surfaces,
                                                std::size_t i, int prev_tag, int prev2_tag) {
  std::vector<std::string> feats;
  feats.reserve(12);
  const std::string& w = lowers[i];
  feats.push_back("w=" + w);
  const std::vector<char32_t> cps = utf8::decode(w);
  for (std::size_t k = 1; k <= 3 && k <= cps.size(); ++k) {
    feats.push_back("suf" + std::to_string(k) + "=" + utf8::encode(cps, cps.size() - k, k));
  }
  if (!cps.empty()) feats.push_back("pre1=" + utf8::encode(cps, 0, 1));
  feats.push_back(std::string("t-1=") + (prev_tag < 0 ? "<s>" : std::string(tag_name(prev_tag))));
  feats.push_back(std::string("t-2=") + (prev2_tag < 0 ? "<s>" : std::string(tag_name(prev2_tag))));
  feats.push_back("w-1=" + (i == 0 ? std::string("<s>") : lowers[i - 1]));
  feats.push_back("w+1=" + (i + 1 == lowers.size() ? std::string("</s>") : lowers[i + 1]));
  const std::string& surf = surfaces[i];
  if (!surf.empty() && surf[0] >= 'A' && surf[0] <= 'Z') feats.push_back("cap");
  bool all_digits = !cps.empty();
  for (char32_t cp : cps) {
    if (!utf8::is_ascii_digit(cp)) {
      all_digits = false;
      break;
    }
  }
  if (all_digits) feats.push_back("dig");
  return feats;
}

inline int argmax_tag(const std::array<double, 17>& scores) {
  int best = 0;
  for (int t = 1; t < kNumTags; ++t) {
    if (scores[static_cast<std::size_t>(t)] > scores[static_cast<std::size_t>(best)]) best = t;
  }
  return best;
}

}  // namespace detail

// Greedy left-to-right averaged perceptron. Words that are frequent and
// nearly unambiguous in the training data bypass the model via tag_prior.
inline TaggerModel train_tagger(const std::vector<TaggedSentence>& annotated, int epochs,
                                std::uint64_t seed) {
  if (annotated.empty()) throw DataError("train_tagger: empty training set");
  if (epochs < 1) throw ConfigError("train_tagger: epochs must be >= 1");
  for (std::size_t s = 0; s < annotated.size(); ++s) {
    const auto& sent = annotated[s];
    if (sent.tokens.size() != sent.tags.size()) {
      throw DataError("train_tagger: sentence " + std::to_string(s) +
                      ": token/tag length mismatch");
    }
    if (sent.tokens.empty()) throw DataError("train_tagger: sentence " + std::to_string(s) + " is empty");
    for (const auto& tag : sent.tags) {
      if (tag_index(tag) < 0) {
        throw DataError("train_tagger: unknown tag '" + tag + "' in sentence " + std::to_string(s));
      }
    }
  }

  TaggerModel model;

  // Most-frequent-tag shortcut for words seen often with a single tag.
  {
    std::unordered_map<std::string, std::array<std::uint32_t, 17>> counts;
    for (const auto& sent : annotated) {
      for (std::size_t i = 0; i < sent.tokens.size(); ++i) {
        auto& c = counts[detail::word_lower(sent.tokens[i])];
        ++c[static_cast<std::size_t>(tag_index(sent.tags[i]))];
      }
    }
    constexpr std::uint32_t kMinFreq = 10;
    constexpr double kMinRatio = 0.97;
    for (const auto& [word, c] : counts) {
      std::uint64_t total = 0;
      std::uint32_t best = 0;
      int best_tag = 0;
      for (int t = 0; t < kNumTags; ++t) {
        total += c[static_cast<std::size_t>(t)];
        if (c[static_cast<std::size_t>(t)] > best) {
          best = c[static_cast<std::size_t>(t)];
          best_tag = t;
        }
      }
      if (total >= kMinFreq && static_cast<double>(best) >= kMinRatio * static_cast<double>(total)) {
        model.tag_prior.emplace(word, best_tag);
      }
    }
  }

  struct WeightCell {
    std::array<double, 17> w{};
    std::array<double, 17> total{};
    std::array<std::uint64_t, 17> stamp{};
  };
  std::unordered_map<std::string, WeightCell> cells;
  std::uint64_t step = 0;

  auto bump = [&](const std::string& feat, int tag, double delta) {
    WeightCell& cell = cells[feat];
    auto ti = static_cast<std::size_t>(tag);
    cell.total[ti] += static_cast<double>(step - cell.stamp[ti]) * cell.w[ti];
    cell.stamp[ti] = step;
    cell.w[ti] += delta;
  };

  std::vector<std::size_t> order(annotated.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(substream(seed, "tagger-train"));

  for (int epoch = 0; epoch < epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t si : order) {
      const auto& sent = annotated[si];
      std::vector<std::string> lowers(sent.tokens.size());
      for (std::size_t i = 0; i < sent.tokens.size(); ++i) {
        lowers[i] = detail::word_lower(sent.tokens[i]);
      }
      int prev = -1, prev2 = -1;
      for (std::size_t i = 0; i < sent.tokens.size(); ++i) {
        const int gold = tag_index(sent.tags[i]);
        int guess;
        auto prior = model.tag_prior.find(lowers[i]);
        if (prior != model.tag_prior.end()) {
          guess = prior->second;
        } else {
          const auto feats = detail::tagger_features(lowers, sent.tokens, i, prev, prev2);
          std::array<double, 17> scores{};
          for (const auto& f : feats) {
            auto it = cells.find(f);
            if (it == cells.end()) continue;
            for (int t = 0; t < kNumTags; ++t) {
              scores[static_cast<std::size_t>(t)] += it->second.w[static_cast<std::size_t>(t)];
            }
          }
          guess = detail::argmax_tag(scores);
          ++step;
          if (guess != gold) {
            for (const auto& f : feats) {
              bump(f, gold, 1.0);
              bump(f, guess, -1.0);
            }
          }
        }
        prev2 = prev;
        prev = guess;
      }
    }
  }

  // Average accumulated weights over all update steps.
  if (step > 0) {
    for (auto& [feat, cell] : cells) {
      std::array<double, 17> avg{};
      bool any = false;
      for (int t = 0; t < kNumTags; ++t) {
        auto ti = static_cast<std::size_t>(t);
        const double total = cell.total[ti] + static_cast<double>(step - cell.stamp[ti]) * cell.w[ti];
        avg[ti] = total / static_cast<double>(step);
        if (avg[ti] != 0.0) any = true;
      }
      if (any) model.weights.emplace(feat, avg);
    }
  }
  model.trained = true;
  return model;
}

// Tags one tokenized input. Output length always equals input length and
// every tag is a UPOS index.
inline std::vector<int> tag(const TaggerModel& model, const std::vector<Token>& tokens) {
  if (!model.trained) throw ConfigError("tag: model is not trained");
  std::vector<int> out;
  out.reserve(tokens.size());
  std::vector<std::string> lowers(tokens.size());
  std::vector<std::string> surfaces(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    lowers[i] = tokens[i].lower;
    surfaces[i] = tokens[i].surface;
  }
  int prev = -1, prev2 = -1;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    int guess;
    auto prior = model.tag_prior.find(lowers[i]);
    if (prior != model.tag_prior.end()) {
      guess = prior->second;
    } else {
      const auto feats = detail::tagger_features(lowers, surfaces, i, prev, prev2);
      std::array<double, 17> scores{};
      for (const auto& f : feats) {
        auto it = model.weights.find(f);
        if (it == model.weights.end()) continue;
        for (int t = 0; t < kNumTags; ++t) {
          scores[static_cast<std::size_t>(t)] += it->second[static_cast<std::size_t>(t)];
        }
      }
      guess = detail::argmax_tag(scores);
    }
    out.push_back(guess);
    prev2 = prev;
    prev = guess;
  }
  return out;
}

inline double tagger_accuracy(const TaggerModel& model, const std::vector<TaggedSentence>& data) {
  std::uint64_t correct = 0, total = 0;
  for (const auto& sent : data) {
    std::vector<Token> tokens;
    tokens.reserve(sent.tokens.size());
    for (std::size_t i = 0; i < sent.tokens.size(); ++i) {
      tokens.push_back(Token{sent.tokens[i], detail::word_lower(sent.tokens[i]), i});
    }
    const auto guessed = tag(model, tokens);
    for (std::size_t i = 0; i < sent.tags.size(); ++i) {
      total += 1;
      if (guessed[i] == tag_index(sent.tags[i])) ++correct;
    }
  }
  if (total == 0) throw DataError("tagger_accuracy: no tokens");
  return static_cast<double>(correct) / static_cast<double>(total);
}

// Annotated data: JSONL lines {"tokens": [...], "tags": [...]}.
inline std::vector<TaggedSentence> load_annotated_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open annotated file: " + path);
  std::vector<TaggedSentence> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": invalid JSON: " + e.what());
    }
    if (!j.contains("tokens") || !j.contains("tags")) {
      throw DataError(path + ":" + std::to_string(lineno) + ": missing \"tokens\" or \"tags\"");
    }
    TaggedSentence sent;
    for (const auto& t : j["tokens"]) sent.tokens.push_back(t.get<std::string>());
    for (const auto& t : j["tags"]) sent.tags.push_back(t.get<std::string>());
    if (sent.tokens.size() != sent.tags.size()) {
      throw DataError(path + ":" + std::to_string(lineno) + ": token/tag length mismatch");
    }
    out.push_back(std::move(sent));
  }
  if (out.empty()) throw DataError(path + ": no annotated sentences");
  return out;
}

inline void save_tagger(const TaggerModel& model, const std::string& path) {
  nlohmann::json weights = nlohmann::json::object();
  for (const auto& [feat, w] : model.weights) {
    nlohmann::json per_tag = nlohmann::json::object();
    for (int t = 0; t < kNumTags; ++t) {
      const double v = w[static_cast<std::size_t>(t)];
      if (v != 0.0) per_tag[std::string(tag_name(t))] = v;
    }
    weights[feat] = std::move(per_tag);
  }
  nlohmann::json prior = nlohmann::json::object();
  for (const auto& [word, t] : model.tag_prior) prior[word] = std::string(tag_name(t));
  nlohmann::json j = {{"version", model.version}, {"weights", weights}, {"tag_prior", prior}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write tagger file: " + path);
  out << j.dump();
  out << '\n';
}

inline TaggerModel load_tagger(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open tagger file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed tagger file " + path + ": " + e.what());
  }
  if (!j.contains("version") || j["version"].get<int>() != kTaggerFormatVersion) {
    throw DataError("tagger file " + path + ": unsupported version");
  }
  TaggerModel model;
  for (const auto& [feat, per_tag] : j.at("weights").items()) {
    std::array<double, 17> w{};
    for (const auto& [tag, v] : per_tag.items()) {
      const int ti = tag_index(tag);
      if (ti < 0) throw DataError("tagger file " + path + ": unknown tag " + tag);
      w[static_cast<std::size_t>(ti)] = v.get<double>();
    }
    model.weights.emplace(feat, w);
  }
  for (const auto& [word, tag] : j.at("tag_prior").items()) {
    const int ti = tag_index(tag.get<std::string>());
    if (ti < 0) throw DataError("tagger file " + path + ": unknown tag in tag_prior");
    model.tag_prior.emplace(word, ti);
  }
  model.trained = true;
  return model;
}

}  // namespace textprint
