#pragma once

// Per-slice categorical distributions (POS tags, top-k tokens, arbitrary
// annotation channels), Jensen-Shannon divergence tables and radial-plot
// data for characterizing a model's writing style.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "textprint/corpus.hpp"
#include "textprint/errors.hpp"

namespace textprint {

enum class JsdLogBase { Two, E };

struct CategoricalDistribution {
  std::string axis;                  // "pos", "topk-token" or "channel:<name>"
  std::vector<std::string> support;  // canonical order
  std::vector<double> probs;         // aligned with support, sums to 1
};

struct DivergenceRow {
  std::string slice;  // model name (or label when no model metadata exists)
  std::string family;
  std::string axis;
  double jsd = 0.0;
};

struct DivergenceTable {
  std::vector<DivergenceRow> rows;  // grouped by family
};

// Pooled POS tag distribution over the full 17-tag support; zero-count tags
// keep probability 0.
inline CategoricalDistribution pos_distribution(const Corpus& slice, const TaggerModel* tagger) {
  if (slice.empty()) throw DataError("pos_distribution: empty corpus slice");
  std::array<std::uint64_t, 17> counts{};
  std::uint64_t total = 0;
  for (const auto& doc : slice.docs) {
    for (int t : tags_for(doc, tagger)) {
      ++counts[static_cast<std::size_t>(t)];
      ++total;
    }
  }
  if (total == 0) throw DataError("pos_distribution: slice has no tokens");
  CategoricalDistribution dist;
  dist.axis = "pos";
  dist.support.reserve(kUposTags.size());
  dist.probs.reserve(kUposTags.size());
  for (int t = 0; t < kNumTags; ++t) {
    dist.support.emplace_back(tag_name(t));
    dist.probs.push_back(static_cast<double>(counts[static_cast<std::size_t>(t)]) /
                         static_cast<double>(total));
  }
  return dist;
}

namespace detail {

inline bool is_word_token(const Token& token) {
  const auto cps = utf8::decode(token.surface);
  return !cps.empty() && utf8::is_word_char(cps[0]) && !utf8::is_apostrophe(cps[0]);
}

inline std::map<std::string, std::uint64_t> word_token_counts(const Corpus& slice) {
  std::map<std::string, std::uint64_t> counts;
  for (const auto& doc : slice.docs) {
    for (const auto& token : tokenize(doc.text)) {
      if (is_word_token(token)) ++counts[token.lower];
    }
  }
  return counts;
}

}  // namespace detail

// Shared support = the k most frequent lowercased word tokens pooled across
// all compared slices; each slice is then normalized over that support.
inline std::vector<CategoricalDistribution> topk_token_distribution(
    const std::vector<Corpus>& slices, std::size_t k) {
  if (k == 0) throw ConfigError("topk_token_distribution: k must be positive");
  if (slices.empty()) throw DataError("topk_token_distribution: no slices");
  std::vector<std::map<std::string, std::uint64_t>> per_slice;
  per_slice.reserve(slices.size());
  std::map<std::string, std::uint64_t> pooled;
  for (const auto& slice : slices) {
    if (slice.empty()) throw DataError("topk_token_distribution: empty slice");
    per_slice.push_back(detail::word_token_counts(slice));
    for (const auto& [token, count] : per_slice.back()) pooled[token] += count;
  }
  std::vector<std::pair<std::string, std::uint64_t>> ranked(pooled.begin(), pooled.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (ranked.size() > k) ranked.resize(k);
  std::vector<std::string> support;
  support.reserve(ranked.size());
  for (const auto& [token, count] : ranked) support.push_back(token);

  std::vector<CategoricalDistribution> out;
  out.reserve(slices.size());
  for (std::size_t s = 0; s < slices.size(); ++s) {
    CategoricalDistribution dist;
    dist.axis = "topk-token";
    dist.support = support;
    dist.probs.resize(support.size(), 0.0);
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < support.size(); ++i) {
      auto it = per_slice[s].find(support[i]);
      if (it != per_slice[s].end()) {
        dist.probs[i] = static_cast<double>(it->second);
        total += it->second;
      }
    }
    if (total == 0) {
      throw DataError("topk_token_distribution: slice \"" + slices[s].name +
                      "\" has no occurrences of any support token");
    }
    for (double& p : dist.probs) p /= static_cast<double>(total);
    out.push_back(std::move(dist));
  }
  return out;
}

// Pooled distribution of one annotation channel; support is the observed tag
// set sorted lexicographically.
inline CategoricalDistribution channel_distribution(const Corpus& slice,
                                                    const std::string& channel) {
  if (slice.empty()) throw DataError("channel_distribution: empty corpus slice");
  std::map<std::string, std::uint64_t> counts;
  std::uint64_t total = 0;
  for (const auto& doc : slice.docs) {
    auto it = doc.annotations.find(channel);
    if (it == doc.annotations.end()) {
      throw DataError("channel_distribution: document \"" + doc.id + "\" is missing channel \"" +
                      channel + "\"");
    }
    const std::size_t token_count = tokenize(doc.text).size();
    if (it->second.size() != token_count) {
      throw DataError("channel_distribution: document \"" + doc.id + "\" channel \"" + channel +
                      "\" length " + std::to_string(it->second.size()) + " != token count " +
                      std::to_string(token_count));
    }
    for (const auto& t : it->second) {
      ++counts[t];
      ++total;
    }
  }
  if (total == 0) throw DataError("channel_distribution: channel has no tags");
  CategoricalDistribution dist;
  dist.axis = "channel:" + channel;
  for (const auto& [t, c] : counts) {
    dist.support.push_back(t);
    dist.probs.push_back(static_cast<double>(c) / static_cast<double>(total));
  }
  return dist;
}

// JSD(P,Q) = 1/2 KL(P||M) + 1/2 KL(Q||M) with M = (P+Q)/2 and 0*log 0 = 0.
// Supports are unioned in sorted order, so evaluation is exactly symmetric.
// Base 2 bounds the result in [0,1]; base e in [0, ln 2].
inline double jsd(const CategoricalDistribution& p, const CategoricalDistribution& q,
                  JsdLogBase base = JsdLogBase::Two) {
  if (p.axis != q.axis) {
    throw ConfigError("jsd: axis mismatch (" + p.axis + " vs " + q.axis + ")");
  }
  std::set<std::string> union_support(p.support.begin(), p.support.end());
  union_support.insert(q.support.begin(), q.support.end());

  auto project = [&](const CategoricalDistribution& d) {
    std::map<std::string, double> m;
    for (std::size_t i = 0; i < d.support.size(); ++i) m[d.support[i]] = d.probs[i];
    std::vector<double> out;
    out.reserve(union_support.size());
    for (const auto& cat : union_support) {
      auto it = m.find(cat);
      out.push_back(it == m.end() ? 0.0 : it->second);
    }
    return out;
  };
  const std::vector<double> pv = project(p);
  const std::vector<double> qv = project(q);

  double kl_p = 0.0, kl_q = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double m = 0.5 * (pv[i] + qv[i]);
    if (pv[i] > 0.0) kl_p += pv[i] * std::log(pv[i] / m);
    if (qv[i] > 0.0) kl_q += qv[i] * std::log(qv[i] / m);
  }
  double result = 0.5 * kl_p + 0.5 * kl_q;
  if (base == JsdLogBase::Two) result /= std::log(2.0);
  return std::max(0.0, result);
}

namespace detail {

struct SliceIndex {
  Corpus human;
  std::vector<Corpus> models;                 // sorted by slice name
  std::map<std::string, std::string> family;  // slice name -> family
};

// Human slice = label "human". Machine docs group by model name, falling
// back to the label when no model metadata is present.
inline SliceIndex slice_corpus(const Corpus& corpus) {
  SliceIndex index;
  index.human.name = "human";
  std::map<std::string, Corpus> models;
  for (const auto& doc : corpus.docs) {
    if (doc.label == "human") {
      index.human.docs.push_back(doc);
      continue;
    }
    const std::string key = doc.model.empty() ? doc.label : doc.model;
    auto& slice = models[key];
    slice.name = key;
    slice.docs.push_back(doc);
    if (index.family.find(key) == index.family.end() && !doc.model_family.empty()) {
      index.family[key] = doc.model_family;
    }
  }
  for (auto& [name, slice] : models) index.models.push_back(std::move(slice));
  return index;
}

}  // namespace detail

// One row per (model slice, axis): JSD between the human distribution and
// the model distribution, grouped by model family.
inline DivergenceTable divergence_table(const Corpus& corpus, const std::vector<std::string>& axes,
                                        const TaggerModel* tagger, std::size_t k,
                                        JsdLogBase base = JsdLogBase::Two) {
  auto index = detail::slice_corpus(corpus);
  if (index.human.empty()) throw DataError("divergence_table: corpus has no \"human\" slice");
  if (index.models.empty()) throw DataError("divergence_table: corpus has no model slices");

  // Distributions per axis; topk shares one support across human + models.
  std::map<std::string, std::vector<std::pair<std::string, double>>> per_axis;
  for (const auto& axis : axes) {
    std::vector<std::pair<std::string, double>> rows;
    if (axis == "pos") {
      const auto human_dist = pos_distribution(index.human, tagger);
      for (const auto& slice : index.models) {
        rows.emplace_back(slice.name, jsd(human_dist, pos_distribution(slice, tagger), base));
      }
    } else if (axis == "topk" || axis == "topk-token") {
      std::vector<Corpus> slices;
      slices.push_back(index.human);
      for (const auto& slice : index.models) slices.push_back(slice);
      const auto dists = topk_token_distribution(slices, k);
      for (std::size_t s = 1; s < dists.size(); ++s) {
        rows.emplace_back(index.models[s - 1].name, jsd(dists[0], dists[s], base));
      }
    } else if (axis.rfind("channel:", 0) == 0) {
      const std::string channel = axis.substr(8);
      const auto human_dist = channel_distribution(index.human, channel);
      for (const auto& slice : index.models) {
        rows.emplace_back(slice.name, jsd(human_dist, channel_distribution(slice, channel), base));
      }
    } else {
      throw ConfigError("divergence_table: unknown axis \"" + axis +
                        "\" (expected pos, topk, or channel:<name>)");
    }
    per_axis[axis] = std::move(rows);
  }

  DivergenceTable table;
  // Group rows by family, then slice name, preserving the axis order given.
  std::vector<std::pair<std::string, std::string>> ordering;  // (family, slice)
  for (const auto& slice : index.models) {
    auto fam = index.family.find(slice.name);
    ordering.emplace_back(fam == index.family.end() ? "" : fam->second, slice.name);
  }
  std::stable_sort(ordering.begin(), ordering.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [family, slice_name] : ordering) {
    for (const auto& axis : axes) {
      for (const auto& [name, value] : per_axis[axis]) {
        if (name == slice_name) table.rows.push_back({slice_name, family, axis, value});
      }
    }
  }
  return table;
}

struct RadialData {
  std::vector<std::string> axis_order;  // tagset sorted by human frequency, descending
  double scale_min = 0.0;
  double scale_max = 0.20;
  std::vector<std::pair<std::string, std::vector<double>>> slices;  // name -> freqs
};

// POS frequencies per slice in a shared axis order (most common human tag
// first), ready for radial plotting on a fixed 0-20% scale.
inline RadialData radial_data(const Corpus& corpus, const TaggerModel* tagger) {
  auto index = detail::slice_corpus(corpus);
  if (index.human.empty()) throw DataError("radial_data: corpus has no \"human\" slice");

  const auto human_dist = pos_distribution(index.human, tagger);
  std::vector<int> order(kUposTags.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return human_dist.probs[static_cast<std::size_t>(a)] >
           human_dist.probs[static_cast<std::size_t>(b)];
  });

  RadialData data;
  for (int t : order) data.axis_order.emplace_back(tag_name(t));
  auto add_slice = [&](const std::string& name, const CategoricalDistribution& dist) {
    std::vector<double> freqs;
    freqs.reserve(order.size());
    for (int t : order) freqs.push_back(dist.probs[static_cast<std::size_t>(t)]);
    data.slices.emplace_back(name, std::move(freqs));
  };
  add_slice("human", human_dist);
  for (const auto& slice : index.models) add_slice(slice.name, pos_distribution(slice, tagger));
  return data;
}

// Mean pairwise JSD among same-family model pairs versus cross-family pairs.
inline std::pair<double, double> family_similarity(const Corpus& corpus, const std::string& axis,
                                                   const TaggerModel* tagger, std::size_t k,
                                                   JsdLogBase base = JsdLogBase::Two) {
  auto index = detail::slice_corpus(corpus);
  if (index.models.size() < 2) throw DataError("family_similarity: need at least 2 model slices");

  std::vector<CategoricalDistribution> dists(index.models.size());
  if (axis == "pos") {
    for (std::size_t i = 0; i < index.models.size(); ++i) {
      dists[i] = pos_distribution(index.models[i], tagger);
    }
  } else if (axis == "topk" || axis == "topk-token") {
    dists = topk_token_distribution(index.models, k);
  } else if (axis.rfind("channel:", 0) == 0) {
    const std::string channel = axis.substr(8);
    for (std::size_t i = 0; i < index.models.size(); ++i) {
      dists[i] = channel_distribution(index.models[i], channel);
    }
  } else {
    throw ConfigError("family_similarity: unknown axis \"" + axis + "\"");
  }

  double within_sum = 0.0, between_sum = 0.0;
  std::size_t within_pairs = 0, between_pairs = 0;
  for (std::size_t i = 0; i < index.models.size(); ++i) {
    for (std::size_t j = i + 1; j < index.models.size(); ++j) {
      const auto fi = index.family.find(index.models[i].name);
      const auto fj = index.family.find(index.models[j].name);
      const std::string fam_i = fi == index.family.end() ? "" : fi->second;
      const std::string fam_j = fj == index.family.end() ? "" : fj->second;
      const double d = jsd(dists[i], dists[j], base);
      if (!fam_i.empty() && fam_i == fam_j) {
        within_sum += d;
        ++within_pairs;
      } else {
        between_sum += d;
        ++between_pairs;
      }
    }
  }
  if (within_pairs == 0 || between_pairs == 0) {
    throw DataError("family_similarity: insufficient family structure (" +
                    std::to_string(within_pairs) + " within pairs, " +
                    std::to_string(between_pairs) + " between pairs)");
  }
  return {within_sum / static_cast<double>(within_pairs),
          between_sum / static_cast<double>(between_pairs)};
}

// CSV mirroring the divergence table layout: model,family,axis,jsd.
inline void save_divergence_csv(const DivergenceTable& table, std::ostream& out) {
  out << "model,family,axis,jsd\n";
  out.precision(17);
  for (const auto& row : table.rows) {
    out << row.slice << ',' << row.family << ',' << row.axis << ',' << row.jsd << '\n';
  }
}

inline nlohmann::json radial_to_json(const RadialData& data) {
  nlohmann::json slices = nlohmann::json::object();
  for (const auto& [name, freqs] : data.slices) slices[name] = freqs;
  return nlohmann::json{{"axis_order", data.axis_order},
                        {"scale", {{"min", data.scale_min}, {"max", data.scale_max}}},
                        {"slices", slices}};
}

}  // namespace textprint
