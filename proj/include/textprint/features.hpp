#pragma once

// Capped n-gram vocabularies and sparse count vectorization, plus a generic
// channel for externally computed dense features.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "textprint/corpus.hpp"
#include "textprint/errors.hpp"
#include "textprint/parallel.hpp"
#include "textprint/rng.hpp"
#include "textprint/utf8.hpp"

namespace textprint {

struct FeatureSpec {
  std::pair<int, int> char_range{2, 4};
  std::pair<int, int> word_range{3, 5};
  std::pair<int, int> pos_range{3, 5};
  std::size_t max_per_group = 2000;
  bool lowercase_words = true;
  bool use_char = true;
  bool use_word = true;
  bool use_pos = true;

  bool operator==(const FeatureSpec&) const = default;
};

inline void validate(const FeatureSpec& spec) {
  auto check_range = [](std::pair<int, int> r, const char* name) {
    if (!(1 <= r.first && r.first <= r.second && r.second <= 10)) {
      throw ConfigError(std::string("FeatureSpec: ") + name +
                        " range must satisfy 1 <= lo <= hi <= 10");
    }
  };
  check_range(spec.char_range, "char");
  check_range(spec.word_range, "word");
  check_range(spec.pos_range, "pos");
  if (spec.max_per_group < 1) throw ConfigError("FeatureSpec: max_per_group must be >= 1");
  if (!spec.use_char && !spec.use_word && !spec.use_pos) {
    throw ConfigError("FeatureSpec: at least one feature group must be enabled");
  }
}

// Heterogeneous lookup so gram maps can be queried with string_views
// without materializing a key per occurrence.
struct GramHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const noexcept {
    return std::hash<std::string_view>{}(s);
  }
};

// Columns are dense and contiguous in char, word, pos group order; within a
// group the order is descending corpus frequency with lexicographic ties.
struct Vocabulary {
  struct Group {
    std::string name;
    std::vector<std::string> grams;  // selection order == column order
    std::size_t offset = 0;
    // gram -> absolute column
    std::unordered_map<std::string, std::uint32_t, GramHash, std::equal_to<>> index;
  };

  FeatureSpec spec;
  std::vector<Group> groups;
  std::size_t total_columns = 0;

  const Group* find_group(std::string_view name) const {
    for (const auto& g : groups) {
      if (g.name == name) return &g;
    }
    return nullptr;
  }

  // Content hash used to detect model/vocabulary mismatches at predict time.
  std::uint64_t fingerprint() const {
    std::uint64_t h = 14695981039346656037ull;
    auto mix = [&h](std::string_view s) {
      for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
      }
      h ^= 0x1F;
      h *= 1099511628211ull;
    };
    for (const auto& g : groups) {
      mix(g.name);
      for (const auto& gram : g.grams) mix(gram);
    }
    return h;
  }
};

namespace detail {

// Open-addressing gram counter. High-order word n-grams produce millions of
// mostly-unique keys, so the node allocations and double hashing of a
// std::unordered_map<std::string, ...> dominate vocabulary building; this
// table stores keys back to back in one arena and probes linearly.
class GramCounter {
 public:
  GramCounter() : slots_(kInitialSlots) {}

  void add(std::string_view gram) {
    if (size_ * 10 >= slots_.size() * 7) grow();
    const std::uint64_t h = splitmix64(fnv1a64(gram));
    std::size_t i = static_cast<std::size_t>(h) & (slots_.size() - 1);
    for (;;) {
      Slot& slot = slots_[i];
      if (slot.count == 0) {
        slot.hash = h;
        slot.offset = arena_.size();
        slot.length = static_cast<std::uint32_t>(gram.size());
        slot.count = 1;
        arena_.append(gram);
        ++size_;
        return;
      }
      if (slot.hash == h && key(slot) == gram) {
        ++slot.count;
        return;
      }
      i = (i + 1) & (slots_.size() - 1);
    }
  }

  std::size_t size() const { return size_; }

  template <class Fn>
  void for_each(Fn&& fn) const {
    for (const Slot& slot : slots_) {
      if (slot.count > 0) fn(key(slot), slot.count);
    }
  }

 private:
  struct Slot {
    std::uint64_t hash = 0;
    std::uint64_t offset = 0;
    std::uint32_t length = 0;
    std::uint64_t count = 0;  // 0 marks an empty slot
  };
  static constexpr std::size_t kInitialSlots = 1024;  // power of two

  std::string_view key(const Slot& slot) const {
    return std::string_view(arena_).substr(slot.offset, slot.length);
  }

  void grow() {
    std::vector<Slot> bigger(slots_.size() * 2);
    for (const Slot& slot : slots_) {
      if (slot.count == 0) continue;
      std::size_t i = static_cast<std::size_t>(slot.hash) & (bigger.size() - 1);
      while (bigger[i].count != 0) i = (i + 1) & (bigger.size() - 1);
      bigger[i] = slot;
    }
    slots_ = std::move(bigger);
  }

  std::string arena_;
  std::vector<Slot> slots_;
  std::size_t size_ = 0;
};

// Per-document gram source: the unit stream rendered once into a flat
// string with unit boundaries, so every n-gram is a view, not an allocation.
struct GramStream {
  std::string text;
  std::vector<std::size_t> bounds;  // unit byte offsets; bounds.back() == text.size()

  std::size_t units() const { return bounds.empty() ? 0 : bounds.size() - 1; }
  std::string_view gram(std::size_t i, std::size_t n, std::size_t gap) const {
    const std::size_t begin = bounds[i];
    const std::size_t end = bounds[i + n] - gap;  // drop the trailing separator
    return std::string_view(text).substr(begin, end - begin);
  }
};

// Codepoints of the (optionally folded) text; n-grams span spaces.
inline GramStream char_stream(const Document& doc, const FeatureSpec& spec) {
  GramStream s;
  s.text = spec.lowercase_words ? utf8::fold_case(doc.text) : doc.text;
  s.bounds.reserve(s.text.size() + 1);
  for (std::size_t i = 0; i < s.text.size();) {
    s.bounds.push_back(i);
    const auto b = static_cast<unsigned char>(s.text[i]);
    if (b < 0x80) {
      i += 1;
    } else if ((b & 0xE0) == 0xC0) {
      i += 2;
    } else if ((b & 0xF0) == 0xE0) {
      i += 3;
    } else if ((b & 0xF8) == 0xF0) {
      i += 4;
    } else {
      i += 1;  // stray continuation byte; decode() would emit U+FFFD
    }
  }
  s.bounds.push_back(s.text.size());
  return s;
}

inline GramStream word_stream(const std::vector<Token>& tokens, const FeatureSpec& spec) {
  GramStream s;
  s.bounds.reserve(tokens.size() + 1);
  for (const auto& token : tokens) {
    s.bounds.push_back(s.text.size());
    s.text += spec.lowercase_words ? token.lower : token.surface;
    s.text += ' ';
  }
  s.bounds.push_back(s.text.size());
  return s;
}

inline GramStream pos_stream(const std::vector<int>& tags) {
  GramStream s;
  s.bounds.reserve(tags.size() + 1);
  for (int t : tags) {
    s.bounds.push_back(s.text.size());
    s.text += tag_name(t);
    s.text += ' ';
  }
  s.bounds.push_back(s.text.size());
  return s;
}

// Emits every n-gram of one stream in document order. `gap` is the width of
// the separator trailing each unit (1 for space-joined units, 0 for chars).
template <class Fn>
void for_each_gram(const GramStream& stream, std::pair<int, int> range, std::size_t gap, Fn&& fn) {
  for (int n = range.first; n <= range.second; ++n) {
    const auto un = static_cast<std::size_t>(n);
    if (stream.units() < un) continue;
    for (std::size_t i = 0; i + un <= stream.units(); ++i) fn(stream.gram(i, un, gap));
  }
}

inline void count_grams(const GramStream& stream, std::pair<int, int> range, std::size_t gap,
                        GramCounter& counts) {
  for_each_gram(stream, range, gap, [&](std::string_view gram) { counts.add(gram); });
}

inline std::vector<std::string> select_top(const GramCounter& counts, std::size_t cap) {
  std::vector<std::pair<std::string_view, std::uint64_t>> ranked;
  ranked.reserve(counts.size());
  counts.for_each([&](std::string_view gram, std::uint64_t count) {
    ranked.emplace_back(gram, count);
  });
  const auto better = [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  };
  // total order, so selecting before sorting is equivalent to a full sort
  if (ranked.size() > cap) {
    std::nth_element(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(cap),
                     ranked.end(), better);
    ranked.resize(cap);
  }
  std::sort(ranked.begin(), ranked.end(), better);
  std::vector<std::string> out;
  out.reserve(ranked.size());
  for (const auto& [gram, count] : ranked) out.emplace_back(gram);
  return out;
}

}  // namespace detail

// Top max_per_group grams per enabled group by total occurrence count across
// the corpus; ties break lexicographically ascending.
inline Vocabulary build_vocabulary(const Corpus& corpus, const FeatureSpec& spec,
                                   const TaggerModel* tagger = nullptr) {
  validate(spec);
  if (corpus.empty()) throw DataError("build_vocabulary: empty corpus");

  detail::GramCounter char_counts, word_counts, pos_counts;
  for (const auto& doc : corpus.docs) {
    if (spec.use_char) {
      detail::count_grams(detail::char_stream(doc, spec), spec.char_range, 0, char_counts);
    }
    if (spec.use_word) {
      detail::count_grams(detail::word_stream(tokenize(doc.text), spec), spec.word_range, 1,
                          word_counts);
    }
    if (spec.use_pos) {
      detail::count_grams(detail::pos_stream(tags_for(doc, tagger)), spec.pos_range, 1,
                          pos_counts);
    }
  }

  Vocabulary vocab;
  vocab.spec = spec;
  auto add_group = [&](const char* name, const detail::GramCounter& counts) {
    Vocabulary::Group g;
    g.name = name;
    g.grams = detail::select_top(counts, spec.max_per_group);
    g.offset = vocab.total_columns;
    for (std::size_t i = 0; i < g.grams.size(); ++i) {
      g.index.emplace(g.grams[i], static_cast<std::uint32_t>(g.offset + i));
    }
    vocab.total_columns += g.grams.size();
    vocab.groups.push_back(std::move(g));
  };
  if (spec.use_char) add_group("char", char_counts);
  if (spec.use_word) add_group("word", word_counts);
  if (spec.use_pos) add_group("pos", pos_counts);
  return vocab;
}

// Sparse count matrix in CSR form with an optional dense block appended on
// the right. Row order always equals corpus order.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t sparse_columns = 0;
  std::vector<std::size_t> row_offsets;                            // rows + 1
  std::vector<std::pair<std::uint32_t, std::uint32_t>> entries;    // (col, count), sorted per row
  std::vector<std::string> row_ids;
  std::vector<std::string> labels;
  std::size_t dense_columns = 0;
  std::vector<double> dense;  // rows x dense_columns, row-major
  std::uint64_t vocab_fingerprint = 0;

  std::size_t total_columns() const { return sparse_columns + dense_columns; }

  double value(std::size_t row, std::size_t col) const {
    if (col >= sparse_columns) {
      return dense[row * dense_columns + (col - sparse_columns)];
    }
    const auto begin = entries.begin() + static_cast<std::ptrdiff_t>(row_offsets[row]);
    const auto end = entries.begin() + static_cast<std::ptrdiff_t>(row_offsets[row + 1]);
    const auto it = std::lower_bound(begin, end, static_cast<std::uint32_t>(col),
                                     [](const auto& e, std::uint32_t c) { return e.first < c; });
    if (it != end && it->first == static_cast<std::uint32_t>(col)) return it->second;
    return 0.0;
  }
};

// Raw occurrence counts per vocabulary gram; out-of-vocabulary grams are
// ignored. Parallel over documents with order-identical output.
inline FeatureMatrix vectorize(const Corpus& corpus, const Vocabulary& vocab,
                               const FeatureSpec& spec, const TaggerModel* tagger = nullptr) {
  validate(spec);
  if (!(spec == vocab.spec)) {
    throw ConfigError("vectorize: feature spec does not match the vocabulary's spec");
  }
  const Vocabulary::Group* char_group = vocab.find_group("char");
  const Vocabulary::Group* word_group = vocab.find_group("word");
  const Vocabulary::Group* pos_group = vocab.find_group("pos");

  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> rows(corpus.size());
  parallel_for(corpus.size(), [&](std::size_t d) {
    const Document& doc = corpus.docs[d];
    std::unordered_map<std::uint32_t, std::uint32_t> counts;
    auto bump = [&](const Vocabulary::Group* g, std::string_view gram) {
      auto it = g->index.find(gram);
      if (it != g->index.end()) ++counts[it->second];
    };
    if (spec.use_char && char_group) {
      detail::for_each_gram(detail::char_stream(doc, spec), spec.char_range, 0,
                            [&](std::string_view gram) { bump(char_group, gram); });
    }
    if (spec.use_word && word_group) {
      detail::for_each_gram(detail::word_stream(tokenize(doc.text), spec), spec.word_range, 1,
                            [&](std::string_view gram) { bump(word_group, gram); });
    }
    if (spec.use_pos && pos_group) {
      detail::for_each_gram(detail::pos_stream(tags_for(doc, tagger)), spec.pos_range, 1,
                            [&](std::string_view gram) { bump(pos_group, gram); });
    }
    auto& row = rows[d];
    row.assign(counts.begin(), counts.end());
    std::sort(row.begin(), row.end());
  });

  FeatureMatrix m;
  m.rows = corpus.size();
  m.sparse_columns = vocab.total_columns;
  m.vocab_fingerprint = vocab.fingerprint();
  m.row_offsets.reserve(corpus.size() + 1);
  m.row_offsets.push_back(0);
  for (const auto& row : rows) {
    m.entries.insert(m.entries.end(), row.begin(), row.end());
    m.row_offsets.push_back(m.entries.size());
  }
  m.row_ids.reserve(corpus.size());
  m.labels.reserve(corpus.size());
  for (const auto& doc : corpus.docs) {
    m.row_ids.push_back(doc.id);
    m.labels.push_back(doc.label);
  }
  return m;
}

namespace detail {

inline std::unordered_map<std::string, std::vector<double>> parse_dense_file(
    const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dense feature file: " + path);
  std::unordered_map<std::string, std::vector<double>> by_id;
  std::string line;
  std::size_t lineno = 0;

  // Sniff the format: JSONL records start with '{'.
  const int first = in.peek();
  const bool jsonl = first == '{';
  bool header_done = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (jsonl) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ":" + std::to_string(lineno) + ": invalid JSON: " + e.what());
      }
      if (!j.contains("id") || !j.contains("vec")) {
        throw DataError(path + ":" + std::to_string(lineno) + ": need \"id\" and \"vec\"");
      }
      try {
        by_id[j["id"].get<std::string>()] = j["vec"].get<std::vector<double>>();
      } catch (const nlohmann::json::exception&) {
        throw DataError(path + ":" + std::to_string(lineno) + ": \"vec\" must be an array of numbers");
      }
    } else {
      if (!header_done) {
        header_done = true;  // "id,f0,f1,..." header
        continue;
      }
      std::vector<double> vec;
      std::string cell;
      std::stringstream ss(line);
      if (!std::getline(ss, cell, ',')) {
        throw DataError(path + ":" + std::to_string(lineno) + ": missing id column");
      }
      std::string id = cell;
      while (std::getline(ss, cell, ',')) {
        try {
          vec.push_back(std::stod(cell));
        } catch (const std::exception&) {
          throw DataError(path + ":" + std::to_string(lineno) + ": bad number \"" + cell + "\"");
        }
      }
      by_id[id] = std::move(vec);
    }
  }
  if (by_id.empty()) throw DataError(path + ": no dense feature rows");
  return by_id;
}

}  // namespace detail

// Appends externally computed per-document vectors as dense columns; rows
// are matched by id, never by order.
inline FeatureMatrix attach_dense(const FeatureMatrix& matrix, const std::string& dense_path) {
  const auto by_id = detail::parse_dense_file(dense_path);
  std::size_t width = 0;
  bool width_set = false;
  for (const auto& [id, vec] : by_id) {
    if (!width_set) {
      width = vec.size();
      width_set = true;
    } else if (vec.size() != width) {
      throw DataError("dense features: inconsistent width at id \"" + id + "\" (" +
                      std::to_string(vec.size()) + " vs " + std::to_string(width) + ")");
    }
    for (double v : vec) {
      if (!std::isfinite(v)) {
        throw DataError("dense features: non-finite value for id \"" + id + "\"");
      }
    }
  }
  if (width == 0) throw DataError("dense features: zero-width vectors");

  FeatureMatrix out = matrix;
  const std::size_t old_width = out.dense_columns;
  std::vector<double> merged(out.rows * (old_width + width), 0.0);
  for (std::size_t r = 0; r < out.rows; ++r) {
    const auto it = by_id.find(out.row_ids[r]);
    if (it == by_id.end()) {
      throw DataError("dense features: missing id \"" + out.row_ids[r] + "\"");
    }
    double* dst = merged.data() + r * (old_width + width);
    for (std::size_t c = 0; c < old_width; ++c) dst[c] = out.dense[r * old_width + c];
    for (std::size_t c = 0; c < width; ++c) dst[old_width + c] = it->second[c];
  }
  out.dense = std::move(merged);
  out.dense_columns = old_width + width;
  return out;
}

inline constexpr int kVocabFormatVersion = 1;

inline void save_vocab(const Vocabulary& vocab, const std::string& path) {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : vocab.groups) {
    groups.push_back({{"name", g.name}, {"grams", g.grams}});
  }
  nlohmann::json j = {
      {"version", kVocabFormatVersion},
      {"spec",
       {{"char_range", {vocab.spec.char_range.first, vocab.spec.char_range.second}},
        {"word_range", {vocab.spec.word_range.first, vocab.spec.word_range.second}},
        {"pos_range", {vocab.spec.pos_range.first, vocab.spec.pos_range.second}},
        {"max_per_group", vocab.spec.max_per_group},
        {"lowercase_words", vocab.spec.lowercase_words},
        {"use_char", vocab.spec.use_char},
        {"use_word", vocab.spec.use_word},
        {"use_pos", vocab.spec.use_pos}}},
      {"groups", groups}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write vocabulary file: " + path);
  out << j.dump() << '\n';
}

inline Vocabulary load_vocab(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open vocabulary file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed vocabulary file " + path + ": " + e.what());
  }
  if (!j.contains("version") || j["version"].get<int>() != kVocabFormatVersion) {
    throw DataError("vocabulary file " + path + ": unsupported version");
  }
  Vocabulary vocab;
  try {
    const auto& s = j.at("spec");
    vocab.spec.char_range = {s.at("char_range")[0].get<int>(), s.at("char_range")[1].get<int>()};
    vocab.spec.word_range = {s.at("word_range")[0].get<int>(), s.at("word_range")[1].get<int>()};
    vocab.spec.pos_range = {s.at("pos_range")[0].get<int>(), s.at("pos_range")[1].get<int>()};
    vocab.spec.max_per_group = s.at("max_per_group").get<std::size_t>();
    vocab.spec.lowercase_words = s.at("lowercase_words").get<bool>();
    vocab.spec.use_char = s.at("use_char").get<bool>();
    vocab.spec.use_word = s.at("use_word").get<bool>();
    vocab.spec.use_pos = s.at("use_pos").get<bool>();
    for (const auto& gj : j.at("groups")) {
      Vocabulary::Group g;
      g.name = gj.at("name").get<std::string>();
      g.grams = gj.at("grams").get<std::vector<std::string>>();
      g.offset = vocab.total_columns;
      for (std::size_t i = 0; i < g.grams.size(); ++i) {
        if (!g.index.emplace(g.grams[i], static_cast<std::uint32_t>(g.offset + i)).second) {
          throw DataError("vocabulary file " + path + ": duplicate gram \"" + g.grams[i] +
                          "\" in group " + g.name);
        }
      }
      vocab.total_columns += g.grams.size();
      vocab.groups.push_back(std::move(g));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed vocabulary file " + path + ": " + e.what());
  }
  return vocab;
}

// Debug export: sparse triplets, one "row-id,column,count" line each.
inline void save_matrix_csv(const FeatureMatrix& matrix, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write matrix file: " + path);
  out << "row_id,column,count\n";
  for (std::size_t r = 0; r < matrix.rows; ++r) {
    for (std::size_t k = matrix.row_offsets[r]; k < matrix.row_offsets[r + 1]; ++k) {
      out << matrix.row_ids[r] << ',' << matrix.entries[k].first << ',' << matrix.entries[k].second
          << '\n';
    }
  }
}

}  // namespace textprint
