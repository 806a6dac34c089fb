#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <string>

#include "support/synthetic.hpp"
#include "textprint/features.hpp"

using namespace textprint;

namespace {

Corpus corpus_of(const std::vector<std::string>& texts, const std::string& label = "human") {
  Corpus corpus;
  corpus.name = "t";
  for (std::size_t i = 0; i < texts.size(); ++i) {
    Document doc;
    doc.id = "d" + std::to_string(i);
    doc.label = label;
    doc.text = texts[i];
    corpus.docs.push_back(std::move(doc));
  }
  return corpus;
}

FeatureSpec char_only(int lo, int hi, std::size_t cap = 2000) {
  FeatureSpec spec;
  spec.use_word = spec.use_pos = false;
  spec.char_range = {lo, hi};
  spec.max_per_group = cap;
  return spec;
}

FeatureSpec word_only(int lo, int hi, std::size_t cap = 2000) {
  FeatureSpec spec;
  spec.use_char = spec.use_pos = false;
  spec.word_range = {lo, hi};
  spec.max_per_group = cap;
  return spec;
}

}  // namespace

TEST_CASE("defaults match the reference configuration") {
  const FeatureSpec spec;
  CHECK(spec.char_range == std::pair<int, int>{2, 4});
  CHECK(spec.word_range == std::pair<int, int>{3, 5});
  CHECK(spec.pos_range == std::pair<int, int>{3, 5});
  CHECK(spec.max_per_group == 2000);
}

TEST_CASE("build_vocabulary enumerates char bigrams") {
  const Corpus corpus = corpus_of({"aba"});
  const Vocabulary vocab = build_vocabulary(corpus, char_only(2, 2));
  REQUIRE(vocab.groups.size() == 1);
  CHECK(vocab.total_columns == 2);
  CHECK(vocab.groups[0].grams == std::vector<std::string>{"ab", "ba"});
}

TEST_CASE("build_vocabulary caps at max_per_group keeping the most frequent") {
  // 3000 distinct word trigrams, all frequency 1 except a frequent head.
  std::string text = "hot hot hot hot";
  std::vector<std::string> texts = {text};
  std::string big;
  for (int i = 0; i < 3002; ++i) big += "w" + std::to_string(i) + " ";
  texts.push_back(big);
  const Corpus corpus = corpus_of(texts);
  const Vocabulary vocab = build_vocabulary(corpus, word_only(3, 3, 2000));
  REQUIRE(vocab.groups.size() == 1);
  CHECK(vocab.groups[0].grams.size() == 2000);
  // the repeated trigram has frequency 2 and must survive the cut
  CHECK(vocab.groups[0].index.count("hot hot hot") == 1);
}

TEST_CASE("vocabulary ties break lexicographically at the boundary") {
  // "xy" and "ab" both occur once; cap 1 keeps "ab".
  const Corpus corpus = corpus_of({"xy", "ab"});
  const Vocabulary vocab = build_vocabulary(corpus, char_only(2, 2, 1));
  REQUIRE(vocab.groups[0].grams.size() == 1);
  CHECK(vocab.groups[0].grams[0] == "ab");
}

TEST_CASE("build_vocabulary rejects empty corpora and all-disabled specs") {
  CHECK_THROWS_AS(build_vocabulary(Corpus{}, char_only(2, 2)), DataError);
  FeatureSpec none;
  none.use_char = none.use_word = none.use_pos = false;
  CHECK_THROWS_AS(build_vocabulary(corpus_of({"x"}), none), ConfigError);
  FeatureSpec bad;
  bad.char_range = {0, 3};
  CHECK_THROWS_AS(build_vocabulary(corpus_of({"x"}), bad), ConfigError);
}

TEST_CASE("vocabulary selection is invariant to document order") {
  auto [a, b] = testsupport::diverging_authors(30, 0.2, "human", "machine");
  Corpus corpus = testsupport::synthetic_corpus({a, b}, 20, 15, 5);
  FeatureSpec spec = char_only(2, 3, 50);
  const Vocabulary first = build_vocabulary(corpus, spec);
  std::reverse(corpus.docs.begin(), corpus.docs.end());
  const Vocabulary second = build_vocabulary(corpus, spec);
  REQUIRE(first.groups.size() == second.groups.size());
  CHECK(first.groups[0].grams == second.groups[0].grams);
}

TEST_CASE("vectorize counts vocabulary grams per document") {
  const Corpus corpus = corpus_of({"aba"});
  const FeatureSpec spec = char_only(2, 2);
  const Vocabulary vocab = build_vocabulary(corpus, spec);
  const FeatureMatrix m = vectorize(corpus, vocab, spec);
  REQUIRE(m.rows == 1);
  CHECK(m.value(0, vocab.groups[0].index.at("ab")) == 1.0);
  CHECK(m.value(0, vocab.groups[0].index.at("ba")) == 1.0);
}

TEST_CASE("vectorize gives all-zero rows for out-of-vocabulary documents") {
  const Corpus build_on = corpus_of({"aaaa"});
  const FeatureSpec spec = char_only(2, 2);
  const Vocabulary vocab = build_vocabulary(build_on, spec);
  const FeatureMatrix m = vectorize(corpus_of({"zzzz"}), vocab, spec);
  REQUIRE(m.rows == 1);
  CHECK(m.row_offsets[1] == m.row_offsets[0]);  // empty sparse row
}

TEST_CASE("vectorize counts word trigrams") {
  const Corpus corpus = corpus_of({"a b c d"});
  const FeatureSpec spec = word_only(3, 3);
  const Vocabulary vocab = build_vocabulary(corpus, spec);
  const FeatureMatrix m = vectorize(corpus, vocab, spec);
  CHECK(vocab.total_columns == 2);
  CHECK(m.value(0, vocab.groups[0].index.at("a b c")) == 1.0);
  CHECK(m.value(0, vocab.groups[0].index.at("b c d")) == 1.0);
}

TEST_CASE("vectorize rejects a mismatched spec") {
  const Corpus corpus = corpus_of({"aba"});
  const Vocabulary vocab = build_vocabulary(corpus, char_only(2, 2));
  CHECK_THROWS_AS(vectorize(corpus, vocab, char_only(2, 3)), ConfigError);
}

TEST_CASE("no all-zero column after build+vectorize on the same corpus") {
  auto [a, b] = testsupport::diverging_authors(25, 0.3, "human", "machine");
  const Corpus corpus = testsupport::synthetic_corpus({a, b}, 15, 10, 8);
  FeatureSpec spec;
  spec.use_pos = false;
  spec.char_range = {2, 3};
  spec.word_range = {1, 2};
  spec.max_per_group = 300;
  const Vocabulary vocab = build_vocabulary(corpus, spec);
  const FeatureMatrix m = vectorize(corpus, vocab, spec);
  std::vector<std::uint64_t> column_sum(m.sparse_columns, 0);
  for (const auto& [col, count] : m.entries) column_sum[col] += count;
  for (std::size_t c = 0; c < m.sparse_columns; ++c) {
    INFO("column " << c);
    CHECK(column_sum[c] > 0);
  }
}

TEST_CASE("char-group row sums equal the n-gram position count when the cap is loose") {
  const std::vector<std::string> texts = {"abcab", "xxy", "hello world"};
  const Corpus corpus = corpus_of(texts);
  const FeatureSpec spec = char_only(2, 3, 100000);
  const Vocabulary vocab = build_vocabulary(corpus, spec);
  const FeatureMatrix m = vectorize(corpus, vocab, spec);
  for (std::size_t d = 0; d < texts.size(); ++d) {
    const std::size_t len = utf8::decode(texts[d]).size();
    std::size_t expected = 0;
    for (std::size_t n = 2; n <= 3; ++n) {
      if (len >= n) expected += len - n + 1;
    }
    std::uint64_t total = 0;
    for (std::size_t k = m.row_offsets[d]; k < m.row_offsets[d + 1]; ++k) {
      total += m.entries[k].second;
    }
    CHECK(total == expected);
  }
}

TEST_CASE("pos features work from annotation channels without a tagger") {
  Corpus corpus;
  Document doc;
  doc.id = "d0";
  doc.label = "human";
  doc.text = "the dog ran";
  doc.annotations["pos"] = {"DET", "NOUN", "VERB"};
  corpus.docs.push_back(doc);
  FeatureSpec spec;
  spec.use_char = spec.use_word = false;
  spec.pos_range = {2, 2};
  const Vocabulary vocab = build_vocabulary(corpus, spec, nullptr);
  REQUIRE(vocab.total_columns == 2);
  CHECK(vocab.groups[0].index.count("DET NOUN") == 1);
  CHECK(vocab.groups[0].index.count("NOUN VERB") == 1);
  const FeatureMatrix m = vectorize(corpus, vocab, spec, nullptr);
  CHECK(m.value(0, 0) + m.value(0, 1) == 2.0);
}

TEST_CASE("attach_dense appends columns matched by id") {
  const Corpus corpus = corpus_of({"aa", "bb", "cc"});
  const FeatureSpec spec = char_only(2, 2);
  const Vocabulary vocab = build_vocabulary(corpus, spec);
  const FeatureMatrix m = vectorize(corpus, vocab, spec);

  const auto dir = std::filesystem::temp_directory_path();
  const auto csv = dir / "textprint_dense.csv";
  {
    std::ofstream out(csv);
    out << "id,f0,f1,f2,f3\n";
    out << "d2,1,2,3,4\n";   // order deliberately scrambled
    out << "d0,5,6,7,8\n";
    out << "d1,9,10,11,12\n";
  }
  const FeatureMatrix with_dense = attach_dense(m, csv.string());
  CHECK(with_dense.dense_columns == 4);
  CHECK(with_dense.total_columns() == m.sparse_columns + 4);
  CHECK(with_dense.value(0, m.sparse_columns + 0) == 5.0);
  CHECK(with_dense.value(2, m.sparse_columns + 3) == 4.0);
  std::filesystem::remove(csv);
}

TEST_CASE("attach_dense reads the JSONL form") {
  const Corpus corpus = corpus_of({"aa"});
  const FeatureSpec spec = char_only(2, 2);
  const FeatureMatrix m = vectorize(corpus, build_vocabulary(corpus, spec), spec);
  const auto path = std::filesystem::temp_directory_path() / "textprint_dense.jsonl";
  {
    std::ofstream out(path);
    out << R"({"id":"d0","vec":[1.5,-2.5]})" << "\n";
  }
  const FeatureMatrix with_dense = attach_dense(m, path.string());
  CHECK(with_dense.dense_columns == 2);
  CHECK(with_dense.value(0, m.sparse_columns + 1) == -2.5);
  std::filesystem::remove(path);
}

TEST_CASE("attach_dense rejects missing ids, ragged widths and non-finite values") {
  const Corpus corpus = corpus_of({"aa", "bb"});
  const FeatureSpec spec = char_only(2, 2);
  const FeatureMatrix m = vectorize(corpus, build_vocabulary(corpus, spec), spec);
  const auto dir = std::filesystem::temp_directory_path();

  const auto missing = dir / "textprint_dense_missing.csv";
  {
    std::ofstream out(missing);
    out << "id,f0\nd0,1\n";
  }
  try {
    attach_dense(m, missing.string());
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("d1") != std::string::npos);
  }

  const auto ragged = dir / "textprint_dense_ragged.csv";
  {
    std::ofstream out(ragged);
    out << "id,f0,f1\nd0,1,2\nd1,3\n";
  }
  CHECK_THROWS_AS(attach_dense(m, ragged.string()), DataError);

  const auto nan_file = dir / "textprint_dense_nan.jsonl";
  {
    std::ofstream out(nan_file);
    out << R"({"id":"d0","vec":[1.0]})" << "\n" << R"({"id":"d1","vec":[null]})" << "\n";
  }
  CHECK_THROWS_AS(attach_dense(m, nan_file.string()), DataError);

  std::filesystem::remove(missing);
  std::filesystem::remove(ragged);
  std::filesystem::remove(nan_file);
}

TEST_CASE("vocabulary save/load round trip") {
  auto [a, b] = testsupport::diverging_authors(20, 0.2, "human", "machine");
  const Corpus corpus = testsupport::synthetic_corpus({a, b}, 10, 8, 3);
  FeatureSpec spec;
  spec.use_pos = false;
  spec.char_range = {2, 3};
  spec.word_range = {1, 2};
  spec.max_per_group = 60;
  const Vocabulary vocab = build_vocabulary(corpus, spec);
  const auto path = std::filesystem::temp_directory_path() / "textprint_vocab.json";
  save_vocab(vocab, path.string());
  const Vocabulary loaded = load_vocab(path.string());
  CHECK(loaded.spec == vocab.spec);
  REQUIRE(loaded.groups.size() == vocab.groups.size());
  for (std::size_t g = 0; g < vocab.groups.size(); ++g) {
    CHECK(loaded.groups[g].name == vocab.groups[g].name);
    CHECK(loaded.groups[g].grams == vocab.groups[g].grams);
    CHECK(loaded.groups[g].offset == vocab.groups[g].offset);
  }
  CHECK(loaded.total_columns == vocab.total_columns);
  CHECK(loaded.fingerprint() == vocab.fingerprint());
  std::filesystem::remove(path);
}

TEST_CASE("vocabulary load rejects truncated and duplicated files") {
  const auto dir = std::filesystem::temp_directory_path();
  const auto truncated = dir / "textprint_vocab_trunc.json";
  {
    std::ofstream out(truncated);
    out << R"({"version":1,"spec")";
  }
  CHECK_THROWS_AS(load_vocab(truncated.string()), DataError);

  const auto dup = dir / "textprint_vocab_dup.json";
  {
    std::ofstream out(dup);
    out << R"({"version":1,"spec":{"char_range":[2,2],"word_range":[3,5],"pos_range":[3,5],)"
        << R"("max_per_group":10,"lowercase_words":true,"use_char":true,"use_word":false,)"
        << R"("use_pos":false},"groups":[{"name":"char","grams":["ab","ab"]}]})";
  }
  CHECK_THROWS_AS(load_vocab(dup.string()), DataError);
  std::filesystem::remove(truncated);
  std::filesystem::remove(dup);
}

TEST_CASE("save_matrix_csv emits sparse triplets") {
  const Corpus corpus = corpus_of({"aba"});
  const FeatureSpec spec = char_only(2, 2);
  const FeatureMatrix m = vectorize(corpus, build_vocabulary(corpus, spec), spec);
  const auto path = std::filesystem::temp_directory_path() / "textprint_matrix.csv";
  save_matrix_csv(m, path.string());
  std::ifstream in(path);
  std::string header, line1;
  std::getline(in, header);
  std::getline(in, line1);
  CHECK(header == "row_id,column,count");
  CHECK(line1 == "d0,0,1");
  std::filesystem::remove(path);
}
