#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "support/synthetic.hpp"
#include "textprint/fingerprint.hpp"

using namespace textprint;

namespace {

Document annotated_doc(const std::string& id, const std::string& label,
                       const std::vector<std::string>& words,
                       const std::vector<std::string>& pos, const std::string& model = "",
                       const std::string& family = "") {
  Document doc;
  doc.id = id;
  doc.label = label;
  doc.model = model;
  doc.model_family = family;
  std::string text;
  for (const auto& w : words) {
    if (!text.empty()) text += ' ';
    text += w;
  }
  doc.text = text;
  if (!pos.empty()) doc.annotations["pos"] = pos;
  return doc;
}

CategoricalDistribution make_dist(const std::string& axis,
                                  const std::vector<std::string>& support,
                                  const std::vector<double>& probs) {
  CategoricalDistribution d;
  d.axis = axis;
  d.support = support;
  d.probs = probs;
  return d;
}

}  // namespace

TEST_CASE("pos_distribution pools tags over the full tagset support") {
  Corpus slice;
  slice.docs.push_back(annotated_doc("d0", "human", {"aa", "bb"}, {"NOUN", "NOUN"}));
  slice.docs.push_back(annotated_doc("d1", "human", {"cc", "dd"}, {"VERB", "PUNCT"}));
  const CategoricalDistribution dist = pos_distribution(slice, nullptr);
  REQUIRE(dist.support.size() == 17);
  CHECK(dist.axis == "pos");
  CHECK(dist.probs[static_cast<std::size_t>(tag_index("NOUN"))] == 0.5);
  CHECK(dist.probs[static_cast<std::size_t>(tag_index("VERB"))] == 0.25);
  CHECK(dist.probs[static_cast<std::size_t>(tag_index("PUNCT"))] == 0.25);
  double sum = 0.0;
  for (double p : dist.probs) sum += p;
  CHECK(sum == Catch::Approx(1.0).margin(1e-9));
  CHECK(dist.probs[static_cast<std::size_t>(tag_index("ADJ"))] == 0.0);
}

TEST_CASE("pos_distribution rejects an empty slice") {
  CHECK_THROWS_AS(pos_distribution(Corpus{}, nullptr), DataError);
}

TEST_CASE("topk support pools counts over all slices") {
  Corpus s1, s2;
  s1.name = "s1";
  s2.name = "s2";
  s1.docs.push_back(annotated_doc("a0", "human", {"a", "a", "a", "b", "c"}, {}));
  s2.docs.push_back(annotated_doc("b0", "machine", {"a", "a", "b", "b"}, {}));
  const auto dists = topk_token_distribution({s1, s2}, 2);
  REQUIRE(dists.size() == 2);
  CHECK(dists[0].support == std::vector<std::string>{"a", "b"});  // pooled a:5 b:3 c:1
  CHECK(dists[0].probs == std::vector<double>{0.75, 0.25});
  CHECK(dists[1].probs == std::vector<double>{0.5, 0.5});
}

TEST_CASE("topk clamps k to the distinct token count") {
  Corpus s;
  s.name = "s";
  s.docs.push_back(annotated_doc("d", "human", {"x", "y"}, {}));
  const auto dists = topk_token_distribution({s}, 100);
  CHECK(dists[0].support == std::vector<std::string>{"x", "y"});
}

TEST_CASE("topk errors on a slice with no support hits, naming it") {
  Corpus s1, s2;
  s1.name = "big";
  s2.name = "odd-one";
  s1.docs.push_back(annotated_doc("a", "human", {"a", "a", "a", "a"}, {}));
  s2.docs.push_back(annotated_doc("b", "machine", {"z"}, {}));
  try {
    topk_token_distribution({s1, s2}, 1);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("odd-one") != std::string::npos);
  }
}

TEST_CASE("channel_distribution pools per-token channel tags") {
  Corpus slice;
  {
    Document doc = annotated_doc("d0", "human", {"x", "y"}, {});
    doc.annotations["ne"] = {"PER", "PER"};
    slice.docs.push_back(doc);
  }
  {
    Document doc = annotated_doc("d1", "human", {"z"}, {});
    doc.annotations["ne"] = {"LOC"};
    slice.docs.push_back(doc);
  }
  const CategoricalDistribution dist = channel_distribution(slice, "ne");
  CHECK(dist.axis == "channel:ne");
  CHECK(dist.support == std::vector<std::string>{"LOC", "PER"});
  CHECK(dist.probs[0] == Catch::Approx(1.0 / 3.0));
  CHECK(dist.probs[1] == Catch::Approx(2.0 / 3.0));
}

TEST_CASE("channel_distribution errors name the document missing the channel") {
  Corpus slice;
  {
    Document doc = annotated_doc("good", "human", {"x"}, {});
    doc.annotations["ne"] = {"PER"};
    slice.docs.push_back(doc);
  }
  slice.docs.push_back(annotated_doc("missing-doc", "human", {"y"}, {}));
  try {
    channel_distribution(slice, "ne");
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("missing-doc") != std::string::npos);
  }
}

TEST_CASE("channel_distribution single-tag channel is the point mass") {
  Corpus slice;
  Document doc = annotated_doc("d", "human", {"x", "y"}, {});
  doc.annotations["ne"] = {"ORG", "ORG"};
  slice.docs.push_back(doc);
  const auto dist = channel_distribution(slice, "ne");
  CHECK(dist.support == std::vector<std::string>{"ORG"});
  CHECK(dist.probs == std::vector<double>{1.0});
}

TEST_CASE("jsd identity, disjoint and the exact hand-derived case") {
  const auto p = make_dist("pos", {"a", "b"}, {0.5, 0.5});
  CHECK(jsd(p, p) == 0.0);

  const auto q1 = make_dist("pos", {"a", "b"}, {0.25, 0.75});
  const auto q2 = make_dist("pos", {"c", "d"}, {0.25, 0.75});
  CHECK(jsd(q1, q2) == Catch::Approx(1.0).margin(1e-12));

  // P=(1,0), Q=(0.5,0.5): 0.5*log2(4/3) + 0.5*(0.5*log2(2/3) + 0.5)
  const double expected =
      0.5 * (std::log2(4.0 / 3.0)) + 0.5 * (0.5 * std::log2(2.0 / 3.0) + 0.5);
  const auto pa = make_dist("pos", {"a", "b"}, {1.0, 0.0});
  const auto pb = make_dist("pos", {"a", "b"}, {0.5, 0.5});
  CHECK(jsd(pa, pb) == Catch::Approx(0.311278).margin(1e-6));
  CHECK(jsd(pa, pb) == Catch::Approx(expected).margin(1e-12));
}

TEST_CASE("jsd rejects axis mismatches and supports base e") {
  const auto p = make_dist("pos", {"a"}, {1.0});
  const auto q = make_dist("topk-token", {"a"}, {1.0});
  CHECK_THROWS_AS(jsd(p, q), ConfigError);

  const auto pa = make_dist("pos", {"a", "b"}, {1.0, 0.0});
  const auto pb = make_dist("pos", {"c", "d"}, {0.5, 0.5});
  CHECK(jsd(pa, pb, JsdLogBase::E) == Catch::Approx(std::log(2.0)).margin(1e-12));
}

TEST_CASE("jsd symmetry and bounds on random distribution pairs") {
  Rng rng(2718);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.below(6));
    std::vector<std::string> support_p, support_q;
    std::vector<double> probs_p(n), probs_q(n);
    double sum_p = 0.0, sum_q = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      support_p.push_back("cat" + std::to_string(i));
      support_q.push_back("cat" + std::to_string(i + rng.below(3)));  // partial overlap
      probs_p[i] = rng.unit() + 1e-6;
      probs_q[i] = rng.unit() + 1e-6;
      sum_p += probs_p[i];
      sum_q += probs_q[i];
    }
    for (auto& v : probs_p) v /= sum_p;
    for (auto& v : probs_q) v /= sum_q;
    // de-duplicate q's support by renormalizing over a map
    CategoricalDistribution p = make_dist("pos", support_p, probs_p);
    std::map<std::string, double> q_map;
    for (std::size_t i = 0; i < n; ++i) q_map[support_q[i]] += probs_q[i];
    CategoricalDistribution q;
    q.axis = "pos";
    for (const auto& [cat, prob] : q_map) {
      q.support.push_back(cat);
      q.probs.push_back(prob);
    }
    const double forward = jsd(p, q);
    const double backward = jsd(q, p);
    CHECK(forward == backward);  // exactly symmetric evaluation
    CHECK(forward >= 0.0);
    CHECK(forward <= 1.0 + 1e-12);
  }
}

TEST_CASE("jsd zero implies equal distributions; perturbations are visible") {
  const auto p = make_dist("pos", {"a", "b", "c"}, {0.2, 0.3, 0.5});
  const auto q = make_dist("pos", {"a", "b", "c"}, {0.2 + 1e-6, 0.3 - 1e-6, 0.5});
  CHECK(jsd(p, p) == 0.0);
  CHECK(jsd(p, q) > 0.0);
}

namespace {

Corpus fingerprint_corpus() {
  Corpus corpus;
  corpus.name = "fp";
  auto push = [&](const std::string& id, const std::string& label, const std::string& model,
                  const std::string& family, const std::vector<std::string>& words,
                  const std::vector<std::string>& pos) {
    corpus.docs.push_back(annotated_doc(id, label, words, pos, model, family));
  };
  push("h0", "human", "", "", {"alpha", "beta", "gamma"}, {"NOUN", "VERB", "NOUN"});
  push("h1", "human", "", "", {"alpha", "delta"}, {"NOUN", "PUNCT"});
  push("m0", "machine", "gpt-a", "gpt", {"alpha", "alpha", "beta"}, {"NOUN", "NOUN", "VERB"});
  push("m1", "machine", "gpt-b", "gpt", {"beta", "beta", "gamma"}, {"VERB", "VERB", "NOUN"});
  return corpus;
}

}  // namespace

TEST_CASE("divergence_table emits one row per model and axis") {
  const Corpus corpus = fingerprint_corpus();
  const DivergenceTable table = divergence_table(corpus, {"pos", "topk"}, nullptr, 10);
  CHECK(table.rows.size() == 4);  // 2 models x 2 axes
  for (const auto& row : table.rows) {
    CHECK((row.slice == "gpt-a" || row.slice == "gpt-b"));
    CHECK(row.family == "gpt");
    CHECK(row.jsd >= 0.0);
    CHECK(row.jsd <= 1.0);
  }
}

TEST_CASE("divergence_table is zero for a model slice that copies the human docs") {
  Corpus corpus;
  corpus.name = "same";
  corpus.docs.push_back(
      annotated_doc("h0", "human", {"aa", "bb", "bb"}, {"NOUN", "VERB", "VERB"}));
  Document copy = annotated_doc("m0", "machine", {"aa", "bb", "bb"}, {"NOUN", "VERB", "VERB"});
  copy.model = "clone";
  corpus.docs.push_back(copy);
  const DivergenceTable table = divergence_table(corpus, {"pos", "topk"}, nullptr, 5);
  for (const auto& row : table.rows) CHECK(row.jsd == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("divergence_table is invariant to document order") {
  Corpus corpus = fingerprint_corpus();
  const DivergenceTable a = divergence_table(corpus, {"pos"}, nullptr, 10);
  std::reverse(corpus.docs.begin(), corpus.docs.end());
  const DivergenceTable b = divergence_table(corpus, {"pos"}, nullptr, 10);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].slice == b.rows[i].slice);
    CHECK(a.rows[i].jsd == b.rows[i].jsd);
  }
}

TEST_CASE("divergence_table requires a human slice") {
  Corpus corpus;
  corpus.docs.push_back(annotated_doc("m0", "machine", {"x"}, {"NOUN"}, "m", "f"));
  CHECK_THROWS_AS(divergence_table(corpus, {"pos"}, nullptr, 5), DataError);
}

TEST_CASE("radial_data sorts the axis by human frequency and shares it across slices") {
  const Corpus corpus = fingerprint_corpus();
  const RadialData data = radial_data(corpus, nullptr);
  REQUIRE(data.axis_order.size() == 17);
  // human pooled tags: NOUN x3, VERB x1, PUNCT x1 -> NOUN first
  CHECK(data.axis_order[0] == "NOUN");
  CHECK(data.scale_min == 0.0);
  CHECK(data.scale_max == 0.20);
  // the axis order is a permutation of the tagset
  std::set<std::string> axis_set(data.axis_order.begin(), data.axis_order.end());
  CHECK(axis_set.size() == 17);
  REQUIRE(data.slices.size() == 3);  // human + 2 models
  CHECK(data.slices[0].first == "human");
  for (const auto& [name, freqs] : data.slices) {
    REQUIRE(freqs.size() == 17);
    double sum = 0.0;
    for (double f : freqs) sum += f;
    CHECK(sum == Catch::Approx(1.0).margin(1e-9));
  }
}

TEST_CASE("family_similarity averages within and between pairs") {
  // 2 families x 2 models: 2 within pairs, 4 between pairs.
  Corpus corpus;
  corpus.name = "fam";
  auto push = [&](const std::string& id, const std::string& model, const std::string& family,
                  const std::vector<std::string>& pos) {
    std::vector<std::string> words(pos.size(), "w");
    for (std::size_t i = 0; i < words.size(); ++i) words[i] += std::to_string(i);
    corpus.docs.push_back(annotated_doc(id, "machine", words, pos, model, family));
  };
  // family A: NOUN-heavy; family B: VERB-heavy
  push("a1", "modelA1", "famA", {"NOUN", "NOUN", "NOUN", "VERB"});
  push("a2", "modelA2", "famA", {"NOUN", "NOUN", "NOUN", "PUNCT"});
  push("b1", "modelB1", "famB", {"VERB", "VERB", "VERB", "NOUN"});
  push("b2", "modelB2", "famB", {"VERB", "VERB", "VERB", "PUNCT"});
  const auto [within, between] = family_similarity(corpus, "pos", nullptr, 10);

  // brute-force check of the means
  auto dist_of = [&](std::size_t i) {
    Corpus slice;
    slice.docs.push_back(corpus.docs[i]);
    return pos_distribution(slice, nullptr);
  };
  const double expected_within = (jsd(dist_of(0), dist_of(1)) + jsd(dist_of(2), dist_of(3))) / 2.0;
  const double expected_between = (jsd(dist_of(0), dist_of(2)) + jsd(dist_of(0), dist_of(3)) +
                                   jsd(dist_of(1), dist_of(2)) + jsd(dist_of(1), dist_of(3))) /
                                  4.0;
  CHECK(within == Catch::Approx(expected_within).margin(1e-12));
  CHECK(between == Catch::Approx(expected_between).margin(1e-12));
  CHECK(within < between);  // skewed construction: families are internally similar
}

TEST_CASE("family_similarity of identical slices is (0, 0)") {
  Corpus corpus;
  auto push = [&](const std::string& id, const std::string& model, const std::string& family) {
    corpus.docs.push_back(
        annotated_doc(id, "machine", {"x", "y"}, {"NOUN", "VERB"}, model, family));
  };
  push("a1", "m1", "famA");
  push("a2", "m2", "famA");
  push("b1", "m3", "famB");
  const auto [within, between] = family_similarity(corpus, "pos", nullptr, 10);
  CHECK(within == 0.0);
  CHECK(between == 0.0);
}

TEST_CASE("family_similarity needs both pair kinds") {
  Corpus corpus;
  corpus.docs.push_back(annotated_doc("a", "machine", {"x"}, {"NOUN"}, "m1", "famA"));
  corpus.docs.push_back(annotated_doc("b", "machine", {"y"}, {"VERB"}, "m2", "famB"));
  CHECK_THROWS_AS(family_similarity(corpus, "pos", nullptr, 10), DataError);
}
