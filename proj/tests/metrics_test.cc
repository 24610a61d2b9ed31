#include "corefdec/metrics.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "corefdec/errors.h"
#include "corefdec/harness.h"
#include "support/oracles.h"

namespace corefdec {
namespace {

constexpr double kTol = 1e-12;

void ExpectPrf(const Prf &p, double recall, double precision) {
  EXPECT_NEAR(p.recall, recall, kTol);
  EXPECT_NEAR(p.precision, precision, kTol);
  double f1 = recall + precision > 0
                  ? 2 * recall * precision / (recall + precision)
                  : 0.0;
  EXPECT_NEAR(p.f1, f1, kTol);
}

// Mention ids a..e map to 0..4.
TEST(MucTest, PartitionExample) {
  Clustering key = {{0, 1, 2}, {3, 4}};
  Clustering response = {{0, 1}, {2, 3, 4}};
  ExpectPrf(Muc(key, response), 2.0 / 3, 2.0 / 3);
}

TEST(MucTest, IdentityAndNoLinks) {
  Clustering key = {{0, 1, 2}, {3, 4}};
  ExpectPrf(Muc(key, key), 1, 1);
  Prf p = Muc(key, {{0}, {1}, {2}, {3}, {4}});
  EXPECT_EQ(p.recall, 0.0);
  EXPECT_EQ(p.f1, 0.0);
}

TEST(BCubedTest, MergedResponse) {
  Clustering key = {{0, 1}, {2}};
  Clustering response = {{0, 1, 2}};
  // Per-mention precision: 2/3, 2/3, 1/3.
  ExpectPrf(BCubed(key, response), 1.0, 5.0 / 9);
  ExpectPrf(oracle::NaiveBCubed(key, response), 1.0, 5.0 / 9);
}

TEST(BCubedTest, SingletonResponse) {
  for (int n = 1; n <= 6; ++n) {
    Clustering key(1), response;
    for (int m = 0; m < n; ++m) {
      key[0].push_back(m);
      response.push_back({m});
    }
    ExpectPrf(BCubed(key, response), 1.0 / n, 1.0);
  }
  ExpectPrf(BCubed({{0, 1}}, {{0, 1}}), 1, 1);
}

TEST(CeafeTest, SwappedPairs) {
  ExpectPrf(Ceafe({{0, 1}, {2, 3}}, {{0, 2}, {1, 3}}), 0.5, 0.5);
  ExpectPrf(Ceafe({{0, 1}, {2, 3}}, {{0, 1}, {2, 3}}), 1, 1);
}

TEST(CeafeTest, SplitResponsePaysInPrecision) {
  ExpectPrf(Ceafe({{0, 1, 2, 3}}, {{0, 1}, {2, 3}}), 2.0 / 3, 1.0 / 3);
}

TEST(MetricsTest, EmptyClusteringsFollowDegenerateRule) {
  ExpectPrf(Muc({}, {}), 1, 1);
  ExpectPrf(Muc({{0}}, {{1}}), 0, 0);
  ExpectPrf(BCubed({}, {{0, 1}}), 0, 0);
  ExpectPrf(Ceafe({{0, 1}}, {}), 0, 0);
}

TEST(MetricsTest, MatchNaiveImplementations) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    const int mentions = 1 + trial % 12;
    Clustering key = oracle::RandomClustering(rng, mentions, 1 + trial % 6);
    Clustering response = oracle::RandomClustering(rng, mentions, 1 + (trial / 6) % 6);
    for (auto [fast, slow] :
         {std::pair{Muc(key, response), oracle::NaiveMuc(key, response)},
          std::pair{BCubed(key, response), oracle::NaiveBCubed(key, response)},
          std::pair{Ceafe(key, response), oracle::NaiveCeafe(key, response)}}) {
      ASSERT_NEAR(fast.recall, slow.recall, 1e-9) << trial;
      ASSERT_NEAR(fast.precision, slow.precision, 1e-9) << trial;
      ASSERT_NEAR(fast.f1, slow.f1, 1e-9) << trial;
    }
  }
}

TEST(MetricsTest, CountsSumAcrossDocuments) {
  MetricCounts a = MucCounts({{0, 1, 2}}, {{0, 1}, {2}});
  MetricCounts b = MucCounts({{0, 1}}, {{0, 1}});
  MetricCounts total = a;
  total += b;
  EXPECT_DOUBLE_EQ(total.recall_num, 2.0);
  EXPECT_DOUBLE_EQ(total.recall_den, 3.0);
  EXPECT_DOUBLE_EQ(total.precision_num, 2.0);
  EXPECT_DOUBLE_EQ(total.precision_den, 2.0);
}

Sentence FiveTokens() {
  // 1-based heads: 3 3 0 3 3.
  Sentence s;
  for (int i = 0; i < 5; ++i) {
    Token t;
    t.index = i + 1;
    t.form = "w";
    if (i != 2) t.parent = 2;
    s.tokens.push_back(t);
  }
  return s;
}

TEST(MatchMentionsTest, SubspanWithSameHead) {
  std::vector<Sentence> sentences = {FiveTokens()};
  std::vector<Mention> gold = {{0, 0, 3, "g", ""}};
  std::vector<Mention> pred = {{0, 1, 2, "p", ""}};
  EXPECT_EQ(MatchMentions(gold, pred, MatchKind::kHead, sentences)[0], 0);
  EXPECT_EQ(MatchMentions(gold, pred, MatchKind::kPartial, sentences)[0], 0);
  EXPECT_EQ(MatchMentions(gold, pred, MatchKind::kExact, sentences)[0],
            std::nullopt);
}

TEST(MatchMentionsTest, PartialNeedsContainment) {
  std::vector<Sentence> sentences = {FiveTokens()};
  std::vector<Mention> gold = {{0, 1, 3, "g", ""}};
  std::vector<Mention> pred = {{0, 0, 2, "p", ""}};
  EXPECT_EQ(MatchMentions(gold, pred, MatchKind::kHead, sentences)[0], 0);
  EXPECT_EQ(MatchMentions(gold, pred, MatchKind::kPartial, sentences)[0],
            std::nullopt);
}

TEST(MatchMentionsTest, IdenticalSpansAreNeverStolen) {
  std::vector<Sentence> sentences = {FiveTokens()};
  // The first prediction could claim the short gold span by head, but the
  // second prediction is identical to it.
  std::vector<Mention> gold = {{0, 0, 4, "g", ""}, {0, 2, 2, "g", ""}};
  std::vector<Mention> pred = {{0, 1, 3, "p", ""}, {0, 2, 2, "p", ""}};
  auto head = MatchMentions(gold, pred, MatchKind::kHead, sentences);
  EXPECT_EQ(head[1], 1);
  EXPECT_EQ(head[0], 0);
}

using Pairs = std::set<std::pair<int, int>>;

Pairs MatchedPairs(const std::vector<std::optional<int>> &m) {
  Pairs out;
  for (size_t j = 0; j < m.size(); ++j) {
    if (m[j]) out.insert({*m[j], static_cast<int>(j)});
  }
  return out;
}

bool Includes(const Pairs &big, const Pairs &small) {
  return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

TEST(MatchMentionsTest, ExactIsSubsetOfHeadAndPartial) {
  for (uint64_t seed = 1; seed <= 40; ++seed) {
    CorpusSpec spec;
    spec.seed = seed;
    spec.crossing_probability = 0.5;
    auto gold = GenerateCorpus(spec)[0];
    spec.seed = seed + 1000;
    auto other = GenerateCorpus(spec)[0];
    std::vector<Mention> g = CollectMentions(gold), p;
    for (const Mention &m : CollectMentions(other)) {
      if (m.sentence < static_cast<int>(gold.sentences.size()) &&
          m.end < static_cast<int>(gold.sentences[m.sentence].tokens.size())) {
        p.push_back(m);
      }
    }
    // Mix in some exact copies so that exact matches exist.
    for (size_t i = 0; i < g.size(); i += 2) p.push_back(g[i]);
    std::sort(p.begin(), p.end(), MentionLess);
    auto exact = MatchedPairs(MatchMentions(g, p, MatchKind::kExact, gold.sentences));
    auto head = MatchedPairs(MatchMentions(g, p, MatchKind::kHead, gold.sentences));
    auto partial =
        MatchedPairs(MatchMentions(g, p, MatchKind::kPartial, gold.sentences));
    EXPECT_TRUE(Includes(head, exact)) << seed;
    EXPECT_TRUE(Includes(partial, exact)) << seed;
  }
}

std::vector<Document> Fixture(const std::string &name) {
  return ReadCorefudFile(std::string(COREFDEC_FIXTURES) + "/" + name);
}

TEST(ScoreTest, GoldAgainstItselfIsPerfect) {
  for (const char *name : {"basic.conllu", "crossing.conllu", "pair_pred.conllu"}) {
    auto docs = Fixture(name);
    for (const MatchMode &mode : StandardModes()) {
      auto report = Score(docs, docs, mode);
      EXPECT_DOUBLE_EQ(report.conll, 1.0) << name << " " << ModeLabel(mode);
      EXPECT_DOUBLE_EQ(report.muc.f1, 1.0);
      EXPECT_DOUBLE_EQ(report.b3.f1, 1.0);
      EXPECT_DOUBLE_EQ(report.ceafe.f1, 1.0);
    }
  }
}

TEST(ScoreTest, EmptyPredictionScoresZero) {
  auto gold = Fixture("basic.conllu");
  auto empty = gold;
  for (Document &doc : empty) doc.entities.clear();
  auto report = Score(gold, empty, {MatchKind::kHead, false});
  EXPECT_EQ(report.conll, 0.0);
  EXPECT_EQ(report.muc.recall, 0.0);
  EXPECT_EQ(report.b3.recall, 0.0);
  EXPECT_EQ(report.ceafe.recall, 0.0);
}

TEST(ScoreTest, BoundaryErrorHurtsOnlyExactMatch) {
  auto gold = Fixture("basic.conllu");
  auto pred = Fixture("pair_pred.conllu");
  double head = Score(gold, pred, {MatchKind::kHead, false}).conll;
  double partial = Score(gold, pred, {MatchKind::kPartial, false}).conll;
  double exact = Score(gold, pred, {MatchKind::kExact, false}).conll;
  EXPECT_GT(head, exact);
  EXPECT_GT(partial, exact);
  EXPECT_NEAR(exact, (0.75 + 11.0 / 14 + 5.0 / 6) / 3, 1e-12);
}

TEST(ScoreTest, DocumentMismatchIsDataError) {
  auto gold = Fixture("basic.conllu");
  auto pred = gold;
  pred[1].doc_id = "elsewhere";
  EXPECT_THROW(Score(gold, pred, {}), DataError);
  pred = gold;
  pred.pop_back();
  EXPECT_THROW(Score(gold, pred, {}), DataError);
}

TEST(ScoreTest, MentionOutsideGoldTextIsDataError) {
  auto gold = Fixture("basic.conllu");
  auto pred = gold;
  pred[0].entities[0].mentions[0].end = 40;
  EXPECT_THROW(Score(gold, pred, {}), DataError);
}

TEST(ScoreTest, SingletonsCountOnlyWhenRequested) {
  auto gold = Fixture("basic.conllu");
  auto pred = gold;
  // Drop the singleton "Prague" from the prediction.
  auto &entities = pred[0].entities;
  entities.erase(std::remove_if(entities.begin(), entities.end(),
                                [](const Entity &e) { return e.singleton(); }),
                 entities.end());
  EXPECT_DOUBLE_EQ(Score(gold, pred, {MatchKind::kHead, false}).conll, 1.0);
  EXPECT_LT(Score(gold, pred, {MatchKind::kHead, true}).conll, 1.0);
}

TEST(ModeLabelTest, StandardLabels) {
  std::vector<std::string> labels;
  for (const auto &mode : StandardModes()) labels.push_back(ModeLabel(mode));
  EXPECT_EQ(labels, (std::vector<std::string>{"Head-match", "Partial-match",
                                              "Exact-match", "+Singletons"}));
}

}  // namespace
}  // namespace corefdec
