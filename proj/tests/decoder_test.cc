#include "corefdec/decoder.h"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "support/oracles.h"

namespace corefdec {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

TagVocabulary Vocab(std::vector<std::string> tags) {
  return TagVocabulary::FromStrings(tags);
}

Matrix LogRows(const std::vector<std::vector<double>> &probs) {
  Matrix m(static_cast<int>(probs.size()), static_cast<int>(probs[0].size()));
  for (size_t r = 0; r < probs.size(); ++r) {
    for (size_t c = 0; c < probs[r].size(); ++c) {
      m(static_cast<int>(r), static_cast<int>(c)) = std::log(probs[r][c]);
    }
  }
  return m;
}

Matrix OneHot(const std::vector<int> &tags, int size, double hot = 0.0,
              double cold = -10.0) {
  Matrix m(static_cast<int>(tags.size()), size, cold);
  for (size_t t = 0; t < tags.size(); ++t) m(static_cast<int>(t), tags[t]) = hot;
  return m;
}

// Integer-valued scores so that ties are common and summation is exact.
Matrix RandomScores(std::mt19937_64 &rng, int rows, int cols, int levels) {
  std::uniform_int_distribution<int> level(0, levels - 1);
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = -level(rng);
  }
  return m;
}

Matrix RandomReal(std::mt19937_64 &rng, int rows, int cols) {
  std::normal_distribution<double> normal(0.0, 2.0);
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = normal(rng);
  }
  return m;
}

std::vector<Tag> TagsOf(const TagVocabulary &vocab, const std::vector<int> &seq) {
  std::vector<Tag> tags;
  for (int k : seq) tags.push_back(vocab.tag(k));
  return tags;
}

const std::vector<std::string> kEightTags = {
    "O",      "PUSH",        "POP(1)",        "PUSH POP(1)",
    "POP(2)", "PUSH PUSH",   "POP(1) POP(1)", "POP(1) PUSH"};

TEST(ConstrainedTest, OneHotValidSequenceIsRecovered) {
  auto vocab = Vocab(kEightTags);
  std::vector<int> gold = {1, 5, 3, 4, 6, 0};  // PUSH, PUSH PUSH, ...
  ASSERT_TRUE(IsAdmissible(vocab, gold, 10));
  EXPECT_EQ(DecodeConstrained(OneHot(gold, vocab.size()), vocab, {}), gold);
}

TEST(ConstrainedTest, TwoTokenChoiceFollowsMass) {
  auto vocab = Vocab({"O", "PUSH", "POP(1)"});
  // PUSH POP(1) = 0.6 * 0.4 beats O O = 0.3 * 0.5.
  Matrix a = LogRows({{0.3, 0.6, 0.1}, {0.5, 0.1, 0.4}});
  // O O = 0.35 * 0.8 beats PUSH POP(1) = 0.6 * 0.1.
  Matrix b = LogRows({{0.35, 0.6, 0.05}, {0.8, 0.1, 0.1}});
  EXPECT_EQ(DecodeConstrained(a, vocab, {}), (std::vector<int>{1, 2}));
  EXPECT_EQ(DecodeConstrained(b, vocab, {}), (std::vector<int>{0, 0}));
  for (const Matrix *m : {&a, &b}) {
    EXPECT_EQ(DecodeConstrained(*m, vocab, {}),
              *oracle::ExhaustiveDecode(*m, vocab, 10));
  }
}

TEST(ConstrainedTest, DepthCapIsRespected) {
  auto vocab = Vocab({"O", "PUSH", "POP(1)"});
  std::vector<int> deep = {1, 1, 1, 1, 2, 2, 2, 2};
  Matrix m = OneHot(deep, vocab.size(), -1.0, -4.0);
  DecoderConfig config;
  config.max_depth = 3;
  auto got = DecodeConstrained(m, vocab, config);
  auto replay = oracle::ReplayTags(TagsOf(vocab, got), 3);
  EXPECT_TRUE(replay.valid);
  EXPECT_EQ(got, *oracle::ExhaustiveDecode(m, vocab, 3));
  config.max_depth = 4;
  EXPECT_EQ(DecodeConstrained(m, vocab, config), deep);
}

TEST(ConstrainedTest, SingleTokenPushCountsTowardsDepth) {
  auto vocab = Vocab({"O", "PUSH", "POP(1)", "PUSH POP(1)"});
  std::vector<int> gold = {1, 3, 2};
  Matrix m = OneHot(gold, vocab.size());
  DecoderConfig config;
  config.max_depth = 1;
  EXPECT_NE(DecodeConstrained(m, vocab, config), gold);
  config.max_depth = 2;
  EXPECT_EQ(DecodeConstrained(m, vocab, config), gold);
}

TEST(ConstrainedTest, OpenFinalStackOnlyWhenAllowed) {
  auto vocab = Vocab({"O", "PUSH", "POP(1)"});
  Matrix m = OneHot({1, 0}, vocab.size());
  EXPECT_EQ(DecodeConstrained(m, vocab, {}), (std::vector<int>{0, 0}));
  DecoderConfig open;
  open.allow_open_final = true;
  EXPECT_EQ(DecodeConstrained(m, vocab, open), (std::vector<int>{1, 0}));
}

TEST(ConstrainedTest, TiesResolveToSmallestSequence) {
  auto vocab = Vocab({"O", "PUSH", "POP(1)", "PUSH POP(1)"});
  Matrix flat(3, vocab.size(), 0.0);
  EXPECT_EQ(DecodeConstrained(flat, vocab, {}), (std::vector<int>{0, 0, 0}));
}

TEST(ConstrainedTest, EmptySentence) {
  auto vocab = Vocab({"O", "PUSH"});
  EXPECT_TRUE(DecodeConstrained(Matrix(0, 2), vocab, {}).empty());
}

TEST(ConstrainedTest, MatchesExhaustiveSearch) {
  std::mt19937_64 rng(3);
  for (bool depth : {false, true}) {
    TagVocabulary vocab = depth ? Vocab({"0:O", "0:PUSH", "1:POP(1)", "1:O",
                                         "1:PUSH", "2:POP(2)", "2:POP(1)",
                                         "0:PUSH POP(1)"})
                                : Vocab(kEightTags);
    for (int trial = 0; trial < 60; ++trial) {
      const int length = 1 + trial % 5;
      const int max_depth = 1 + trial % 3;
      Matrix m = trial % 2 ? RandomScores(rng, length, vocab.size(), 3)
                           : RandomReal(rng, length, vocab.size());
      DecoderConfig config;
      config.max_depth = max_depth;
      auto expected = oracle::ExhaustiveDecode(m, vocab, max_depth);
      ASSERT_TRUE(expected);
      ASSERT_EQ(DecodeConstrained(m, vocab, config), *expected)
          << "trial " << trial;
      config.allow_open_final = true;
      ASSERT_EQ(DecodeConstrained(m, vocab, config),
                *oracle::ExhaustiveDecode(m, vocab, max_depth, true));
    }
  }
}

TEST(IsAdmissibleTest, AgreesWithReplay) {
  auto vocab = Vocab(kEightTags);
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> pick(0, vocab.size() - 1);
  for (int trial = 0; trial < 3000; ++trial) {
    std::vector<int> seq(1 + trial % 7);
    for (int &k : seq) k = pick(rng);
    auto replay = oracle::ReplayTags(TagsOf(vocab, seq), 2);
    ASSERT_EQ(IsAdmissible(vocab, seq, 2),
              replay.valid && replay.final_depth == 0);
  }
}

TEST(GreedyTest, OneHotValidSequenceMatchesConstrained) {
  auto vocab = Vocab(kEightTags);
  std::vector<int> gold = {1, 0, 3, 2};
  Matrix m = OneHot(gold, vocab.size());
  EXPECT_EQ(DecodeGreedy(m), gold);
  EXPECT_EQ(DecodeGreedy(m), DecodeConstrained(m, vocab, {}));
}

TEST(GreedyTest, PushEverywhereIsUnbalanced) {
  auto vocab = Vocab({"O", "PUSH", "POP(1)"});
  auto seq = DecodeGreedy(OneHot({1, 1, 1}, vocab.size()));
  EXPECT_EQ(seq, (std::vector<int>{1, 1, 1}));
  try {
    DecodeTags(TagsOf(vocab, seq));
    FAIL() << "expected TagError";
  } catch (const TagError &e) {
    EXPECT_EQ(e.kind(), TagError::kUnbalanced);
  }
}

TEST(GreedyTest, ScoreDominatesConstrained) {
  auto vocab = Vocab(kEightTags);
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    Matrix m = RandomReal(rng, 1 + trial % 9, vocab.size());
    EXPECT_GE(SequenceScore(m, DecodeGreedy(m)),
              SequenceScore(m, DecodeConstrained(m, vocab, {})));
  }
}

TEST(CrfTest, ZeroTransitionsWithConstraintsEqualConstrained) {
  auto vocab = Vocab({"0:O", "0:PUSH", "1:POP(1)", "1:O", "1:PUSH", "2:POP(2)",
                      "2:POP(1)", "0:PUSH POP(1)", "1:PUSH POP(1)"});
  std::mt19937_64 rng(6);
  DecoderConfig config;
  config.mode = DecodeMode::kCrf;
  config.enforce_constraints = true;
  for (int trial = 0; trial < 300; ++trial) {
    Matrix m = trial % 2 ? RandomScores(rng, 1 + trial % 10, vocab.size(), 2)
                         : RandomReal(rng, 1 + trial % 10, vocab.size());
    config.max_depth = 1 + trial % 3;
    ASSERT_EQ(DecodeCrf(m, vocab, TransitionMatrix::Zero(vocab.size()), config),
              DecodeConstrained(m, vocab, config));
  }
}

TEST(CrfTest, ZeroTransitionsWithConstraintsOnPlainTags) {
  auto vocab = Vocab(kEightTags);
  std::mt19937_64 rng(16);
  DecoderConfig config;
  config.mode = DecodeMode::kCrf;
  config.enforce_constraints = true;
  for (int trial = 0; trial < 200; ++trial) {
    Matrix m = RandomScores(rng, 1 + trial % 8, vocab.size(), 3);
    ASSERT_EQ(DecodeCrf(m, vocab, TransitionMatrix::Zero(vocab.size()), config),
              DecodeConstrained(m, vocab, config));
  }
}

TEST(CrfTest, MaskedTransitionsReproduceConstrainedDecoding) {
  auto vocab = Vocab({"0:O", "0:PUSH", "1:POP(1)", "1:O", "1:PUSH", "2:POP(2)",
                      "2:POP(1)", "0:PUSH POP(1)", "2:O", "2:PUSH"});
  std::mt19937_64 rng(9);
  for (int max_depth : {1, 2, 3}) {
    auto mask = ConstraintTransitions(vocab, max_depth);
    DecoderConfig masked;
    masked.mode = DecodeMode::kCrf;
    masked.max_depth = max_depth;
    DecoderConfig enforced = masked;
    enforced.enforce_constraints = true;
    for (int trial = 0; trial < 150; ++trial) {
      Matrix m = trial % 2 ? RandomScores(rng, 1 + trial % 9, vocab.size(), 3)
                           : RandomReal(rng, 1 + trial % 9, vocab.size());
      auto plain = DecodeCrf(m, vocab, mask, masked);
      ASSERT_EQ(plain, DecodeCrf(m, vocab, mask, enforced));
      ASSERT_EQ(plain, DecodeConstrained(m, vocab, enforced));
    }
  }
}

TEST(CrfTest, ConstraintTransitionsNeedDepthTags) {
  EXPECT_THROW(ConstraintTransitions(Vocab(kEightTags), 3), DataError);
}

TEST(CrfTest, StrongSelfTransitionGivesAllO) {
  auto vocab = Vocab({"O", "PUSH", "POP(1)"});
  auto transitions = TransitionMatrix::Zero(vocab.size());
  transitions.scores(0, 0) = 5.0;
  Matrix uniform(6, vocab.size(), std::log(1.0 / 3));
  DecoderConfig config;
  config.mode = DecodeMode::kCrf;
  EXPECT_EQ(DecodeCrf(uniform, vocab, transitions, config),
            std::vector<int>(6, 0));
}

TEST(CrfTest, TransitionsChangeTheOptimum) {
  auto vocab = Vocab({"O", "PUSH", "POP(1)"});
  Matrix m = LogRows({{0.4, 0.6, 0.0001}, {0.5, 0.1, 0.4}});
  auto transitions = TransitionMatrix::Zero(vocab.size());
  DecoderConfig config;
  config.mode = DecodeMode::kCrf;
  EXPECT_EQ(DecodeCrf(m, vocab, transitions, config), (std::vector<int>{1, 0}));
  transitions.scores(1, 0) = -kInf;
  EXPECT_EQ(DecodeCrf(m, vocab, transitions, config), (std::vector<int>{1, 2}));
  transitions.start[1] = -kInf;
  EXPECT_EQ(DecodeCrf(m, vocab, transitions, config), (std::vector<int>{0, 0}));
}

TEST(CrfTest, NoFinitePathIsInfeasible) {
  auto vocab = Vocab({"O", "PUSH"});
  TransitionMatrix t = TransitionMatrix::Zero(vocab.size());
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) t.scores(a, b) = -kInf;
  }
  DecoderConfig config;
  config.mode = DecodeMode::kCrf;
  EXPECT_THROW(DecodeCrf(Matrix(2, 2), vocab, t, config), InfeasibleError);
}

TEST(CrfTest, ShapeMismatchIsDataError) {
  auto vocab = Vocab({"O", "PUSH"});
  DecoderConfig config;
  config.mode = DecodeMode::kCrf;
  EXPECT_THROW(DecodeCrf(Matrix(2, 2), vocab, TransitionMatrix::Zero(3), config),
               DataError);
  EXPECT_THROW(DecodeConstrained(Matrix(2, 3), vocab, {}), DataError);
}

DistributionTensor RandomTensor(std::mt19937_64 &rng, const TagVocabulary &vocab,
                                int sentences) {
  DistributionTensor tensor;
  tensor.vocabulary = vocab;
  tensor.normalized = false;
  for (int s = 0; s < sentences; ++s) {
    tensor.sentences.push_back(
        {"d" + std::to_string(s / 4), s % 4, RandomReal(rng, 1 + s % 11, vocab.size())});
  }
  return tensor;
}

TEST(DecodeTensorTest, ParallelOutputKeepsInputOrder) {
  auto vocab = Vocab(kEightTags);
  std::mt19937_64 rng(12);
  auto tensor = RandomTensor(rng, vocab, 57);
  DecoderConfig config;
  auto serial = DecodeTensor(tensor, config, nullptr, 1);
  EXPECT_EQ(DecodeTensor(tensor, config, nullptr, 4), serial);
  EXPECT_EQ(DecodeTensor(tensor, config, nullptr, 64), serial);
  ASSERT_EQ(serial.size(), tensor.sentences.size());
  for (size_t s = 0; s < serial.size(); ++s) {
    EXPECT_EQ(serial[s].size(),
              static_cast<size_t>(tensor.sentences[s].rows.rows()));
  }
}

TEST(DecodeTensorTest, CrfModeNeedsTransitions) {
  auto vocab = Vocab(kEightTags);
  std::mt19937_64 rng(1);
  DecoderConfig config;
  config.mode = DecodeMode::kCrf;
  EXPECT_THROW(DecodeTensor(RandomTensor(rng, vocab, 2), config), DataError);
}

TEST(TransitionFileTest, RoundTripWithNegativeInfinity) {
  auto vocab = Vocab({"0:O", "0:PUSH", "1:POP(1)"});
  auto mask = ConstraintTransitions(vocab, 2);
  mask.scores(0, 0) = 0.25;
  std::stringstream buffer;
  WriteTransitionFile(vocab, mask, buffer);
  auto back = ReadTransitionFile(buffer, vocab);
  EXPECT_EQ(back.scores, mask.scores);
  EXPECT_EQ(back.start, mask.start);
  EXPECT_EQ(back.end, mask.end);
  EXPECT_EQ(back.scores(0, 2), -kInf);
}

TEST(TransitionFileTest, VocabularyMustMatch) {
  auto vocab = Vocab({"O", "PUSH"});
  std::stringstream buffer;
  WriteTransitionFile(vocab, TransitionMatrix::Zero(2), buffer);
  EXPECT_THROW(ReadTransitionFile(buffer, Vocab({"O", "POP(1)"})), DataError);
  std::stringstream bad("{\"vocabulary\": [\"O\"], \"matrix\": [[0, 1]]}");
  EXPECT_THROW(ReadTransitionFile(bad, Vocab({"O"})), DataError);
}

TEST(TagFileTest, RoundTrip) {
  std::vector<TagSequence> seqs = {
      {"a", 0, {ParseTag("PUSH"), ParseTag("POP(1)")}},
      {"a", 1, {}},
      {"b", 0, {ParseTag("PUSH POP(1)")}}};
  std::stringstream buffer;
  WriteTagFile(seqs, buffer);
  EXPECT_EQ(ReadTagFile(buffer), seqs);
}

}  // namespace
}  // namespace corefdec
