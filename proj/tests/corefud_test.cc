#include "corefdec/corefud.h"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "corefdec/errors.h"
#include "corefdec/harness.h"

namespace corefdec {
namespace {

std::string Slurp(const std::string &path) {
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// One sentence whose token i has MISC misc[i]; all tokens hang off token 1.
std::string SentenceText(const std::vector<std::string> &misc,
                         const std::string &sent_id = "s1") {
  std::string out = "# sent_id = " + sent_id + "\n";
  for (size_t i = 0; i < misc.size(); ++i) {
    out += std::to_string(i + 1) + "\tw" + std::to_string(i + 1) +
           "\t_\t_\t_\t_\t" + (i == 0 ? "0" : "1") + "\t_\t_\t" + misc[i] + "\n";
  }
  return out + "\n";
}

std::string Doc(const std::string &id, const std::string &body) {
  return "# newdoc id = " + id + "\n" + body;
}

TEST(ParseTest, SingleTokenMention) {
  auto docs = ParseCorefud(Doc("d", SentenceText({"Entity=(e1)"})));
  ASSERT_EQ(docs.size(), 1u);
  ASSERT_EQ(docs[0].entities.size(), 1u);
  EXPECT_EQ(docs[0].entities[0].id, "e1");
  EXPECT_EQ(docs[0].entities[0].mentions,
            (std::vector<Mention>{{0, 0, 0, "e1", ""}}));
}

TEST(ParseTest, CrossingMentionsCloseById) {
  auto docs = ParseCorefud(Doc(
      "d", SentenceText({"Entity=(e1", "Entity=(e2", "Entity=e1)", "Entity=e2)"})));
  ASSERT_EQ(docs[0].entities.size(), 2u);
  EXPECT_EQ(docs[0].entities[0].mentions[0].start, 0);
  EXPECT_EQ(docs[0].entities[0].mentions[0].end, 2);
  EXPECT_EQ(docs[0].entities[1].mentions[0].start, 1);
  EXPECT_EQ(docs[0].entities[1].mentions[0].end, 3);
}

TEST(ParseTest, AttributesAreKeptSeparately) {
  auto docs = ParseCorefud(
      Doc("d", SentenceText({"Entity=(e7-person-1", "Entity=e7)|SpaceAfter=No"})));
  const Mention &m = docs[0].entities[0].mentions[0];
  EXPECT_EQ(m.entity, "e7");
  EXPECT_EQ(m.attributes, "-person-1");
  EXPECT_EQ(docs[0].sentences[0].tokens[1].misc,
            (std::vector<std::pair<std::string, std::string>>{{"SpaceAfter", "No"}}));
}

TEST(ParseTest, SameEntityNestedClosesInnermost) {
  auto docs = ParseCorefud(
      Doc("d", SentenceText({"Entity=(e1", "Entity=(e1", "Entity=e1)", "Entity=e1)"})));
  auto &mentions = docs[0].entities[0].mentions;
  ASSERT_EQ(mentions.size(), 2u);
  EXPECT_EQ(mentions[0].start, 0);
  EXPECT_EQ(mentions[0].end, 3);
  EXPECT_EQ(mentions[1].start, 1);
  EXPECT_EQ(mentions[1].end, 2);
}

TEST(ParseTest, MissingDocumentHeaderNamesSentence) {
  std::string text = Doc("a", SentenceText({"_"}, "a-1")) +
                     Doc("b", SentenceText({"_"}, "b-1"));
  // The first of three documents lacks its header.
  text = SentenceText({"_"}, "orphan-1") + text;
  try {
    ParseCorefud(text);
    FAIL() << "expected ParseError";
  } catch (const ParseError &e) {
    EXPECT_NE(std::string(e.what()).find("orphan-1"), std::string::npos)
        << e.what();
    EXPECT_EQ(e.line(), 1);  // where the orphan sentence starts
  }
}

TEST(ParseTest, UnclosedMentionIsReported) {
  EXPECT_THROW(ParseCorefud(Doc("d", SentenceText({"Entity=(e1", "_"}))),
               ParseError);
  EXPECT_THROW(ParseCorefud(Doc("d", SentenceText({"_", "Entity=e1)"}))),
               ParseError);
}

TEST(ParseTest, DiscontinuousMentionsAreRejected) {
  EXPECT_THROW(
      ParseCorefud(Doc("d", SentenceText({"Entity=(e1[1/2])", "_"}))),
      DiscontinuousMentionError);
}

TEST(ParseTest, StructuralErrorsCarryLineNumbers) {
  try {
    ParseCorefud("# newdoc id = d\n1\tw\t_\t_\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError &e) {
    EXPECT_EQ(e.line(), 2);
  }
  // Non-sequential token ids.
  EXPECT_THROW(ParseCorefud("# newdoc id = d\n1\ta\t_\t_\t_\t_\t0\t_\t_\t_\n"
                            "3\tb\t_\t_\t_\t_\t1\t_\t_\t_\n\n"),
               ParseError);
  // Head cycle.
  EXPECT_THROW(ParseCorefud("# newdoc id = d\n1\ta\t_\t_\t_\t_\t2\t_\t_\t_\n"
                            "2\tb\t_\t_\t_\t_\t1\t_\t_\t_\n\n"),
               ParseError);
}

TEST(ParseTest, MultiwordAndEmptyNodesAreSkipped) {
  auto docs = ParseCorefud(
      "# newdoc id = d\n"
      "1-2\tdel\t_\t_\t_\t_\t_\t_\t_\t_\n"
      "1\tde\t_\t_\t_\t_\t0\troot\t_\tEntity=(e1\n"
      "2\tel\t_\t_\t_\t_\t1\tdet\t_\tEntity=e1)\n"
      "2.1\tx\t_\t_\t_\t_\t_\t_\t_\t_\n\n");
  EXPECT_EQ(docs[0].sentences[0].tokens.size(), 2u);
  EXPECT_EQ(docs[0].entities[0].mentions[0].end, 1);
}

TEST(ParseTest, CorpusIdAndComments) {
  auto docs = ParseCorefud(
      "# newdoc id = d\n# corpus_id = cs_pcedt\n# sent_id = s\n# text = w\n"
      "# global.Entity = eid-etype\n1\tw\t_\t_\t_\t_\t0\troot\t_\t_\n\n");
  EXPECT_EQ(docs[0].corpus_id, "cs_pcedt");
  EXPECT_EQ(docs[0].sentences[0].text, "w");
  EXPECT_EQ(docs[0].sentences[0].comments,
            (std::vector<std::string>{"global.Entity = eid-etype"}));
}

TEST(WriteTest, CanonicalFixturesRoundTrip) {
  for (const char *name : {"basic.conllu", "crossing.conllu",
                           "no_entities.conllu", "pair_pred.conllu"}) {
    std::string path = std::string(COREFDEC_FIXTURES) + "/" + name;
    std::string text = Slurp(path);
    EXPECT_EQ(WriteCorefud(ParseCorefud(text)), text) << name;
  }
}

TEST(WriteTest, DocumentWithoutEntities) {
  auto docs = ParseCorefud(Slurp(std::string(COREFDEC_FIXTURES) +
                                 "/no_entities.conllu"));
  ASSERT_TRUE(docs[0].entities.empty());
  std::string text = WriteCorefud(docs);
  EXPECT_EQ(text.find("Entity="), std::string::npos);
}

TEST(WriteTest, CrossingMentionsUseQualifiedCloses) {
  auto docs = ParseCorefud(
      Doc("d", SentenceText({"Entity=(e1", "Entity=(e2", "Entity=e1)", "Entity=e2)"})));
  std::string text = WriteCorefud(docs);
  EXPECT_NE(text.find("Entity=e1)"), std::string::npos);
  EXPECT_EQ(ParseCorefud(text), docs);
}

TEST(WriteTest, CrossingMentionsOfOneEntityAreRejected) {
  Document doc;
  doc.doc_id = "d";
  doc.sentences = ParseCorefud(Doc("x", SentenceText({"_", "_", "_", "_"})))[0].sentences;
  doc.entities.push_back({"e1", {{0, 0, 2, "e1", ""}, {0, 1, 3, "e1", ""}}});
  std::vector<Document> docs = {doc};
  EXPECT_THROW(WriteCorefud(docs), DataError);
}

TEST(WriteTest, GeneratedCorporaRoundTrip) {
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    CorpusSpec spec;
    spec.seed = seed;
    spec.documents = 3;
    spec.crossing_probability = 0.3;
    auto docs = GenerateCorpus(spec);
    std::string text = WriteCorefud(docs);
    auto back = ParseCorefud(text);
    EXPECT_EQ(back, docs) << "seed " << seed;
    EXPECT_EQ(WriteCorefud(back), text);
  }
}

TEST(ValidateTest, RejectsBrokenSpans) {
  auto docs = ParseCorefud(Doc("d", SentenceText({"Entity=(e1)", "_"})));
  Document doc = docs[0];
  doc.entities[0].mentions[0].end = 5;
  EXPECT_THROW(ValidateDocument(doc), DataError);
  doc = docs[0];
  doc.entities[0].mentions[0].sentence = 1;
  EXPECT_THROW(ValidateDocument(doc), DataError);
  doc = docs[0];
  doc.entities.push_back(doc.entities[0]);
  EXPECT_THROW(ValidateDocument(doc), DataError);
}

std::vector<Token> Tokens(const std::vector<int> &heads) {
  // heads are 1-based with 0 for the root, as in the HEAD column.
  std::vector<Token> tokens;
  for (size_t i = 0; i < heads.size(); ++i) {
    Token t;
    t.index = static_cast<int>(i) + 1;
    if (heads[i] > 0) t.parent = heads[i] - 1;
    tokens.push_back(t);
  }
  return tokens;
}

TEST(MentionHeadTest, TokenWithParentOutsideSpan) {
  // Span (2,4) in 1-based terms; parents of tokens 2..4 are 3, root, 3.
  auto tokens = Tokens({3, 3, 0, 3, 3});
  EXPECT_EQ(MentionHead(1, 3, tokens), 2);
}

TEST(MentionHeadTest, SingleToken) {
  auto tokens = Tokens({2, 0, 2});
  EXPECT_EQ(MentionHead(2, 2, tokens), 2);
}

TEST(MentionHeadTest, CycleFallsBackToFirstToken) {
  // Parents inside the span only: 2, 3, 1 (1-based).
  auto tokens = Tokens({2, 3, 1});
  EXPECT_EQ(MentionHead(0, 2, tokens), 0);
}

}  // namespace
}  // namespace corefdec
