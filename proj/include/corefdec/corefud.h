#ifndef COREFDEC_COREFUD_H_
#define COREFDEC_COREFUD_H_

// In-memory form of the CorefUD subset of CoNLL-U used throughout the
// toolkit: ten-column token rows with dependency heads, and coreference
// mentions encoded as `Entity=` brackets in the MISC column.

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace corefdec {

struct Token {
  int index = 0;  // 1-based ID column
  std::string form;
  std::string lemma = "_";
  std::string upos = "_";
  std::string xpos = "_";
  std::string feats = "_";
  // 0-based sentence-local index of the syntactic head; nullopt for root.
  std::optional<int> parent;
  std::string deprel = "_";
  std::string deps = "_";
  // MISC attributes in file order, without the Entity attribute.
  std::vector<std::pair<std::string, std::string>> misc;

  bool operator==(const Token &) const = default;
};

struct Sentence {
  std::string id;
  std::string text;
  // Comment lines other than sent_id/text, without the leading "# ".
  std::vector<std::string> comments;
  std::vector<Token> tokens;

  bool operator==(const Sentence &) const = default;
};

// A contiguous, sentence-internal span. Token positions are 0-based and
// inclusive.
struct Mention {
  int sentence = 0;
  int start = 0;
  int end = 0;
  std::string entity;
  // Uninterpreted bracket attributes following the entity id, kept verbatim
  // including the leading '-' (e.g. "-person-1").
  std::string attributes;

  int length() const { return end - start + 1; }

  bool operator==(const Mention &) const = default;
};

// Document order: sentence, then start, then end.
bool MentionLess(const Mention &a, const Mention &b);

struct Entity {
  std::string id;
  std::vector<Mention> mentions;

  bool singleton() const { return mentions.size() == 1; }

  bool operator==(const Entity &) const = default;
};

struct Document {
  std::string doc_id;
  std::string corpus_id;
  std::vector<Sentence> sentences;
  std::vector<Entity> entities;

  bool operator==(const Document &) const = default;
};

// Parses a CorefUD stream. Throws ParseError (or DiscontinuousMentionError)
// with the offending line number.
std::vector<Document> ParseCorefud(std::istream &in);
std::vector<Document> ParseCorefud(std::string_view text);
std::vector<Document> ReadCorefudFile(const std::string &path);

// Serializes documents; throws DataError for spans that cannot be written
// unambiguously (two mentions of one entity crossing each other).
void WriteCorefud(std::span<const Document> docs, std::ostream &out);
std::string WriteCorefud(std::span<const Document> docs);
void WriteCorefudFile(std::span<const Document> docs, const std::string &path);

// Sorts mentions inside entities into document order and entities by their
// first mention (then id). Parsing always returns canonical documents.
void Canonicalize(Document &doc);

// Throws DataError when the document violates span or id invariants.
void ValidateDocument(const Document &doc);

// All mentions of the document, in document order.
std::vector<Mention> CollectMentions(const Document &doc);

// First span token whose parent lies outside [start, end] (or is the root);
// the first span token when every parent stays inside.
int MentionHead(int start, int end, std::span<const Token> tokens);
int MentionHead(const Mention &m, const Document &doc);

}  // namespace corefdec

#endif  // COREFDEC_COREFUD_H_
