#ifndef COREFDEC_TAGS_H_
#define COREFDEC_TAGS_H_

// Stack-instruction tags. Every token carries one tag: a run of POP(i)
// instructions closing open mentions (i counts from the stack top), a run
// of PUSH instructions opening new mentions, and a run of POP(1)
// instructions closing single-token mentions pushed by the same tag.
//
// Canonical text: instructions joined by single spaces ("POP(2) PUSH
// POP(1)"), the empty tag is "O", and depth-dependent tags carry the stack
// size before their first instruction as a prefix ("2:POP(1)").

#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "corefdec/errors.h"

namespace corefdec {

struct Tag {
  std::vector<int> leading_pops;  // each >= 1
  int pushes = 0;
  int trailing_pops = 0;  // <= pushes
  std::optional<int> depth;  // present iff depth-dependent

  bool empty() const {
    return leading_pops.empty() && pushes == 0 && trailing_pops == 0;
  }
  Tag WithoutDepth() const;

  bool operator==(const Tag &) const = default;
};

std::string RenderTag(const Tag &tag);
// Throws DataError on text that is not in canonical sectioned form.
Tag ParseTag(std::string_view text);

// Stack size after executing `tag` from `depth`, or nullopt when a POP
// underflows or the depth annotation disagrees with `depth`.
std::optional<int> ApplyTag(int depth, const Tag &tag);

// Largest stack size reached while executing `tag` from `depth` (before its
// trailing POP(1)s). Only meaningful when ApplyTag succeeds.
int PeakDepth(int depth, const Tag &tag);

struct Span {
  int start = 0;  // 0-based, inclusive
  int end = 0;

  auto operator<=>(const Span &) const = default;
};

// Encodes a multiset of spans over a sentence of `length` tokens. Throws
// DataError for spans outside the sentence or when more than `max_depth`
// mentions would be open at once.
std::vector<Tag> EncodeMentions(std::span<const Span> spans, int length,
                                bool depth_dependent, int max_depth = 10);

class TagError : public DataError {
 public:
  enum Kind { kUnderflow, kUnbalanced, kDepthMismatch };

  TagError(Kind kind, int token, const std::string &message)
      : DataError(message), kind_(kind), token_(token) {}

  Kind kind() const { return kind_; }
  // Offending token; equals the sentence length for kUnbalanced.
  int token() const { return token_; }

 private:
  Kind kind_;
  int token_;
};

// Replays tags on a stack of open start positions; returns the sorted
// multiset of spans. Throws TagError.
std::vector<Span> DecodeTags(std::span<const Tag> tags);

// Ordered set of distinct canonical tags, "O" (or "0:O") at index 0.
class TagVocabulary {
 public:
  explicit TagVocabulary(bool depth_dependent = false);
  // Throws DataError on duplicates or unparsable tags.
  static TagVocabulary FromStrings(std::span<const std::string> tags);

  // Index of the tag, inserting it if unseen.
  int Add(const Tag &tag);
  std::optional<int> Find(std::string_view text) const;
  std::optional<int> Find(const Tag &tag) const { return Find(RenderTag(tag)); }
  // Throws DataError when the tag is missing.
  int IndexOf(const Tag &tag) const;

  int size() const { return static_cast<int>(tags_.size()); }
  const Tag &tag(int index) const { return tags_[index]; }
  const std::string &text(int index) const { return texts_[index]; }
  const std::vector<std::string> &texts() const { return texts_; }
  bool depth_dependent() const { return depth_dependent_; }

  bool operator==(const TagVocabulary &other) const {
    return texts_ == other.texts_ &&
           depth_dependent_ == other.depth_dependent_;
  }

 private:
  void Insert(const Tag &tag, std::string text);

  bool depth_dependent_;
  std::vector<Tag> tags_;
  std::vector<std::string> texts_;
  std::unordered_map<std::string, int> index_;
};

// Distinct tags in first-occurrence order over encoded sentences.
TagVocabulary BuildVocabulary(std::span<const std::vector<Tag>> sentences,
                              bool depth_dependent);

// Vocabulary files hold one canonical tag per line.
void WriteVocabulary(const TagVocabulary &vocab, std::ostream &out);
TagVocabulary ReadVocabulary(std::istream &in);

}  // namespace corefdec

#endif  // COREFDEC_TAGS_H_
