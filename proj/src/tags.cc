#include "corefdec/tags.h"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>

namespace corefdec {
namespace {

bool ParseNumber(std::string_view s, int *value) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), *value);
  return ec == std::errc() && ptr == s.data() + s.size();
}

[[noreturn]] void BadTag(std::string_view text, const std::string &why) {
  throw DataError("invalid tag '" + std::string(text) + "': " + why);
}

}  // namespace

Tag Tag::WithoutDepth() const {
  Tag copy = *this;
  copy.depth.reset();
  return copy;
}

std::string RenderTag(const Tag &tag) {
  std::string out;
  if (tag.depth) out = std::to_string(*tag.depth) + ":";
  if (tag.empty()) return out + "O";
  bool first = true;
  auto emit = [&](std::string_view instruction) {
    if (!first) out += ' ';
    out += instruction;
    first = false;
  };
  for (int i : tag.leading_pops) emit("POP(" + std::to_string(i) + ")");
  for (int i = 0; i < tag.pushes; ++i) emit("PUSH");
  for (int i = 0; i < tag.trailing_pops; ++i) emit("POP(1)");
  return out;
}

Tag ParseTag(std::string_view text) {
  Tag tag;
  std::string_view body = text;
  if (size_t colon = body.find(':'); colon != std::string_view::npos) {
    int depth = 0;
    if (!ParseNumber(body.substr(0, colon), &depth) || depth < 0) {
      BadTag(text, "bad depth annotation");
    }
    tag.depth = depth;
    body.remove_prefix(colon + 1);
  }
  if (body == "O") return tag;
  if (body.empty()) BadTag(text, "empty");
  while (!body.empty()) {
    size_t space = body.find(' ');
    std::string_view word = body.substr(0, space);
    body = space == std::string_view::npos ? std::string_view()
                                           : body.substr(space + 1);
    if (word.empty()) BadTag(text, "repeated separator");
    if (word == "PUSH") {
      if (tag.trailing_pops > 0) BadTag(text, "PUSH after trailing POP(1)");
      ++tag.pushes;
      continue;
    }
    int index = 0;
    if (word.size() < 6 || word.substr(0, 4) != "POP(" || word.back() != ')' ||
        !ParseNumber(word.substr(4, word.size() - 5), &index) || index < 1) {
      BadTag(text, "unknown instruction '" + std::string(word) + "'");
    }
    if (tag.pushes == 0) {
      tag.leading_pops.push_back(index);
    } else if (index == 1) {
      ++tag.trailing_pops;
    } else {
      BadTag(text, "POP(i>1) after PUSH");
    }
  }
  if (tag.trailing_pops > tag.pushes) BadTag(text, "more POP(1) than PUSH");
  return tag;
}

std::optional<int> ApplyTag(int depth, const Tag &tag) {
  if (depth < 0) return std::nullopt;
  if (tag.depth && *tag.depth != depth) return std::nullopt;
  for (int i : tag.leading_pops) {
    if (i < 1 || depth < i) return std::nullopt;
    --depth;
  }
  if (tag.trailing_pops > tag.pushes) return std::nullopt;
  return depth + tag.pushes - tag.trailing_pops;
}

int PeakDepth(int depth, const Tag &tag) {
  return std::max(depth, depth - static_cast<int>(tag.leading_pops.size()) +
                             tag.pushes);
}

std::vector<Tag> EncodeMentions(std::span<const Span> spans, int length,
                                bool depth_dependent, int max_depth) {
  std::vector<std::vector<Span>> starting(length);
  std::vector<int> units(length, 0);
  for (const Span &s : spans) {
    if (s.start < 0 || s.start > s.end || s.end >= length) {
      throw DataError("span (" + std::to_string(s.start) + "," +
                      std::to_string(s.end) + ") lies outside a sentence of " +
                      std::to_string(length) + " tokens");
    }
    if (s.start == s.end) {
      ++units[s.start];
    } else {
      starting[s.start].push_back(s);
    }
  }

  std::vector<Tag> tags(length);
  std::vector<int> stack;  // end positions of open multi-token mentions
  for (int t = 0; t < length; ++t) {
    Tag &tag = tags[t];
    if (depth_dependent) tag.depth = static_cast<int>(stack.size());
    // Close ending mentions, always the one nearest the stack top first.
    while (true) {
      auto it = std::find(stack.rbegin(), stack.rend(), t);
      if (it == stack.rend()) break;
      tag.leading_pops.push_back(static_cast<int>(it - stack.rbegin()) + 1);
      stack.erase(std::next(it).base());
    }
    // Earliest-ending mention ends up on top.
    auto &opening = starting[t];
    std::stable_sort(opening.begin(), opening.end(),
                     [](const Span &a, const Span &b) { return a.end > b.end; });
    for (const Span &s : opening) stack.push_back(s.end);
    tag.pushes = static_cast<int>(opening.size()) + units[t];
    tag.trailing_pops = units[t];
    int peak = static_cast<int>(stack.size()) + units[t];
    if (peak > max_depth) {
      throw DataError("token " + std::to_string(t) + " needs stack depth " +
                      std::to_string(peak) + " > " + std::to_string(max_depth));
    }
  }
  return tags;
}

std::vector<Span> DecodeTags(std::span<const Tag> tags) {
  std::vector<Span> spans;
  std::vector<int> stack;  // start positions
  const int length = static_cast<int>(tags.size());
  for (int t = 0; t < length; ++t) {
    const Tag &tag = tags[t];
    if (tag.depth && *tag.depth != static_cast<int>(stack.size())) {
      throw TagError(TagError::kDepthMismatch, t,
                     "token " + std::to_string(t) + ": tag annotated with depth " +
                         std::to_string(*tag.depth) + " at stack depth " +
                         std::to_string(stack.size()));
    }
    for (int i : tag.leading_pops) {
      if (i < 1 || i > static_cast<int>(stack.size())) {
        throw TagError(TagError::kUnderflow, t,
                       "token " + std::to_string(t) + ": POP(" +
                           std::to_string(i) + ") on stack of depth " +
                           std::to_string(stack.size()));
      }
      auto it = stack.end() - i;
      spans.push_back({*it, t});
      stack.erase(it);
    }
    if (tag.trailing_pops > tag.pushes) {
      throw TagError(TagError::kUnderflow, t,
                     "token " + std::to_string(t) +
                         ": more trailing POP(1) than PUSH");
    }
    for (int i = 0; i < tag.pushes; ++i) stack.push_back(t);
    for (int i = 0; i < tag.trailing_pops; ++i) {
      stack.pop_back();
      spans.push_back({t, t});
    }
  }
  if (!stack.empty()) {
    throw TagError(TagError::kUnbalanced, length,
                   std::to_string(stack.size()) +
                       " mention(s) still open at end of sentence");
  }
  std::sort(spans.begin(), spans.end());
  return spans;
}

TagVocabulary::TagVocabulary(bool depth_dependent)
    : depth_dependent_(depth_dependent) {
  Tag empty;
  if (depth_dependent) empty.depth = 0;
  Insert(empty, RenderTag(empty));
}

TagVocabulary TagVocabulary::FromStrings(std::span<const std::string> tags) {
  bool depth_dependent = false;
  std::vector<Tag> parsed;
  for (const std::string &text : tags) {
    parsed.push_back(ParseTag(text));
    if (parsed.back().depth) depth_dependent = true;
  }
  TagVocabulary vocab(depth_dependent);
  vocab.tags_.clear();
  vocab.texts_.clear();
  vocab.index_.clear();
  for (size_t i = 0; i < tags.size(); ++i) {
    if (parsed[i].depth.has_value() != depth_dependent) {
      throw DataError("vocabulary mixes depth-dependent and -independent tags");
    }
    std::string text = RenderTag(parsed[i]);
    if (vocab.index_.count(text)) {
      throw DataError("duplicate tag '" + text + "' in vocabulary");
    }
    vocab.Insert(parsed[i], std::move(text));
  }
  return vocab;
}

void TagVocabulary::Insert(const Tag &tag, std::string text) {
  index_.emplace(text, static_cast<int>(tags_.size()));
  tags_.push_back(tag);
  texts_.push_back(std::move(text));
}

int TagVocabulary::Add(const Tag &tag) {
  std::string text = RenderTag(tag);
  if (auto it = index_.find(text); it != index_.end()) return it->second;
  if (tag.depth.has_value() != depth_dependent_) {
    throw DataError("tag '" + text + "' does not match vocabulary kind");
  }
  Insert(tag, std::move(text));
  return size() - 1;
}

std::optional<int> TagVocabulary::Find(std::string_view text) const {
  auto it = index_.find(std::string(text));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int TagVocabulary::IndexOf(const Tag &tag) const {
  std::string text = RenderTag(tag);
  auto index = Find(text);
  if (!index) throw DataError("tag '" + text + "' is not in the vocabulary");
  return *index;
}

TagVocabulary BuildVocabulary(std::span<const std::vector<Tag>> sentences,
                              bool depth_dependent) {
  TagVocabulary vocab(depth_dependent);
  for (const auto &tags : sentences) {
    for (const Tag &tag : tags) {
      if (depth_dependent) {
        vocab.Add(tag);
      } else {
        vocab.Add(tag.WithoutDepth());
      }
    }
  }
  return vocab;
}

void WriteVocabulary(const TagVocabulary &vocab, std::ostream &out) {
  for (const std::string &text : vocab.texts()) out << text << '\n';
}

TagVocabulary ReadVocabulary(std::istream &in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return TagVocabulary::FromStrings(lines);
}

}  // namespace corefdec
