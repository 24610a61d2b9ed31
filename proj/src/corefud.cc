#include "corefdec/corefud.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "corefdec/errors.h"

namespace corefdec {
namespace {

constexpr std::string_view kEntityKey = "Entity";

std::vector<std::string_view> Split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  size_t begin = 0;
  while (true) {
    size_t pos = s.find(sep, begin);
    if (pos == std::string_view::npos) {
      parts.push_back(s.substr(begin));
      return parts;
    }
    parts.push_back(s.substr(begin, pos - begin));
    begin = pos + 1;
  }
}

bool ParseInt(std::string_view s, int *value) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), *value);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool StartsWith(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

// Value of a "# key = value" comment, if the line has that key.
std::optional<std::string> CommentValue(std::string_view comment,
                                        std::string_view key) {
  if (!StartsWith(comment, key)) return std::nullopt;
  std::string_view rest = comment.substr(key.size());
  size_t i = 0;
  while (i < rest.size() && rest[i] == ' ') ++i;
  if (i == rest.size() || rest[i] != '=') return std::nullopt;
  ++i;
  if (i < rest.size() && rest[i] == ' ') ++i;
  return std::string(rest.substr(i));
}

// Splits a bracket body into entity id and verbatim attribute suffix.
std::pair<std::string, std::string> SplitEntityBody(std::string_view body) {
  size_t dash = body.find('-');
  if (dash == std::string_view::npos) return {std::string(body), ""};
  return {std::string(body.substr(0, dash)), std::string(body.substr(dash))};
}

struct Bracket {
  enum Kind { kOpen, kClose, kUnit } kind;
  std::string entity;
  std::string attributes;
};

std::vector<Bracket> ParseEntityValue(std::string_view value, int line) {
  std::vector<Bracket> brackets;
  size_t i = 0;
  auto check_body = [line](std::string_view body) {
    if (body.empty()) throw ParseError(line, "empty entity id in Entity value");
    if (body.find('[') != std::string_view::npos) {
      throw DiscontinuousMentionError(
          line, "discontinuous mention '" + std::string(body) +
                    "' is not supported");
    }
  };
  while (i < value.size()) {
    if (value[i] == '(') {
      size_t j = i + 1;
      while (j < value.size() && value[j] != '(' && value[j] != ')') ++j;
      std::string_view body = value.substr(i + 1, j - i - 1);
      check_body(body);
      auto [entity, attributes] = SplitEntityBody(body);
      if (j < value.size() && value[j] == ')') {
        brackets.push_back({Bracket::kUnit, entity, attributes});
        i = j + 1;
      } else {
        brackets.push_back({Bracket::kOpen, entity, attributes});
        i = j;
      }
    } else {
      size_t j = value.find_first_of("()", i);
      if (j == std::string_view::npos || value[j] != ')') {
        throw ParseError(line, "malformed Entity value '" +
                                   std::string(value) + "'");
      }
      std::string_view body = value.substr(i, j - i);
      check_body(body);
      brackets.push_back({Bracket::kClose, SplitEntityBody(body).first, ""});
      i = j + 1;
    }
  }
  return brackets;
}

struct OpenMention {
  std::string entity;
  std::string attributes;
  int start;
  int line;
};

class Parser {
 public:
  std::vector<Document> Run(std::istream &in) {
    std::string raw;
    while (std::getline(in, raw)) {
      ++line_;
      std::string_view row(raw);
      if (!row.empty() && row.back() == '\r') row.remove_suffix(1);
      if (row.empty()) {
        FinishSentence();
      } else if (row[0] == '#') {
        HandleComment(row);
      } else {
        HandleToken(row);
      }
    }
    ++line_;
    FinishSentence();
    for (Document &doc : docs_) Canonicalize(doc);
    return std::move(docs_);
  }

 private:
  void HandleComment(std::string_view row) {
    std::string_view comment = row.substr(1);
    if (!comment.empty() && comment[0] == ' ') comment.remove_prefix(1);
    if (in_sentence_ && !sentence_.tokens.empty()) {
      throw ParseError(line_, "comment inside token block");
    }
    if (auto id = CommentValue(comment, "newdoc id")) {
      docs_.push_back(Document{*id, "", {}, {}});
      entity_index_.clear();
      return;
    }
    if (auto corpus = CommentValue(comment, "corpus_id");
        corpus && !in_sentence_ && !docs_.empty() &&
        docs_.back().sentences.empty()) {
      docs_.back().corpus_id = *corpus;
      return;
    }
    StartSentence();
    if (auto id = CommentValue(comment, "sent_id")) {
      sentence_.id = *id;
    } else if (auto text = CommentValue(comment, "text")) {
      sentence_.text = *text;
    } else {
      sentence_.comments.emplace_back(comment);
    }
  }

  void HandleToken(std::string_view row) {
    auto cols = Split(row, '\t');
    if (cols.size() != 10) {
      throw ParseError(line_, "expected 10 columns, found " +
                                  std::to_string(cols.size()));
    }
    // Multiword-token ranges and empty nodes are not represented.
    if (cols[0].find_first_of("-.") != std::string_view::npos) return;
    StartSentence();
    if (docs_.empty()) {
      throw ParseError(sentence_line_,
                       "sentence '" + sentence_.id +
                           "' has no preceding '# newdoc id' header");
    }
    Token token;
    if (!ParseInt(cols[0], &token.index) ||
        token.index != static_cast<int>(sentence_.tokens.size()) + 1) {
      throw ParseError(line_, "unexpected token id '" + std::string(cols[0]) +
                                  "'");
    }
    token.form = cols[1];
    token.lemma = cols[2];
    token.upos = cols[3];
    token.xpos = cols[4];
    token.feats = cols[5];
    if (cols[6] != "_") {
      int head = 0;
      if (!ParseInt(cols[6], &head) || head < 0) {
        throw ParseError(line_, "bad HEAD '" + std::string(cols[6]) + "'");
      }
      if (head > 0) token.parent = head - 1;
    }
    token.deprel = cols[7];
    token.deps = cols[8];
    int position = static_cast<int>(sentence_.tokens.size());
    if (cols[9] != "_") {
      for (std::string_view item : Split(cols[9], '|')) {
        size_t eq = item.find('=');
        std::string key(item.substr(0, eq));
        std::string value =
            eq == std::string_view::npos ? "" : std::string(item.substr(eq + 1));
        if (key == kEntityKey) {
          ApplyBrackets(ParseEntityValue(value, line_), position);
        } else {
          token.misc.emplace_back(std::move(key), std::move(value));
        }
      }
    }
    token_lines_.push_back(line_);
    sentence_.tokens.push_back(std::move(token));
  }

  void ApplyBrackets(const std::vector<Bracket> &brackets, int position) {
    for (const Bracket &b : brackets) {
      switch (b.kind) {
        case Bracket::kOpen:
          open_.push_back({b.entity, b.attributes, position, line_});
          break;
        case Bracket::kUnit:
          AddMention(b.entity, b.attributes, position, position);
          break;
        case Bracket::kClose: {
          auto it = std::find_if(open_.rbegin(), open_.rend(),
                                 [&](const OpenMention &m) {
                                   return m.entity == b.entity;
                                 });
          if (it == open_.rend()) {
            throw ParseError(line_, "closing bracket '" + b.entity +
                                        ")' without a matching open");
          }
          AddMention(it->entity, it->attributes, it->start, position);
          open_.erase(std::next(it).base());
          break;
        }
      }
    }
  }

  void AddMention(const std::string &entity, const std::string &attributes,
                  int start, int end) {
    Document &doc = docs_.back();
    auto [it, inserted] = entity_index_.emplace(entity, doc.entities.size());
    if (inserted) doc.entities.push_back(Entity{entity, {}});
    doc.entities[it->second].mentions.push_back(Mention{
        static_cast<int>(doc.sentences.size()), start, end, entity,
        attributes});
  }

  void StartSentence() {
    if (in_sentence_) return;
    in_sentence_ = true;
    sentence_ = Sentence{};
    token_lines_.clear();
    open_.clear();
    sentence_line_ = line_;
  }

  void FinishSentence() {
    if (!in_sentence_) return;
    if (!open_.empty()) {
      const OpenMention &m = open_.front();
      throw ParseError(line_ - 1, "entity bracket '(" + m.entity +
                                      "' opened on line " +
                                      std::to_string(m.line) +
                                      " is not closed within its sentence");
    }
    if (sentence_.tokens.empty()) {
      throw ParseError(sentence_line_, "sentence without tokens");
    }
    CheckTree();
    docs_.back().sentences.push_back(std::move(sentence_));
    in_sentence_ = false;
  }

  void CheckTree() {
    const int n = static_cast<int>(sentence_.tokens.size());
    for (int i = 0; i < n; ++i) {
      auto parent = sentence_.tokens[i].parent;
      if (!parent) continue;
      if (*parent >= n || *parent == i) {
        throw ParseError(token_lines_[i], "HEAD out of range or self-loop");
      }
      // A path longer than n steps must revisit a node.
      int steps = 0;
      for (auto p = parent; p; p = sentence_.tokens[*p].parent) {
        if (++steps > n) {
          throw ParseError(token_lines_[i], "dependency cycle");
        }
      }
    }
  }

  std::vector<Document> docs_;
  std::map<std::string, size_t> entity_index_;
  Sentence sentence_;
  std::vector<int> token_lines_;
  std::vector<OpenMention> open_;
  bool in_sentence_ = false;
  int sentence_line_ = 0;
  int line_ = 0;
};

std::string MentionLabel(const Mention &m) {
  return m.entity + "[sentence " + std::to_string(m.sentence) + ", tokens " +
         std::to_string(m.start + 1) + "-" + std::to_string(m.end + 1) + "]";
}

void CheckEntityId(const std::string &id) {
  if (id.empty() || id.find_first_of("()-|=[] \t\n") != std::string::npos) {
    throw DataError("entity id '" + id + "' cannot be serialized");
  }
}

// Bracket text for each token of one sentence.
std::vector<std::string> SentenceBrackets(std::vector<Mention> mentions,
                                          int length) {
  std::sort(mentions.begin(), mentions.end(), MentionLess);
  for (size_t i = 0; i < mentions.size(); ++i) {
    for (size_t j = i + 1; j < mentions.size(); ++j) {
      const Mention &a = mentions[i];
      const Mention &b = mentions[j];
      if (b.start > a.end) break;
      // Same-entity brackets close LIFO, so a later-opened mention of the
      // same entity must not outlive an earlier one.
      if (a.entity == b.entity && a.start < b.start && b.end > a.end) {
        throw DataError("mentions " + MentionLabel(a) + " and " +
                        MentionLabel(b) +
                        " of one entity cross and cannot be serialized");
      }
    }
  }
  std::vector<std::string> out(length);
  for (int t = 0; t < length; ++t) {
    std::vector<const Mention *> closes, opens, units;
    for (const Mention &m : mentions) {
      if (m.start == t && m.end == t) {
        units.push_back(&m);
      } else if (m.start == t) {
        opens.push_back(&m);
      } else if (m.end == t) {
        closes.push_back(&m);
      }
    }
    // Most recently opened closes first; longer mentions open first.
    std::stable_sort(closes.begin(), closes.end(),
                     [](const Mention *a, const Mention *b) {
                       return std::tie(b->start, b->end) <
                              std::tie(a->start, a->end);
                     });
    std::stable_sort(opens.begin(), opens.end(),
                     [](const Mention *a, const Mention *b) {
                       return a->end > b->end;
                     });
    std::string &s = out[t];
    for (const Mention *m : closes) s += m->entity + ")";
    for (const Mention *m : opens) s += "(" + m->entity + m->attributes;
    for (const Mention *m : units) s += "(" + m->entity + m->attributes + ")";
  }
  return out;
}

}  // namespace

bool MentionLess(const Mention &a, const Mention &b) {
  return std::tie(a.sentence, a.start, a.end, a.entity, a.attributes) <
         std::tie(b.sentence, b.start, b.end, b.entity, b.attributes);
}

std::vector<Document> ParseCorefud(std::istream &in) {
  return Parser().Run(in);
}

std::vector<Document> ParseCorefud(std::string_view text) {
  std::istringstream in{std::string(text)};
  return ParseCorefud(in);
}

std::vector<Document> ReadCorefudFile(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  try {
    return ParseCorefud(in);
  } catch (const ParseError &e) {
    throw DataError(path + ":" + e.what());
  }
}

void Canonicalize(Document &doc) {
  for (Entity &e : doc.entities) {
    std::stable_sort(e.mentions.begin(), e.mentions.end(), MentionLess);
  }
  std::stable_sort(doc.entities.begin(), doc.entities.end(),
                   [](const Entity &a, const Entity &b) {
                     if (a.mentions.empty() || b.mentions.empty()) {
                       return !a.mentions.empty() && b.mentions.empty();
                     }
                     const Mention &ma = a.mentions.front();
                     const Mention &mb = b.mentions.front();
                     if (std::tie(ma.sentence, ma.start, ma.end) !=
                         std::tie(mb.sentence, mb.start, mb.end)) {
                       return std::tie(ma.sentence, ma.start, ma.end) <
                              std::tie(mb.sentence, mb.start, mb.end);
                     }
                     return a.id < b.id;
                   });
}

void ValidateDocument(const Document &doc) {
  std::set<std::string> ids;
  for (const Entity &e : doc.entities) {
    if (!ids.insert(e.id).second) {
      throw DataError(doc.doc_id + ": duplicate entity id '" + e.id + "'");
    }
    if (e.mentions.empty()) {
      throw DataError(doc.doc_id + ": entity '" + e.id + "' has no mentions");
    }
    for (const Mention &m : e.mentions) {
      if (m.entity != e.id) {
        throw DataError(doc.doc_id + ": mention " + MentionLabel(m) +
                        " listed under entity '" + e.id + "'");
      }
      if (m.sentence < 0 ||
          m.sentence >= static_cast<int>(doc.sentences.size()) ||
          m.start < 0 || m.start > m.end ||
          m.end >= static_cast<int>(doc.sentences[m.sentence].tokens.size())) {
        throw DataError(doc.doc_id + ": mention " + MentionLabel(m) +
                        " is outside its sentence");
      }
    }
  }
}

void WriteCorefud(std::span<const Document> docs, std::ostream &out) {
  for (const Document &doc : docs) {
    ValidateDocument(doc);
    std::vector<std::vector<Mention>> by_sentence(doc.sentences.size());
    for (const Entity &e : doc.entities) {
      CheckEntityId(e.id);
      for (const Mention &m : e.mentions) by_sentence[m.sentence].push_back(m);
    }
    out << "# newdoc id = " << doc.doc_id << '\n';
    if (!doc.corpus_id.empty()) out << "# corpus_id = " << doc.corpus_id << '\n';
    for (size_t s = 0; s < doc.sentences.size(); ++s) {
      const Sentence &sentence = doc.sentences[s];
      if (!sentence.id.empty()) out << "# sent_id = " << sentence.id << '\n';
      if (!sentence.text.empty()) out << "# text = " << sentence.text << '\n';
      for (const std::string &c : sentence.comments) out << "# " << c << '\n';
      auto brackets = SentenceBrackets(by_sentence[s],
                                       static_cast<int>(sentence.tokens.size()));
      for (size_t t = 0; t < sentence.tokens.size(); ++t) {
        const Token &tok = sentence.tokens[t];
        std::string misc;
        if (!brackets[t].empty()) misc = "Entity=" + brackets[t];
        for (const auto &[key, value] : tok.misc) {
          if (!misc.empty()) misc += '|';
          misc += key;
          if (!value.empty()) misc += "=" + value;
        }
        if (misc.empty()) misc = "_";
        out << (t + 1) << '\t' << tok.form << '\t' << tok.lemma << '\t'
            << tok.upos << '\t' << tok.xpos << '\t' << tok.feats << '\t'
            << (tok.parent ? *tok.parent + 1 : 0) << '\t' << tok.deprel << '\t'
            << tok.deps << '\t' << misc << '\n';
      }
      out << '\n';
    }
  }
}

std::string WriteCorefud(std::span<const Document> docs) {
  std::ostringstream out;
  WriteCorefud(docs, out);
  return out.str();
}

void WriteCorefudFile(std::span<const Document> docs, const std::string &path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  WriteCorefud(docs, out);
}

std::vector<Mention> CollectMentions(const Document &doc) {
  std::vector<Mention> all;
  for (const Entity &e : doc.entities) {
    all.insert(all.end(), e.mentions.begin(), e.mentions.end());
  }
  std::sort(all.begin(), all.end(), MentionLess);
  return all;
}

int MentionHead(int start, int end, std::span<const Token> tokens) {
  for (int t = start; t <= end; ++t) {
    const auto &parent = tokens[t].parent;
    if (!parent || *parent < start || *parent > end) return t;
  }
  return start;
}

int MentionHead(const Mention &m, const Document &doc) {
  return MentionHead(m.start, m.end, doc.sentences[m.sentence].tokens);
}

}  // namespace corefdec
