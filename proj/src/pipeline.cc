#include "corefdec/pipeline.h"

#include <algorithm>
#include <map>

#include "corefdec/errors.h"

namespace corefdec {

std::vector<Span> SentenceSpans(const Document &doc, int sentence) {
  std::vector<Span> spans;
  for (const Entity &e : doc.entities) {
    for (const Mention &m : e.mentions) {
      if (m.sentence == sentence) spans.push_back({m.start, m.end});
    }
  }
  std::sort(spans.begin(), spans.end());
  return spans;
}

std::vector<TagSequence> EncodeDocuments(std::span<const Document> docs,
                                         bool depth_dependent, int max_depth) {
  std::vector<TagSequence> out;
  for (const Document &doc : docs) {
    for (size_t s = 0; s < doc.sentences.size(); ++s) {
      const int sentence = static_cast<int>(s);
      auto spans = SentenceSpans(doc, sentence);
      try {
        out.push_back({doc.doc_id, sentence,
                       EncodeMentions(spans,
                                      static_cast<int>(doc.sentences[s].tokens.size()),
                                      depth_dependent, max_depth)});
      } catch (const DataError &e) {
        throw DataError(doc.doc_id + " sentence " + std::to_string(s) + ": " +
                        e.what());
      }
    }
  }
  return out;
}

std::vector<Document> DocumentsFromTags(std::span<const Document> base,
                                        std::span<const TagSequence> sequences) {
  std::map<std::string, size_t> index;
  std::vector<Document> out;
  for (const Document &doc : base) {
    index[doc.doc_id] = out.size();
    out.push_back(Document{doc.doc_id, doc.corpus_id, doc.sentences, {}});
  }
  std::vector<int> counters(out.size(), 0);
  for (const TagSequence &seq : sequences) {
    auto it = index.find(seq.doc_id);
    if (it == index.end()) {
      throw DataError("document '" + seq.doc_id + "' is not in the corpus");
    }
    Document &doc = out[it->second];
    if (seq.sentence_index < 0 ||
        seq.sentence_index >= static_cast<int>(doc.sentences.size()) ||
        doc.sentences[seq.sentence_index].tokens.size() != seq.tags.size()) {
      throw DataError(seq.doc_id + " sentence " +
                      std::to_string(seq.sentence_index) +
                      " does not match the corpus text");
    }
    std::vector<Span> spans;
    try {
      spans = DecodeTags(seq.tags);
    } catch (const TagError &e) {
      throw TagError(e.kind(), e.token(),
                     seq.doc_id + " sentence " +
                         std::to_string(seq.sentence_index) + ": " + e.what());
    }
    for (const Span &span : spans) {
      std::string id = "m" + std::to_string(++counters[it->second]);
      doc.entities.push_back(
          Entity{id, {Mention{seq.sentence_index, span.start, span.end, id, ""}}});
    }
  }
  for (Document &doc : out) Canonicalize(doc);
  return out;
}

std::vector<Document> PlaceholderDocuments(
    std::span<const TagSequence> sequences) {
  std::vector<Document> docs;
  std::map<std::string, size_t> index;
  for (const TagSequence &seq : sequences) {
    auto [it, inserted] = index.emplace(seq.doc_id, docs.size());
    if (inserted) docs.push_back(Document{seq.doc_id, "", {}, {}});
    Document &doc = docs[it->second];
    if (seq.sentence_index >= static_cast<int>(doc.sentences.size())) {
      doc.sentences.resize(seq.sentence_index + 1);
    }
    Sentence &sentence = doc.sentences[seq.sentence_index];
    sentence.id = seq.doc_id + "-" + std::to_string(seq.sentence_index + 1);
    sentence.tokens.clear();
    for (size_t t = 0; t < seq.tags.size(); ++t) {
      Token token;
      token.index = static_cast<int>(t) + 1;
      token.form = "_";
      sentence.tokens.push_back(std::move(token));
    }
  }
  for (Document &doc : docs) {
    for (size_t s = 0; s < doc.sentences.size(); ++s) {
      if (doc.sentences[s].tokens.empty()) {
        throw DataError(doc.doc_id + ": sentence " + std::to_string(s) +
                        " has no decoded tokens");
      }
    }
  }
  return docs;
}

}  // namespace corefdec
