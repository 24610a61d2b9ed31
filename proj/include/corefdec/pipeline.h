#ifndef COREFDEC_PIPELINE_H_
#define COREFDEC_PIPELINE_H_

// Glue between documents, per-sentence tag sequences and decoded spans.

#include <span>
#include <string>
#include <vector>

#include "corefdec/corefud.h"
#include "corefdec/decoder.h"
#include "corefdec/tags.h"

namespace corefdec {

// Mention spans of one sentence (a multiset, entity ids dropped).
std::vector<Span> SentenceSpans(const Document &doc, int sentence);

// Encodes every sentence of every document.
std::vector<TagSequence> EncodeDocuments(std::span<const Document> docs,
                                         bool depth_dependent, int max_depth);

// Builds documents carrying the text of `base` and the decoded spans, each
// span its own entity (m1, m2, ... per document). Sequences must name
// sentences of `base`. Throws TagError (prefixed with the sentence) on
// unbalanced sequences.
std::vector<Document> DocumentsFromTags(std::span<const Document> base,
                                        std::span<const TagSequence> sequences);

// Placeholder text ("_" tokens attached to the root) for sequences decoded
// without a reference corpus.
std::vector<Document> PlaceholderDocuments(
    std::span<const TagSequence> sequences);

}  // namespace corefdec

#endif  // COREFDEC_PIPELINE_H_
