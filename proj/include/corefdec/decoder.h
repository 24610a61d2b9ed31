#ifndef COREFDEC_DECODER_H_
#define COREFDEC_DECODER_H_

// Turns per-token tag distributions into tag sequences.
//
// Constrained decoding is a Viterbi search whose lattice state is the
// number of open mentions: a tag is admissible at depth d when ApplyTag
// succeeds and the stack never grows past max_depth; sequences start and
// (unless allow_open_final) end with an empty stack. Among equally scored
// sequences the decoders return the lexicographically smallest one by tag
// index, which is the lowest tag index at the earliest differing token.

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "corefdec/distribution.h"
#include "corefdec/tags.h"

namespace corefdec {

enum class DecodeMode { kConstrained, kGreedy, kCrf };

struct DecoderConfig {
  int max_depth = 10;
  DecodeMode mode = DecodeMode::kConstrained;
  // CRF mode only: restrict to sequences valid under the stack semantics.
  bool enforce_constraints = false;
  bool allow_open_final = false;
};

// Transition scores between consecutive tags, plus per-tag scores for the
// first and the last token. Entries are finite or -inf.
struct TransitionMatrix {
  Matrix scores;
  std::vector<double> start;
  std::vector<double> end;

  static TransitionMatrix Zero(int tags);
};

// Best tag index per token for one sentence of normalized log-probabilities.
// Throws InfeasibleError when no admissible sequence exists.
std::vector<int> DecodeConstrained(const Matrix &log_probs,
                                   const TagVocabulary &vocab,
                                   const DecoderConfig &config);

// Per-token argmax (lowest index on ties); may be unbalanced.
std::vector<int> DecodeGreedy(const Matrix &log_probs);

// Viterbi over emissions plus transitions. With config.enforce_constraints
// the search runs over (tag, depth) states, so that only sequences accepted
// by DecodeConstrained are considered.
std::vector<int> DecodeCrf(const Matrix &emissions, const TagVocabulary &vocab,
                           const TransitionMatrix &transitions,
                           const DecoderConfig &config);

// Transition matrix that scores every transition consistent with the depth
// annotations 0 and everything else -inf. Requires a depth-dependent
// vocabulary.
TransitionMatrix ConstraintTransitions(const TagVocabulary &vocab,
                                       int max_depth);

// Sum of the selected scores.
double SequenceScore(const Matrix &log_probs, std::span<const int> tags);

// True when the tag sequence is admissible for constrained decoding.
bool IsAdmissible(const TagVocabulary &vocab, std::span<const int> tags,
                  int max_depth, bool allow_open_final = false);

// Decodes every sentence of the tensor. Logits are normalized first. With
// jobs > 1 sentences are decoded on worker threads; output order is input
// order.
std::vector<std::vector<int>> DecodeTensor(
    const DistributionTensor &tensor, const DecoderConfig &config,
    const TransitionMatrix *transitions = nullptr, int jobs = 1);

// Transition file: {"vocabulary": [...], "matrix": [[...]], "start": [...],
// "end": [...]}; start/end are optional, null encodes -inf.
void WriteTransitionFile(const TagVocabulary &vocab,
                         const TransitionMatrix &transitions, std::ostream &out);
TransitionMatrix ReadTransitionFile(std::istream &in,
                                    const TagVocabulary &expected_vocab);

// Tag sequence file: one {"doc_id", "sentence_index", "tags": [...]} object
// per line.
struct TagSequence {
  std::string doc_id;
  int sentence_index = 0;
  std::vector<Tag> tags;

  bool operator==(const TagSequence &) const = default;
};
void WriteTagFile(std::span<const TagSequence> sequences, std::ostream &out);
std::vector<TagSequence> ReadTagFile(std::istream &in);

}  // namespace corefdec

#endif  // COREFDEC_DECODER_H_
