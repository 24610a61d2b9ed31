#ifndef COREFDEC_HARNESS_H_
#define COREFDEC_HARNESS_H_

// Synthetic data for exercising the toolkit without a neural model: random
// documents with nested and crossing mentions, and noisy tag distributions
// derived from gold tags.

#include <cstdint>
#include <span>
#include <vector>

#include "corefdec/corefud.h"
#include "corefdec/decoder.h"
#include "corefdec/distribution.h"
#include "corefdec/linker.h"

namespace corefdec {

struct CorpusSpec {
  uint64_t seed = 1;
  int documents = 1;
  int max_depth = 3;  // most mentions covering any token
  double crossing_probability = 0.0;
  int sentences_per_document = 6;
  int min_sentence_length = 3;
  int max_sentence_length = 14;
};

// Deterministic for a fixed spec. Mentions never cover a token more than
// max_depth times; a proposed span crossing an existing one is kept only
// with crossing_probability. Mentions of one entity never cross each other.
std::vector<Document> GenerateCorpus(const CorpusSpec &spec);

struct NoiseSpec {
  uint64_t seed = 1;
  double flip_probability = 0.0;  // in [0, 1]
  double temperature = 0.25;      // > 0
};

// One-hot rows on the gold tags; each token's hot entry moves to a uniformly
// drawn tag with flip_probability, the row is scaled by 1/temperature and
// log-softmax normalized. Throws DataError for tags outside `vocab`.
DistributionTensor SynthesizeLogits(std::span<const TagSequence> gold,
                                    const TagVocabulary &vocab,
                                    const NoiseSpec &noise);

// Antecedent scores that reproduce the gold clustering: each predicted
// mention whose span is a gold mention prefers the closest preceding
// mention of the same gold entity, all others prefer no antecedent.
std::vector<AntecedentScores> GoldAntecedentScores(
    std::span<const Document> predicted, std::span<const Document> gold);

}  // namespace corefdec

#endif  // COREFDEC_HARNESS_H_
