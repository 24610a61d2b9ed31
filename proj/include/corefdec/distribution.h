#ifndef COREFDEC_DISTRIBUTION_H_
#define COREFDEC_DISTRIBUTION_H_

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "corefdec/matrix.h"
#include "corefdec/tags.h"

namespace corefdec {

struct SentenceDistribution {
  std::string doc_id;
  int sentence_index = 0;
  Matrix rows;  // token x tag

  bool operator==(const SentenceDistribution &) const = default;
};

// Per-token scores over a tag vocabulary: log-probabilities when
// `normalized`, raw logits otherwise.
struct DistributionTensor {
  TagVocabulary vocabulary;
  bool normalized = true;
  std::vector<SentenceDistribution> sentences;
};

// Throws DataError on a row width mismatch or non-finite value.
void ValidateTensor(const DistributionTensor &tensor);

// In-place log-softmax of every row. Throws DataError on non-finite input.
void LogSoftmaxRows(Matrix &m);
DistributionTensor Normalize(DistributionTensor tensor);

// Per-token mean of the members' probabilities, returned as normalized
// log-probabilities. Throws DataError naming the first differing sentence
// when shapes, vocabularies or sentence keys disagree.
DistributionTensor Ensemble(std::span<const DistributionTensor> members);

// Line-delimited JSON: a header {"vocabulary": [...], "normalized": bool}
// followed by one {"doc_id", "sentence_index", "rows"} object per sentence.
void WriteDistributionFile(const DistributionTensor &tensor, std::ostream &out);
DistributionTensor ReadDistributionFile(std::istream &in);
DistributionTensor ReadDistributionFile(const std::string &path);
void WriteDistributionFile(const DistributionTensor &tensor,
                           const std::string &path);

}  // namespace corefdec

#endif  // COREFDEC_DISTRIBUTION_H_
