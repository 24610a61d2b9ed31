#ifndef COREFDEC_METRICS_H_
#define COREFDEC_METRICS_H_

// Coreference evaluation: predicted mentions are first paired one-to-one
// with gold mentions under a matching criterion, response clusters are then
// rewritten onto the gold mention universe (unmatched predictions stay as
// spurious mentions), and MUC, B-cubed and CEAF-e are computed over the
// result. Corpus scores are micro-averaged by summing per-document counts.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "corefdec/corefud.h"

namespace corefdec {

enum class MatchKind { kHead, kPartial, kExact };

struct MatchMode {
  MatchKind kind = MatchKind::kHead;
  bool include_singletons = false;

  bool operator==(const MatchMode &) const = default;
};

// The four standard evaluation columns: head, partial, exact, and head
// matching with singletons.
std::vector<MatchMode> StandardModes();
std::string ModeLabel(const MatchMode &mode);

// For every predicted mention, the index of its gold partner or nullopt.
// Identical spans are paired first; every remaining prediction then takes,
// among the unpaired gold mentions satisfying the criterion, the shortest
// and then the earliest. Heads are computed on `sentences`; both mention
// lists must be in document order.
std::vector<std::optional<int>> MatchMentions(std::span<const Mention> gold,
                                              std::span<const Mention> predicted,
                                              MatchKind kind,
                                              std::span<const Sentence> sentences);

// A clustering is a list of clusters of mention ids.
using Clustering = std::vector<std::vector<int>>;

// Numerators and denominators of one metric; summing counts across
// documents yields the micro-average.
struct MetricCounts {
  double recall_num = 0.0;
  double recall_den = 0.0;
  double precision_num = 0.0;
  double precision_den = 0.0;
  // Whether key and response were the same clustering; decides the value
  // when both denominators vanish.
  bool identical = true;

  MetricCounts &operator+=(const MetricCounts &other);
};

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Recall = num/den (0 when den = 0), likewise precision; when both
// denominators are 0 both are 1 for identical clusterings and 0 otherwise.
Prf Finalize(const MetricCounts &counts);

MetricCounts MucCounts(const Clustering &key, const Clustering &response);
MetricCounts BCubedCounts(const Clustering &key, const Clustering &response);
MetricCounts CeafeCounts(const Clustering &key, const Clustering &response);

inline Prf Muc(const Clustering &k, const Clustering &r) {
  return Finalize(MucCounts(k, r));
}
inline Prf BCubed(const Clustering &k, const Clustering &r) {
  return Finalize(BCubedCounts(k, r));
}
inline Prf Ceafe(const Clustering &k, const Clustering &r) {
  return Finalize(CeafeCounts(k, r));
}

struct ScoreReport {
  MatchMode mode;
  Prf muc;
  Prf b3;
  Prf ceafe;
  double conll = 0.0;  // mean of the three F1 values
  std::vector<std::string> warnings;
};

// Scores predicted documents against gold documents with the same ids.
// Throws DataError on a doc_id mismatch or mentions outside the gold text.
ScoreReport Score(std::span<const Document> gold,
                  std::span<const Document> predicted, const MatchMode &mode);

}  // namespace corefdec

#endif  // COREFDEC_METRICS_H_
