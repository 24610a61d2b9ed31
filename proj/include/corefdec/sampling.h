#ifndef COREFDEC_SAMPLING_H_
#define COREFDEC_SAMPLING_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace corefdec {

struct CorpusSize {
  std::string id;
  double size = 0;  // training sentences, > 0
};

enum class MixStrategy { kUniform, kLinear, kSqrt, kLogarithmic };

std::string StrategyName(MixStrategy strategy);
// Accepts uniform, linear, sqrt/square-root, log/logarithmic.
std::optional<MixStrategy> ParseStrategy(std::string_view name);

struct MixRatio {
  MixStrategy strategy = MixStrategy::kUniform;
  std::vector<std::string> ids;
  std::vector<double> weights;  // sums to 1
};

// Per-corpus sampling weights. The logarithmic strategy rescales ln(size)
// linearly so the largest corpus weighs exactly ten times the smallest.
// Throws DataError for an empty list, duplicate ids or non-positive sizes.
MixRatio ComputeMixRatio(std::span<const CorpusSize> corpora,
                         MixStrategy strategy);

// Two-column "id<TAB>size" lines.
std::vector<CorpusSize> ReadCorpusSizes(std::istream &in);

// Seeded generator of corpus ids drawn proportionally to a mix ratio.
class BatchSampler {
 public:
  BatchSampler(const MixRatio &ratio, uint64_t seed);

  const std::string &Next();
  std::vector<std::string> Take(int count);

 private:
  std::vector<std::string> ids_;
  std::mt19937_64 engine_;
  std::discrete_distribution<size_t> distribution_;
};

std::vector<std::string> SampleBatches(const MixRatio &ratio, uint64_t seed,
                                       int count);

// Reserved label token prepended to inputs to mark the source corpus.
std::string CorpusIdToken(std::string_view corpus_id);

// Prepends the corpus label when enabled. Throws DataError when the id is
// not among `known_ids`.
std::vector<std::string> AttachCorpusId(std::span<const std::string> tokens,
                                        std::string_view corpus_id,
                                        std::span<const std::string> known_ids,
                                        bool enabled);
// Removes a leading corpus label, if any.
std::vector<std::string> StripCorpusId(std::span<const std::string> tokens);

// Subword window around one sentence, as offsets into the concatenated
// document: [left_start, right_end).
struct ContextWindow {
  int64_t left_start = 0;
  int64_t right_end = 0;
  int64_t left_context = 0;
  int64_t right_context = 0;

  int64_t size() const { return right_end - left_start; }
  bool operator==(const ContextWindow &) const = default;
};

// Whole target sentence, then up to min(right_limit, budget - |target|)
// following subwords, then the nearest preceding subwords until the budget
// is used. Partial sentences are allowed at either edge. Throws DataError
// when the target alone exceeds the budget.
ContextWindow PackContext(std::span<const int> subword_counts, int target,
                          int64_t budget, std::optional<int64_t> right_limit);

// scores[run][epoch][corpus].
using ScoreGrid = std::vector<std::vector<std::vector<double>>>;

struct Checkpoint {
  int run = 0;
  int epoch = 0;

  bool operator==(const Checkpoint &) const = default;
};

struct CheckpointSelection {
  std::vector<int> runs;  // kept runs, ascending
  // Per corpus, one checkpoint per kept run.
  std::vector<std::vector<Checkpoint>> per_corpus;
};

// Keeps the `keep_runs` runs with the highest mean over all epochs and
// corpora (ties to the lower run). With per_corpus, every corpus then uses
// the single epoch maximizing the kept runs' mean on that corpus; otherwise
// every run uses its own epoch maximizing the all-corpora mean. Ties go to
// the earlier epoch. Throws DataError for empty or ragged grids and
// keep_runs outside [1, runs].
CheckpointSelection SelectCheckpoints(const ScoreGrid &grid, int keep_runs,
                                      bool per_corpus);

// Tab-separated "run epoch corpus score" rows (an optional header line
// starting with "run" is skipped). Runs and epochs are sorted numerically,
// corpora keep first-appearance order. Every cell must appear exactly once.
struct GridFile {
  std::vector<int> runs;
  std::vector<int> epochs;
  std::vector<std::string> corpora;
  ScoreGrid scores;
};
GridFile ReadScoreGrid(std::istream &in);

}  // namespace corefdec

#endif  // COREFDEC_SAMPLING_H_
