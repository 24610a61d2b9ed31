#include "corefdec/sampling.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "corefdec/errors.h"

namespace corefdec {
namespace {

constexpr std::string_view kCorpusTokenPrefix = "<cid:";

std::vector<std::string> SplitTabs(const std::string &line) {
  std::vector<std::string> out;
  std::stringstream in(line);
  std::string field;
  while (std::getline(in, field, '\t')) out.push_back(field);
  return out;
}

double Mean(std::span<const double> values) {
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

}  // namespace

std::string StrategyName(MixStrategy strategy) {
  switch (strategy) {
    case MixStrategy::kUniform: return "uniform";
    case MixStrategy::kLinear: return "linear";
    case MixStrategy::kSqrt: return "sqrt";
    case MixStrategy::kLogarithmic: return "logarithmic";
  }
  return "";
}

std::optional<MixStrategy> ParseStrategy(std::string_view name) {
  if (name == "uniform") return MixStrategy::kUniform;
  if (name == "linear") return MixStrategy::kLinear;
  if (name == "sqrt" || name == "square-root") return MixStrategy::kSqrt;
  if (name == "log" || name == "logarithmic") return MixStrategy::kLogarithmic;
  return std::nullopt;
}

MixRatio ComputeMixRatio(std::span<const CorpusSize> corpora,
                         MixStrategy strategy) {
  if (corpora.empty()) throw DataError("mix ratio needs at least one corpus");
  std::set<std::string> seen;
  for (const CorpusSize &c : corpora) {
    if (!seen.insert(c.id).second) {
      throw DataError("duplicate corpus id '" + c.id + "'");
    }
    if (!(c.size > 0) || !std::isfinite(c.size)) {
      throw DataError("corpus '" + c.id + "' must have a positive size");
    }
  }

  MixRatio ratio;
  ratio.strategy = strategy;
  std::vector<double> raw;
  for (const CorpusSize &c : corpora) {
    ratio.ids.push_back(c.id);
    switch (strategy) {
      case MixStrategy::kUniform: raw.push_back(1.0); break;
      case MixStrategy::kLinear: raw.push_back(c.size); break;
      case MixStrategy::kSqrt: raw.push_back(std::sqrt(c.size)); break;
      case MixStrategy::kLogarithmic: raw.push_back(std::log(c.size)); break;
    }
  }
  if (strategy == MixStrategy::kLogarithmic) {
    auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
    const double low = *lo, span = *hi - *lo;
    for (double &r : raw) r = span > 0 ? 1.0 + 9.0 * (r - low) / span : 1.0;
  }
  const double total = std::accumulate(raw.begin(), raw.end(), 0.0);
  for (double r : raw) ratio.weights.push_back(r / total);
  return ratio;
}

std::vector<CorpusSize> ReadCorpusSizes(std::istream &in) {
  std::vector<CorpusSize> out;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto fields = SplitTabs(line);
    double size = 0;
    try {
      size_t used = 0;
      if (fields.size() != 2) throw std::invalid_argument("columns");
      size = std::stod(fields[1], &used);
      if (used != fields[1].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception &) {
      throw DataError("line " + std::to_string(line_number) +
                      ": expected 'corpus<TAB>size'");
    }
    out.push_back({fields[0], size});
  }
  return out;
}

BatchSampler::BatchSampler(const MixRatio &ratio, uint64_t seed)
    : ids_(ratio.ids),
      engine_(seed),
      distribution_(ratio.weights.begin(), ratio.weights.end()) {
  if (ids_.empty()) throw DataError("sampler needs at least one corpus");
}

const std::string &BatchSampler::Next() { return ids_[distribution_(engine_)]; }

std::vector<std::string> BatchSampler::Take(int count) {
  std::vector<std::string> out;
  out.reserve(std::max(count, 0));
  for (int i = 0; i < count; ++i) out.push_back(Next());
  return out;
}

std::vector<std::string> SampleBatches(const MixRatio &ratio, uint64_t seed,
                                       int count) {
  return BatchSampler(ratio, seed).Take(count);
}

std::string CorpusIdToken(std::string_view corpus_id) {
  return std::string(kCorpusTokenPrefix) + std::string(corpus_id) + ">";
}

std::vector<std::string> AttachCorpusId(std::span<const std::string> tokens,
                                        std::string_view corpus_id,
                                        std::span<const std::string> known_ids,
                                        bool enabled) {
  if (std::find(known_ids.begin(), known_ids.end(), corpus_id) ==
      known_ids.end()) {
    throw DataError("unknown corpus id '" + std::string(corpus_id) + "'");
  }
  std::vector<std::string> out;
  out.reserve(tokens.size() + 1);
  if (enabled) out.push_back(CorpusIdToken(corpus_id));
  out.insert(out.end(), tokens.begin(), tokens.end());
  return out;
}

std::vector<std::string> StripCorpusId(std::span<const std::string> tokens) {
  auto begin = tokens.begin();
  if (begin != tokens.end() && begin->starts_with(kCorpusTokenPrefix) &&
      begin->ends_with('>')) {
    ++begin;
  }
  return {begin, tokens.end()};
}

ContextWindow PackContext(std::span<const int> subword_counts, int target,
                          int64_t budget, std::optional<int64_t> right_limit) {
  const int n = static_cast<int>(subword_counts.size());
  if (target < 0 || target >= n) {
    throw DataError("target sentence " + std::to_string(target) +
                    " out of range");
  }
  for (int c : subword_counts) {
    if (c < 0) throw DataError("negative subword count");
  }
  if (right_limit && *right_limit < 0) {
    throw DataError("right context limit must be non-negative");
  }
  const int64_t length = subword_counts[target];
  if (length > budget) {
    throw DataError("sentence " + std::to_string(target) + " has " +
                    std::to_string(length) +
                    " subwords, more than the context budget of " +
                    std::to_string(budget));
  }
  int64_t before = 0, after = 0;
  for (int i = 0; i < target; ++i) before += subword_counts[i];
  for (int i = target + 1; i < n; ++i) after += subword_counts[i];

  int64_t slack = budget - length;
  int64_t right = std::min(slack, after);
  if (right_limit) right = std::min(right, *right_limit);
  int64_t left = std::min(slack - right, before);

  ContextWindow w;
  w.left_context = left;
  w.right_context = right;
  w.left_start = before - left;
  w.right_end = before + length + right;
  return w;
}

CheckpointSelection SelectCheckpoints(const ScoreGrid &grid, int keep_runs,
                                      bool per_corpus) {
  if (grid.empty() || grid[0].empty() || grid[0][0].empty()) {
    throw DataError("empty score grid");
  }
  const int runs = static_cast<int>(grid.size());
  const int epochs = static_cast<int>(grid[0].size());
  const int corpora = static_cast<int>(grid[0][0].size());
  for (const auto &run : grid) {
    if (static_cast<int>(run.size()) != epochs) throw DataError("ragged grid");
    for (const auto &epoch : run) {
      if (static_cast<int>(epoch.size()) != corpora) {
        throw DataError("ragged grid");
      }
      for (double v : epoch) {
        if (!std::isfinite(v)) throw DataError("non-finite grid score");
      }
    }
  }
  if (keep_runs < 1 || keep_runs > runs) {
    throw DataError("cannot keep " + std::to_string(keep_runs) + " of " +
                    std::to_string(runs) + " runs");
  }

  std::vector<double> run_mean(runs);
  for (int r = 0; r < runs; ++r) {
    std::vector<double> all;
    for (const auto &epoch : grid[r]) all.insert(all.end(), epoch.begin(), epoch.end());
    run_mean[r] = Mean(all);
  }
  std::vector<int> order(runs);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return run_mean[a] > run_mean[b]; });
  CheckpointSelection selection;
  selection.runs.assign(order.begin(), order.begin() + keep_runs);
  std::sort(selection.runs.begin(), selection.runs.end());

  selection.per_corpus.resize(corpora);
  if (per_corpus) {
    for (int c = 0; c < corpora; ++c) {
      int best_epoch = 0;
      double best = 0.0;
      for (int e = 0; e < epochs; ++e) {
        double sum = 0.0;
        for (int r : selection.runs) sum += grid[r][e][c];
        double mean = sum / keep_runs;
        if (e == 0 || mean > best) {
          best = mean;
          best_epoch = e;
        }
      }
      for (int r : selection.runs) {
        selection.per_corpus[c].push_back({r, best_epoch});
      }
    }
  } else {
    std::vector<Checkpoint> chosen;
    for (int r : selection.runs) {
      int best_epoch = 0;
      double best = 0.0;
      for (int e = 0; e < epochs; ++e) {
        double mean = Mean(grid[r][e]);
        if (e == 0 || mean > best) {
          best = mean;
          best_epoch = e;
        }
      }
      chosen.push_back({r, best_epoch});
    }
    for (auto &corpus : selection.per_corpus) corpus = chosen;
  }
  return selection;
}

GridFile ReadScoreGrid(std::istream &in) {
  struct Row {
    int run, epoch;
    std::string corpus;
    double score;
  };
  std::vector<Row> rows;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (line_number == 1 && line.starts_with("run")) continue;
    auto fields = SplitTabs(line);
    try {
      if (fields.size() != 4) throw std::invalid_argument("columns");
      size_t used = 0;
      Row row;
      row.run = std::stoi(fields[0], &used);
      if (used != fields[0].size()) throw std::invalid_argument("run");
      row.epoch = std::stoi(fields[1], &used);
      if (used != fields[1].size()) throw std::invalid_argument("epoch");
      row.corpus = fields[2];
      row.score = std::stod(fields[3], &used);
      if (used != fields[3].size()) throw std::invalid_argument("score");
      rows.push_back(std::move(row));
    } catch (const std::exception &) {
      throw DataError("line " + std::to_string(line_number) +
                      ": expected 'run<TAB>epoch<TAB>corpus<TAB>score'");
    }
  }
  GridFile grid;
  std::set<int> runs, epochs;
  for (const Row &row : rows) {
    runs.insert(row.run);
    epochs.insert(row.epoch);
    if (std::find(grid.corpora.begin(), grid.corpora.end(), row.corpus) ==
        grid.corpora.end()) {
      grid.corpora.push_back(row.corpus);
    }
  }
  grid.runs.assign(runs.begin(), runs.end());
  grid.epochs.assign(epochs.begin(), epochs.end());
  auto position = [](const auto &values, const auto &v) {
    return static_cast<int>(std::find(values.begin(), values.end(), v) -
                            values.begin());
  };
  std::vector<std::vector<std::vector<int>>> seen(
      grid.runs.size(), std::vector<std::vector<int>>(
                            grid.epochs.size(),
                            std::vector<int>(grid.corpora.size(), 0)));
  grid.scores.assign(grid.runs.size(),
                     std::vector<std::vector<double>>(
                         grid.epochs.size(),
                         std::vector<double>(grid.corpora.size(), 0.0)));
  for (const Row &row : rows) {
    int r = position(grid.runs, row.run);
    int e = position(grid.epochs, row.epoch);
    int c = position(grid.corpora, row.corpus);
    if (seen[r][e][c]++) {
      throw DataError("duplicate grid cell run " + std::to_string(row.run) +
                      ", epoch " + std::to_string(row.epoch) + ", corpus " +
                      row.corpus);
    }
    grid.scores[r][e][c] = row.score;
  }
  for (size_t r = 0; r < grid.runs.size(); ++r) {
    for (size_t e = 0; e < grid.epochs.size(); ++e) {
      for (size_t c = 0; c < grid.corpora.size(); ++c) {
        if (!seen[r][e][c]) {
          throw DataError("missing grid cell run " +
                          std::to_string(grid.runs[r]) + ", epoch " +
                          std::to_string(grid.epochs[e]) + ", corpus " +
                          grid.corpora[c]);
        }
      }
    }
  }
  return grid;
}

}  // namespace corefdec
