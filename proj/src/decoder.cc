#include "corefdec/decoder.h"

#include <atomic>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <thread>

#include "corefdec/errors.h"
#include "json.hpp"

namespace corefdec {
namespace {

using json = nlohmann::json;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Depth reached by each tag from each depth 0..max_depth, -1 if the tag is
// not admissible there.
class StepTable {
 public:
  StepTable(const TagVocabulary &vocab, int max_depth)
      : depths_(max_depth + 1), tags_(vocab.size()), next_(depths_ * tags_, -1) {
    for (int d = 0; d < depths_; ++d) {
      for (int k = 0; k < tags_; ++k) {
        const Tag &tag = vocab.tag(k);
        auto result = ApplyTag(d, tag);
        if (result && PeakDepth(d, tag) <= max_depth) {
          next_[d * tags_ + k] = *result;
        }
      }
    }
  }

  int operator()(int depth, int tag) const { return next_[depth * tags_ + tag]; }
  int depths() const { return depths_; }

 private:
  int depths_;
  int tags_;
  std::vector<int> next_;
};

void CheckConfig(const DecoderConfig &config) {
  if (config.max_depth < 1) throw DataError("max_depth must be at least 1");
}

void CheckWidth(const Matrix &m, const TagVocabulary &vocab) {
  if (m.rows() > 0 && m.cols() != vocab.size()) {
    throw DataError("score rows have " + std::to_string(m.cols()) +
                    " columns for a vocabulary of " +
                    std::to_string(vocab.size()));
  }
}

std::vector<int> PlainCrf(const Matrix &emissions,
                          const TransitionMatrix &transitions) {
  const int length = emissions.rows();
  const int tags = emissions.cols();
  Matrix value(length, tags, kNegInf);
  std::vector<int> back(static_cast<size_t>(length) * tags, -1);
  for (int k = 0; k < tags; ++k) {
    value(length - 1, k) = emissions(length - 1, k) + transitions.end[k];
  }
  for (int t = length - 2; t >= 0; --t) {
    for (int k = 0; k < tags; ++k) {
      double best = kNegInf;
      int arg = -1;
      for (int k2 = 0; k2 < tags; ++k2) {
        double v = transitions.scores(k, k2) + value(t + 1, k2);
        if (v > best) {
          best = v;
          arg = k2;
        }
      }
      value(t, k) = emissions(t, k) + best;
      back[static_cast<size_t>(t) * tags + k] = arg;
    }
  }
  double best = kNegInf;
  int current = -1;
  for (int k = 0; k < tags; ++k) {
    double v = transitions.start[k] + value(0, k);
    if (v > best) {
      best = v;
      current = k;
    }
  }
  if (current < 0) throw InfeasibleError("every tag sequence has score -inf");
  std::vector<int> out{current};
  for (int t = 0; t + 1 < length; ++t) {
    current = back[static_cast<size_t>(t) * tags + current];
    out.push_back(current);
  }
  return out;
}

std::vector<int> ConstrainedCrf(const Matrix &emissions,
                                const TagVocabulary &vocab,
                                const TransitionMatrix &transitions,
                                const DecoderConfig &config) {
  const StepTable step(vocab, config.max_depth);
  const int length = emissions.rows();
  const int tags = emissions.cols();
  const int depths = step.depths();
  const int states = tags * depths;  // (tag, depth after the tag)
  auto state = [depths](int k, int d) { return k * depths + d; };

  Matrix value(length, states, kNegInf);
  std::vector<int> back(static_cast<size_t>(length) * states, -1);
  for (int k = 0; k < tags; ++k) {
    for (int d = 0; d < depths; ++d) {
      double terminal = (d == 0 || config.allow_open_final) ? 0.0 : kNegInf;
      value(length - 1, state(k, d)) =
          emissions(length - 1, k) + transitions.end[k] + terminal;
    }
  }
  for (int t = length - 2; t >= 0; --t) {
    for (int k = 0; k < tags; ++k) {
      for (int d = 0; d < depths; ++d) {
        double best = kNegInf;
        int arg = -1;
        for (int k2 = 0; k2 < tags; ++k2) {
          int next = step(d, k2);
          if (next < 0) continue;
          double v = transitions.scores(k, k2) + value(t + 1, state(k2, next));
          if (v > best) {
            best = v;
            arg = k2;
          }
        }
        value(t, state(k, d)) = emissions(t, k) + best;
        back[static_cast<size_t>(t) * states + state(k, d)] = arg;
      }
    }
  }
  double best = kNegInf;
  int current = -1;
  for (int k = 0; k < tags; ++k) {
    int next = step(0, k);
    if (next < 0) continue;
    double v = transitions.start[k] + value(0, state(k, next));
    if (v > best) {
      best = v;
      current = k;
    }
  }
  if (current < 0) {
    throw InfeasibleError("no tag sequence satisfies the stack constraints");
  }
  std::vector<int> out{current};
  int depth = step(0, current);
  for (int t = 0; t + 1 < length; ++t) {
    current = back[static_cast<size_t>(t) * states + state(current, depth)];
    depth = step(depth, current);
    out.push_back(current);
  }
  return out;
}

double ScoreValue(const json &v) {
  if (v.is_null()) return kNegInf;
  if (v.is_string()) {
    if (v.get<std::string>() == "-inf") return kNegInf;
    throw DataError("unexpected transition score " + v.dump());
  }
  double d = v.get<double>();
  if (std::isnan(d) || d == std::numeric_limits<double>::infinity()) {
    throw DataError("transition scores must be finite or -inf");
  }
  return d;
}

json ScoreJson(double v) {
  if (v == kNegInf) return nullptr;
  return v;
}

}  // namespace

TransitionMatrix TransitionMatrix::Zero(int tags) {
  return {Matrix(tags, tags, 0.0), std::vector<double>(tags, 0.0),
          std::vector<double>(tags, 0.0)};
}

std::vector<int> DecodeConstrained(const Matrix &log_probs,
                                   const TagVocabulary &vocab,
                                   const DecoderConfig &config) {
  CheckConfig(config);
  CheckWidth(log_probs, vocab);
  const int length = log_probs.rows();
  if (length == 0) return {};
  const StepTable step(vocab, config.max_depth);
  const int depths = step.depths();

  // best[t][d]: best score of tokens t.. when entering token t at depth d.
  Matrix best(length + 1, depths, kNegInf);
  std::vector<int> back(static_cast<size_t>(length) * depths, -1);
  for (int d = 0; d < depths; ++d) {
    if (d == 0 || config.allow_open_final) best(length, d) = 0.0;
  }
  for (int t = length - 1; t >= 0; --t) {
    for (int d = 0; d < depths; ++d) {
      double top = kNegInf;
      int arg = -1;
      for (int k = 0; k < vocab.size(); ++k) {
        int next = step(d, k);
        if (next < 0) continue;
        double v = log_probs(t, k) + best(t + 1, next);
        if (v > top) {
          top = v;
          arg = k;
        }
      }
      best(t, d) = top;
      back[static_cast<size_t>(t) * depths + d] = arg;
    }
  }
  if (best(0, 0) == kNegInf) {
    throw InfeasibleError(
        "no tag sequence of the vocabulary is balanced within max_depth " +
        std::to_string(config.max_depth));
  }
  std::vector<int> out(length);
  int depth = 0;
  for (int t = 0; t < length; ++t) {
    out[t] = back[static_cast<size_t>(t) * depths + depth];
    depth = step(depth, out[t]);
  }
  return out;
}

std::vector<int> DecodeGreedy(const Matrix &log_probs) {
  std::vector<int> out(log_probs.rows());
  for (int t = 0; t < log_probs.rows(); ++t) {
    auto row = log_probs.row(t);
    int arg = 0;
    for (int k = 1; k < static_cast<int>(row.size()); ++k) {
      if (row[k] > row[arg]) arg = k;
    }
    out[t] = arg;
  }
  return out;
}

std::vector<int> DecodeCrf(const Matrix &emissions, const TagVocabulary &vocab,
                           const TransitionMatrix &transitions,
                           const DecoderConfig &config) {
  CheckConfig(config);
  CheckWidth(emissions, vocab);
  const int tags = vocab.size();
  if (transitions.scores.rows() != tags || transitions.scores.cols() != tags ||
      static_cast<int>(transitions.start.size()) != tags ||
      static_cast<int>(transitions.end.size()) != tags) {
    throw DataError("transition matrix does not match the vocabulary size");
  }
  if (emissions.rows() == 0) return {};
  if (config.enforce_constraints) {
    return ConstrainedCrf(emissions, vocab, transitions, config);
  }
  return PlainCrf(emissions, transitions);
}

TransitionMatrix ConstraintTransitions(const TagVocabulary &vocab,
                                       int max_depth) {
  if (!vocab.depth_dependent()) {
    throw DataError("constraint transitions need depth-dependent tags");
  }
  const int tags = vocab.size();
  // Depth after each tag when executed at its annotated depth, else -1.
  std::vector<int> after(tags, -1);
  for (int k = 0; k < tags; ++k) {
    const Tag &tag = vocab.tag(k);
    int depth = *tag.depth;
    auto result = ApplyTag(depth, tag);
    if (result && PeakDepth(depth, tag) <= max_depth) after[k] = *result;
  }
  TransitionMatrix m{Matrix(tags, tags, kNegInf),
                     std::vector<double>(tags, kNegInf),
                     std::vector<double>(tags, kNegInf)};
  for (int k = 0; k < tags; ++k) {
    if (after[k] < 0) continue;
    if (*vocab.tag(k).depth == 0) m.start[k] = 0.0;
    if (after[k] == 0) m.end[k] = 0.0;
    for (int k2 = 0; k2 < tags; ++k2) {
      if (after[k2] >= 0 && *vocab.tag(k2).depth == after[k]) m.scores(k, k2) = 0.0;
    }
  }
  return m;
}

double SequenceScore(const Matrix &log_probs, std::span<const int> tags) {
  double total = 0.0;
  for (size_t t = 0; t < tags.size(); ++t) {
    total += log_probs(static_cast<int>(t), tags[t]);
  }
  return total;
}

bool IsAdmissible(const TagVocabulary &vocab, std::span<const int> tags,
                  int max_depth, bool allow_open_final) {
  int depth = 0;
  for (int k : tags) {
    const Tag &tag = vocab.tag(k);
    auto next = ApplyTag(depth, tag);
    if (!next || PeakDepth(depth, tag) > max_depth) return false;
    depth = *next;
  }
  return depth == 0 || allow_open_final;
}

std::vector<std::vector<int>> DecodeTensor(const DistributionTensor &tensor,
                                           const DecoderConfig &config,
                                           const TransitionMatrix *transitions,
                                           int jobs) {
  CheckConfig(config);
  if (config.mode == DecodeMode::kCrf && transitions == nullptr) {
    throw DataError("CRF decoding needs a transition matrix");
  }
  ValidateTensor(tensor);
  const DistributionTensor normalized =
      tensor.normalized ? tensor : Normalize(tensor);
  const auto &sentences = normalized.sentences;
  std::vector<std::vector<int>> out(sentences.size());
  auto decode_one = [&](size_t s) {
    const Matrix &rows = sentences[s].rows;
    try {
      switch (config.mode) {
        case DecodeMode::kConstrained:
          out[s] = DecodeConstrained(rows, normalized.vocabulary, config);
          break;
        case DecodeMode::kGreedy:
          out[s] = DecodeGreedy(rows);
          break;
        case DecodeMode::kCrf:
          out[s] = DecodeCrf(rows, normalized.vocabulary, *transitions, config);
          break;
      }
    } catch (const InfeasibleError &e) {
      throw InfeasibleError(sentences[s].doc_id + " sentence " +
                            std::to_string(sentences[s].sentence_index) + ": " +
                            e.what());
    }
  };

  if (jobs <= 1 || sentences.size() < 2) {
    for (size_t s = 0; s < sentences.size(); ++s) decode_one(s);
    return out;
  }
  std::atomic<size_t> next{0};
  std::vector<std::exception_ptr> errors(sentences.size());
  std::vector<std::thread> workers;
  const size_t count = std::min<size_t>(jobs, sentences.size());
  for (size_t w = 0; w < count; ++w) {
    workers.emplace_back([&] {
      for (size_t s = next++; s < sentences.size(); s = next++) {
        try {
          decode_one(s);
        } catch (...) {
          errors[s] = std::current_exception();
        }
      }
    });
  }
  for (std::thread &w : workers) w.join();
  for (const auto &e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

void WriteTransitionFile(const TagVocabulary &vocab,
                         const TransitionMatrix &transitions,
                         std::ostream &out) {
  json matrix = json::array();
  for (int r = 0; r < transitions.scores.rows(); ++r) {
    json row = json::array();
    for (double v : transitions.scores.row(r)) row.push_back(ScoreJson(v));
    matrix.push_back(std::move(row));
  }
  json start = json::array(), end = json::array();
  for (double v : transitions.start) start.push_back(ScoreJson(v));
  for (double v : transitions.end) end.push_back(ScoreJson(v));
  json doc = {{"vocabulary", vocab.texts()},
              {"matrix", std::move(matrix)},
              {"start", std::move(start)},
              {"end", std::move(end)}};
  out << doc.dump() << '\n';
}

TransitionMatrix ReadTransitionFile(std::istream &in,
                                    const TagVocabulary &expected_vocab) {
  try {
    json doc = json::parse(in);
    auto vocab = doc.at("vocabulary").get<std::vector<std::string>>();
    if (vocab != expected_vocab.texts()) {
      throw DataError("transition vocabulary differs from the tensor vocabulary");
    }
    const int tags = static_cast<int>(vocab.size());
    TransitionMatrix m = TransitionMatrix::Zero(tags);
    const json &matrix = doc.at("matrix");
    if (static_cast<int>(matrix.size()) != tags) {
      throw DataError("transition matrix must be square over the vocabulary");
    }
    for (int r = 0; r < tags; ++r) {
      if (static_cast<int>(matrix[r].size()) != tags) {
        throw DataError("transition matrix must be square over the vocabulary");
      }
      for (int c = 0; c < tags; ++c) m.scores(r, c) = ScoreValue(matrix[r][c]);
    }
    for (const char *key : {"start", "end"}) {
      if (!doc.contains(key)) continue;
      const json &values = doc.at(key);
      if (static_cast<int>(values.size()) != tags) {
        throw DataError(std::string(key) + " scores must cover the vocabulary");
      }
      auto &target = std::string(key) == "start" ? m.start : m.end;
      for (int k = 0; k < tags; ++k) target[k] = ScoreValue(values[k]);
    }
    return m;
  } catch (const json::exception &e) {
    throw DataError(std::string("transition file: ") + e.what());
  }
}

void WriteTagFile(std::span<const TagSequence> sequences, std::ostream &out) {
  for (const TagSequence &seq : sequences) {
    std::vector<std::string> tags;
    for (const Tag &tag : seq.tags) tags.push_back(RenderTag(tag));
    json record = {{"doc_id", seq.doc_id},
                   {"sentence_index", seq.sentence_index},
                   {"tags", tags}};
    out << record.dump() << '\n';
  }
}

std::vector<TagSequence> ReadTagFile(std::istream &in) {
  std::vector<TagSequence> out;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    try {
      json record = json::parse(line);
      TagSequence seq;
      seq.doc_id = record.at("doc_id").get<std::string>();
      seq.sentence_index = record.at("sentence_index").get<int>();
      for (const auto &text : record.at("tags").get<std::vector<std::string>>()) {
        seq.tags.push_back(ParseTag(text));
      }
      out.push_back(std::move(seq));
    } catch (const json::exception &e) {
      throw DataError("line " + std::to_string(line_number) + ": " + e.what());
    } catch (const DataError &e) {
      throw DataError("line " + std::to_string(line_number) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace corefdec
