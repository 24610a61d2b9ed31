#include "corefdec/distribution.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "corefdec/errors.h"
#include "json.hpp"

namespace corefdec {
namespace {

using json = nlohmann::json;

double LogSumExp(std::span<const double> values) {
  double peak = -std::numeric_limits<double>::infinity();
  for (double v : values) peak = std::max(peak, v);
  if (!std::isfinite(peak)) return peak;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - peak);
  return peak + std::log(sum);
}

std::string SentenceKey(const SentenceDistribution &s) {
  return s.doc_id + "#" + std::to_string(s.sentence_index);
}

}  // namespace

void ValidateTensor(const DistributionTensor &tensor) {
  for (const SentenceDistribution &s : tensor.sentences) {
    if (s.rows.cols() != tensor.vocabulary.size() && s.rows.rows() > 0) {
      throw DataError("sentence " + SentenceKey(s) + ": row width " +
                      std::to_string(s.rows.cols()) + " != vocabulary size " +
                      std::to_string(tensor.vocabulary.size()));
    }
    for (int t = 0; t < s.rows.rows(); ++t) {
      for (double v : s.rows.row(t)) {
        if (!std::isfinite(v)) {
          throw DataError("sentence " + SentenceKey(s) + ": non-finite score");
        }
      }
    }
  }
}

void LogSoftmaxRows(Matrix &m) {
  for (int r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    for (double v : row) {
      if (!std::isfinite(v)) throw DataError("non-finite logit");
    }
    double norm = LogSumExp(row);
    for (double &v : row) v -= norm;
  }
}

DistributionTensor Normalize(DistributionTensor tensor) {
  for (SentenceDistribution &s : tensor.sentences) LogSoftmaxRows(s.rows);
  tensor.normalized = true;
  return tensor;
}

DistributionTensor Ensemble(std::span<const DistributionTensor> members) {
  if (members.empty()) throw DataError("ensemble needs at least one tensor");
  const DistributionTensor &first = members.front();
  for (size_t m = 1; m < members.size(); ++m) {
    const DistributionTensor &other = members[m];
    if (!(other.vocabulary == first.vocabulary)) {
      throw DataError("ensemble member " + std::to_string(m) +
                      " has a different vocabulary");
    }
    if (other.sentences.size() != first.sentences.size()) {
      size_t s = std::min(other.sentences.size(), first.sentences.size());
      throw DataError("ensemble member " + std::to_string(m) + " has " +
                      std::to_string(other.sentences.size()) +
                      " sentences, expected " +
                      std::to_string(first.sentences.size()) +
                      "; first differing sentence is #" + std::to_string(s));
    }
    for (size_t s = 0; s < first.sentences.size(); ++s) {
      const auto &a = first.sentences[s];
      const auto &b = other.sentences[s];
      if (a.doc_id != b.doc_id || a.sentence_index != b.sentence_index ||
          a.rows.rows() != b.rows.rows() || a.rows.cols() != b.rows.cols()) {
        throw DataError("ensemble member " + std::to_string(m) +
                        " differs at sentence #" + std::to_string(s) + " (" +
                        SentenceKey(a) + " vs " + SentenceKey(b) + ")");
      }
    }
  }

  std::vector<DistributionTensor> normalized;
  normalized.reserve(members.size());
  for (const DistributionTensor &m : members) {
    ValidateTensor(m);
    normalized.push_back(m.normalized ? m : Normalize(m));
  }

  DistributionTensor out;
  out.vocabulary = first.vocabulary;
  out.normalized = true;
  const double log_k = std::log(static_cast<double>(members.size()));
  std::vector<double> column(members.size());
  for (size_t s = 0; s < first.sentences.size(); ++s) {
    SentenceDistribution mean = first.sentences[s];
    for (int t = 0; t < mean.rows.rows(); ++t) {
      for (int k = 0; k < mean.rows.cols(); ++k) {
        for (size_t m = 0; m < normalized.size(); ++m) {
          column[m] = normalized[m].sentences[s].rows(t, k);
        }
        mean.rows(t, k) = LogSumExp(column) - log_k;
      }
    }
    LogSoftmaxRows(mean.rows);
    out.sentences.push_back(std::move(mean));
  }
  return out;
}

void WriteDistributionFile(const DistributionTensor &tensor, std::ostream &out) {
  json header = {{"vocabulary", tensor.vocabulary.texts()},
                 {"normalized", tensor.normalized}};
  out << header.dump() << '\n';
  for (const SentenceDistribution &s : tensor.sentences) {
    json rows = json::array();
    for (int t = 0; t < s.rows.rows(); ++t) {
      auto r = s.rows.row(t);
      rows.push_back(std::vector<double>(r.begin(), r.end()));
    }
    json record = {{"doc_id", s.doc_id},
                   {"sentence_index", s.sentence_index},
                   {"rows", std::move(rows)}};
    out << record.dump() << '\n';
  }
}

DistributionTensor ReadDistributionFile(std::istream &in) {
  DistributionTensor tensor;
  std::string line;
  int line_number = 0;
  bool have_header = false;
  try {
    while (std::getline(in, line)) {
      ++line_number;
      if (line.empty()) continue;
      json record = json::parse(line);
      if (!have_header) {
        tensor.vocabulary = TagVocabulary::FromStrings(
            record.at("vocabulary").get<std::vector<std::string>>());
        tensor.normalized = record.at("normalized").get<bool>();
        have_header = true;
        continue;
      }
      SentenceDistribution s;
      s.doc_id = record.at("doc_id").get<std::string>();
      s.sentence_index = record.at("sentence_index").get<int>();
      const json &rows = record.at("rows");
      const int width = tensor.vocabulary.size();
      s.rows = Matrix(static_cast<int>(rows.size()), width);
      for (int t = 0; t < s.rows.rows(); ++t) {
        const json &row = rows[t];
        if (static_cast<int>(row.size()) != width) {
          throw DataError("row " + std::to_string(t) + " has " +
                          std::to_string(row.size()) + " entries, expected " +
                          std::to_string(width));
        }
        for (int k = 0; k < width; ++k) s.rows(t, k) = row[k].get<double>();
      }
      tensor.sentences.push_back(std::move(s));
    }
    if (!have_header) throw DataError("missing header line");
    ValidateTensor(tensor);
  } catch (const json::exception &e) {
    throw DataError("line " + std::to_string(line_number) + ": " + e.what());
  } catch (const DataError &e) {
    throw DataError("line " + std::to_string(line_number) + ": " + e.what());
  }
  return tensor;
}

DistributionTensor ReadDistributionFile(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  try {
    return ReadDistributionFile(in);
  } catch (const DataError &e) {
    throw DataError(path + ":" + e.what());
  }
}

void WriteDistributionFile(const DistributionTensor &tensor,
                           const std::string &path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  WriteDistributionFile(tensor, out);
}

}  // namespace corefdec
