#include "corefdec/linker.h"

#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <tuple>
#include <unordered_map>

#include "corefdec/errors.h"
#include "json.hpp"

namespace corefdec {
namespace {

using json = nlohmann::json;

bool SpanLess(const Mention &a, const Mention &b) {
  return std::tie(a.sentence, a.start, a.end) <
         std::tie(b.sentence, b.start, b.end);
}

}  // namespace

UnionFind::UnionFind(int size) : parent_(size), size_(size, 1) {
  std::iota(parent_.begin(), parent_.end(), 0);
}

int UnionFind::Find(int x) {
  while (parent_[x] != x) {
    parent_[x] = parent_[parent_[x]];
    x = parent_[x];
  }
  return x;
}

void UnionFind::Union(int a, int b) {
  a = Find(a);
  b = Find(b);
  if (a == b) return;
  if (size_[a] < size_[b]) std::swap(a, b);
  parent_[b] = a;
  size_[a] += size_[b];
}

std::vector<int> ChooseAntecedents(const AntecedentScores &scores) {
  const int n = static_cast<int>(scores.mentions.size());
  if (static_cast<int>(scores.rows.size()) != n) {
    throw DataError(scores.doc_id + ": " + std::to_string(scores.rows.size()) +
                    " score rows for " + std::to_string(n) + " mentions");
  }
  std::vector<int> chosen(n);
  for (int i = 0; i < n; ++i) {
    if (i > 0 && SpanLess(scores.mentions[i], scores.mentions[i - 1])) {
      throw DataError(scores.doc_id + ": mention " + std::to_string(i) +
                      " is out of document order");
    }
    const auto &row = scores.rows[i];
    if (static_cast<int>(row.size()) != i + 1) {
      throw DataError(scores.doc_id + ": score row " + std::to_string(i) +
                      " must have " + std::to_string(i + 1) + " entries");
    }
    int best = 0;
    for (int j = 0; j <= i; ++j) {
      if (!std::isfinite(row[j])) {
        throw DataError(scores.doc_id + ": non-finite score at (" +
                        std::to_string(i) + "," + std::to_string(j) + ")");
      }
      if (row[j] > row[best]) best = j;
    }
    chosen[i] = best;
  }
  return chosen;
}

std::vector<Entity> Link(const AntecedentScores &scores) {
  const std::vector<int> chosen = ChooseAntecedents(scores);
  const int n = static_cast<int>(chosen.size());
  UnionFind clusters(n);
  for (int i = 0; i < n; ++i) clusters.Union(i, chosen[i]);

  std::vector<Entity> entities;
  std::unordered_map<int, size_t> by_root;
  for (int i = 0; i < n; ++i) {
    auto [it, inserted] = by_root.emplace(clusters.Find(i), entities.size());
    if (inserted) {
      entities.push_back(Entity{"e" + std::to_string(entities.size() + 1), {}});
    }
    Entity &entity = entities[it->second];
    Mention m = scores.mentions[i];
    m.entity = entity.id;
    m.attributes.clear();
    entity.mentions.push_back(std::move(m));
  }
  return entities;
}

void WriteScoresFile(std::span<const AntecedentScores> docs, std::ostream &out) {
  for (const AntecedentScores &doc : docs) {
    json mentions = json::array();
    for (const Mention &m : doc.mentions) {
      mentions.push_back(
          {{"sentence", m.sentence}, {"start", m.start}, {"end", m.end}});
    }
    json record = {{"doc_id", doc.doc_id},
                   {"mentions", std::move(mentions)},
                   {"rows", doc.rows}};
    out << record.dump() << '\n';
  }
}

std::vector<AntecedentScores> ReadScoresFile(std::istream &in) {
  std::vector<AntecedentScores> out;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    try {
      json record = json::parse(line);
      AntecedentScores doc;
      doc.doc_id = record.at("doc_id").get<std::string>();
      for (const json &m : record.at("mentions")) {
        doc.mentions.push_back(Mention{m.at("sentence").get<int>(),
                                       m.at("start").get<int>(),
                                       m.at("end").get<int>(), "", ""});
      }
      for (const json &row : record.at("rows")) {
        std::vector<double> values;
        for (const json &v : row) {
          // Non-numbers (null, the encoding of non-finite values) are
          // rejected later by ChooseAntecedents.
          values.push_back(v.is_number() ? v.get<double>() : NAN);
        }
        doc.rows.push_back(std::move(values));
      }
      out.push_back(std::move(doc));
    } catch (const json::exception &e) {
      throw DataError("line " + std::to_string(line_number) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace corefdec
