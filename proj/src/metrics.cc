#include "corefdec/metrics.h"

#include <algorithm>
#include <map>
#include <tuple>
#include <unordered_map>

#include "corefdec/assignment.h"
#include "corefdec/errors.h"

namespace corefdec {
namespace {

bool SameSpan(const Mention &a, const Mention &b) {
  return a.sentence == b.sentence && a.start == b.start && a.end == b.end;
}

Clustering Sorted(Clustering c) {
  for (auto &cluster : c) std::sort(cluster.begin(), cluster.end());
  std::sort(c.begin(), c.end());
  return c;
}

bool Identical(const Clustering &a, const Clustering &b) {
  return Sorted(a) == Sorted(b);
}

// cluster id of each mention id.
std::unordered_map<int, int> Membership(const Clustering &c) {
  std::unordered_map<int, int> owner;
  for (size_t i = 0; i < c.size(); ++i) {
    for (int m : c[i]) owner[m] = static_cast<int>(i);
  }
  return owner;
}

// Sum over clusters of |C| - (number of parts C splits into under `other`).
std::pair<double, double> MucSide(const Clustering &clusters,
                                  const Clustering &other) {
  auto owner = Membership(other);
  double num = 0.0, den = 0.0;
  for (const auto &cluster : clusters) {
    std::vector<int> parts;
    int unaligned = 0;
    for (int m : cluster) {
      auto it = owner.find(m);
      if (it == owner.end()) {
        ++unaligned;
      } else {
        parts.push_back(it->second);
      }
    }
    std::sort(parts.begin(), parts.end());
    int partitions =
        static_cast<int>(std::unique(parts.begin(), parts.end()) - parts.begin()) +
        unaligned;
    num += static_cast<double>(cluster.size()) - partitions;
    den += static_cast<double>(cluster.size()) - 1;
  }
  return {num, den};
}

int Overlap(const std::vector<int> &a, const std::vector<int> &b) {
  int count = 0;
  for (int x : a) count += static_cast<int>(std::count(b.begin(), b.end(), x));
  return count;
}

std::pair<double, double> BCubedSide(const Clustering &clusters,
                                     const Clustering &other) {
  auto owner = Membership(other);
  double num = 0.0, den = 0.0;
  for (const auto &cluster : clusters) {
    std::map<int, int> shared;
    for (int m : cluster) {
      if (auto it = owner.find(m); it != owner.end()) ++shared[it->second];
    }
    for (const auto &[id, count] : shared) {
      num += static_cast<double>(count) * count / cluster.size();
    }
    den += static_cast<double>(cluster.size());
  }
  return {num, den};
}

struct IndexedMention {
  Mention mention;
  int entity;
};

std::vector<IndexedMention> IndexMentions(const Document &doc) {
  std::vector<IndexedMention> out;
  for (size_t e = 0; e < doc.entities.size(); ++e) {
    for (const Mention &m : doc.entities[e].mentions) {
      out.push_back({m, static_cast<int>(e)});
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const IndexedMention &a, const IndexedMention &b) {
                     return std::tie(a.mention.sentence, a.mention.start,
                                     a.mention.end) <
                            std::tie(b.mention.sentence, b.mention.start,
                                     b.mention.end);
                   });
  return out;
}

struct DocumentCounts {
  MetricCounts muc, b3, ceafe;
};

DocumentCounts ScoreDocument(const Document &gold, const Document &predicted,
                             const MatchMode &mode,
                             std::vector<std::string> *warnings) {
  for (const Entity &e : predicted.entities) {
    for (const Mention &m : e.mentions) {
      if (m.sentence < 0 ||
          m.sentence >= static_cast<int>(gold.sentences.size()) ||
          m.start < 0 || m.start > m.end ||
          m.end >= static_cast<int>(gold.sentences[m.sentence].tokens.size())) {
        throw DataError(predicted.doc_id + ": predicted mention in sentence " +
                        std::to_string(m.sentence) +
                        " lies outside the gold text");
      }
    }
  }
  const auto gold_mentions = IndexMentions(gold);
  const auto pred_mentions = IndexMentions(predicted);
  for (size_t i = 1; i < gold_mentions.size(); ++i) {
    const auto &a = gold_mentions[i - 1];
    const auto &b = gold_mentions[i];
    if (SameSpan(a.mention, b.mention) && a.entity == b.entity) {
      warnings->push_back(gold.doc_id + ": duplicate gold mention of entity '" +
                          gold.entities[a.entity].id + "' in sentence " +
                          std::to_string(a.mention.sentence) + ", kept both");
    }
  }

  std::vector<Mention> g, p;
  for (const auto &m : gold_mentions) g.push_back(m.mention);
  for (const auto &m : pred_mentions) p.push_back(m.mention);
  const auto matching = MatchMentions(g, p, mode.kind, gold.sentences);

  // Gold mention i keeps id i; unmatched prediction j becomes G + j.
  const int gold_count = static_cast<int>(g.size());
  Clustering key(gold.entities.size()), response(predicted.entities.size());
  for (int i = 0; i < gold_count; ++i) key[gold_mentions[i].entity].push_back(i);
  for (size_t j = 0; j < p.size(); ++j) {
    int id = matching[j] ? *matching[j] : gold_count + static_cast<int>(j);
    response[pred_mentions[j].entity].push_back(id);
  }
  auto drop_singletons = [](Clustering &c) {
    std::erase_if(c, [](const auto &cluster) { return cluster.size() < 2; });
  };
  std::erase_if(key, [](const auto &cluster) { return cluster.empty(); });
  std::erase_if(response, [](const auto &cluster) { return cluster.empty(); });
  if (!mode.include_singletons) {
    drop_singletons(key);
    drop_singletons(response);
  }
  return {MucCounts(key, response), BCubedCounts(key, response),
          CeafeCounts(key, response)};
}

}  // namespace

std::vector<MatchMode> StandardModes() {
  return {{MatchKind::kHead, false},
          {MatchKind::kPartial, false},
          {MatchKind::kExact, false},
          {MatchKind::kHead, true}};
}

std::string ModeLabel(const MatchMode &mode) {
  if (mode.include_singletons) {
    switch (mode.kind) {
      case MatchKind::kHead: return "+Singletons";
      case MatchKind::kPartial: return "Partial+Singletons";
      case MatchKind::kExact: return "Exact+Singletons";
    }
  }
  switch (mode.kind) {
    case MatchKind::kHead: return "Head-match";
    case MatchKind::kPartial: return "Partial-match";
    case MatchKind::kExact: return "Exact-match";
  }
  return "";
}

std::vector<std::optional<int>> MatchMentions(std::span<const Mention> gold,
                                              std::span<const Mention> predicted,
                                              MatchKind kind,
                                              std::span<const Sentence> sentences) {
  std::vector<std::optional<int>> result(predicted.size());
  std::vector<bool> taken(gold.size(), false);
  std::map<int, std::vector<int>> gold_by_sentence;
  for (size_t i = 0; i < gold.size(); ++i) {
    gold_by_sentence[gold[i].sentence].push_back(static_cast<int>(i));
  }
  auto candidates = [&](const Mention &m) -> const std::vector<int> & {
    static const std::vector<int> kNone;
    auto it = gold_by_sentence.find(m.sentence);
    return it == gold_by_sentence.end() ? kNone : it->second;
  };

  // Identical spans pair first, so exact matches survive in every mode.
  for (size_t j = 0; j < predicted.size(); ++j) {
    for (int i : candidates(predicted[j])) {
      if (!taken[i] && SameSpan(gold[i], predicted[j])) {
        taken[i] = true;
        result[j] = i;
        break;
      }
    }
  }
  if (kind == MatchKind::kExact) return result;

  auto head = [&](const Mention &m) {
    return MentionHead(m.start, m.end, sentences[m.sentence].tokens);
  };
  for (size_t j = 0; j < predicted.size(); ++j) {
    if (result[j]) continue;
    const Mention &pm = predicted[j];
    const int pred_head = head(pm);
    int best = -1;
    for (int i : candidates(pm)) {
      if (taken[i]) continue;
      const Mention &gm = gold[i];
      const int gold_head = head(gm);
      bool ok = false;
      if (kind == MatchKind::kHead) {
        ok = pred_head == gold_head;
      } else {
        ok = gm.start <= pm.start && pm.end <= gm.end &&
             pm.start <= gold_head && gold_head <= pm.end;
      }
      if (ok && (best < 0 || gm.length() < gold[best].length())) best = i;
    }
    if (best >= 0) {
      taken[best] = true;
      result[j] = best;
    }
  }
  return result;
}

MetricCounts &MetricCounts::operator+=(const MetricCounts &other) {
  recall_num += other.recall_num;
  recall_den += other.recall_den;
  precision_num += other.precision_num;
  precision_den += other.precision_den;
  identical = identical && other.identical;
  return *this;
}

Prf Finalize(const MetricCounts &c) {
  Prf out;
  if (c.recall_den == 0.0 && c.precision_den == 0.0) {
    out.recall = out.precision = c.identical ? 1.0 : 0.0;
  } else {
    out.recall = c.recall_den == 0.0 ? 0.0 : c.recall_num / c.recall_den;
    out.precision =
        c.precision_den == 0.0 ? 0.0 : c.precision_num / c.precision_den;
  }
  double sum = out.precision + out.recall;
  out.f1 = sum == 0.0 ? 0.0 : 2.0 * out.precision * out.recall / sum;
  return out;
}

MetricCounts MucCounts(const Clustering &key, const Clustering &response) {
  MetricCounts c;
  std::tie(c.recall_num, c.recall_den) = MucSide(key, response);
  std::tie(c.precision_num, c.precision_den) = MucSide(response, key);
  c.identical = Identical(key, response);
  return c;
}

MetricCounts BCubedCounts(const Clustering &key, const Clustering &response) {
  MetricCounts c;
  std::tie(c.recall_num, c.recall_den) = BCubedSide(key, response);
  std::tie(c.precision_num, c.precision_den) = BCubedSide(response, key);
  c.identical = Identical(key, response);
  return c;
}

MetricCounts CeafeCounts(const Clustering &key, const Clustering &response) {
  Matrix similarity(static_cast<int>(key.size()),
                    static_cast<int>(response.size()));
  for (size_t k = 0; k < key.size(); ++k) {
    for (size_t r = 0; r < response.size(); ++r) {
      similarity(static_cast<int>(k), static_cast<int>(r)) =
          2.0 * Overlap(key[k], response[r]) /
          static_cast<double>(key[k].size() + response[r].size());
    }
  }
  const auto assignment = MaxWeightAssignment(similarity);
  double total = 0.0;
  for (size_t k = 0; k < assignment.size(); ++k) {
    if (assignment[k] >= 0) {
      total += similarity(static_cast<int>(k), assignment[k]);
    }
  }
  MetricCounts c;
  c.recall_num = c.precision_num = total;
  c.recall_den = static_cast<double>(key.size());
  c.precision_den = static_cast<double>(response.size());
  c.identical = Identical(key, response);
  return c;
}

ScoreReport Score(std::span<const Document> gold,
                  std::span<const Document> predicted, const MatchMode &mode) {
  std::map<std::string, const Document *> by_id;
  for (const Document &doc : predicted) {
    if (!by_id.emplace(doc.doc_id, &doc).second) {
      throw DataError("duplicate predicted document '" + doc.doc_id + "'");
    }
  }
  for (const Document &doc : gold) {
    if (!by_id.count(doc.doc_id)) {
      throw DataError("gold document '" + doc.doc_id +
                      "' has no predicted counterpart");
    }
  }
  if (by_id.size() != gold.size()) {
    for (const auto &[id, doc] : by_id) {
      bool found = std::any_of(gold.begin(), gold.end(),
                               [&](const Document &g) { return g.doc_id == id; });
      if (!found) {
        throw DataError("predicted document '" + id + "' is not in the gold data");
      }
    }
  }

  ScoreReport report;
  report.mode = mode;
  MetricCounts muc, b3, ceafe;
  for (const Document &doc : gold) {
    DocumentCounts counts =
        ScoreDocument(doc, *by_id.at(doc.doc_id), mode, &report.warnings);
    muc += counts.muc;
    b3 += counts.b3;
    ceafe += counts.ceafe;
  }
  report.muc = Finalize(muc);
  report.b3 = Finalize(b3);
  report.ceafe = Finalize(ceafe);
  report.conll = (report.muc.f1 + report.b3.f1 + report.ceafe.f1) / 3.0;
  return report;
}

}  // namespace corefdec
