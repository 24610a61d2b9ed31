#include "corefdec/harness.h"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <tuple>

#include "corefdec/errors.h"

namespace corefdec {
namespace {

bool Crosses(const Mention &a, const Mention &b) {
  return (a.start < b.start && b.start <= a.end && a.end < b.end) ||
         (b.start < a.start && a.start <= b.end && b.end < a.end);
}

class Random {
 public:
  explicit Random(uint64_t seed) : engine_(seed) {}

  int Uniform(int lo, int hi) {  // inclusive
    return std::uniform_int_distribution<int>(lo, hi)(engine_);
  }
  bool Chance(double p) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(engine_) < p;
  }

 private:
  std::mt19937_64 engine_;
};

Sentence RandomSentence(Random &rng, const CorpusSpec &spec,
                        const std::string &id) {
  Sentence sentence;
  sentence.id = id;
  const int length = rng.Uniform(spec.min_sentence_length,
                                 spec.max_sentence_length);
  // Random tree: nodes attach, in a random order, to an already placed node.
  std::vector<int> order(length);
  std::iota(order.begin(), order.end(), 0);
  for (int i = length - 1; i > 0; --i) std::swap(order[i], order[rng.Uniform(0, i)]);
  std::vector<std::optional<int>> parent(length);
  for (int i = 1; i < length; ++i) parent[order[i]] = order[rng.Uniform(0, i - 1)];

  for (int t = 0; t < length; ++t) {
    Token token;
    token.index = t + 1;
    token.form = "w" + std::to_string(rng.Uniform(1, 500));
    token.parent = parent[t];
    token.deprel = parent[t] ? "dep" : "root";
    if (!sentence.text.empty()) sentence.text += ' ';
    sentence.text += token.form;
    sentence.tokens.push_back(std::move(token));
  }
  return sentence;
}

}  // namespace

std::vector<Document> GenerateCorpus(const CorpusSpec &spec) {
  if (spec.max_depth < 1) throw DataError("max_depth must be at least 1");
  if (spec.min_sentence_length < 1 ||
      spec.max_sentence_length < spec.min_sentence_length) {
    throw DataError("bad sentence length range");
  }
  Random rng(spec.seed);
  std::vector<Document> docs;
  for (int d = 0; d < spec.documents; ++d) {
    Document doc;
    doc.doc_id = "doc" + std::to_string(d + 1);
    doc.corpus_id = "synth";
    for (int s = 0; s < spec.sentences_per_document; ++s) {
      doc.sentences.push_back(RandomSentence(
          rng, spec, doc.doc_id + "-s" + std::to_string(s + 1)));
      const int length = static_cast<int>(doc.sentences.back().tokens.size());
      std::vector<int> coverage(length, 0);
      std::vector<Mention> placed;
      const int attempts = rng.Uniform(0, length);
      for (int a = 0; a < attempts; ++a) {
        Mention m;
        m.sentence = s;
        m.start = rng.Uniform(0, length - 1);
        m.end = m.start + rng.Uniform(0, std::min(5, length - m.start) - 1);
        bool duplicate = std::any_of(placed.begin(), placed.end(), [&](auto &p) {
          return p.start == m.start && p.end == m.end;
        });
        if (duplicate) continue;
        bool too_deep = false;
        for (int t = m.start; t <= m.end; ++t) {
          too_deep |= coverage[t] + 1 > spec.max_depth;
        }
        if (too_deep) continue;
        bool crossing = std::any_of(placed.begin(), placed.end(),
                                    [&](auto &p) { return Crosses(p, m); });
        if (crossing && !rng.Chance(spec.crossing_probability)) continue;

        // Reuse an entity unless that would cross one of its mentions.
        int entity = -1;
        if (!doc.entities.empty() && rng.Chance(0.6)) {
          entity = rng.Uniform(0, static_cast<int>(doc.entities.size()) - 1);
          for (const Mention &other : doc.entities[entity].mentions) {
            if (other.sentence == s && Crosses(other, m)) entity = -1;
            if (entity < 0) break;
          }
        }
        if (entity < 0) {
          entity = static_cast<int>(doc.entities.size());
          doc.entities.push_back(Entity{"e" + std::to_string(entity + 1), {}});
        }
        m.entity = doc.entities[entity].id;
        doc.entities[entity].mentions.push_back(m);
        placed.push_back(m);
        for (int t = m.start; t <= m.end; ++t) ++coverage[t];
      }
    }
    Canonicalize(doc);
    docs.push_back(std::move(doc));
  }
  return docs;
}

DistributionTensor SynthesizeLogits(std::span<const TagSequence> gold,
                                    const TagVocabulary &vocab,
                                    const NoiseSpec &noise) {
  if (noise.flip_probability < 0.0 || noise.flip_probability > 1.0) {
    throw DataError("flip probability must lie in [0, 1]");
  }
  if (!(noise.temperature > 0.0)) throw DataError("temperature must be positive");
  Random rng(noise.seed);
  DistributionTensor tensor;
  tensor.vocabulary = vocab;
  tensor.normalized = true;
  const int tags = vocab.size();
  for (const TagSequence &seq : gold) {
    SentenceDistribution s;
    s.doc_id = seq.doc_id;
    s.sentence_index = seq.sentence_index;
    s.rows = Matrix(static_cast<int>(seq.tags.size()), tags, 0.0);
    for (size_t t = 0; t < seq.tags.size(); ++t) {
      int hot = vocab.IndexOf(seq.tags[t]);
      if (rng.Chance(noise.flip_probability)) hot = rng.Uniform(0, tags - 1);
      s.rows(static_cast<int>(t), hot) = 1.0 / noise.temperature;
    }
    LogSoftmaxRows(s.rows);
    tensor.sentences.push_back(std::move(s));
  }
  return tensor;
}

std::vector<AntecedentScores> GoldAntecedentScores(
    std::span<const Document> predicted, std::span<const Document> gold) {
  std::map<std::string, const Document *> gold_by_id;
  for (const Document &doc : gold) gold_by_id[doc.doc_id] = &doc;
  std::vector<AntecedentScores> out;
  for (const Document &doc : predicted) {
    auto it = gold_by_id.find(doc.doc_id);
    if (it == gold_by_id.end()) {
      throw DataError("document '" + doc.doc_id + "' has no gold counterpart");
    }
    // Gold entity ids available for each span; identical gold spans are
    // handed out in order.
    std::map<std::tuple<int, int, int>, std::vector<std::string>> gold_entity;
    for (const Mention &m : CollectMentions(*it->second)) {
      gold_entity[{m.sentence, m.start, m.end}].push_back(m.entity);
    }
    AntecedentScores scores;
    scores.doc_id = doc.doc_id;
    scores.mentions = CollectMentions(doc);
    std::vector<std::string> entity_of;
    for (size_t i = 0; i < scores.mentions.size(); ++i) {
      const Mention &m = scores.mentions[i];
      std::string entity;
      auto g = gold_entity.find({m.sentence, m.start, m.end});
      if (g != gold_entity.end() && !g->second.empty()) {
        entity = g->second.front();
        g->second.erase(g->second.begin());
      }
      std::vector<double> row(i + 1, 0.0);
      int antecedent = static_cast<int>(i);
      if (!entity.empty()) {
        for (int j = static_cast<int>(i) - 1; j >= 0; --j) {
          if (entity_of[j] == entity) {
            antecedent = j;
            break;
          }
        }
      }
      row[antecedent] = 1.0;
      entity_of.push_back(entity);
      scores.rows.push_back(std::move(row));
    }
    out.push_back(std::move(scores));
  }
  return out;
}

}  // namespace corefdec
