#ifndef COREFDEC_LINKER_H_
#define COREFDEC_LINKER_H_

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "corefdec/corefud.h"

namespace corefdec {

// Antecedent scores for the mentions of one document. rows[i] has i + 1
// entries: rows[i][j] (j < i) scores mention j as the antecedent of
// mention i, rows[i][i] scores "no antecedent".
struct AntecedentScores {
  std::string doc_id;
  std::vector<Mention> mentions;  // document order; entity ids ignored
  std::vector<std::vector<double>> rows;
};

// Index of the chosen antecedent per mention (i itself for none); ties go to
// the earliest candidate. Throws DataError on unsorted mentions, ragged rows
// or non-finite scores.
std::vector<int> ChooseAntecedents(const AntecedentScores &scores);

// Clusters mentions through their chosen antecedents. Entities are named
// e1, e2, ... in order of their first mention.
std::vector<Entity> Link(const AntecedentScores &scores);

// Disjoint-set forest with path halving and union by size.
class UnionFind {
 public:
  explicit UnionFind(int size);
  int Find(int x);
  void Union(int a, int b);

 private:
  std::vector<int> parent_;
  std::vector<int> size_;
};

// One {"doc_id", "mentions": [{"sentence","start","end"}...], "rows"}
// object per line; positions are 0-based.
void WriteScoresFile(std::span<const AntecedentScores> docs, std::ostream &out);
std::vector<AntecedentScores> ReadScoresFile(std::istream &in);

}  // namespace corefdec

#endif  // COREFDEC_LINKER_H_
