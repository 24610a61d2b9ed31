#ifndef COREFDEC_ASSIGNMENT_H_
#define COREFDEC_ASSIGNMENT_H_

#include <vector>

#include "corefdec/matrix.h"

namespace corefdec {

// Maximum-weight one-to-one assignment between the rows and columns of a
// rectangular weight matrix (Hungarian method, O(n^2 m)). Returns the
// column assigned to each row, or -1 for rows left unassigned when there
// are more rows than columns.
std::vector<int> MaxWeightAssignment(const Matrix &weights);

}  // namespace corefdec

#endif  // COREFDEC_ASSIGNMENT_H_
