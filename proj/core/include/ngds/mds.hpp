#pragma once

#include <cstddef>

#include "ngds/tensor.hpp"

namespace ngds {

struct MdsResult {
  Matrix coordinates;  // samples x k
  Vector eigenvalues;  // top k of the double-centred matrix, unclipped
  // Sum of |negative eigenvalues| over sum of |all eigenvalues|; 0 for an
  // exactly Euclidean input.
  double negative_mass = 0.0;
};

/// Classical (Torgerson) scaling. B = -1/2 J D^2 J, coordinates are the top-k
/// eigenvectors scaled by sqrt(max(lambda, 0)). Each column's largest
/// magnitude entry (first on ties) is made positive.
MdsResult classical_mds(const Matrix& distances, std::size_t k);

}  // namespace ngds
