#pragma once

#include <cstddef>
#include <span>

#include "ngds/subspace.hpp"

namespace ngds {

/// Riemannian log map on the Grassmannian: the tangent vector at `base`
/// (ambient x k, with base^T H = 0) pointing along the geodesic to `target`.
/// At exactly orthogonal directions the geodesic is not unique; the target
/// direction itself is used.
Matrix grassmann_log(const Subspace& base, const Subspace& target);

/// Riemannian exp map: follows the geodesic from `base` with velocity
/// `tangent` for unit time.
Subspace grassmann_exp(const Subspace& base, const Matrix& tangent);

struct KarcherOptions {
  double tol = 1e-8;
  std::size_t max_iter = 100;
};

struct KarcherResult {
  Subspace mean;
  bool converged = false;
  std::size_t iterations = 0;
  double tangent_norm = 0.0;  // Frobenius norm of the final mean log map
};

/// Top-k eigenvectors of the averaged projectors.
Subspace projector_mean(std::span<const Subspace> subspaces);

/// Intrinsic (Karcher) mean: projector-mean start, then averaged log maps
/// mapped back with exp until the mean tangent norm drops below tol. The
/// iterate with the lowest sum of squared geodesic distances is returned;
/// `converged` is false when max_iter ran out first.
KarcherResult karcher_mean(std::span<const Subspace> subspaces, const KarcherOptions& options = {});

}  // namespace ngds
