#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "ngds/subspace.hpp"

namespace ngds {

/// Average of the class projectors of one mode, (1/m) sum_j U_j U_j^T.
struct ModeGram {
  int mode = 1;
  Matrix matrix;
  std::size_t class_count = 0;
};

/// Eigen-decomposition of a ModeGram with deterministic ordering and signs:
/// eigenvalues descending (ties keep solver order), and the first component
/// of each eigenvector whose magnitude exceeds 1e-12 is positive.
struct GramSpectrum {
  int mode = 1;
  Matrix eigvecs;
  Vector eigvals;
  std::size_t rank = 0;  // eigenvalues above 1e-10
};

/// Generalized difference subspace of one mode: eigenvectors alpha..beta
/// (1-based, inclusive) of the mode Gram matrix.
struct GdsBasis {
  int mode = 1;
  Matrix eigvecs;
  Vector eigvals;
  std::size_t alpha = 1;
  std::size_t beta = 1;
  std::size_t rank = 0;
  Matrix basis;

  std::size_t width() const noexcept { return static_cast<std::size_t>(basis.cols()); }
};

inline constexpr double kGramRankTolerance = 1e-10;
inline constexpr double kGramSchmidtTolerance = 1e-10;

ModeGram mode_gram(std::span<const Subspace> class_subspaces, int mode);

GramSpectrum decompose(const ModeGram& gram);

/// Selects eigenvectors alpha..beta; beta defaults to the rank.
GdsBasis select_gds(const GramSpectrum& spectrum, std::size_t alpha,
                    std::optional<std::size_t> beta = std::nullopt);

GdsBasis gds_from_gram(const ModeGram& gram, std::size_t alpha,
                       std::optional<std::size_t> beta = std::nullopt);

/// Modified Gram-Schmidt with one re-orthogonalization pass. Columns whose
/// residual norm falls below tol * reference_norm are dropped, so the output
/// may have fewer columns than the input. reference_norm defaults to the
/// largest input column norm.
Matrix gram_schmidt(const Matrix& vectors, double tol = kGramSchmidtTolerance,
                    std::optional<double> reference_norm = std::nullopt);

/// orth(D^T U): the subspace expressed in GDS coordinates (ambient dimension
/// equals the GDS width). The drop tolerance is relative to the unit norm of
/// the unprojected basis vectors. Throws NumericalError when every vector is
/// dropped.
Subspace project_onto_gds(const GdsBasis& gds, const Subspace& subspace,
                          double tol = kGramSchmidtTolerance);

}  // namespace ngds
