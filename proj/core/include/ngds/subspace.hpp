#pragma once

#include <cstddef>
#include <optional>
#include <variant>

#include "ngds/tensor.hpp"

namespace ngds {

/// A point on a Grassmann manifold, held as a column-orthonormal basis
/// (ambient_dim x dim). Construction checks orthonormality to 1e-8.
class Subspace {
 public:
  explicit Subspace(Matrix basis);

  /// Orthonormalizes the columns of `vectors` first (thin QR). Throws if the
  /// columns are rank deficient.
  static Subspace from_span(const Matrix& vectors);

  std::size_t ambient_dim() const noexcept { return static_cast<std::size_t>(basis_.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(basis_.cols()); }
  const Matrix& basis() const noexcept { return basis_; }

  /// First `k` basis columns.
  Subspace leading(std::size_t k) const;

 private:
  Matrix basis_;
};

/// Eigenvalues of a non-centered autocorrelation, non-increasing.
struct SingularSpectrum {
  Vector values;
};

struct AngleSpectrum {
  Vector correlations;  // non-increasing, in [0, 1]
  Vector angles;        // non-decreasing, in [0, pi/2]
  std::size_t count() const noexcept { return static_cast<std::size_t>(angles.size()); }
};

struct FixedDim {
  std::size_t k;
};
struct EnergyFraction {
  double mu;
};
using DimPolicy = std::variant<FixedDim, EnergyFraction>;

/// Relative threshold below which a singular value counts as zero.
inline constexpr double kRankTolerance = 1e-10;

/// Smallest K whose cumulative energy ratio reaches mu. A slack of 1e-12
/// absorbs rounding in the cumulative sum.
std::size_t select_dim(const SingularSpectrum& spectrum, double mu);

/// Autocorrelation spectrum of a raw (uncentered) matrix: squared singular
/// values, truncated at the numerical rank.
SingularSpectrum autocorrelation_spectrum(const Matrix& matrix);

std::size_t numerical_rank(const Matrix& matrix);

/// Leading left-singular vectors of the uncentered matrix.
Subspace basis_from_unfolding(const Matrix& matrix, const DimPolicy& policy);
Subspace basis_from_unfolding(const UnfoldedMatrix& matrix, const DimPolicy& policy);

/// Canonical correlations and principal angles. Small angles are taken from
/// sines and large ones from cosines so both ends stay accurate.
AngleSpectrum principal_angles(const Subspace& p, const Subspace& q,
                               std::optional<std::size_t> count = std::nullopt);

double mean_canonical_angle(const Subspace& p, const Subspace& q,
                            std::optional<std::size_t> count = std::nullopt);

/// sqrt of the sum of squared principal angles over min(dim p, dim q).
double geodesic_distance(const Subspace& p, const Subspace& q);

/// Orthogonal projector U U^T.
Matrix projector(const Subspace& p);

/// Frobenius norm of the difference of the two projectors.
double projector_distance(const Subspace& p, const Subspace& q);

}  // namespace ngds
