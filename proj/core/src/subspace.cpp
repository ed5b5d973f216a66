#include "ngds/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ngds/error.hpp"

namespace ngds {

namespace {

constexpr double kOrthonormalityTolerance = 1e-8;

void check_ambient(const Subspace& p, const Subspace& q) {
  if (p.ambient_dim() != q.ambient_dim()) {
    throw DimensionError("ambient dimension mismatch: " + std::to_string(p.ambient_dim()) +
                         " vs " + std::to_string(q.ambient_dim()));
  }
}

}  // namespace

Subspace::Subspace(Matrix basis) : basis_(std::move(basis)) {
  if (basis_.cols() < 1 || basis_.rows() < basis_.cols()) {
    throw DimensionError("subspace basis must be ambient x k with 1 <= k <= ambient, got " +
                         std::to_string(basis_.rows()) + "x" + std::to_string(basis_.cols()));
  }
  const Matrix gram = basis_.transpose() * basis_;
  const double err =
      (gram - Matrix::Identity(basis_.cols(), basis_.cols())).cwiseAbs().maxCoeff();
  if (!(err <= kOrthonormalityTolerance)) {
    throw InvalidArgument("subspace basis is not column-orthonormal (max error " +
                          std::to_string(err) + ")");
  }
}

Subspace Subspace::from_span(const Matrix& vectors) {
  if (vectors.cols() < 1) throw DimensionError("cannot span an empty set of vectors");
  if (numerical_rank(vectors) < static_cast<std::size_t>(vectors.cols())) {
    throw NumericalError("vectors are linearly dependent");
  }
  Eigen::HouseholderQR<Matrix> qr(vectors);
  Matrix q = qr.householderQ() * Matrix::Identity(vectors.rows(), vectors.cols());
  return Subspace(std::move(q));
}

Subspace Subspace::leading(std::size_t k) const {
  if (k < 1 || k > dim()) throw InvalidArgument("leading(k) out of range");
  return Subspace(basis_.leftCols(static_cast<Eigen::Index>(k)));
}

std::size_t select_dim(const SingularSpectrum& spectrum, double mu) {
  if (!(mu > 0.0 && mu <= 1.0)) throw InvalidArgument("energy fraction must lie in (0, 1]");
  const auto& lambda = spectrum.values;
  if (lambda.size() == 0) throw NumericalError("empty spectrum");
  const double total = lambda.sum();
  if (!(total > 0.0)) throw NumericalError("spectrum has non-positive total energy");
  double cumulative = 0.0;
  for (Eigen::Index k = 0; k < lambda.size(); ++k) {
    cumulative += lambda(k);
    if (cumulative / total >= mu - 1e-12) return static_cast<std::size_t>(k + 1);
  }
  return static_cast<std::size_t>(lambda.size());
}

std::size_t numerical_rank(const Matrix& matrix) {
  if (matrix.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(matrix);
  const Vector& s = svd.singularValues();
  if (s.size() == 0 || !(s(0) > 0.0)) return 0;
  const double cutoff = kRankTolerance * s(0);
  return static_cast<std::size_t>((s.array() > cutoff).count());
}

SingularSpectrum autocorrelation_spectrum(const Matrix& matrix) {
  Eigen::JacobiSVD<Matrix> svd(matrix);
  const Vector& s = svd.singularValues();
  if (s.size() == 0 || !(s(0) > 0.0)) return {Vector()};
  const double cutoff = kRankTolerance * s(0);
  const auto rank = (s.array() > cutoff).count();
  return {s.head(rank).array().square().matrix()};
}

Subspace basis_from_unfolding(const Matrix& matrix, const DimPolicy& policy) {
  // Thin U suffices: k never exceeds the numerical rank <= min(rows, cols).
  Eigen::JacobiSVD<Matrix> svd(matrix, Eigen::ComputeThinU);
  const Vector& s = svd.singularValues();
  if (s.size() == 0 || !(s(0) > 0.0)) {
    throw NumericalError("cannot extract a subspace from an all-zero matrix");
  }
  const double cutoff = kRankTolerance * s(0);
  const auto rank = static_cast<std::size_t>((s.array() > cutoff).count());

  std::size_t k = 0;
  if (const auto* fixed = std::get_if<FixedDim>(&policy)) {
    k = fixed->k;
    if (k < 1) throw InvalidArgument("subspace dimension must be at least 1");
    if (k > rank) {
      throw NumericalError("requested subspace dimension " + std::to_string(k) +
                           " exceeds numerical rank " + std::to_string(rank));
    }
  } else {
    const auto mu = std::get<EnergyFraction>(policy).mu;
    const auto energies =
        SingularSpectrum{s.head(static_cast<Eigen::Index>(rank)).array().square().matrix()};
    k = select_dim(energies, mu);
  }
  return Subspace(svd.matrixU().leftCols(static_cast<Eigen::Index>(k)));
}

Subspace basis_from_unfolding(const UnfoldedMatrix& matrix, const DimPolicy& policy) {
  return basis_from_unfolding(matrix.values, policy);
}

AngleSpectrum principal_angles(const Subspace& p, const Subspace& q,
                               std::optional<std::size_t> count) {
  check_ambient(p, q);
  // Keep the wider basis first so the residual below has exactly one sine
  // per principal angle.
  const bool swap = p.dim() < q.dim();
  const Matrix& wide = swap ? q.basis() : p.basis();
  const Matrix& narrow = swap ? p.basis() : q.basis();
  const auto full = static_cast<Eigen::Index>(narrow.cols());
  const std::size_t k = count.value_or(static_cast<std::size_t>(full));
  if (k < 1 || k > static_cast<std::size_t>(full)) {
    throw InvalidArgument("angle count " + std::to_string(k) + " exceeds min subspace dim " +
                          std::to_string(full));
  }

  const Matrix cross = wide.transpose() * narrow;
  Eigen::JacobiSVD<Matrix> cos_svd(cross);
  Vector cosines = cos_svd.singularValues().cwiseMax(0.0).cwiseMin(1.0);

  const Matrix residual = narrow - wide * cross;
  Eigen::JacobiSVD<Matrix> sin_svd(residual);
  // Ascending sines pair with descending cosines.
  Vector sines = sin_svd.singularValues().reverse().cwiseMax(0.0).cwiseMin(1.0);

  AngleSpectrum out;
  out.correlations = cosines.head(static_cast<Eigen::Index>(k));
  out.angles.resize(static_cast<Eigen::Index>(k));
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(k); ++i) {
    const double c = cosines(i);
    const double s = sines(i);
    out.angles(i) = (s * s < 0.5) ? std::asin(s) : std::acos(c);
  }
  // Enforce monotone output against rounding at the asin/acos switch.
  for (Eigen::Index i = 1; i < out.angles.size(); ++i) {
    out.angles(i) = std::max(out.angles(i), out.angles(i - 1));
  }
  return out;
}

double mean_canonical_angle(const Subspace& p, const Subspace& q,
                            std::optional<std::size_t> count) {
  return principal_angles(p, q, count).angles.mean();
}

double geodesic_distance(const Subspace& p, const Subspace& q) {
  return principal_angles(p, q).angles.norm();
}

Matrix projector(const Subspace& p) { return p.basis() * p.basis().transpose(); }

double projector_distance(const Subspace& p, const Subspace& q) {
  check_ambient(p, q);
  return (projector(p) - projector(q)).norm();
}

}  // namespace ngds
