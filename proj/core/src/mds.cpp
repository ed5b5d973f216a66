#include "ngds/mds.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "ngds/error.hpp"

namespace ngds {

namespace {
constexpr double kSymmetryTolerance = 1e-9;
}

MdsResult classical_mds(const Matrix& d, std::size_t k) {
  if (k < 1) throw InvalidArgument("MDS target dimension must be at least 1");
  if (d.rows() != d.cols()) {
    throw DimensionError("distance matrix is " + std::to_string(d.rows()) + "x" +
                         std::to_string(d.cols()) + ", expected square");
  }
  const Eigen::Index n = d.rows();
  if (n == 0) throw InvalidArgument("distance matrix is empty");
  if (!d.allFinite()) throw NumericalError("distance matrix has non-finite entries");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(d(i, i)) > kSymmetryTolerance) {
      throw InvalidArgument("distance matrix diagonal entry " + std::to_string(i) + " is non-zero");
    }
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (std::abs(d(i, j) - d(j, i)) > kSymmetryTolerance) {
        throw InvalidArgument("distance matrix is not symmetric at (" + std::to_string(i) + ", " +
                              std::to_string(j) + ")");
      }
    }
  }

  const Matrix sq = (0.5 * (d + d.transpose())).array().square().matrix();
  const Matrix j = Matrix::Identity(n, n) - Matrix::Constant(n, n, 1.0 / static_cast<double>(n));
  Matrix b = -0.5 * j * sq * j;
  b = 0.5 * (b + b.transpose());

  Eigen::SelfAdjointEigenSolver<Matrix> eig(b);
  if (eig.info() != Eigen::Success) throw NumericalError("MDS eigen-decomposition failed");
  // Ascending from the solver; walk from the top.
  const Vector& values = eig.eigenvalues();
  const Matrix& vectors = eig.eigenvectors();

  MdsResult out;
  const auto kk = static_cast<Eigen::Index>(k);
  out.coordinates = Matrix::Zero(n, kk);
  out.eigenvalues = Vector::Zero(kk);
  for (Eigen::Index c = 0; c < kk && c < n; ++c) {
    const Eigen::Index src = n - 1 - c;
    const double lambda = values(src);
    out.eigenvalues(c) = lambda;
    if (lambda <= 0.0) continue;
    Vector v = vectors.col(src);
    Eigen::Index pivot = 0;
    for (Eigen::Index i = 1; i < n; ++i) {
      if (std::abs(v(i)) > std::abs(v(pivot))) pivot = i;
    }
    if (v(pivot) < 0.0) v = -v;
    out.coordinates.col(c) = v * std::sqrt(lambda);
  }

  const double total = values.cwiseAbs().sum();
  double negative = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (values(i) < 0.0) negative -= values(i);
  }
  out.negative_mass = total > 0.0 ? negative / total : 0.0;
  return out;
}

}  // namespace ngds
