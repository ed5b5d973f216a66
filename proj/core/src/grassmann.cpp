#include "ngds/grassmann.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ngds/error.hpp"

namespace ngds {

namespace {

Matrix orthonormalize(const Matrix& m) {
  Eigen::HouseholderQR<Matrix> qr(m);
  return qr.householderQ() * Matrix::Identity(m.rows(), m.cols());
}

double sum_squared_distances(const Subspace& x, std::span<const Subspace> subspaces) {
  double total = 0.0;
  for (const auto& s : subspaces) {
    const double d = geodesic_distance(x, s);
    total += d * d;
  }
  return total;
}

}  // namespace

Matrix grassmann_log(const Subspace& base, const Subspace& target) {
  if (base.ambient_dim() != target.ambient_dim() || base.dim() != target.dim()) {
    throw DimensionError("log map needs subspaces of equal ambient and subspace dimension");
  }
  const Matrix& x = base.basis();
  const Matrix& y = target.basis();
  // Align both bases with the principal vectors: (X U)^T (Y V) = diag(c).
  Eigen::JacobiSVD<Matrix> svd(x.transpose() * y, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix xu = x * svd.matrixU();
  const Matrix yv = y * svd.matrixV();
  const Vector& c = svd.singularValues();

  Matrix aligned_tangent(x.rows(), x.cols());
  for (Eigen::Index k = 0; k < x.cols(); ++k) {
    const Vector residual = yv.col(k) - c(k) * xu.col(k);
    const double s = residual.norm();
    if (s < 1e-15) {
      aligned_tangent.col(k).setZero();
      continue;
    }
    // residual is orthogonal to span(X); re-project to remove drift.
    Vector direction = residual - x * (x.transpose() * residual);
    direction.normalize();
    aligned_tangent.col(k) = std::atan2(s, c(k)) * direction;
  }
  return aligned_tangent * svd.matrixU().transpose();
}

Subspace grassmann_exp(const Subspace& base, const Matrix& tangent) {
  const Matrix& x = base.basis();
  if (tangent.rows() != x.rows() || tangent.cols() != x.cols()) {
    throw DimensionError("tangent shape does not match the base point");
  }
  Eigen::JacobiSVD<Matrix> svd(tangent, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Matrix& u = svd.matrixU();
  const Matrix& v = svd.matrixV();
  const Vector& s = svd.singularValues();
  const Matrix moved = x * v * s.array().cos().matrix().asDiagonal() * v.transpose() +
                       u * s.array().sin().matrix().asDiagonal() * v.transpose();
  return Subspace(orthonormalize(moved));
}

Subspace projector_mean(std::span<const Subspace> subspaces) {
  if (subspaces.empty()) throw InvalidArgument("mean of an empty set of subspaces");
  const auto& first = subspaces.front();
  const auto n = static_cast<Eigen::Index>(first.ambient_dim());
  Matrix sum = Matrix::Zero(n, n);
  for (const auto& s : subspaces) {
    if (s.ambient_dim() != first.ambient_dim() || s.dim() != first.dim()) {
      throw DimensionError("mean needs subspaces of equal ambient and subspace dimension");
    }
    sum.noalias() += s.basis() * s.basis().transpose();
  }
  sum /= static_cast<double>(subspaces.size());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (sum + sum.transpose()));
  if (solver.info() != Eigen::Success) throw NumericalError("projector mean failed");
  // Eigenvalues come back ascending; keep the top-k block, largest first.
  const auto k = static_cast<Eigen::Index>(first.dim());
  return Subspace(solver.eigenvectors().rightCols(k).rowwise().reverse());
}

KarcherResult karcher_mean(std::span<const Subspace> subspaces, const KarcherOptions& options) {
  if (subspaces.empty()) throw InvalidArgument("Karcher mean of an empty set of subspaces");
  if (subspaces.size() == 1) return {subspaces.front(), true, 0, 0.0};

  Subspace current = projector_mean(subspaces);
  Subspace best = current;
  double best_cost = sum_squared_distances(current, subspaces);
  double tangent_norm = std::numeric_limits<double>::infinity();
  const double inv_count = 1.0 / static_cast<double>(subspaces.size());

  for (std::size_t iter = 0; iter < options.max_iter; ++iter) {
    Matrix tangent = Matrix::Zero(current.basis().rows(), current.basis().cols());
    for (const auto& s : subspaces) tangent += grassmann_log(current, s);
    tangent *= inv_count;
    tangent_norm = tangent.norm();
    if (tangent_norm < options.tol) return {best, true, iter, tangent_norm};

    current = grassmann_exp(current, tangent);
    const double cost = sum_squared_distances(current, subspaces);
    if (cost < best_cost) {
      best_cost = cost;
      best = current;
    }
  }
  return {best, false, options.max_iter, tangent_norm};
}

}  // namespace ngds
