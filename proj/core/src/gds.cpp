#include "ngds/gds.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "ngds/error.hpp"

namespace ngds {

ModeGram mode_gram(std::span<const Subspace> class_subspaces, int mode) {
  if (class_subspaces.size() < 2) {
    throw InvalidArgument("mode Gram matrix needs at least 2 class subspaces");
  }
  const auto ambient = static_cast<Eigen::Index>(class_subspaces.front().ambient_dim());
  Matrix sum = Matrix::Zero(ambient, ambient);
  for (const auto& s : class_subspaces) {
    if (static_cast<Eigen::Index>(s.ambient_dim()) != ambient) {
      throw DimensionError("class subspaces of mode " + std::to_string(mode) +
                           " have different ambient dimensions");
    }
    sum.noalias() += s.basis() * s.basis().transpose();
  }
  sum /= static_cast<double>(class_subspaces.size());
  // Symmetrize away rounding.
  Matrix g = 0.5 * (sum + sum.transpose());
  return {mode, std::move(g), class_subspaces.size()};
}

GramSpectrum decompose(const ModeGram& gram) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(gram.matrix);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigen-decomposition of the mode-" + std::to_string(gram.mode) +
                         " Gram matrix failed");
  }
  const Vector& values = solver.eigenvalues();
  const Matrix& vectors = solver.eigenvectors();
  const auto n = values.size();

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return values(a) > values(b); });

  GramSpectrum out;
  out.mode = gram.mode;
  out.eigvals.resize(n);
  out.eigvecs.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto src = order[static_cast<std::size_t>(i)];
    out.eigvals(i) = values(src);
    Vector v = vectors.col(src);
    for (Eigen::Index r = 0; r < n; ++r) {
      if (std::abs(v(r)) > 1e-12) {
        if (v(r) < 0) v = -v;
        break;
      }
    }
    out.eigvecs.col(i) = v;
  }
  out.rank = static_cast<std::size_t>((out.eigvals.array() > kGramRankTolerance).count());
  return out;
}

GdsBasis select_gds(const GramSpectrum& spectrum, std::size_t alpha,
                    std::optional<std::size_t> beta) {
  const std::size_t last = beta.value_or(spectrum.rank);
  if (alpha < 1) throw InvalidArgument("GDS alpha is 1-based and must be >= 1");
  if (alpha > spectrum.rank) {
    throw InvalidArgument("GDS alpha " + std::to_string(alpha) + " exceeds Gram rank " +
                          std::to_string(spectrum.rank));
  }
  if (last > spectrum.rank) {
    throw InvalidArgument("GDS beta " + std::to_string(last) + " exceeds Gram rank " +
                          std::to_string(spectrum.rank));
  }
  if (alpha > last) {
    throw InvalidArgument("GDS alpha " + std::to_string(alpha) + " exceeds beta " +
                          std::to_string(last));
  }
  GdsBasis out;
  out.mode = spectrum.mode;
  out.eigvecs = spectrum.eigvecs;
  out.eigvals = spectrum.eigvals;
  out.alpha = alpha;
  out.beta = last;
  out.rank = spectrum.rank;
  out.basis = spectrum.eigvecs.middleCols(static_cast<Eigen::Index>(alpha - 1),
                                          static_cast<Eigen::Index>(last - alpha + 1));
  return out;
}

GdsBasis gds_from_gram(const ModeGram& gram, std::size_t alpha, std::optional<std::size_t> beta) {
  return select_gds(decompose(gram), alpha, beta);
}

Matrix gram_schmidt(const Matrix& vectors, double tol, std::optional<double> reference_norm) {
  const auto rows = vectors.rows();
  double reference = 0.0;
  if (reference_norm) {
    reference = *reference_norm;
  } else {
    for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
      reference = std::max(reference, vectors.col(c).norm());
    }
  }
  Matrix out(rows, vectors.cols());
  Eigen::Index kept = 0;
  if (!(reference > 0.0)) return out.leftCols(0);
  const double threshold = tol * reference;
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    Vector v = vectors.col(c);
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index j = 0; j < kept; ++j) {
        v -= out.col(j).dot(v) * out.col(j);
      }
    }
    const double norm = v.norm();
    if (norm > threshold) {
      out.col(kept++) = v / norm;
    }
  }
  return out.leftCols(kept);
}

Subspace project_onto_gds(const GdsBasis& gds, const Subspace& subspace, double tol) {
  if (static_cast<Eigen::Index>(subspace.ambient_dim()) != gds.basis.rows()) {
    throw DimensionError("subspace ambient dimension " + std::to_string(subspace.ambient_dim()) +
                         " does not match mode-" + std::to_string(gds.mode) + " GDS ambient " +
                         std::to_string(gds.basis.rows()));
  }
  const Matrix coords = gds.basis.transpose() * subspace.basis();
  Matrix q = gram_schmidt(coords, tol, 1.0);
  if (q.cols() == 0) {
    throw NumericalError("projection onto the mode-" + std::to_string(gds.mode) +
                         " GDS collapsed: subspace is orthogonal to the GDS");
  }
  return Subspace(std::move(q));
}

}  // namespace ngds
