#include "ngds/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ngds/error.hpp"
#include "ngds/parallel.hpp"

namespace ngds {

namespace {

void check_compatible(const ProductPoint& a, const ProductPoint& b, const WeightVector& weights,
                      std::span<const std::size_t> angle_counts) {
  if (a.parts.size() != b.parts.size()) {
    throw DimensionError("product points have " + std::to_string(a.parts.size()) + " and " +
                         std::to_string(b.parts.size()) + " modes");
  }
  if (weights.weights.size() != a.parts.size()) {
    throw DimensionError("weight vector length does not match the mode count");
  }
  if (angle_counts.size() != a.parts.size()) {
    throw DimensionError("angle count vector length does not match the mode count");
  }
}

}  // namespace

WeightVector mode_weights(std::span<const double> scores) {
  if (scores.empty()) throw InvalidArgument("no scores to weight");
  double total = 0.0;
  for (double s : scores) {
    if (!std::isfinite(s)) {
      throw NumericalError("mode weights need finite Fisher scores; resolve degenerate modes first");
    }
    if (s < 0.0) throw InvalidArgument("mode weights need non-negative Fisher scores");
    total += s;
  }
  if (!(total > 0.0)) throw NumericalError("mode weights need a positive total Fisher score");
  WeightVector out;
  out.weights.reserve(scores.size());
  for (double s : scores) out.weights.push_back(s / total);
  return out;
}

WeightVector uniform_weights(std::size_t modes) { return {std::vector<double>(modes, 1.0)}; }

double mode_distance(const Subspace& a, const Subspace& b, std::size_t angle_count,
                     ModeDistance kind) {
  const auto count = angle_count == 0 ? std::nullopt : std::optional<std::size_t>(angle_count);
  const auto spectrum = principal_angles(a, b, count);
  return kind == ModeDistance::mean_angle ? spectrum.angles.mean() : spectrum.angles.norm();
}

double weighted_geodesic(const ProductPoint& a, const ProductPoint& b, const WeightVector& weights,
                         std::span<const std::size_t> angle_counts, ModeDistance kind) {
  check_compatible(a, b, weights, angle_counts);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.parts.size(); ++i) {
    const double term = weights.weights[i] * mode_distance(a.parts[i], b.parts[i], angle_counts[i], kind);
    sum += term * term;
  }
  return std::sqrt(sum);
}

std::vector<std::size_t> clip_angle_counts(const ProductPoint& a, const ProductPoint& b,
                                           std::span<const std::size_t> angle_counts) {
  if (angle_counts.size() != a.parts.size() || a.parts.size() != b.parts.size()) {
    throw DimensionError("angle counts do not match the mode count");
  }
  std::vector<std::size_t> out(angle_counts.begin(), angle_counts.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::size_t limit = std::min(a.parts[i].dim(), b.parts[i].dim());
    if (out[i] == 0 || out[i] > limit) out[i] = limit;
  }
  return out;
}

Matrix pairwise_distances(std::span<const ProductPoint> points, const WeightVector& weights,
                          std::span<const std::size_t> angle_counts, ModeDistance kind) {
  const std::size_t n = points.size();
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  // Row i owns cells (i, j) and (j, i) for j > i.
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto counts = clip_angle_counts(points[i], points[j], angle_counts);
      const double d = weighted_geodesic(points[i], points[j], weights, counts, kind);
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = d;
      out(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = d;
    }
  });
  return out;
}

Matrix cross_distances(std::span<const ProductPoint> queries,
                       std::span<const ProductPoint> references, const WeightVector& weights,
                       std::span<const std::size_t> angle_counts, ModeDistance kind) {
  Matrix out(static_cast<Eigen::Index>(queries.size()), static_cast<Eigen::Index>(references.size()));
  parallel_for(queries.size(), [&](std::size_t i) {
    for (std::size_t j = 0; j < references.size(); ++j) {
      const auto counts = clip_angle_counts(queries[i], references[j], angle_counts);
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          weighted_geodesic(queries[i], references[j], weights, counts, kind);
    }
  });
  return out;
}

}  // namespace ngds
