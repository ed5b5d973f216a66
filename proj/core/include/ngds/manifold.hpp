#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "ngds/subspace.hpp"

namespace ngds {

/// One sample on the product manifold: a subspace per used mode, in the
/// pipeline's mode order.
struct ProductPoint {
  std::vector<Subspace> parts;
  std::optional<int> label;
};

struct WeightVector {
  std::vector<double> weights;
};

/// w_i = F_i / sum F. Scores must be finite and non-negative with a
/// positive sum.
WeightVector mode_weights(std::span<const double> scores);

/// All-ones weights: the plain product-manifold distance.
WeightVector uniform_weights(std::size_t modes);

/// Per-mode angle summary used inside the product distance.
enum class ModeDistance {
  mean_angle,     // mean canonical angle over the first K angles
  full_spectrum,  // sqrt of summed squared angles over the first K angles
};

/// Angle count 0 means "min of the two subspace dimensions".
double mode_distance(const Subspace& a, const Subspace& b, std::size_t angle_count,
                     ModeDistance kind = ModeDistance::mean_angle);

/// rho(a, b) = sqrt(sum_i (w_i * d_i)^2) with d_i the per-mode distance.
double weighted_geodesic(const ProductPoint& a, const ProductPoint& b, const WeightVector& weights,
                         std::span<const std::size_t> angle_counts,
                         ModeDistance kind = ModeDistance::mean_angle);

/// Angle counts clipped to what both points support.
std::vector<std::size_t> clip_angle_counts(const ProductPoint& a, const ProductPoint& b,
                                           std::span<const std::size_t> angle_counts);

/// Symmetric matrix of weighted_geodesic over all pairs, computed in
/// parallel with one writer per cell. Angle counts are clipped per pair.
Matrix pairwise_distances(std::span<const ProductPoint> points, const WeightVector& weights,
                          std::span<const std::size_t> angle_counts,
                          ModeDistance kind = ModeDistance::mean_angle);

/// Distances from each query to each reference, clipped per pair.
Matrix cross_distances(std::span<const ProductPoint> queries,
                       std::span<const ProductPoint> references, const WeightVector& weights,
                       std::span<const std::size_t> angle_counts,
                       ModeDistance kind = ModeDistance::mean_angle);

}  // namespace ngds
