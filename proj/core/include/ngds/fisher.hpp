#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "ngds/grassmann.hpp"

namespace ngds {

/// How a between/within ratio came out.
enum class FisherStatus {
  finite,         // within > 0
  unbounded,      // within == 0, between > 0: perfectly separable
  indeterminate,  // within == 0 and between == 0: total collapse
};

std::string_view to_string(FisherStatus status);

/// Distances at or below this count as zero when classifying a ratio.
inline constexpr double kFisherZeroTolerance = 1e-12;

/// Between/within separability of one mode. Geodesic distance is the
/// dissimilarity, so a larger score means more separable classes.
struct FisherReport {
  int mode = 1;
  double between = 0.0;
  double within = 0.0;
  double score = 0.0;  // +inf when unbounded, NaN when indeterminate
  FisherStatus status = FisherStatus::finite;

  bool degenerate() const noexcept { return status != FisherStatus::finite; }
};

/// Mode-averaged between and within terms and their ratio. The ratio is taken
/// after averaging, not as a mean of per-mode ratios.
struct NModeFisher {
  std::vector<FisherReport> per_mode;
  double between = 0.0;
  double within = 0.0;
  double score = 0.0;
  FisherStatus status = FisherStatus::finite;

  bool degenerate() const noexcept { return status != FisherStatus::finite; }
};

/// Builds a report from raw distances: class-mean-to-global-mean distances
/// (one per class) and sample-to-class-mean distances (one per sample).
FisherReport fisher_from_distances(int mode, std::span<const double> class_to_global,
                                   std::span<const double> sample_to_class);

/// Fisher score of one mode from per-class lists of equal-dimension
/// subspaces. Class means and the global mean are Karcher means.
FisherReport fisher_mode(int mode, std::span<const std::vector<Subspace>> subspaces_by_class,
                         const KarcherOptions& options = {});

NModeFisher nmode_fisher(std::span<const FisherReport> reports);

}  // namespace ngds
