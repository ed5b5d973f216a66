#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ngds/config.hpp"
#include "ngds/dataset.hpp"
#include "ngds/fisher.hpp"
#include "ngds/gds.hpp"
#include "ngds/manifold.hpp"

namespace ngds {

/// One evaluated candidate of the GDS dimension search: the full per-mode
/// (alpha, beta) assignment and its n-mode Fisher score. `mode` is the mode
/// being swept (coordinate search) or 0 (exhaustive search).
struct SearchStep {
  int mode = 0;
  std::size_t round = 0;
  std::vector<std::size_t> alpha;
  std::vector<std::size_t> beta;
  double score = 0.0;
  FisherStatus status = FisherStatus::finite;
  bool valid = true;  // false when a projection collapsed
};

struct GdsSelection {
  std::vector<std::size_t> alpha;  // aligned with the resolved modes
  std::vector<std::size_t> beta;
  NModeFisher fisher;              // at the selected dimensions
  std::vector<SearchStep> trace;
};

struct TrainedModel {
  PipelineConfig config;               // modes resolved, never empty
  std::vector<std::size_t> tensor_dims;
  std::vector<std::size_t> ambient_dims;  // rows of each used mode matrix
  std::vector<std::size_t> mode_dims;     // raw subspace dims
  std::vector<std::size_t> point_dims;    // dims of stored (projected) parts
  std::vector<std::size_t> angle_counts;  // 0 = min dims per pair
  std::vector<GdsBasis> gds;              // empty for msm and pgm
  WeightVector weights;
  std::vector<ProductPoint> references;   // labeled training points
  std::vector<ProductPoint> class_means;  // per-class Karcher means
  std::vector<std::string> class_names;
  NModeFisher fisher_raw;        // before any GDS projection
  NModeFisher fisher_projected;  // on the stored points
  std::vector<SearchStep> search_trace;

  std::size_t class_count() const noexcept { return class_names.size(); }
  bool has_gds() const noexcept { return !gds.empty(); }
};

/// Modes to use for tensors of `order`: config.modes, or all modes.
std::vector<int> resolve_modes(const PipelineConfig& config, std::size_t order);

/// Raw product point: per used mode, the leading `mode_dims[i]`
/// left-singular vectors of the mode matrix. No GDS is applied.
ProductPoint extract_sample_point(const Sample& sample, std::span<const int> modes,
                                  std::span<const std::size_t> mode_dims);
ProductPoint extract_sample_point(const DenseTensor& tensor, const PipelineConfig& config);

/// Median (lower) of the per-sample energy-selected dimensions of one mode.
std::size_t median_energy_dim(std::span<const Sample> samples, int mode, double mu);

/// Argmax of the n-mode Fisher score over per-mode GDS eigenvector ranges.
/// `train_points` are raw labeled points with one part per spectrum.
GdsSelection optimize_gds_dims(std::span<const GramSpectrum> spectra,
                               std::span<const ProductPoint> train_points,
                               std::size_t class_count, const PipelineConfig& config);

/// Per-mode Fisher reports of labeled points and their n-mode aggregate.
NModeFisher points_fisher(std::span<const ProductPoint> points, std::size_t class_count,
                          std::span<const int> modes, const KarcherOptions& options);

TrainedModel fit(const LabeledSet& dataset, const PipelineConfig& config);

/// Point as stored in the model: extracted, projected onto the GDS when
/// present, truncated to the model's point dims.
ProductPoint embed(const TrainedModel& model, const Sample& sample);

struct Classification {
  int label = -1;
  std::vector<double> class_scores;  // per class, min distance
};

Classification classify_point(const TrainedModel& model, const ProductPoint& point);
Classification classify(const TrainedModel& model, const Sample& sample);
Classification classify(const TrainedModel& model, const DenseTensor& tensor);

struct Metrics {
  std::size_t total = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
  std::vector<double> recall;                  // per class, NaN without samples
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
  double mean_margin = 0.0;  // nearest other class minus true class distance
  std::vector<int> predictions;
};

Metrics evaluate(const TrainedModel& model, const LabeledSet& dataset);

/// Pairwise weighted distances between the embedded samples.
Matrix dataset_distances(const TrainedModel& model, const LabeledSet& dataset);

}  // namespace ngds
