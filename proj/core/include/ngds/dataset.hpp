#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ngds/tensor.hpp"

namespace ngds {

enum class Split { train, test };

std::string_view to_string(Split split);
Split parse_split(std::string_view text);

struct ManifestEntry {
  std::filesystem::path path;  // relative to the manifest's directory
  int label = 0;
  Split split = Split::train;
};

/// Plain-text dataset listing:
///
///   # dims: 12x12x12
///   # classes: walk,run,jump        (optional)
///   samples/c0_s000.nmt,0,train
///
/// Labels must be dense 0..m-1 and paths unique.
struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  std::vector<std::string> class_names;
  std::vector<std::size_t> dims;

  std::size_t class_count() const noexcept { return class_names.size(); }
  std::size_t total() const noexcept { return entries.size(); }
  /// m_j for each class, optionally restricted to one split.
  std::vector<std::size_t> class_counts(std::optional<Split> split = std::nullopt) const;
};

/// Checks dims, label density, path uniqueness and class-name count. Throws
/// FormatError.
void validate(const DatasetManifest& manifest);

DatasetManifest parse_manifest(std::string_view text);
std::string format_manifest(const DatasetManifest& manifest);
DatasetManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

/// One labeled tensor plus any per-mode matrices that replace its
/// unfoldings (precomputed features).
struct Sample {
  DenseTensor tensor;
  int label = -1;
  std::map<int, Matrix> mode_overrides;
};

/// The matrix a pipeline sees for `mode`: the override when present,
/// otherwise the mode unfolding.
Matrix mode_matrix(const Sample& sample, int mode);

/// Row count of mode_matrix(sample, mode) without materializing it.
std::size_t mode_rows(const Sample& sample, int mode);

struct LabeledSet {
  std::vector<Sample> samples;
  std::vector<std::size_t> dims;
  std::vector<std::string> class_names;

  std::size_t class_count() const noexcept { return class_names.size(); }
};

/// Loads the tensors of one split (or all entries). Tensor extents must match
/// the manifest dims; mismatches throw DimensionError naming the file.
LabeledSet load_dataset(const DatasetManifest& manifest, const std::filesystem::path& base_dir,
                        std::optional<Split> split = std::nullopt);

/// Precomputed per-mode features: for each manifest entry `dir/x.nmt`, the
/// matrix file `directory/x.nmt` replaces that entry's mode unfolding.
struct FeatureReplacement {
  int mode = 1;
  std::filesystem::path directory;
  std::optional<std::size_t> rows;  // declared feature dimension
};

/// Attaches replacement matrices to every sample of `dataset`, which must
/// have been loaded from `manifest` with the same split filter. Row counts
/// must equal the declared dimension (or the first file's row count); a
/// mismatch throws DimensionError naming the mode with expected and actual.
void ingest_feature_modes(LabeledSet& dataset, const DatasetManifest& manifest,
                          std::optional<Split> split,
                          std::span<const FeatureReplacement> replacements);

}  // namespace ngds
