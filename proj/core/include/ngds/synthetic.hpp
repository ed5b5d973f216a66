#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ngds/dataset.hpp"

namespace ngds {

/// Counter-based SplitMix64 stream: the i-th 64-bit draw is
/// mix64(seed + (i + 1) * 0x9E3779B97F4A7C15), with Steele-Lea-Flood's
/// mix64 finalizer. Uniforms take the top 53 bits; normals use the
/// Box-Muller cosine branch on two consecutive uniforms (u1 mapped to
/// (0, 1]). The stream is fully specified so any implementation reproduces
/// the same datasets.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) noexcept : seed_(seed) {}

  static std::uint64_t mix64(std::uint64_t z) noexcept;

  std::uint64_t next_u64() noexcept;
  double uniform() noexcept;  // [0, 1)
  double normal() noexcept;
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

/// Desk-scale stand-in for a tensor action dataset. Each mode k carries one
/// shared orthonormal block (shared_dim columns) common to all classes and
/// one class block (class_dim columns) per class. A sample of class j is
///
///   G x_1 B_1 x_2 B_2 ... x_n B_n
///
/// where B_k spans [shared_k, class_kj] tilted by random angles of scale
/// within_noise, and G is a Gaussian core whose entries touching a shared
/// index in mode k are scaled by shared_gain.
struct SynthSpec {
  std::size_t classes = 4;
  std::size_t samples_per_class = 10;
  std::vector<std::size_t> dims{12, 12, 12};
  std::size_t shared_dim = 1;
  std::size_t class_dim = 2;
  double within_noise = 0.15;
  double shared_gain = 2.0;
  double train_fraction = 0.7;
  std::uint64_t seed = 7;
};

void validate(const SynthSpec& spec);

struct PlantedMode {
  Matrix shared;                    // I_k x shared_dim (may have 0 columns)
  std::vector<Matrix> class_blocks; // one I_k x class_dim block per class
};

struct SyntheticDataset {
  LabeledSet data;           // all samples, class-major order
  DatasetManifest manifest;  // paths samples/c<j>_s<i>.nmt
  std::vector<PlantedMode> planted;

  /// Samples of one split, in manifest order.
  LabeledSet split(Split which) const;
};

/// Per class, the first round(train_fraction * samples_per_class) samples
/// (at least one) are train, the rest test.
SyntheticDataset generate_synthetic(const SynthSpec& spec);

/// Writes every tensor plus manifest.txt under `directory`.
void write_synthetic(const std::filesystem::path& directory, const SyntheticDataset& dataset);

}  // namespace ngds
