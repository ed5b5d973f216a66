#include "ngds/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ngds/error.hpp"
#include "ngds/tensor_io.hpp"

namespace ngds {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

Matrix gaussian(CounterRng& rng, std::size_t rows, std::size_t cols) {
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  // Row-major draw order.
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.normal();
  }
  return m;
}

Matrix thin_q(const Matrix& m) {
  Eigen::HouseholderQR<Matrix> qr(m);
  return qr.householderQ() * Matrix::Identity(m.rows(), m.cols());
}

PlantedMode plant_mode(CounterRng& rng, std::size_t extent, const SynthSpec& spec) {
  const std::size_t total = spec.shared_dim + spec.classes * spec.class_dim;
  const Matrix raw = gaussian(rng, extent, total);
  const auto s = static_cast<Eigen::Index>(spec.shared_dim);
  const auto c = static_cast<Eigen::Index>(spec.class_dim);
  PlantedMode out;
  if (total <= extent) {
    // Room for every block: all mutually orthogonal.
    const Matrix q = thin_q(raw);
    out.shared = q.leftCols(s);
    for (std::size_t j = 0; j < spec.classes; ++j) {
      out.class_blocks.push_back(q.middleCols(s + static_cast<Eigen::Index>(j) * c, c));
    }
    return out;
  }
  // Otherwise class blocks are only orthogonal to the shared block.
  out.shared = s > 0 ? thin_q(raw.leftCols(s)) : Matrix(static_cast<Eigen::Index>(extent), 0);
  for (std::size_t j = 0; j < spec.classes; ++j) {
    Matrix joint(static_cast<Eigen::Index>(extent), s + c);
    joint << out.shared, raw.middleCols(s + static_cast<Eigen::Index>(j) * c, c);
    out.class_blocks.push_back(thin_q(joint).rightCols(c));
  }
  return out;
}

// Tilts an orthonormal basis by angles of roughly `scale` radians toward
// random directions in its orthogonal complement.
Matrix perturb(CounterRng& rng, const Matrix& basis, double scale) {
  const auto extent = basis.rows();
  const auto r = basis.cols();
  Matrix noise = gaussian(rng, static_cast<std::size_t>(extent), static_cast<std::size_t>(r));
  if (extent == r || scale == 0.0) return basis;
  noise -= basis * (basis.transpose() * noise);
  noise /= std::sqrt(static_cast<double>(extent - r));
  return thin_q(basis + scale * noise);
}

std::string sample_name(std::size_t label, std::size_t index) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "samples/c%zu_s%03zu.nmt", label, index);
  return buf;
}

}  // namespace

std::uint64_t CounterRng::mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t CounterRng::next_u64() noexcept { return mix64(seed_ + (++counter_) * kGolden); }

double CounterRng::uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::normal() noexcept {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void validate(const SynthSpec& spec) {
  if (spec.classes < 2) throw InvalidArgument("synthetic spec needs at least 2 classes");
  if (spec.samples_per_class < 1) throw InvalidArgument("synthetic spec needs samples per class");
  if (spec.dims.size() < 2 || spec.dims.size() > kMaxTensorOrder) {
    throw InvalidArgument("synthetic dims must list 2.." + std::to_string(kMaxTensorOrder) + " extents");
  }
  if (spec.class_dim < 1) throw InvalidArgument("class_dim must be at least 1");
  for (auto d : spec.dims) {
    if (spec.shared_dim + spec.class_dim > d) {
      throw InvalidArgument("shared_dim + class_dim exceeds extent " + std::to_string(d));
    }
  }
  if (!(spec.within_noise >= 0.0)) throw InvalidArgument("within_noise must be >= 0");
  if (!(spec.shared_gain > 0.0)) throw InvalidArgument("shared_gain must be positive");
  if (!(spec.train_fraction > 0.0 && spec.train_fraction <= 1.0)) {
    throw InvalidArgument("train_fraction must lie in (0, 1]");
  }
}

LabeledSet SyntheticDataset::split(Split which) const {
  LabeledSet out;
  out.dims = data.dims;
  out.class_names = data.class_names;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    if (manifest.entries[i].split == which) out.samples.push_back(data.samples[i]);
  }
  return out;
}

SyntheticDataset generate_synthetic(const SynthSpec& spec) {
  validate(spec);
  CounterRng rng(spec.seed);
  const std::size_t n = spec.dims.size();
  const std::size_t rank = spec.shared_dim + spec.class_dim;

  SyntheticDataset out;
  for (std::size_t k = 0; k < n; ++k) out.planted.push_back(plant_mode(rng, spec.dims[k], spec));

  out.data.dims = spec.dims;
  out.manifest.dims = spec.dims;
  for (std::size_t j = 0; j < spec.classes; ++j) {
    out.data.class_names.push_back("c" + std::to_string(j));
  }
  out.manifest.class_names = out.data.class_names;

  const auto train_count = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(spec.train_fraction *
                                              static_cast<double>(spec.samples_per_class))));

  const std::vector<std::size_t> core_dims(n, rank);
  for (std::size_t j = 0; j < spec.classes; ++j) {
    for (std::size_t i = 0; i < spec.samples_per_class; ++i) {
      std::vector<Matrix> bases;
      for (std::size_t k = 0; k < n; ++k) {
        const auto& planted = out.planted[k];
        Matrix block(static_cast<Eigen::Index>(spec.dims[k]), static_cast<Eigen::Index>(rank));
        block << planted.shared, planted.class_blocks[j];
        bases.push_back(perturb(rng, block, spec.within_noise));
      }
      DenseTensor core(core_dims);
      std::vector<std::size_t> index(n, 0);
      for (auto& v : core.data()) {
        double gain = 1.0;
        for (std::size_t k = 0; k < n; ++k) {
          if (index[k] < spec.shared_dim) gain *= spec.shared_gain;
        }
        v = gain * rng.normal();
        for (std::size_t k = n; k-- > 0;) {
          if (++index[k] < rank) break;
          index[k] = 0;
        }
      }
      DenseTensor sample = core;
      for (std::size_t k = 0; k < n; ++k) {
        sample = mode_multiply(sample, bases[k], static_cast<int>(k + 1));
      }
      out.data.samples.push_back(Sample{std::move(sample), static_cast<int>(j), {}});
      out.manifest.entries.push_back(ManifestEntry{sample_name(j, i), static_cast<int>(j),
                                                   i < train_count ? Split::train : Split::test});
    }
  }
  return out;
}

void write_synthetic(const std::filesystem::path& directory, const SyntheticDataset& dataset) {
  std::filesystem::create_directories(directory / "samples");
  for (std::size_t i = 0; i < dataset.data.samples.size(); ++i) {
    write_tensor(directory / dataset.manifest.entries[i].path, dataset.data.samples[i].tensor);
  }
  write_manifest(directory / "manifest.txt", dataset.manifest);
}

}  // namespace ngds
