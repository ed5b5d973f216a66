#include "ngds/tensor.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "ngds/error.hpp"

namespace ngds {

namespace {

void check_mode(int mode, std::size_t order) {
  if (mode < 1 || static_cast<std::size_t>(mode) > order) {
    throw InvalidArgument("mode " + std::to_string(mode) + " out of range 1.." +
                          std::to_string(order));
  }
}

// Column strides of the mode-k unfolding: J_m = prod_{l<m, l!=k} I_l.
std::vector<std::size_t> unfolding_strides(std::span<const std::size_t> dims, std::size_t k) {
  std::vector<std::size_t> strides(dims.size(), 0);
  std::size_t running = 1;
  for (std::size_t m = 0; m < dims.size(); ++m) {
    if (m == k) continue;
    strides[m] = running;
    running *= dims[m];
  }
  return strides;
}

// Visits every element in canonical order, calling fn(linear, row, col) with
// the mode-k row and column of that element.
template <typename Fn>
void for_each_unfolded(std::span<const std::size_t> dims, std::size_t k, Fn&& fn) {
  const auto strides = unfolding_strides(dims, k);
  const std::size_t n = dims.size();
  const std::size_t total = element_count(dims);
  std::vector<std::size_t> index(n, 0);
  std::size_t col = 0;
  for (std::size_t linear = 0; linear < total; ++linear) {
    fn(linear, index[k], col);
    // Increment the multi-index, last index fastest, keeping col in sync.
    for (std::size_t m = n; m-- > 0;) {
      if (++index[m] < dims[m]) {
        col += strides[m];
        break;
      }
      col -= strides[m] * (dims[m] - 1);
      index[m] = 0;
    }
  }
}

void validate_dims(const std::vector<std::size_t>& dims) {
  if (dims.size() < 2 || dims.size() > kMaxTensorOrder) {
    throw InvalidArgument("tensor order must be in 2.." + std::to_string(kMaxTensorOrder) +
                          ", got " + std::to_string(dims.size()));
  }
  for (auto d : dims) {
    if (d == 0) throw InvalidArgument("tensor extents must be positive");
  }
}

}  // namespace

std::size_t element_count(std::span<const std::size_t> dims) {
  std::size_t total = 1;
  for (auto d : dims) {
    if (d != 0 && total > std::numeric_limits<std::size_t>::max() / d) {
      throw DimensionError("tensor element count overflows");
    }
    total *= d;
  }
  return total;
}

DenseTensor::DenseTensor(std::vector<std::size_t> dims, std::vector<double> data)
    : dims_(std::move(dims)), data_(std::move(data)) {
  validate_dims(dims_);
  if (data_.size() != element_count(dims_)) {
    throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                         " does not match extents product " +
                         std::to_string(element_count(dims_)));
  }
}

DenseTensor::DenseTensor(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
  validate_dims(dims_);
  data_.assign(element_count(dims_), 0.0);
}

std::size_t DenseTensor::extent(int mode) const {
  check_mode(mode, order());
  return dims_[static_cast<std::size_t>(mode - 1)];
}

std::size_t DenseTensor::offset(std::span<const std::size_t> index) const {
  if (index.size() != dims_.size()) throw InvalidArgument("index arity mismatch");
  std::size_t off = 0;
  for (std::size_t m = 0; m < dims_.size(); ++m) {
    if (index[m] >= dims_[m]) throw InvalidArgument("tensor index out of range");
    off = off * dims_[m] + index[m];
  }
  return off;
}

double DenseTensor::operator()(std::span<const std::size_t> index) const {
  return data_[offset(index)];
}

double& DenseTensor::operator()(std::span<const std::size_t> index) {
  return data_[offset(index)];
}

double DenseTensor::frobenius_norm() const {
  double sum = 0.0;
  for (double v : data_) sum += v * v;
  return std::sqrt(sum);
}

UnfoldedMatrix unfold(const DenseTensor& tensor, int mode) {
  check_mode(mode, tensor.order());
  const auto k = static_cast<std::size_t>(mode - 1);
  const auto& dims = tensor.dims();
  const auto rows = static_cast<Eigen::Index>(dims[k]);
  const auto cols = static_cast<Eigen::Index>(tensor.size() / dims[k]);
  UnfoldedMatrix out{mode, Matrix(rows, cols)};
  const auto data = tensor.data();
  for_each_unfolded(dims, k, [&](std::size_t linear, std::size_t row, std::size_t col) {
    out.values(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = data[linear];
  });
  return out;
}

DenseTensor fold(const UnfoldedMatrix& matrix, std::span<const std::size_t> dims) {
  return fold(matrix.values, matrix.mode, dims);
}

DenseTensor fold(const Matrix& matrix, int mode, std::span<const std::size_t> dims) {
  check_mode(mode, dims.size());
  const auto k = static_cast<std::size_t>(mode - 1);
  const std::size_t total = element_count(dims);
  if (static_cast<std::size_t>(matrix.size()) != total ||
      static_cast<std::size_t>(matrix.rows()) != dims[k]) {
    throw DimensionError("cannot fold a " + std::to_string(matrix.rows()) + "x" +
                         std::to_string(matrix.cols()) + " matrix at mode " +
                         std::to_string(mode) + " into " + std::to_string(total) +
                         " elements");
  }
  DenseTensor out(std::vector<std::size_t>(dims.begin(), dims.end()));
  auto data = out.data();
  for_each_unfolded(dims, k, [&](std::size_t linear, std::size_t row, std::size_t col) {
    data[linear] = matrix(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
  });
  return out;
}

DenseTensor mode_multiply(const DenseTensor& tensor, const Matrix& factor, int mode) {
  const std::size_t extent = tensor.extent(mode);
  if (static_cast<std::size_t>(factor.cols()) != extent || factor.rows() < 1) {
    throw DimensionError("mode-" + std::to_string(mode) + " factor has " +
                         std::to_string(factor.cols()) + " columns, expected " +
                         std::to_string(extent));
  }
  auto dims = tensor.dims();
  dims[static_cast<std::size_t>(mode - 1)] = static_cast<std::size_t>(factor.rows());
  const Matrix product = factor * unfold(tensor, mode).values;
  return fold(product, mode, dims);
}

HosvdDecomposition hosvd(const DenseTensor& tensor) {
  std::vector<Matrix> factors;
  factors.reserve(tensor.order());
  for (int mode = 1; mode <= static_cast<int>(tensor.order()); ++mode) {
    const Matrix x = unfold(tensor, mode).values;
    Eigen::JacobiSVD<Matrix> svd(x, Eigen::ComputeFullU);
    if (svd.info() != Eigen::Success) {
      throw NumericalError("SVD of the mode-" + std::to_string(mode) + " unfolding failed");
    }
    factors.push_back(svd.matrixU());
  }
  DenseTensor core = tensor;
  for (std::size_t k = 0; k < factors.size(); ++k) {
    core = mode_multiply(core, factors[k].transpose(), static_cast<int>(k + 1));
  }
  return {std::move(core), std::move(factors)};
}

DenseTensor reconstruct(const HosvdDecomposition& decomposition) {
  DenseTensor out = decomposition.core;
  for (std::size_t k = 0; k < decomposition.factors.size(); ++k) {
    out = mode_multiply(out, decomposition.factors[k], static_cast<int>(k + 1));
  }
  return out;
}

}  // namespace ngds
