#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace ngds {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr std::size_t kMaxTensorOrder = 8;

/// Dense n-mode array of doubles, 2 <= n <= 8.
///
/// Storage is canonical row-major: the last index varies fastest. Modes are
/// addressed 1-based throughout the library, matching the usual "mode-k"
/// terminology.
class DenseTensor {
 public:
  DenseTensor(std::vector<std::size_t> dims, std::vector<double> data);
  /// Zero-filled tensor.
  explicit DenseTensor(std::vector<std::size_t> dims);

  const std::vector<std::size_t>& dims() const noexcept { return dims_; }
  std::size_t order() const noexcept { return dims_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t extent(int mode) const;

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  double operator()(std::span<const std::size_t> index) const;
  double& operator()(std::span<const std::size_t> index);

  double frobenius_norm() const;

  friend bool operator==(const DenseTensor&, const DenseTensor&) = default;

 private:
  std::size_t offset(std::span<const std::size_t> index) const;

  std::vector<std::size_t> dims_;
  std::vector<double> data_;
};

/// Mode-k unfolding: rows are indexed by mode k, columns by the remaining
/// indices with the lowest remaining mode varying fastest.
struct UnfoldedMatrix {
  int mode = 1;
  Matrix values;
};

struct HosvdDecomposition {
  DenseTensor core;
  std::vector<Matrix> factors;  // one square orthonormal U_k per mode
};

std::size_t element_count(std::span<const std::size_t> dims);

UnfoldedMatrix unfold(const DenseTensor& tensor, int mode);

DenseTensor fold(const UnfoldedMatrix& matrix, std::span<const std::size_t> dims);
DenseTensor fold(const Matrix& matrix, int mode, std::span<const std::size_t> dims);

/// tensor x_mode factor, where factor is J x I_mode. The result has
/// extent J in that mode.
DenseTensor mode_multiply(const DenseTensor& tensor, const Matrix& factor, int mode);

/// Full higher-order SVD: U_k are the complete left-singular bases of each
/// unfolding and core = tensor x_1 U_1^T ... x_n U_n^T.
HosvdDecomposition hosvd(const DenseTensor& tensor);

/// Multiplies the core back by every factor.
DenseTensor reconstruct(const HosvdDecomposition& decomposition);

}  // namespace ngds
