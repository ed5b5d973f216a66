#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>
#include <vector>

#include "ngds/subspace.hpp"
#include "ngds/tensor.hpp"

namespace ngds::test {

inline constexpr double kPi = 3.14159265358979323846;

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist;
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = dist(gen);
  return m;
}

inline DenseTensor random_tensor(std::vector<std::size_t> dims, std::uint64_t seed) {
  DenseTensor t(dims);
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist;
  for (auto& v : t.data()) v = dist(gen);
  return t;
}

inline Matrix random_orthogonal(Eigen::Index n, std::uint64_t seed) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(n, n, seed));
  return qr.householderQ() * Matrix::Identity(n, n);
}

inline Subspace random_subspace(Eigen::Index ambient, Eigen::Index k, std::uint64_t seed) {
  return Subspace::from_span(random_matrix(ambient, k, seed));
}

inline Vector unit(Eigen::Index n, Eigen::Index i) { return Vector::Unit(n, i); }

inline Subspace span(const std::vector<Vector>& columns) {
  Matrix m(columns.front().size(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) m.col(static_cast<Eigen::Index>(c)) = columns[c];
  return Subspace::from_span(m);
}

/// Line through the origin in the plane at `degrees` from the x axis.
inline Subspace line(double degrees) {
  const double r = degrees * kPi / 180.0;
  Matrix m(2, 1);
  m << std::cos(r), std::sin(r);
  return Subspace(m);
}

inline double orthonormality_error(const Matrix& basis) {
  return (basis.transpose() * basis - Matrix::Identity(basis.cols(), basis.cols())).cwiseAbs().maxCoeff();
}

inline DenseTensor outer(const Vector& a, const Vector& b, const Vector& c) {
  DenseTensor t({static_cast<std::size_t>(a.size()), static_cast<std::size_t>(b.size()),
                 static_cast<std::size_t>(c.size())});
  auto data = t.data();
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    for (Eigen::Index j = 0; j < b.size(); ++j)
      for (Eigen::Index l = 0; l < c.size(); ++l) data[k++] = a(i) * b(j) * c(l);
  return t;
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("ngds_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace ngds::test
