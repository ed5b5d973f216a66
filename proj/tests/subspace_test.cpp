#include <doctest.h>

#include "ngds/error.hpp"
#include "ngds/subspace.hpp"
#include "support.hpp"

using namespace ngds;
using namespace ngds::test;

namespace {

SingularSpectrum spectrum(std::initializer_list<double> values) {
  SingularSpectrum s;
  s.values = Vector(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double v : values) s.values(i++) = v;
  return s;
}

// R^3 pair with one shared direction and one at 45 degrees.
Subspace r3_p() { return span({unit(3, 0), unit(3, 1)}); }
Subspace r3_q() { return span({unit(3, 0), (unit(3, 1) + unit(3, 2)) / std::sqrt(2.0)}); }

}  // namespace

TEST_SUITE("subspace") {
  TEST_CASE("construction checks shape and orthonormality") {
    CHECK_THROWS_AS(Subspace(Matrix::Identity(2, 3)), DimensionError);
    CHECK_THROWS_AS(Subspace(Matrix(3, 0)), DimensionError);
    Matrix skew(2, 2);
    skew << 1, 0.5, 0, 1;
    CHECK_THROWS_AS(Subspace{skew}, InvalidArgument);
    Matrix dependent(3, 2);
    dependent << 1, 2, 1, 2, 0, 0;
    CHECK_THROWS_AS(Subspace::from_span(dependent), NumericalError);
    const auto s = random_subspace(6, 3, 1);
    CHECK(orthonormality_error(s.basis()) <= 1e-8);
    CHECK(s.leading(2).dim() == 2);
    CHECK_THROWS_AS(s.leading(4), InvalidArgument);
  }

  TEST_CASE("basis_from_unfolding keeps the dominant directions") {
    Matrix x = Matrix::Zero(3, 2);
    x(0, 0) = 3.0;
    x(1, 1) = 1.0;
    const auto s = basis_from_unfolding(x, FixedDim{1});
    CHECK(projector_distance(s, span({unit(3, 0)})) < 1e-12);
  }

  TEST_CASE("flat spectrum needs every direction for 90% energy") {
    const auto s = basis_from_unfolding(Matrix::Identity(4, 4), EnergyFraction{0.90});
    CHECK(s.dim() == 4);
  }

  TEST_CASE("basis_from_unfolding degenerate inputs") {
    CHECK_THROWS_AS(basis_from_unfolding(Matrix::Zero(3, 4), FixedDim{1}), NumericalError);
    Matrix rank1 = random_matrix(4, 1, 3) * random_matrix(1, 5, 4);
    CHECK_THROWS_AS(basis_from_unfolding(rank1, FixedDim{2}), NumericalError);
    CHECK_NOTHROW(basis_from_unfolding(rank1, FixedDim{1}));
  }

  TEST_CASE("select_dim reaches the energy fraction") {
    CHECK(select_dim(spectrum({9, 1}), 0.90) == 1);
    CHECK(select_dim(spectrum({1, 1, 1, 1}), 0.90) == 4);
    CHECK(select_dim(spectrum({1, 1, 1, 1}), 0.75) == 3);
    CHECK(select_dim(spectrum({5, 3, 2, 0.5}), 1.0) == 4);
    CHECK_THROWS_AS(select_dim(spectrum({0, 0}), 0.5), NumericalError);
    CHECK_THROWS_AS(select_dim(spectrum({1, 1}), 0.0), InvalidArgument);
    CHECK_THROWS_AS(select_dim(spectrum({1, 1}), 1.5), InvalidArgument);
  }

  TEST_CASE("select_dim agrees with a cumulative-ratio oracle and is monotone in mu") {
    const Matrix x = random_matrix(8, 20, 5);
    const auto s = autocorrelation_spectrum(x);
    Eigen::JacobiSVD<Matrix> svd(x);
    const Vector lambda = svd.singularValues().array().square();
    std::size_t previous = 0;
    for (double mu = 0.05; mu <= 1.0; mu += 0.05) {
      std::size_t oracle = 0;
      double acc = 0.0;
      while (acc / lambda.sum() < mu - 1e-12) acc += lambda(static_cast<Eigen::Index>(oracle++));
      const auto k = select_dim(s, mu);
      CHECK(k == oracle);
      CHECK(k >= previous);
      previous = k;
    }
    CHECK(select_dim(s, 1.0) == numerical_rank(x));
  }

  TEST_CASE("principal angles of the R^3 example") {
    const auto a = principal_angles(r3_p(), r3_q());
    REQUIRE(a.count() == 2);
    CHECK(std::abs(a.angles(0) - 0.0) <= 1e-12);
    CHECK(std::abs(a.angles(1) - kPi / 4) <= 1e-12);
    CHECK(std::abs(a.correlations(1) - 1.0 / std::sqrt(2.0)) <= 1e-12);
    CHECK(std::abs(mean_canonical_angle(r3_p(), r3_q(), 2) - kPi / 8) <= 1e-12);
    CHECK(std::abs(geodesic_distance(r3_p(), r3_q()) - kPi / 4) <= 1e-12);
    const auto first = principal_angles(r3_p(), r3_q(), 1);
    CHECK(first.count() == 1);
    CHECK_THROWS_AS(principal_angles(r3_p(), r3_q(), 3), InvalidArgument);
  }

  TEST_CASE("identical and orthogonal subspaces") {
    const auto p = random_subspace(7, 3, 8);
    const auto same = principal_angles(p, p);
    for (Eigen::Index i = 0; i < same.angles.size(); ++i) CHECK(std::abs(same.angles(i)) <= 1e-12);
    CHECK(mean_canonical_angle(p, p) <= 1e-12);
    CHECK(geodesic_distance(p, p) <= 1e-12);

    const auto e1 = span({unit(2, 0)});
    const auto e2 = span({unit(2, 1)});
    CHECK(std::abs(principal_angles(e1, e2).angles(0) - kPi / 2) <= 1e-12);
    CHECK(std::abs(geodesic_distance(e1, e2) - kPi / 2) <= 1e-12);
    const auto a = span({unit(4, 0), unit(4, 1)});
    const auto b = span({unit(4, 2), unit(4, 3)});
    CHECK(std::abs(mean_canonical_angle(a, b) - kPi / 2) <= 1e-12);
  }

  TEST_CASE("principal angles need a common ambient space") {
    CHECK_THROWS_AS(principal_angles(random_subspace(3, 1, 1), random_subspace(4, 1, 2)), DimensionError);
    CHECK_THROWS_AS(geodesic_distance(random_subspace(3, 1, 1), random_subspace(4, 1, 2)), DimensionError);
  }

  TEST_CASE("spectrum ordering, ranges and the acos relation") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const auto p = random_subspace(9, 3, seed);
      const auto q = random_subspace(9, 4, seed + 100);
      const auto a = principal_angles(p, q);
      CHECK(a.count() == 3);
      for (Eigen::Index i = 0; i < a.angles.size(); ++i) {
        CHECK(a.correlations(i) >= 0.0);
        CHECK(a.correlations(i) <= 1.0);
        CHECK(a.angles(i) >= 0.0);
        CHECK(a.angles(i) <= kPi / 2);
        CHECK(std::abs(a.angles(i) - std::acos(a.correlations(i))) <= 1e-12);
        if (i > 0) {
          CHECK(a.angles(i) >= a.angles(i - 1));
          CHECK(a.correlations(i) <= a.correlations(i - 1));
        }
      }
    }
  }

  TEST_CASE("symmetry and basis invariance") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto p = random_subspace(8, 3, seed);
      const auto q = random_subspace(8, 3, seed + 50);
      const auto pq = principal_angles(p, q);
      const auto qp = principal_angles(q, p);
      CHECK((pq.angles - qp.angles).cwiseAbs().maxCoeff() <= 1e-12);
      const Subspace pr(p.basis() * random_orthogonal(3, seed + 200));
      const Subspace qr(q.basis() * random_orthogonal(3, seed + 300));
      CHECK((principal_angles(pr, qr).angles - pq.angles).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }

  TEST_CASE("correlations are clamped to 1") {
    const auto p = random_subspace(5, 2, 4);
    const Subspace inflated(p.basis() * (1.0 + 1e-14));
    const auto a = principal_angles(inflated, inflated);
    CHECK(a.correlations.maxCoeff() <= 1.0);
    CHECK(a.angles.minCoeff() >= 0.0);
  }

  TEST_CASE("geodesic distance triangle inequality on random triples") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
      const auto p = random_subspace(6, 2, seed);
      const auto q = random_subspace(6, 2, seed + 1000);
      const auto s = random_subspace(6, 2, seed + 2000);
      CHECK(geodesic_distance(p, q) <= geodesic_distance(p, s) + geodesic_distance(s, q) + 1e-9);
    }
  }

  TEST_CASE("projector identities") {
    Matrix expected(2, 2);
    expected << 1, 0, 0, 0;
    CHECK(projector(span({unit(2, 0)})) == expected);
    const auto p = random_subspace(7, 3, 12);
    const Matrix pp = projector(p);
    CHECK((pp * pp - pp).norm() <= 1e-10);
    CHECK(std::abs(pp.trace() - 3.0) <= 1e-10);
    CHECK((pp - pp.transpose()).norm() <= 1e-14);
  }
}
