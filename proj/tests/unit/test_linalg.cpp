#include <cmath>
#include <limits>

#include "doctest.h"
#include "lyap/errors.hpp"
#include "lyap/linalg.hpp"
#include "lyap/rng.hpp"
#include "oracles.hpp"

using namespace lyap;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

}  // namespace

TEST_CASE("singular values of simple matrices") {
  const auto d = singular_values(Matrix::diagonal({3.0, 1.0}));
  REQUIRE(d.values.size() == 2);
  CHECK(d.values[0] == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(d.values[1] == doctest::Approx(1.0).epsilon(1e-15));

  const auto id = singular_values(Matrix::identity(4));
  REQUIRE(id.values.size() == 4);
  for (double s : id.values) CHECK(s == doctest::Approx(1.0).epsilon(1e-15));

  const auto neg = singular_values(Matrix::diagonal({-2.0, 5.0, 0.5}));
  CHECK(neg.values[0] == doctest::Approx(5.0));
  CHECK(neg.values[1] == doctest::Approx(2.0));
  CHECK(neg.values[2] == doctest::Approx(0.5));
}

TEST_CASE("singular values of a seeded 3x3 match the characteristic polynomial") {
  Rng rng(42);
  const Matrix g = oracle::random_matrix(3, rng);
  const auto s = singular_values(g);
  // Frozen from the cubic oracle.
  CHECK(rel(s.values[0], 2.7222066229838968) < 1e-12);
  CHECK(rel(s.values[1], 2.4853808401790767) < 1e-12);
  CHECK(rel(s.values[2], 0.77429684421522749) < 1e-11);
  const auto o = oracle::singular_values_3x3(g);
  for (int i = 0; i < 3; ++i) CHECK(rel(s.values[i], o[i]) < 1e-11);
}

TEST_CASE("singular values reject non-finite data") {
  Matrix g(2);
  g(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(singular_values(g), InvalidInput);
  CHECK_THROWS_AS(op_norm(g), InvalidInput);
  CHECK_THROWS_AS(Matrix::from_rows({{1.0, std::numeric_limits<double>::infinity()}, {0.0, 1.0}}), InvalidInput);
  CHECK_THROWS_AS(Matrix::from_rows({{1.0, 2.0}, {3.0}}), InvalidInput);
}

TEST_CASE("op_norm") {
  CHECK(op_norm(Matrix::diagonal({3.0, 1.0})) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(op_norm(Matrix(3)) == 0.0);

  Rng rng(7);
  const Matrix g = oracle::random_matrix(2, rng);
  CHECK(rel(op_norm(g), 1.7434233217719714) < 1e-13);
  CHECK(rel(op_norm(g), oracle::op_norm_sweep(g)) < 1e-12);
}

TEST_CASE("op_norm agrees with the unit-circle sweep on random 2x2") {
  Rng rng(99);
  for (int t = 0; t < 50; ++t) {
    const Matrix g = oracle::random_matrix(2, rng);
    CHECK(rel(op_norm(g), oracle::op_norm_sweep(g)) < 1e-10);
  }
}

TEST_CASE("exterior powers") {
  const Matrix g = Matrix::from_rows({{1.0, 2.0}, {3.0, 4.0}});
  const Matrix top = exterior_power(g, 2);
  REQUIRE(top.dim() == 1);
  CHECK(top(0, 0) == doctest::Approx(-2.0));

  const Matrix d = exterior_power(Matrix::diagonal({2.0, 3.0, 5.0}), 2);
  CHECK(d == Matrix::diagonal({6.0, 10.0, 15.0}));

  CHECK(exterior_power(g, 1) == g);
  CHECK_THROWS_AS(exterior_power(g, 0), InvalidInput);
  CHECK_THROWS_AS(exterior_power(g, 3), InvalidInput);

  CHECK(binomial(5, 2) == 10);
  CHECK(binomial(4, 0) == 1);
  CHECK(binomial(3, 4) == 0);
  const auto subsets = index_subsets(4, 2);
  REQUIRE(subsets.size() == 6);
  CHECK(subsets.front() == std::vector<std::size_t>{0, 1});
  CHECK(subsets[2] == std::vector<std::size_t>{0, 3});
  CHECK(subsets.back() == std::vector<std::size_t>{2, 3});
}

TEST_CASE("wedge_2 matches explicit minors and is multiplicative") {
  Rng rng(5);
  for (std::size_t m = 2; m <= 5; ++m) {
    for (int t = 0; t < 20; ++t) {
      const Matrix g = oracle::random_matrix(m, rng);
      const Matrix h = oracle::random_matrix(m, rng);
      const Matrix w = exterior_power(g, 2);
      const Matrix wd = oracle::wedge2_direct(g);
      for (std::size_t i = 0; i < w.data().size(); ++i) CHECK(w.data()[i] == doctest::Approx(wd.data()[i]));

      const Matrix lhs = exterior_power(g * h, 2);
      const Matrix rhs = exterior_power(g, 2) * exterior_power(h, 2);
      const double scale = rhs.max_abs();
      for (std::size_t i = 0; i < lhs.data().size(); ++i)
        CHECK(std::abs(lhs.data()[i] - rhs.data()[i]) <= 1e-9 * scale);
    }
  }
}

TEST_CASE("gap ratio") {
  const Matrix g = Matrix::diagonal({3.0, 1.0});
  CHECK(gap_ratio(g) == doctest::Approx(3.0));
  const double via_wedge = std::pow(op_norm(g), 2) / op_norm(exterior_power(g, 2));
  CHECK(via_wedge == doctest::Approx(3.0));
  CHECK(gap_ratio(Matrix::identity(3)) == doctest::Approx(1.0));

  const Matrix rank1 = Matrix::from_rows({{1.0, 2.0}, {2.0, 4.0}});
  CHECK(std::isinf(gap_ratio(rank1)));
  CHECK(std::isinf(gap_ratio(Matrix(2))));
  CHECK_THROWS_AS(gap_ratio(Matrix::identity(1)), InvalidInput);
}

TEST_CASE("spectral identities on random matrices") {
  Rng rng(2024);
  for (int t = 0; t < 200; ++t) {
    const std::size_t m = 2 + static_cast<std::size_t>(t % 4);
    const Matrix g = oracle::random_matrix(m, rng);
    const Matrix h = oracle::random_matrix(m, rng);
    const auto sg = singular_values(g);
    for (std::size_t i = 1; i < m; ++i) CHECK(sg.values[i - 1] >= sg.values[i]);
    CHECK(sg.values.back() >= 0.0);
    CHECK(rel(sg.product(), std::abs(determinant(g))) < 1e-9);
    CHECK(op_norm(g * h) <= op_norm(g) * op_norm(h) * (1.0 + 1e-10));
    CHECK(rel(op_norm(exterior_power(g, 2)), sg.values[0] * sg.values[1]) < 1e-9);
    if (sg.values[1] > 1e-12 * sg.values[0])
      CHECK(rel(gap_ratio(g), std::pow(op_norm(g), 2) / op_norm(exterior_power(g, 2))) < 1e-9);
    for (std::size_t k = 1; k <= m; ++k) {
      double prod = 1.0;
      for (std::size_t i = 0; i < k; ++i) prod *= sg.values[i];
      CHECK(rel(op_norm(exterior_power(g, k)), prod) < 1e-9);
    }
  }
}

TEST_CASE("determinant") {
  CHECK(determinant(Matrix::from_rows({{1.0, 2.0}, {3.0, 4.0}})) == doctest::Approx(-2.0));
  CHECK(determinant(Matrix::diagonal({2.0, 3.0, 4.0})) == doctest::Approx(24.0));
  CHECK(determinant(Matrix::from_rows({{0.0, 1.0}, {1.0, 0.0}})) == doctest::Approx(-1.0));
  CHECK(determinant(Matrix::from_rows({{1.0, 2.0}, {2.0, 4.0}})) == 0.0);
}

TEST_CASE("matrix arithmetic") {
  const Matrix a = Matrix::from_rows({{1.0, 2.0}, {3.0, 4.0}});
  const Matrix b = Matrix::from_rows({{0.0, 1.0}, {1.0, 0.0}});
  CHECK(a * b == Matrix::from_rows({{2.0, 1.0}, {4.0, 3.0}}));
  CHECK(a + b == Matrix::from_rows({{1.0, 3.0}, {4.0, 4.0}}));
  CHECK(2.0 * a == Matrix::from_rows({{2.0, 4.0}, {6.0, 8.0}}));
  CHECK(a.transpose() == Matrix::from_rows({{1.0, 3.0}, {2.0, 4.0}}));
  Matrix out(2);
  multiply_into(a, b, out);
  CHECK(out == a * b);
  CHECK_THROWS_AS(a * Matrix::identity(3), InvalidInput);
  CHECK(Matrix(2).is_zero());
  CHECK(a.frobenius_norm() == doctest::Approx(std::sqrt(30.0)));
}
