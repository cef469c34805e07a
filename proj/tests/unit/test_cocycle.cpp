#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "lyap/cocycle.hpp"
#include "lyap/errors.hpp"
#include "lyap/io.hpp"
#include "lyap/rng.hpp"
#include "oracles.hpp"

using namespace lyap;

namespace {

const double kLn2 = std::numbers::ln2;

bool within(double a, double b, double sigma) { return std::abs(a - b) <= 3.0 * sigma; }

}  // namespace

TEST_CASE("evaluate") {
  const auto sys = ErgodicSystem::bernoulli({0.5, 0.5});
  const Matrix M = Matrix::from_rows({{1.0, 2.0}, {3.0, 4.0}});
  const Matrix N = Matrix::diagonal({5.0, 6.0});
  CHECK(Cocycle::constant(M).evaluate(sample_phase(sys, 1)) == M);

  const auto lc = Cocycle::locally_constant({M, N});
  CHECK(lc.evaluate(Phase::with_prefix(sys, {1})) == N);
  CHECK(lc.evaluate(Phase::with_prefix(sys, {0})) == M);

  const auto pert = Cocycle::perturbed(lc, Cocycle::constant(Matrix::identity(2)), 0.0);
  CHECK(pert.evaluate(Phase::with_prefix(sys, {1})) == N);
  const auto pert2 = Cocycle::perturbed(lc, Cocycle::constant(Matrix::identity(2)), 0.5);
  CHECK(pert2.evaluate(Phase::with_prefix(sys, {1})) == Matrix::diagonal({5.5, 6.5}));

  const auto tor = ErgodicSystem::torus({0.3});
  CHECK_THROWS_AS(lc.evaluate(sample_phase(tor, 0)), InvalidInput);
  CHECK_THROWS_AS(lc.check_compatible(ErgodicSystem::bernoulli({0.2, 0.3, 0.5})), InvalidInput);
  CHECK_THROWS_AS(Cocycle::perturbed(lc, Cocycle::constant(Matrix::identity(3)), 0.1), InvalidInput);
  CHECK_THROWS_AS(Cocycle::perturbed(lc, lc, -0.1), InvalidInput);
  CHECK_THROWS_AS(Cocycle::locally_constant({M, Matrix::identity(3)}), InvalidInput);
}

TEST_CASE("torus function cocycles") {
  const auto tor = ErgodicSystem::torus({0.1});
  // [[2 + cos 2 pi x, 0], [0, sin 2 pi x]]
  std::vector<TrigPolynomial> e(4);
  e[0] = {{{0}, 2.0, 0.0}, {{1}, 1.0, 0.0}};
  e[3] = {{{1}, 0.0, 1.0}};
  const auto A = Cocycle::torus_function(2, e);
  const Matrix v = A.evaluate(Phase::on_torus(tor, {0.25}));
  CHECK(v(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(v(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(v(0, 1) == 0.0);
  CHECK_FALSE(A.depends_on_current_symbol_only());
  CHECK_THROWS_AS(A.check_compatible(ErgodicSystem::torus({0.1, 0.2})), InvalidInput);
}

TEST_CASE("iterate on constant and locally constant cocycles") {
  const auto sys = ErgodicSystem::bernoulli({0.5, 0.5});
  const auto A = Cocycle::constant(Matrix::diagonal({2.0, 1.0}));
  const auto r = iterate(A, sys, sample_phase(sys, 0), 10);
  CHECK(r.log_norm == doctest::Approx(10.0 * kLn2).epsilon(1e-15));
  CHECK(op_norm(r.direction) == doctest::Approx(1.0));

  const Matrix M0 = Matrix::from_rows({{1.0, 1.0}, {0.0, 1.0}});
  const Matrix M1 = Matrix::diagonal({2.0, 0.5});
  const auto lc = Cocycle::locally_constant({M0, M1});
  const Phase x = Phase::with_prefix(sys, {0, 1});
  const double got = iterate(lc, sys, x, 2).log_norm;
  CHECK(got == doctest::Approx(std::log(op_norm(M1 * M0))));
  CHECK(std::abs(got - std::log(op_norm(M0 * M1))) > 0.1);

  CHECK_THROWS_AS(iterate(lc, sys, x, 0), InvalidInput);
}

TEST_CASE("iterate matches an extended-precision product") {
  Rng rng(11);
  std::vector<Matrix> letters;
  for (int i = 0; i < 3; ++i) letters.push_back(oracle::random_matrix(2, rng));
  const auto sys = ErgodicSystem::bernoulli({0.2, 0.3, 0.5});
  std::vector<std::uint32_t> word;
  for (std::uint32_t j = 0; j < 50; ++j) word.push_back((j * j) % 3);
  const double got = iterate(Cocycle::locally_constant(letters), sys, Phase::with_prefix(sys, word), 50).log_norm;
  // Frozen from the long-double direct product.
  CHECK(std::abs(got - 3.2099695275183394) < 1e-11);
}

TEST_CASE("vanishing products give -inf") {
  const auto sys = ErgodicSystem::bernoulli({1.0});
  const auto N = Cocycle::constant(Matrix::from_rows({{0.0, 1.0}, {0.0, 0.0}}));
  const Phase x = sample_phase(sys, 0);
  CHECK(iterate(N, sys, x, 1).log_norm == 0.0);
  const auto r = iterate(N, sys, x, 2);
  CHECK(r.log_norm == -std::numeric_limits<double>::infinity());
  CHECK(r.direction.is_zero());
  const std::vector<std::size_t> cps{1, 2, 5};
  const auto logs = iterate_checkpoints(N, sys, x, cps);
  CHECK(logs[0] == 0.0);
  CHECK(std::isinf(logs[1]));
  CHECK(std::isinf(logs[2]));
  const auto le = finite_scale_le(N, sys, 3, 1, {100, 0, 1});
  CHECK(le.neg_inf == 100);
  CHECK(std::isinf(le.value));
}

TEST_CASE("checkpoints agree with separate iterations") {
  const auto sys = reference_system();
  const auto A = reference_cocycle();
  const std::vector<std::size_t> cps{1, 7, 30, 31, 200};
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Phase x = sample_phase(sys, s);
    const auto logs = iterate_checkpoints(A, sys, x, cps);
    for (std::size_t i = 0; i < cps.size(); ++i) CHECK(logs[i] == iterate(A, sys, x, cps[i]).log_norm);
  }
  const std::vector<std::size_t> bad{3, 3};
  CHECK_THROWS_AS(iterate_checkpoints(A, sys, sample_phase(sys, 0), bad), InvalidInput);
}

TEST_CASE("scalar bernoulli cocycle") {
  const auto sys = ErgodicSystem::bernoulli({0.3, 0.7});
  const auto A = Cocycle::locally_constant({Matrix::diagonal({2.0}), Matrix::diagonal({-0.5})});
  const double expected = 0.3 * std::log(2.0) + 0.7 * std::log(0.5);
  for (std::size_t n : {1, 5, 12}) CHECK(finite_scale_le_exact(A, sys, n, 1) == doctest::Approx(expected).epsilon(1e-13));
  for (std::size_t n : {1, 10, 100}) {
    const auto le = finite_scale_le(A, sys, n, 1, {20000, 3, 1});
    CHECK(within(le.value, expected, le.std_error));
  }
  const auto mk = ErgodicSystem::markov({{0.9, 0.1}, {0.4, 0.6}});
  CHECK(finite_scale_le_exact(A, mk, 9, 1) == doctest::Approx(0.8 * std::log(2.0) + 0.2 * std::log(0.5)));
}

TEST_CASE("constant diagonal exponents") {
  const auto sys = ErgodicSystem::bernoulli({1.0});
  const auto A = Cocycle::constant(Matrix::diagonal({2.0, 0.5}));
  for (std::size_t n : {1, 10, 1000}) {
    const auto le = finite_scale_le(A, sys, n, 1, {10, 0, 1});
    CHECK(std::abs(le.value - kLn2) < 1e-12);
    CHECK(le.std_error < 1e-12);
    const auto le2 = finite_scale_le(A, sys, n, 2, {10, 0, 1});
    CHECK(std::abs(le2.value + kLn2) < 1e-12);
  }
  CHECK_THROWS_AS(finite_scale_le(A, sys, 5, 3, {10, 0, 1}), InvalidInput);
}

TEST_CASE("exact enumeration") {
  const auto sys = reference_system();
  const auto A = reference_cocycle();
  CHECK(finite_scale_le_exact(A, sys, 1, 1) == doctest::Approx(kLn2).epsilon(1e-15));
  // Frozen from naive word recursion in long double.
  CHECK(std::abs(finite_scale_le_exact(A, sys, 6, 1) - 0.66747136705453443) < 1e-13);
  CHECK(std::abs(finite_scale_le_exact(A, sys, 10, 1) - 0.66505152962971714) < 1e-13);
  const auto biased = ErgodicSystem::bernoulli({0.3, 0.7});
  CHECK(std::abs(finite_scale_le_exact(A, biased, 6, 1) - 0.66538607643813928) < 1e-13);

  // n = 1: sum p_i log s_k(M_i).
  const auto lc = Cocycle::locally_constant({Matrix::diagonal({3.0, 0.2}), Matrix::from_rows({{1.0, 4.0}, {0.0, 2.0}})});
  for (std::size_t k = 1; k <= 2; ++k) {
    const double want = 0.3 * std::log(singular_values(Matrix::diagonal({3.0, 0.2})).values[k - 1]) +
                        0.7 * std::log(singular_values(Matrix::from_rows({{1.0, 4.0}, {0.0, 2.0}})).values[k - 1]);
    CHECK(finite_scale_le_exact(lc, biased, 1, k) == doctest::Approx(want).epsilon(1e-13));
  }

  CHECK_THROWS_AS(finite_scale_le_exact(A, sys, 25, 1), CapacityError);
  CHECK_THROWS_AS(finite_scale_le_exact(A, ErgodicSystem::torus({0.1}), 2, 1), InvalidInput);
}

TEST_CASE("monte carlo agrees with enumeration") {
  const auto sys = reference_system();
  const auto A = reference_cocycle();
  const auto le = finite_scale_le(A, sys, 8, 1, {100000, 8, 1});
  CHECK(within(le.value, finite_scale_le_exact(A, sys, 8, 1), le.std_error));
  const auto le2 = finite_scale_le(A, sys, 8, 2, {100000, 8, 1});
  CHECK(within(le2.value, finite_scale_le_exact(A, sys, 8, 2), le2.std_error));
}

TEST_CASE("markov enumeration agrees with monte carlo") {
  const auto mk = ErgodicSystem::markov({{0.2, 0.8}, {0.6, 0.4}});
  const auto A = reference_cocycle();
  const auto le = finite_scale_le(A, mk, 7, 1, {50000, 4, 1});
  CHECK(within(le.value, finite_scale_le_exact(A, mk, 7, 1), le.std_error));
}

TEST_CASE("subadditivity along sampled orbits") {
  const auto sys = reference_system();
  Rng rng(3);
  std::vector<Matrix> letters{oracle::random_matrix(2, rng), oracle::random_matrix(2, rng)};
  const auto A = Cocycle::locally_constant(letters);
  for (std::uint64_t s = 0; s < 50; ++s) {
    const Phase x = sample_phase(sys, s);
    for (std::size_t n : {1, 5, 20})
      for (std::size_t m : {1, 3, 17}) {
        const double whole = iterate(A, sys, x, n + m).log_norm;
        const double parts = iterate(A, sys, advance(sys, x, static_cast<long long>(m)), n).log_norm +
                             iterate(A, sys, x, m).log_norm;
        CHECK(whole <= parts + 1e-9);
      }
  }
}

TEST_CASE("determinant and exterior power identities") {
  const auto sys = ErgodicSystem::bernoulli({0.4, 0.6});
  Rng rng(21);
  const auto A = Cocycle::locally_constant({oracle::random_matrix(3, rng), oracle::random_matrix(3, rng)});
  const McOptions mc{20000, 5, 1};
  const std::size_t n = 12;
  double sum = 0.0, var = 0.0;
  for (std::size_t k = 1; k <= 3; ++k) {
    const auto le = finite_scale_le(A, sys, n, k, mc);
    sum += le.value;
    var += le.std_error * le.std_error;
  }
  const auto det = log_det_average(A, sys, n, mc);
  CHECK(std::abs(sum - det.mean) <= 3.0 * (std::sqrt(var) + det.std_error));

  const auto w2 = finite_scale_le(Cocycle::exterior(A, 2), sys, n, 1, mc);
  const auto l1 = finite_scale_le(A, sys, n, 1, mc);
  const auto l2 = finite_scale_le(A, sys, n, 2, mc);
  // Same seed, so the identity holds sample by sample.
  CHECK(w2.value == doctest::Approx(l1.value + l2.value).epsilon(1e-10));
}

TEST_CASE("exterior cocycles") {
  const auto A = Cocycle::locally_constant({Matrix::diagonal({2.0, 3.0, 5.0}), Matrix::identity(3)});
  const auto W = Cocycle::exterior(A, 2);
  CHECK(W.dim() == 3);
  const auto sys = ErgodicSystem::bernoulli({0.5, 0.5});
  CHECK(W.evaluate(Phase::with_prefix(sys, {0})) == Matrix::diagonal({6.0, 10.0, 15.0}));
  CHECK_THROWS_AS(Cocycle::exterior(A, 4), InvalidInput);
  CHECK_THROWS_AS(Cocycle::exterior(Cocycle::constant(Matrix::identity(12)), 6), CapacityError);

  std::vector<TrigPolynomial> e(4);
  e[0] = {{{1}, 1.0, 0.0}};
  e[1] = {{{0}, 1.0, 0.0}};
  e[3] = {{{1}, 0.0, 2.0}};
  const auto T = Cocycle::torus_function(2, e);
  const auto tor = ErgodicSystem::torus({0.2});
  const Phase x = Phase::on_torus(tor, {0.1});
  CHECK(Cocycle::exterior(T, 2).evaluate(x)(0, 0) == doctest::Approx(determinant(T.evaluate(x))));
}

TEST_CASE("distances") {
  const auto sys = ErgodicSystem::bernoulli({0.5, 0.5});
  const auto A = reference_cocycle();
  CHECK(distance(A, A, sys, std::numeric_limits<double>::infinity()) == 0.0);
  CHECK(distance(A, A, sys, 2.0) == 0.0);

  const Matrix M = Matrix::from_rows({{1.0, 2.0}, {0.5, 3.0}});
  const Matrix E = Matrix::diagonal({1.0, 0.0});
  const double h = 1e-3;
  const auto d = distance_breakdown(Cocycle::constant(M), Cocycle::constant(M + h * E), sys,
                                    std::numeric_limits<double>::infinity());
  CHECK(d.value == doctest::Approx(h).epsilon(1e-9));
  CHECK(d.sup_only);

  const Matrix N0 = Matrix::diagonal({1.0, 2.0}), N1 = Matrix::from_rows({{0.0, 1.0}, {1.0, 0.0}});
  const Matrix P0 = Matrix::diagonal({1.1, 2.0}), P1 = Matrix::from_rows({{0.0, 1.3}, {1.0, 0.0}});
  const auto dl = distance_breakdown(Cocycle::locally_constant({N0, N1}), Cocycle::locally_constant({P0, P1}), sys,
                                     std::numeric_limits<double>::infinity());
  CHECK(dl.sup_term == doctest::Approx(std::max(op_norm(N0 - P0), op_norm(N1 - P1))));

  // L^2 term: log||N^-1|| = -log s_min(N).
  const auto d2 = distance_breakdown(Cocycle::locally_constant({N0, N1}), Cocycle::locally_constant({P0, P1}), sys, 2.0);
  CHECK_FALSE(d2.sup_only);
  const double t0 = std::log(1.1) - std::log(1.0);
  CHECK(d2.inverse_term == doctest::Approx(std::sqrt(0.5 * t0 * t0)));
  CHECK(d2.value == doctest::Approx(d2.sup_term + d2.inverse_term));

  const auto sing = Cocycle::constant(Matrix::from_rows({{1.0, 1.0}, {1.0, 1.0}}));
  const auto d3 = distance_breakdown(sing, Cocycle::constant(Matrix::identity(2)), sys, 2.0);
  CHECK(d3.sup_only);
  CHECK_THROWS_AS(distance(A, Cocycle::constant(Matrix::identity(3)), sys, 2.0), InvalidInput);
  CHECK_THROWS_AS(distance(A, A, sys, 1.0), InvalidInput);
}

TEST_CASE("norm bounds and spectral gaps") {
  const auto sys = ErgodicSystem::bernoulli({1.0});
  const auto D = Cocycle::constant(Matrix::diagonal({2.0, 0.5}));
  CHECK(sup_norm(D, sys) == doctest::Approx(2.0));
  CHECK(lp_bound(D, sys, 10, 2.0, {50, 0, 1}) == doctest::Approx(kLn2));
  const auto g = estimate_gap(D, sys, 50, {20, 0, 1});
  CHECK(g.kappa == doctest::Approx(2.0 * kLn2).epsilon(1e-12));
  CHECK(g.kappa <= g.kappa_cap);
  const auto r1 = estimate_gap(Cocycle::constant(Matrix::from_rows({{1.0, 2.0}, {2.0, 4.0}})), sys, 5, {20, 0, 1}, 40.0);
  CHECK(r1.kappa == 40.0);
}

TEST_CASE("constant spectra") {
  CHECK(log_spectral_radius(Matrix::diagonal({2.0, 0.5})) == doctest::Approx(kLn2).epsilon(1e-14));
  CHECK(log_spectral_radius(Matrix::from_rows({{1.0, 1.0}, {0.0, 1.0}})) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::isinf(log_spectral_radius(Matrix::from_rows({{0.0, 1.0}, {0.0, 0.0}}))));
  // Golden ratio from the Fibonacci matrix.
  CHECK(log_spectral_radius(Matrix::from_rows({{1.0, 1.0}, {1.0, 0.0}})) ==
        doctest::Approx(std::log(std::numbers::phi)).epsilon(1e-13));
  const auto s = constant_spectrum(Matrix::diagonal({3.0, 2.0, 1.0}));
  REQUIRE(s.size() == 3);
  CHECK(s[0] == doctest::Approx(std::log(3.0)));
  CHECK(s[1] == doctest::Approx(std::log(2.0)));
  CHECK(s[2] == doctest::Approx(0.0).epsilon(1e-13));
}

TEST_CASE("estimates are reproducible across worker counts") {
  const auto sys = reference_system();
  const auto A = reference_cocycle();
  const auto a = finite_scale_le(A, sys, 40, 1, {3000, 99, 1});
  const auto b = finite_scale_le(A, sys, 40, 1, {3000, 99, 3});
  CHECK(a.value == b.value);
  CHECK(a.std_error == b.std_error);
}
