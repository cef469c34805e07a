#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "lyap/avalanche.hpp"
#include "lyap/errors.hpp"
#include "lyap/rng.hpp"
#include "oracles.hpp"

using namespace lyap;

namespace {

// Defect with every norm taken in long double from the closed-form 2x2 norm.
long double oracle_defect(const std::vector<Matrix>& c) {
  long double s = oracle::log_norm_direct(c);
  for (std::size_t i = 1; i + 1 < c.size(); ++i) s += std::log(oracle::norm2(oracle::to_long(c[i])));
  for (std::size_t i = 1; i < c.size(); ++i)
    s -= std::log(oracle::norm2(oracle::mul(oracle::to_long(c[i]), oracle::to_long(c[i - 1]))));
  return std::fabs(s);
}

// First failing index by a plain scan: gap via s1 / (|det| / s1), angle via long double norms.
HypothesisCheck oracle_scan(const std::vector<Matrix>& c, double eps, double kappa) {
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto g = oracle::to_long(c[i]);
    const long double s1 = oracle::norm2(g);
    const long double det = std::fabs(g[0] * g[3] - g[1] * g[2]);
    const long double gr = det == 0 ? INFINITY : s1 * s1 / det;
    if (!(gr > 1.0L / kappa)) return {false, i, APCondition::Gap};
    if (i >= 1) {
      const auto p = oracle::mul(g, oracle::to_long(c[i - 1]));
      const long double ratio = oracle::norm2(p) / (s1 * oracle::norm2(oracle::to_long(c[i - 1])));
      if (!(ratio > eps)) return {false, i, APCondition::Angle};
    }
  }
  return {};
}

}  // namespace

TEST_CASE("hypothesis validation") {
  CHECK_THROWS_AS((APHypotheses{1.0, 0.1, 0.01}.validate()), InvalidInput);
  CHECK_THROWS_AS((APHypotheses{0.5, 0.0, 0.01}.validate()), InvalidInput);
  CHECK_THROWS_AS((APHypotheses{0.5, 0.1, -1.0}.validate()), InvalidInput);
  CHECK((APHypotheses{0.5, 1e-4, 0.01}.gate_ok()));
  CHECK_FALSE((APHypotheses{0.5, 0.02, 0.01}.gate_ok()));
}

TEST_CASE("diagonal chain satisfies the hypotheses") {
  const std::vector<Matrix> chain(5, Matrix::diagonal({10.0, 0.1}));
  const auto r = check_hypotheses(chain, {0.5, 0.02});
  CHECK(r.ok);
  CHECK(r.failed == APCondition::None);
}

TEST_CASE("identity in the chain fails the gap condition") {
  std::vector<Matrix> chain(4, Matrix::diagonal({10.0, 0.1}));
  chain[2] = Matrix::identity(2);
  const auto r = check_hypotheses(chain, {0.5, 0.5});
  CHECK_FALSE(r.ok);
  CHECK(r.index == 2);
  CHECK(r.failed == APCondition::Gap);
  CHECK(to_string(r.failed) == "gap");
}

TEST_CASE("misaligned blocks fail the angle condition") {
  // g_1 maps onto the direction g_0 kills.
  const Matrix g0 = Matrix::diagonal({10.0, 0.1});
  const Matrix g1 = Matrix::rotation(std::numbers::pi / 2) * g0 * Matrix::rotation(std::numbers::pi / 2).transpose();
  const std::vector<Matrix> chain{g0, g1, g0};
  const auto r = check_hypotheses(chain, {0.5, 0.02});
  CHECK_FALSE(r.ok);
  CHECK(r.index == 1);
  CHECK(r.failed == APCondition::Angle);
}

TEST_CASE("hypothesis check matches a direct scan") {
  Rng rng(8);
  std::size_t failures = 0;
  for (int t = 0; t < 300; ++t) {
    std::vector<Matrix> chain;
    double prev = 0.0;
    for (int i = 0; i < 6; ++i) {
      const double theta = prev + (rng.uniform() - 0.5) * 2.4;
      const double kp = 0.002 + 0.0196 * rng.uniform();
      chain.push_back(Matrix::rotation(theta) * Matrix::diagonal({1.0, kp}) * Matrix::rotation(prev).transpose());
      prev = theta;
    }
    const auto got = check_hypotheses(chain, {0.5, 0.02});
    const auto want = oracle_scan(chain, 0.5, 0.02);
    CHECK(got.ok == want.ok);
    CHECK(got.index == want.index);
    CHECK(got.failed == want.failed);
    if (!got.ok) ++failures;
  }
  CHECK(failures > 30);
  CHECK(failures < 290);
}

TEST_CASE("chains must be well formed") {
  const std::vector<Matrix> one{Matrix::identity(2)};
  CHECK_THROWS_AS(check_hypotheses(one, {}), InvalidInput);
  CHECK_THROWS_AS(ap_defect(one), InvalidInput);
  const std::vector<Matrix> mixed{Matrix::identity(2), Matrix::identity(3)};
  CHECK_THROWS_AS(ap_defect(mixed), InvalidInput);
  const std::vector<Matrix> zero{Matrix::identity(2), Matrix(2)};
  CHECK_THROWS_AS(ap_defect(zero), InvalidInput);
}

TEST_CASE("defect is exactly zero in the degenerate cases") {
  Rng rng(4);
  for (int t = 0; t < 100; ++t) {
    const std::vector<Matrix> pair{oracle::random_matrix(2, rng), oracle::random_matrix(2, rng)};
    CHECK(ap_defect(pair) == 0.0);
    const std::vector<Matrix> pair3{oracle::random_matrix(3, rng), oracle::random_matrix(3, rng)};
    CHECK(ap_defect(pair3) == 0.0);
  }
  for (std::size_t n : {2, 3, 10, 100, 1000}) {
    const std::vector<Matrix> chain(n, Matrix::diagonal({10.0, 0.1}));
    CHECK(ap_defect(chain) == 0.0);
    const auto r = verify_ap(chain, {0.5, 0.02}, 1e-300);
    CHECK(r.satisfied);
  }
  std::vector<Matrix> mixed;
  for (int i = 0; i < 20; ++i) mixed.push_back(Matrix::diagonal({1.0 + i, 0.01 * (i + 1)}));
  CHECK(ap_defect(mixed) == 0.0);
}

TEST_CASE("defect agrees with the extended-precision oracle") {
  const APHypotheses hyp;
  const auto c1 = hyperbolic_chain(100, hyp, 1);
  // Frozen from oracle_defect.
  CHECK(std::abs(ap_defect(c1) - 0.00027573247990430195) < 1e-8);
  for (std::uint64_t seed = 2; seed < 30; ++seed) {
    const auto c = hyperbolic_chain(100, hyp, seed);
    CHECK(std::abs(ap_defect(c) - static_cast<double>(oracle_defect(c))) < 1e-8);
  }
  const auto loose = hyperbolic_chain(100, {0.5, 0.01, 0.01}, 3);
  CHECK(std::abs(ap_defect(loose) - static_cast<double>(oracle_defect(loose))) < 1e-8);
}

TEST_CASE("defect is invariant under rescaling a block") {
  Rng rng(12);
  const APHypotheses hyp;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto chain = hyperbolic_chain(2 + seed % 40, hyp, seed);
    const double base = ap_defect(chain);
    const std::size_t j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(chain.size()));
    const double lambda = std::exp(std::log(0.1) + rng.uniform() * std::log(100.0));
    chain[j] *= lambda;
    CHECK(std::abs(ap_defect(chain) - base) <= 1e-9);
  }
}

TEST_CASE("generated chains satisfy the hypotheses and the calibrated bound") {
  const APHypotheses hyp;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const auto chain = hyperbolic_chain(2 + seed % 199, hyp, derive_seed(77, seed));
    const auto r = verify_ap(chain, hyp);
    CHECK(r.hypotheses_ok);
    CHECK(r.gate_ok);
    CHECK(r.satisfied);
    CHECK(r.bound == doctest::Approx(kCalibratedCAP * static_cast<double>(chain.size()) * 1e-4 / 0.25));
  }
}

TEST_CASE("calibration is reproducible") {
  const auto lengths = calibration_lengths();
  CHECK(lengths.front() == 2);
  CHECK(lengths.back() == 200);
  const APHypotheses hyp;
  const auto a = calibrate_c_ap(hyp, lengths, 500, 0, 1);
  const auto b = calibrate_c_ap(hyp, lengths, 500, 0, 3);
  CHECK(a.c_ap == b.c_ap);
  CHECK(a.passing == 500);
  CHECK(a.c_ap <= kCalibratedCAP);
  CHECK(a.c_ap == doctest::Approx(2.0 * a.max_ratio));
}

TEST_CASE("defect grows at most linearly") {
  const APHypotheses hyp;
  auto median_defect = [&](std::size_t n) {
    std::vector<double> d;
    for (std::uint64_t s = 0; s < 201; ++s) d.push_back(ap_defect(hyperbolic_chain(n, hyp, derive_seed(n, s))));
    std::nth_element(d.begin(), d.begin() + 100, d.end());
    return d[100];
  };
  for (std::size_t n : {10, 25, 50, 100}) CHECK(median_defect(2 * n) / median_defect(n) <= 2.5);
}

TEST_CASE("AP prediction") {
  const std::vector<double> pairs{1.5};
  const std::vector<double> none;
  CHECK(ap_predict_log_norm(pairs, none) == 1.5);

  const std::vector<Matrix> chain(6, Matrix::diagonal({3.0, 0.2}));
  std::vector<double> p, s;
  for (std::size_t i = 1; i < chain.size(); ++i) p.push_back(std::log(op_norm(chain[i] * chain[i - 1])));
  for (std::size_t i = 1; i + 1 < chain.size(); ++i) s.push_back(std::log(op_norm(chain[i])));
  CHECK(ap_predict_log_norm(p, s) == doctest::Approx(6.0 * std::log(3.0)).epsilon(1e-14));

  const APHypotheses hyp;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto c = hyperbolic_chain(60, hyp, seed);
    std::vector<double> pr, si;
    for (std::size_t i = 1; i < c.size(); ++i) pr.push_back(std::log(op_norm(c[i] * c[i - 1])));
    for (std::size_t i = 1; i + 1 < c.size(); ++i) si.push_back(std::log(op_norm(c[i])));
    const double truth = static_cast<double>(oracle::log_norm_direct(c));
    CHECK(std::abs(ap_predict_log_norm(pr, si) - truth) <= kCalibratedCAP * 60 * hyp.kappa / 0.25);
  }
  CHECK_THROWS_AS(ap_predict_log_norm(pairs, pairs), InvalidInput);
}
