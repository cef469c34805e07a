#pragma once

// Probes of the continuity statements: finite-scale continuity, nearly uniform
// upper semicontinuity, speed of convergence, the modulus of continuity, and
// the full finite-scale spectrum through exterior powers.

#include <cstddef>
#include <vector>

#include "lyap/cocycle.hpp"
#include "lyap/ldt.hpp"
#include "lyap/verdict.hpp"

namespace lyap {

struct ContinuityEntry {
  std::size_t n = 0;
  double distance = 0.0;   // dist(B1, B2)
  double threshold = 0.0;  // exp(-C1 n)
  FiniteScaleLE lambda_b1;
  FiniteScaleLE lambda_b2;
  double delta = 0.0;  // |Lambda^(n)(B1) - Lambda^(n)(B2)|
  double sigma = 0.0;  // from per-phase differences
  double bound = 0.0;  // iota_n^{1/2}
  Verdict verdict = Verdict::Inconclusive;
};

/// Gate: dist_p(B1, B2) < exp(-C1 n) and dist_p(Bi, A) < delta0, else GateError.
/// Lambda^(n) of B1 and B2 are estimated on common phases.
ContinuityEntry finite_scale_continuity_probe(const Cocycle& A, const Cocycle& B1, const Cocycle& B2,
                                              const ErgodicSystem& system, std::size_t n,
                                              const DeviationProfile& profile, double C1, double delta0,
                                              const McOptions& mc, double p = 2.0);

/// C0 with ||B||_inf <= e^{C0} and ||(1/n) log||B^(n)|| ||_{L^2} <= C0 at scale n.
double estimate_c0(const Cocycle& B, const ErgodicSystem& system, std::size_t n, const McOptions& mc);

/// C1 = 2 C0 + kappa/10 + margin, margin > 0.
double calibrate_c1(double C0, double kappa, double margin = 0.05);

enum class UscMode { Finite, MinusInfinity };

struct UscResult {
  std::size_t n = 0;
  double distance = 0.0;
  double bound = 0.0;      // L1(A) + eps, or -t
  double violation = 0.0;  // fraction with (1/n) log||B^(n)(x)|| > bound
  double ci_radius = 0.0;
  double predicted = 0.0;  // iota_n
  std::size_t samples = 0;
  Verdict verdict = Verdict::Inconclusive;  // violation < iota_n
};

/// Finite mode: value = eps, l1_a = L1(A) (or its proxy). Minus-infinity mode:
/// value = t, l1_a unused. Gate: dist_p(B, A) < delta, else GateError.
UscResult usc_probe(const Cocycle& A, const Cocycle& B, const ErgodicSystem& system, std::size_t n, UscMode mode,
                    double value, double l1_a, double delta, const DeviationProfile& profile, const McOptions& mc,
                    double p = 2.0);

struct SpeedRow {
  std::size_t n = 0;
  double lambda_n = 0.0;
  double excess = 0.0;        // Lambda^(n) - L1 proxy
  double excess_sigma = 0.0;
  double bound_phi = 0.0;     // C phi(n) / n
  double bound_iota = 0.0;    // iota_{n--}^{1/2}
  Verdict excess_verdict = Verdict::Inconclusive;
  std::size_t n_plus = 0;     // n++ actually used
  bool truncated = false;     // n++ exceeded the proxy scale
  double combination = 0.0;   // |Lambda^(n++) + Lambda^(n) - 2 Lambda^(2n)|
  double combination_sigma = 0.0;
  double bound_step = 0.0;    // C n / n++
  double bound_step_iota = 0.0;  // iota_n^{1/2}
  Verdict combination_verdict = Verdict::Inconclusive;
};

struct SpeedReport {
  std::size_t proxy_scale = 0;  // N_max = min(10^6, 100 max n)
  FiniteScaleLE l1_proxy;
  std::vector<SpeedRow> rows;
};

/// All quantities come from one renormalized pass per phase to N_max, so
/// every difference is paired. Grid values must be >= psi(t_min).
SpeedReport speed_probe(const Cocycle& B, const ErgodicSystem& system, const DeviationProfile& profile,
                        std::vector<std::size_t> grid, double C, const McOptions& mc);

/// omega(h) = iota(c log(1/h))^{1 - 1/p}; omega(0) = 0, and omega = 1 where
/// the argument leaves the domain of iota.
double modulus_omega(const DeviationProfile& profile, double c, double p, double h);

struct ModulusRow {
  double h = 0.0;
  double delta = 0.0;  // |L1(A + h E) - L1(A)|
  double sigma = 0.0;
  double omega = 0.0;
  Verdict verdict = Verdict::Inconclusive;  // delta <= omega
};

struct ModulusReport {
  bool exact = false;   // both cocycles constant: no sampling
  std::size_t proxy_scale = 0;
  double c = 0.0;
  double p = 2.0;
  double slope = 0.0;   // least-squares slope of log delta against log h
  std::vector<ModulusRow> rows;
};

/// Constant A and E are handled exactly via log spectral radii; otherwise
/// L1 is proxied by Lambda^(proxy_n) on common phases.
ModulusReport modulus_scan(const Cocycle& A, const Cocycle& E, const ErgodicSystem& system,
                           const std::vector<double>& h_grid, const DeviationProfile& profile, double c, double p,
                           std::size_t proxy_n, const McOptions& mc);

struct Spectrum {
  std::size_t n = 0;
  std::vector<FiniteScaleLE> blocks;  // Lambda^(n)_1(wedge_k A) = Lambda_1 + ... + Lambda_k
  std::vector<double> exponents;      // Lambda_k^(n)
  std::vector<double> sigmas;         // standard errors of the exponents
};

/// All Lambda_k^(n), k = 1..m, from per-phase block differences.
/// CapacityError if some C(m, k) exceeds the exterior dimension limit.
Spectrum le_spectrum(const Cocycle& A, const ErgodicSystem& system, std::size_t n, const McOptions& mc);

}  // namespace lyap
