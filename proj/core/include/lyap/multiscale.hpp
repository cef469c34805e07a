#pragma once

// The inductive step between scales n0 < n1: budget bookkeeping (eta, theta),
// the scale window, blockwise AP estimates, scale sandwiches and schedules.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lyap/avalanche.hpp"
#include "lyap/cocycle.hpp"
#include "lyap/ldt.hpp"
#include "lyap/verdict.hpp"

namespace lyap {

inline constexpr double kDefaultGrowth = 0.1;

struct InductiveState {
  std::size_t n = 0;      // current scale n_k
  double eta = 0.0;       // >= 0
  double theta = 0.0;     // >= 0
  double epsilon = 0.0;   // fixed for the run
  double kappa = 0.0;     // gap of the reference cocycle
  double C = 1.0;         // step constant

  /// Throws InvalidInput on negative budgets or non-positive epsilon, kappa, C.
  void validate() const;
};

struct GateCheck {
  bool ok = false;
  double lhs = 0.0;  // 4 eta + 2 theta
  double rhs = 0.0;  // kappa - 12 epsilon
  bool epsilon_ok = false;  // epsilon < kappa / 20
  std::string reason() const;
};

GateCheck inductive_gate(const InductiveState& s);

/// [n0^{1+a}, n0 iota(n0)^{-1/2}]
struct ScaleWindow {
  double lower = 0.0;
  double upper = 0.0;
  bool contains(double n1) const noexcept { return n1 >= lower && n1 <= upper; }
};

ScaleWindow scale_window(std::size_t n0, const DeviationProfile& profile, double growth = kDefaultGrowth);

/// theta1 = theta0 + 4 eta0 + C n0/n1, eta1 = C n0/n1, n = n1.
InductiveState advance_budget(const InductiveState& s, std::size_t n1);

struct StepMeasurements {
  FiniteScaleLE b_n0;   // Lambda^(n0)(B)
  FiniteScaleLE b_2n0;  // Lambda^(2n0)(B)
  FiniteScaleLE b_n1;   // Lambda^(n1)(B)
  std::optional<FiniteScaleLE> a_n0;  // Lambda^(n0)(A), hypothesis (b)
};

/// Paired estimates of all quantities in one step, on common phases.
struct PairedStep {
  StepMeasurements m;
  double combination = 0.0;  // Lambda^(n1) + Lambda^(n0) - 2 Lambda^(2n0)
  double combination_sigma = 0.0;
  double drop = 0.0;  // Lambda^(n0) - Lambda^(2n0)
  double drop_sigma = 0.0;
  double proximity = 0.0;  // Lambda^(n0)(B) - Lambda^(n0)(A), when A is given
  double proximity_sigma = 0.0;
};

/// Monte Carlo at n0, 2n0, n1 (and for A at n0) on the same seeded phases, so
/// the sigma of each difference comes from the per-phase differences.
PairedStep measure_step(const Cocycle& B, const Cocycle* A, const ErgodicSystem& system, std::size_t n0,
                        std::size_t n1, const McOptions& mc);

struct StepResult {
  InductiveState next;
  GateCheck gate;
  Verdict hypothesis_a = Verdict::Inconclusive;  // Lambda^(n0) - Lambda^(2n0) < eta0
  Verdict hypothesis_b = Verdict::Inconclusive;  // |Lambda^(n0)(B) - Lambda^(n0)(A)| < theta0
  double measured = 0.0;  // |Lambda^(n1) + Lambda^(n0) - 2 Lambda^(2n0)|
  double sigma = 0.0;
  double bound = 0.0;     // C n0 / n1
  Verdict verdict = Verdict::Inconclusive;
};

/// Checks the gate (GateError when it fails) and the window (InvalidInput),
/// then evaluates the step inequality and returns the updated state.
StepResult inductive_step(const InductiveState& s, std::size_t n1, const PairedStep& data,
                          const DeviationProfile& profile, double growth = kDefaultGrowth);

/// Step constant: 2 ||(1/n0) log||B^(n0)|| ||_{L^2}.
double estimate_step_constant(const Cocycle& B, const ErgodicSystem& system, std::size_t n0, const McOptions& mc);

struct ScaleSandwich {
  double lower = 0.0;  // Lambda^((n+1) n0) - 2 C n0/n1
  double upper = 0.0;  // Lambda^(n n0) + 2 C n0/n1
  std::size_t blocks = 0;  // n with n1 = n n0 + r
  std::size_t remainder = 0;
};

/// Pure form: takes the two estimates. Requires n1 = n n0 + r with 0 <= r <= n0, n >= 1.
ScaleSandwich scale_sandwich(std::size_t n0, std::size_t n1, double lambda_n_n0, double lambda_n1_n0, double C);

struct SandwichCheck {
  ScaleSandwich interval;
  FiniteScaleLE direct;
  double sigma = 0.0;  // combined sigma used in the comparison
  Verdict lower_ok = Verdict::Inconclusive;
  Verdict upper_ok = Verdict::Inconclusive;
};

/// Monte Carlo form: estimates Lambda at n1, n n0 and (n+1) n0 and checks
/// that the direct value lies inside the interval.
SandwichCheck scale_sandwich_check(const Cocycle& B, const ErgodicSystem& system, std::size_t n0, std::size_t n1,
                                   double C, const McOptions& mc);

struct AngleCheck {
  double threshold = 0.0;  // -(m1 + m2)(eta + 2 eps_n), in log form
  double violation = 0.0;
  double ci_radius = 0.0;
  double predicted = 0.0;  // 3 iota_n
  Verdict proximity = Verdict::Inconclusive;  // max_i |Lambda^(m1+m2) - Lambda^(mi)| < eta
  std::size_t samples = 0;
  Verdict verdict = Verdict::Inconclusive;  // violation < predicted
};

/// Fraction of phases with
/// ||B^(m1+m2)(x)|| / (||B^(m2)(T^m1 x)|| ||B^(m1)(x)||) <= exp(-(m1+m2)(eta + 2 eps_n)).
/// Verifies |Lambda^(m1+m2) - Lambda^(mi)| < eta from the same samples first;
/// throws GateError when that proximity fails.
AngleCheck angle_bound_check(const Cocycle& B, const ErgodicSystem& system, std::size_t m1, std::size_t m2,
                             double eta, std::size_t n, const DeviationProfile& profile, const McOptions& mc);

struct BlockwiseAP {
  double predicted = 0.0;  // AP estimate of log||B^(n n0)(x)||
  double direct = 0.0;     // renormalized log||B^(n n0)(x)||
  std::vector<double> single;     // log||g_i||, i = 0..n-1
  std::vector<double> pair;       // log||g_i g_{i-1}||, i = 1..n-1
  std::vector<double> log_gap;    // log gr(g_i), from ||g||^2 / ||wedge_2 g||
  std::vector<double> log_angle;  // pair[i-1] - single[i] - single[i-1]
  double terms_magnitude = 0.0;   // sum of |terms| entering the prediction
};

/// g_i = B^(n0)(T^{i n0} x), i < n. Requires n >= 2 and dim >= 2.
BlockwiseAP blockwise_ap_log_norm(const Cocycle& B, const ErgodicSystem& system, const Phase& x, std::size_t n0,
                                  std::size_t n);

struct GapProbe {
  double threshold = 0.0;     // kappa - 2 theta - 3 epsilon
  double violation = 0.0;     // fraction with (1/n) log gr <= threshold
  double ci_radius = 0.0;
  double gap = 0.0;           // Lambda_1^(n) - Lambda_2^(n)
  double gap_sigma = 0.0;
  double gap_bound = 0.0;     // threshold (1 - iota_n)
  Verdict gap_verdict = Verdict::Inconclusive;  // gap > gap_bound
  double predicted = 0.0;     // iota_n
  std::size_t samples = 0;
};

/// Verifies |Lambda^(n)(B) - Lambda^(n)(A)| < theta first (GateError otherwise).
GapProbe gap_lower_bound_probe(const Cocycle& B, const Cocycle& A, const ErgodicSystem& system, std::size_t n,
                               double theta, double epsilon, double kappa, const DeviationProfile& profile,
                               const McOptions& mc);

/// theta_K <= theta_0 + 4 eta_0 + 5 C sum_k n_k / n_{k+1} along a state history.
struct BudgetCheck {
  double theta_final = 0.0;
  double bound = 0.0;
  bool ok = false;
};
BudgetCheck check_budget(const std::vector<InductiveState>& history);

/// Intervals S_0 = [n00, floor(e^{n00})], S_{k+1} = [f(n_k^-), f(n_k^+)] with
/// f(t) = t^{1+a} or f = psi. Endpoints are kept as doubles.
struct ScaleInterval {
  double lower;
  double upper;
};

class ScaleSchedule {
 public:
  /// Throws InvalidInput if consecutive intervals fail to overlap and
  /// CapacityError if an endpoint overflows.
  static ScaleSchedule power(double n00, double growth, std::size_t count);
  static ScaleSchedule psi(double n00, const DeviationProfile& profile, std::size_t count);

  const std::vector<ScaleInterval>& intervals() const noexcept { return intervals_; }
  bool overlapping() const noexcept;

 private:
  std::vector<ScaleInterval> intervals_;
};

/// n_{k+1} = n_k * ceil(n_k^a): scales that are multiples of their predecessor.
std::vector<std::size_t> power_scales(std::size_t n0, double growth, std::size_t steps);

}  // namespace lyap
