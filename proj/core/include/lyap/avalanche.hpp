#pragma once

// Avalanche Principle on finite chains g_0, ..., g_{n-1} of square matrices.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "lyap/linalg.hpp"

namespace lyap {

inline constexpr double kDefaultGateConstant = 0.01;

/// Twice the largest defect * eps^2 / (n * kappa) over the calibration
/// ensemble: 10^4 generated chains, eps = 0.5, kappa = 1e-4, n cycling
/// through 2..200, seed 0 (see kCalibrationLengths). The acceptance suite
/// recomputes it.
inline constexpr double kCalibratedCAP = 0.21457351599196706;

inline constexpr std::size_t kCalibrationTrials = 10000;
inline constexpr std::size_t kCalibrationMinLength = 2;
inline constexpr std::size_t kCalibrationMaxLength = 200;

struct APHypotheses {
  double epsilon = 0.5;  // angle threshold, in (0, 1)
  double kappa = 1e-4;   // inverse gap threshold, > 0
  double c_gate = kDefaultGateConstant;

  /// Throws InvalidInput unless 0 < epsilon < 1, kappa > 0, c_gate > 0.
  void validate() const;
  /// kappa <= c_gate * epsilon^2.
  bool gate_ok() const noexcept { return kappa <= c_gate * epsilon * epsilon; }
};

enum class APCondition { None, Gap, Angle };

std::string_view to_string(APCondition c) noexcept;

struct HypothesisCheck {
  bool ok = true;
  std::size_t index = 0;  // first violating index (matrix index for Gap, i of the pair (g_i, g_{i-1}) for Angle)
  APCondition failed = APCondition::None;
};

/// gr(g_i) > 1/kappa for every i and ||g_i g_{i-1}|| / (||g_i|| ||g_{i-1}||) > epsilon
/// for every i >= 1. Indices are scanned in increasing order; at each i the gap
/// condition is checked before the angle condition. The gate kappa <= c eps^2
/// is not part of this check (see APHypotheses::gate_ok).
HypothesisCheck check_hypotheses(std::span<const Matrix> chain, const APHypotheses& hyp);

/// Same check from precomputed logarithms: log_gap[i] = log gr(g_i) (may be
/// +inf), log_angle[i-1] = log of the angle ratio for the pair (g_i, g_{i-1}).
HypothesisCheck check_hypotheses_log(std::span<const double> log_gap, std::span<const double> log_angle,
                                     const APHypotheses& hyp);

/// |log||g^(n)|| + sum_{i=1}^{n-2} log||g_i|| - sum_{i=1}^{n-1} log||g_i g_{i-1}|||
/// with g^(n) = g_{n-1} ... g_0 formed with renormalization.
double ap_defect(std::span<const Matrix> chain);

/// sum(pair_log_norms) - sum(single_log_norms): the AP estimate of log||g^(n)||
/// given log||g_i g_{i-1}||, i = 1..n-1, and log||g_i||, i = 1..n-2.
double ap_predict_log_norm(std::span<const double> pair_log_norms, std::span<const double> single_log_norms);

struct APReport {
  std::size_t n = 0;
  double lhs_defect = 0.0;
  double bound = 0.0;  // C_AP * n * kappa / epsilon^2
  bool hypotheses_ok = false;
  bool gate_ok = false;
  bool satisfied = false;  // hypotheses_ok && lhs_defect <= bound
  HypothesisCheck check;
};

APReport verify_ap(std::span<const Matrix> chain, const APHypotheses& hyp, double c_ap = kCalibratedCAP);

/// g_i = R(theta_{i+1} + delta_{i+1}) diag(s_i, s_i k_i) R(theta_i)^T with
/// theta_i uniform on [0, 2 pi), |delta_i| <= 0.95 arccos(epsilon),
/// log s_i uniform on [-log 2, log 2] and k_i uniform on [0.1, 0.9] * kappa.
/// Such chains satisfy check_hypotheses(hyp) up to rounding.
std::vector<Matrix> hyperbolic_chain(std::size_t n, const APHypotheses& hyp, std::uint64_t seed);

struct CalibrationResult {
  double max_ratio = 0.0;  // max defect * eps^2 / (n kappa) over chains passing the hypotheses
  double c_ap = 0.0;       // 2 * max_ratio
  std::size_t chains = 0;
  std::size_t passing = 0;
};

/// Calibration sweep over `trials` generated chains with n cycling through
/// `lengths`; chain t uses seed derive_seed(seed, t).
CalibrationResult calibrate_c_ap(const APHypotheses& hyp, std::span<const std::size_t> lengths,
                                 std::size_t trials, std::uint64_t seed, unsigned workers = 1);

/// kCalibrationMinLength, ..., kCalibrationMaxLength.
std::vector<std::size_t> calibration_lengths();

}  // namespace lyap
