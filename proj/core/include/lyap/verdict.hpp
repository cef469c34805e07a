#pragma once

#include <string_view>

namespace lyap {

/// Outcome of checking `measured < bound` when `measured` carries Monte Carlo
/// error sigma. Inconclusive means the bound lies within 3 sigma.
enum class Verdict { Holds, Fails, Inconclusive };

inline constexpr double kSigmaMultiplier = 3.0;

/// Holds if measured + 3 sigma < bound, fails if measured - 3 sigma >= bound.
/// With sigma = 0 this is the plain strict comparison.
constexpr Verdict check_less(double measured, double sigma, double bound) noexcept {
  if (measured + kSigmaMultiplier * sigma < bound) return Verdict::Holds;
  if (measured - kSigmaMultiplier * sigma >= bound) return Verdict::Fails;
  return Verdict::Inconclusive;
}

constexpr std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::Holds: return "holds";
    case Verdict::Fails: return "fails";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

}  // namespace lyap
