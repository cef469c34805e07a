#pragma once

// Deviation profiles (eps(t), iota(t)), the scale maps psi and phi, and
// empirical large-deviation probes for Birkhoff averages and fiber norms.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lyap/cocycle.hpp"
#include "lyap/dynamics.hpp"
#include "lyap/monte_carlo.hpp"

namespace lyap {

/// eps(t) = eps0
struct DevConstant {
  double eps0 = 0.1;
};
/// eps(t) = t^{-a}
struct DevPower {
  double a = 0.1;
};
using DeviationSize = std::variant<DevConstant, DevPower>;

/// iota(t) = exp(-c t)
struct MesExponential {
  double c = 1.0;
};
/// iota(t) = exp(-c t^b), 0 < b < 1
struct MesSubExpPower {
  double c = 1.0;
  double b = 0.5;
};
/// iota(t) = exp(-c t / (log t)^b), 0 < b < 1
struct MesSubExpLog {
  double c = 1.0;
  double b = 0.5;
};
using DeviationMeasure = std::variant<MesExponential, MesSubExpPower, MesSubExpLog>;

inline constexpr double kDefaultTMin = 3.0;

struct AdmissibilityReport {
  bool devf_nonincreasing = false;
  bool mesf_decreasing = false;
  bool growth_sandwich = false;  // log t <~ log(1/iota(t)) <~ t
  bool phi_doubling = false;     // phi(2s) / phi(s) < 2 on the grid
  double min_log_ratio = 0.0;    // min log(1/iota(t)) / log t
  double max_linear_ratio = 0.0; // max log(1/iota(t)) / t
  double max_phi_doubling = 0.0; // max phi(2s) / phi(s)
  bool ok() const noexcept { return devf_nonincreasing && mesf_decreasing && growth_sandwich && phi_doubling; }
};

class DeviationProfile {
 public:
  /// Throws InvalidInput on non-positive rates, b outside (0, 1), a < 0,
  /// eps0 <= 0 or t_min < 3.
  DeviationProfile(DeviationSize devf, DeviationMeasure mesf, double t_min = kDefaultTMin);

  const DeviationSize& devf() const noexcept { return devf_; }
  const DeviationMeasure& mesf() const noexcept { return mesf_; }
  double t_min() const noexcept { return t_min_; }

  /// eps(t), for t >= t_min.
  double epsilon(double t) const;
  /// iota(t), for t >= t_min.
  double iota(double t) const;
  /// log iota(t), for t >= t_min.
  double log_iota(double t) const;
  /// log iota(t) from the formula of the class wherever it is defined
  /// (t > 0, and t > 1 for SubExpLog). Used where t may fall below t_min.
  double log_iota_extended(double t) const;

  /// psi(t) = t iota(t)^{-1/2}, t >= t_min. May be +inf in double precision.
  double psi(double t) const;
  double log_psi(double t) const;
  /// The t >= t_min with psi(t) = s, by bisection down to adjacent doubles.
  double phi(double s) const;
  /// psi(t_min): the smallest admissible argument of phi.
  double psi_min() const { return psi(t_min_); }

  /// n++ = floor(psi(n)). Throws CapacityError when it does not fit in 63 bits.
  std::uint64_t next_scale(std::uint64_t n) const;
  /// n-- = floor(phi(n)) for n >= t_min. Below psi(t_min), where phi is
  /// undefined, n-- is clamped to floor(t_min).
  std::uint64_t prev_scale(std::uint64_t n) const;

  /// Grid checks of monotonicity, the growth sandwich and phi(2s)/phi(s) < 2
  /// for s up to s_max.
  AdmissibilityReport admissibility(double s_max = 1e6) const;

  std::string describe() const;

 private:
  void require_domain(double t) const;

  DeviationSize devf_;
  DeviationMeasure mesf_;
  double t_min_;
};

struct LDTParameter {
  std::size_t n0;
  DeviationProfile profile;

  /// Throws InvalidInput unless n0 >= profile.t_min().
  LDTParameter(std::size_t n0, DeviationProfile profile);
};

struct DeviationEstimate {
  std::size_t n = 0;
  double epsilon = 0.0;    // deviation size used
  double center = 0.0;     // mean the averages are compared with
  double measure = 0.0;    // fraction of sampled phases deviating by more than epsilon
  double ci_radius = 0.0;  // 3 sqrt(p (1 - p) / samples)
  std::size_t violations = 0;
  std::size_t samples = 0;
  std::size_t neg_inf = 0;  // -inf samples, counted as violations
};

/// 3-sigma binomial radius for a proportion.
double binomial_ci_radius(double p, std::size_t samples);

/// Fraction of phases with |(1/n) sum_{j<n} xi(T^j x) - mean| > epsilon.
/// Without `mean`, the exact mean is used for indicators; user functions
/// get a Monte Carlo mean from 10x the samples at an independent seed.
DeviationEstimate empirical_base_ldt(const ErgodicSystem& system, const Observable& xi, std::size_t n,
                                     double epsilon, const McOptions& mc,
                                     std::optional<double> mean = std::nullopt);

/// Fraction of phases with |(1/n) log||A^(n)(x)|| - Lambda_1^(n)(A)| > epsilon.
/// Lambda_1^(n) is estimated first with 10x the samples at an independent
/// seed unless `lambda` is given.
DeviationEstimate empirical_fiber_ldt(const Cocycle& A, const ErgodicSystem& system, std::size_t n,
                                      double epsilon, const McOptions& mc,
                                      std::optional<double> lambda = std::nullopt);

struct MeasurePoint {
  double n;
  double value;
};

struct MesfFit {
  double c = 0.0;          // exp(-c n) rate, = -slope
  double intercept = 0.0;  // log value at n = 0
  double r_squared = 1.0;
  std::vector<std::size_t> corrected;  // indices whose zero value was replaced by 1/(2 samples)
  MesExponential mesf() const { return {c}; }
};

/// Least squares of log(value) against n. Needs >= 4 points with values in
/// [0, 1]; zeros become 1/(2 samples).
MesfFit fit_mesf(std::span<const MeasurePoint> points, std::size_t samples);

/// Upper confidence limit for a proportion: value + 3 sigma, or
/// -log(0.00135) / samples (one-sided 3 sigma) for a zero count.
double measure_upper_limit(double value, std::size_t samples);

/// Largest c with exp(-c n) >= measure_upper_limit at every point: the
/// fastest exponential profile the data certifies. Same input rules as fit_mesf;
/// r_squared is left at 0.
MesfFit envelope_mesf(std::span<const MeasurePoint> points, std::size_t samples);

}  // namespace lyap
