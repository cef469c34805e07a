#include "lyap/ldt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "lyap/errors.hpp"
#include "lyap/rng.hpp"

namespace lyap {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool positive_finite(double v) { return v > 0.0 && std::isfinite(v); }

// Reserved stream indices for pilot estimates, far from per-sample indices.
constexpr std::uint64_t kPilotStream = 0xa5a5a5a5a5a5a5a5ULL;

}  // namespace

DeviationProfile::DeviationProfile(DeviationSize devf, DeviationMeasure mesf, double t_min)
    : devf_(std::move(devf)), mesf_(std::move(mesf)), t_min_(t_min) {
  if (!(t_min_ >= kDefaultTMin) || !std::isfinite(t_min_)) throw InvalidInput("profile t_min must be >= 3");
  std::visit(Overloaded{
                 [](const DevConstant& d) {
                   if (!positive_finite(d.eps0)) throw InvalidInput("constant deviation size must be positive");
                 },
                 [](const DevPower& d) {
                   if (!(d.a >= 0.0) || !std::isfinite(d.a)) throw InvalidInput("power deviation exponent must be >= 0");
                 },
             },
             devf_);
  const auto check_b = [](double b) {
    if (!(b > 0.0 && b < 1.0)) throw InvalidInput("sub-exponential exponent b must lie in (0, 1)");
  };
  std::visit(Overloaded{
                 [](const MesExponential& m) {
                   if (!positive_finite(m.c)) throw InvalidInput("measure rate c must be positive");
                 },
                 [&](const MesSubExpPower& m) {
                   if (!positive_finite(m.c)) throw InvalidInput("measure rate c must be positive");
                   check_b(m.b);
                 },
                 [&](const MesSubExpLog& m) {
                   if (!positive_finite(m.c)) throw InvalidInput("measure rate c must be positive");
                   check_b(m.b);
                 },
             },
             mesf_);
}

void DeviationProfile::require_domain(double t) const {
  if (!(t >= t_min_) || std::isnan(t)) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "argument %.17g below the profile domain t >= %.17g", t, t_min_);
    throw InvalidInput(buf);
  }
}

double DeviationProfile::epsilon(double t) const {
  require_domain(t);
  return std::visit(Overloaded{
                        [](const DevConstant& d) { return d.eps0; },
                        [&](const DevPower& d) { return std::pow(t, -d.a); },
                    },
                    devf_);
}

double DeviationProfile::log_iota_extended(double t) const {
  if (!(t > 0.0)) throw InvalidInput("deviation measure needs t > 0");
  return std::visit(Overloaded{
                        [&](const MesExponential& m) { return -m.c * t; },
                        [&](const MesSubExpPower& m) { return -m.c * std::pow(t, m.b); },
                        [&](const MesSubExpLog& m) {
                          if (!(t > 1.0)) throw InvalidInput("log-type deviation measure needs t > 1");
                          return -m.c * t / std::pow(std::log(t), m.b);
                        },
                    },
                    mesf_);
}

double DeviationProfile::log_iota(double t) const {
  require_domain(t);
  return log_iota_extended(t);
}

double DeviationProfile::iota(double t) const { return std::exp(log_iota(t)); }

double DeviationProfile::log_psi(double t) const { return std::log(t) - 0.5 * log_iota(t); }

double DeviationProfile::psi(double t) const { return std::exp(log_psi(t)); }

double DeviationProfile::phi(double s) const {
  const double lo_log = log_psi(t_min_);
  if (std::isnan(s) || !(s > 0.0) || std::log(s) < lo_log - 1e-15 * std::abs(lo_log)) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "phi argument %.17g below psi(t_min)", s);
    throw InvalidInput(buf);
  }
  if (std::isinf(s)) throw InvalidInput("phi argument must be finite");
  const double target = std::log(s);
  if (target <= lo_log) return t_min_;
  // psi(t) >= t, so phi(s) <= s; grow the bracket geometrically from t_min.
  double lo = t_min_;
  double hi = t_min_ * 2.0;
  while (log_psi(hi) < target) {
    lo = hi;
    hi *= 2.0;
  }
  // Bisect until the bracket cannot shrink; this is well past 1e-10 relative.
  for (;;) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    if (log_psi(mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  return std::abs(log_psi(lo) - target) <= std::abs(log_psi(hi) - target) ? lo : hi;
}

std::uint64_t DeviationProfile::next_scale(std::uint64_t n) const {
  const double t = static_cast<double>(n);
  const double lp = log_psi(t);
  // 2^63 bounds the scales this library iterates to.
  if (lp >= 63.0 * std::log(2.0)) throw CapacityError("next scale of " + std::to_string(n) + " overflows 63 bits");
  const auto next = static_cast<std::uint64_t>(std::floor(std::exp(lp)));
  return std::max(next, n + 1);
}

std::uint64_t DeviationProfile::prev_scale(std::uint64_t n) const {
  const double s = static_cast<double>(n);
  require_domain(s);
  if (std::log(s) <= log_psi(t_min_)) return static_cast<std::uint64_t>(std::floor(t_min_));
  return static_cast<std::uint64_t>(std::floor(phi(s)));
}

AdmissibilityReport DeviationProfile::admissibility(double s_max) const {
  AdmissibilityReport r;
  constexpr int kPoints = 400;
  const double t_hi = std::max(s_max, t_min_ * 2.0);
  std::vector<double> grid(kPoints);
  for (int i = 0; i < kPoints; ++i)
    grid[i] = t_min_ * std::pow(t_hi / t_min_, static_cast<double>(i) / (kPoints - 1));

  r.devf_nonincreasing = true;
  r.mesf_decreasing = true;
  r.min_log_ratio = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kPoints; ++i) {
    const double t = grid[i];
    const double decay = -log_iota(t);
    r.min_log_ratio = std::min(r.min_log_ratio, decay / std::log(t));
    r.max_linear_ratio = std::max(r.max_linear_ratio, decay / t);
    if (i > 0) {
      if (epsilon(t) > epsilon(grid[i - 1])) r.devf_nonincreasing = false;
      if (!(log_iota(t) < log_iota(grid[i - 1]))) r.mesf_decreasing = false;
    }
  }
  // The lower comparison must not degrade along the grid.
  const double first = -log_iota(grid.front()) / std::log(grid.front());
  const double last = -log_iota(grid.back()) / std::log(grid.back());
  r.growth_sandwich = r.min_log_ratio > 0.0 && std::isfinite(r.max_linear_ratio) && last >= first;

  const double s_lo = psi_min();
  r.phi_doubling = true;
  if (s_lo < s_max / 2.0) {
    for (int i = 0; i < kPoints; ++i) {
      const double s = s_lo * std::pow(s_max / 2.0 / s_lo, static_cast<double>(i) / (kPoints - 1));
      const double ratio = phi(2.0 * s) / phi(s);
      r.max_phi_doubling = std::max(r.max_phi_doubling, ratio);
    }
    r.phi_doubling = r.max_phi_doubling < 2.0;
  }
  return r;
}

std::string DeviationProfile::describe() const {
  char buf[160];
  const std::string dev = std::visit(Overloaded{
                                         [&](const DevConstant& d) {
                                           std::snprintf(buf, sizeof buf, "eps=%.17g", d.eps0);
                                           return std::string(buf);
                                         },
                                         [&](const DevPower& d) {
                                           std::snprintf(buf, sizeof buf, "eps=t^-%.17g", d.a);
                                           return std::string(buf);
                                         },
                                     },
                                     devf_);
  const std::string mes = std::visit(Overloaded{
                                         [&](const MesExponential& m) {
                                           std::snprintf(buf, sizeof buf, "iota=exp(-%.17g t)", m.c);
                                           return std::string(buf);
                                         },
                                         [&](const MesSubExpPower& m) {
                                           std::snprintf(buf, sizeof buf, "iota=exp(-%.17g t^%.17g)", m.c, m.b);
                                           return std::string(buf);
                                         },
                                         [&](const MesSubExpLog& m) {
                                           std::snprintf(buf, sizeof buf, "iota=exp(-%.17g t/log(t)^%.17g)", m.c,
                                                         m.b);
                                           return std::string(buf);
                                         },
                                     },
                                     mesf_);
  return dev + " " + mes;
}

LDTParameter::LDTParameter(std::size_t n0_, DeviationProfile profile_) : n0(n0_), profile(std::move(profile_)) {
  if (static_cast<double>(n0) < profile.t_min()) throw InvalidInput("LDT parameter n0 must be >= t_min");
}

double binomial_ci_radius(double p, std::size_t samples) {
  if (samples == 0) return 0.0;
  return 3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(samples));
}

namespace {

DeviationEstimate count_deviations(std::span<const double> values, double center, double epsilon, std::size_t n) {
  DeviationEstimate e;
  e.n = n;
  e.epsilon = epsilon;
  e.center = center;
  e.samples = values.size();
  for (double v : values) {
    if (v == -std::numeric_limits<double>::infinity()) {
      ++e.neg_inf;
      ++e.violations;
    } else if (std::abs(v - center) > epsilon) {
      ++e.violations;
    }
  }
  e.measure = static_cast<double>(e.violations) / static_cast<double>(e.samples);
  e.ci_radius = binomial_ci_radius(e.measure, e.samples);
  return e;
}

void require_probe_args(std::size_t n, double epsilon, const McOptions& mc) {
  if (n == 0) throw InvalidInput("scale n must be >= 1");
  if (mc.samples == 0) throw InvalidInput("samples must be >= 1");
  if (!(epsilon > 0.0)) throw InvalidInput("deviation size must be positive");
}

}  // namespace

DeviationEstimate empirical_base_ldt(const ErgodicSystem& system, const Observable& xi, std::size_t n,
                                     double epsilon, const McOptions& mc, std::optional<double> mean) {
  require_probe_args(n, epsilon, mc);
  double center = 0.0;
  if (mean) {
    center = *mean;
  } else if (std::holds_alternative<BoundedFunction>(xi.variant())) {
    McOptions pilot = mc;
    pilot.samples = 10 * mc.samples;
    pilot.seed = derive_seed(mc.seed, kPilotStream);
    const auto values = parallel_map(pilot.samples, pilot.workers, [&](std::size_t i) {
      return xi(sample_phase(system, derive_seed(pilot.seed, i)));
    });
    center = summarize(values).mean;
  } else {
    center = observable_mean(system, xi);
  }
  const auto values = parallel_map(mc.samples, mc.workers, [&](std::size_t i) {
    return birkhoff_average(system, xi, sample_phase(system, derive_seed(mc.seed, i)), n);
  });
  return count_deviations(values, center, epsilon, n);
}

DeviationEstimate empirical_fiber_ldt(const Cocycle& A, const ErgodicSystem& system, std::size_t n,
                                      double epsilon, const McOptions& mc, std::optional<double> lambda) {
  require_probe_args(n, epsilon, mc);
  double center = 0.0;
  if (lambda) {
    center = *lambda;
  } else {
    McOptions pilot = mc;
    pilot.samples = 10 * mc.samples;
    pilot.seed = derive_seed(mc.seed, kPilotStream);
    center = finite_scale_le(A, system, n, 1, pilot).value;
  }
  const auto values = sample_log_norms(A, system, n, mc);
  return count_deviations(values, center, epsilon, n);
}

MesfFit fit_mesf(std::span<const MeasurePoint> points, std::size_t samples) {
  if (points.size() < 4) throw InvalidInput("fit_mesf needs at least 4 scales");
  if (samples == 0) throw InvalidInput("fit_mesf needs the sample count");
  MesfFit fit;
  std::vector<double> x(points.size()), y(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (!std::isfinite(p.n) || !(p.value >= 0.0 && p.value <= 1.0))
      throw InvalidInput("fit_mesf values must lie in [0, 1]");
    double v = p.value;
    if (v == 0.0) {
      v = 1.0 / (2.0 * static_cast<double>(samples));
      fit.corrected.push_back(i);
    }
    x[i] = p.n;
    y[i] = std::log(v);
  }
  const double k = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw InvalidInput("fit_mesf needs at least two distinct scales");
  const double slope = sxy / sxx;
  fit.c = -slope;
  if (fit.c == 0.0) fit.c = 0.0;  // no negative zero in reports
  fit.intercept = my - slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + slope * x[i]);
    sse += r * r;
  }
  fit.r_squared = syy == 0.0 ? 1.0 : 1.0 - sse / syy;
  return fit;
}

double measure_upper_limit(double value, std::size_t samples) {
  if (samples == 0) throw InvalidInput("upper limit needs the sample count");
  if (value == 0.0) return -std::log(0.00135) / static_cast<double>(samples);
  return std::min(1.0, value + binomial_ci_radius(value, samples));
}

MesfFit envelope_mesf(std::span<const MeasurePoint> points, std::size_t samples) {
  if (points.size() < 4) throw InvalidInput("envelope_mesf needs at least 4 scales");
  if (samples == 0) throw InvalidInput("envelope_mesf needs the sample count");
  MesfFit fit;
  fit.c = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (!(p.n > 0.0) || !std::isfinite(p.n) || !(p.value >= 0.0 && p.value <= 1.0))
      throw InvalidInput("envelope_mesf needs n > 0 and values in [0, 1]");
    if (p.value == 0.0) fit.corrected.push_back(i);
    fit.c = std::min(fit.c, -std::log(measure_upper_limit(p.value, samples)) / p.n);
  }
  if (fit.c == 0.0) fit.c = 0.0;
  fit.r_squared = 0.0;
  return fit;
}

}  // namespace lyap
