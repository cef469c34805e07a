#include "lyap/multiscale.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "lyap/errors.hpp"
#include "lyap/monte_carlo.hpp"
#include "lyap/rng.hpp"

namespace lyap {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::string fmt(const char* pattern, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, pattern, a, b);
  return buf;
}

// -inf minus -inf is reported as -inf rather than NaN.
double clean(double v) { return std::isnan(v) ? kNegInf : v; }

FiniteScaleLE le_from(std::span<const double> values, std::size_t n, std::uint64_t seed) {
  const auto s = summarize(values);
  return {n, 1, s.mean, s.std_error, s.samples, s.neg_inf, seed};
}

struct Paired {
  double mean;
  double sigma;
};

Paired paired(std::span<const double> values) {
  const auto s = summarize(values);
  return {s.mean, s.std_error};
}

}  // namespace

void InductiveState::validate() const {
  if (!(eta >= 0.0) || !(theta >= 0.0)) throw InvalidInput("eta and theta must be >= 0");
  if (!(epsilon > 0.0)) throw InvalidInput("epsilon must be positive");
  if (!(kappa > 0.0)) throw InvalidInput("kappa must be positive");
  if (!(C > 0.0) || !std::isfinite(C)) throw InvalidInput("step constant C must be positive");
}

std::string GateCheck::reason() const {
  if (!ok && lhs >= rhs) return fmt("4 eta + 2 theta = %.17g is not below kappa - 12 eps = %.17g", lhs, rhs);
  if (!epsilon_ok) return "epsilon is not below kappa / 20";
  return "ok";
}

GateCheck inductive_gate(const InductiveState& s) {
  s.validate();
  GateCheck g;
  g.lhs = 4.0 * s.eta + 2.0 * s.theta;
  g.rhs = s.kappa - 12.0 * s.epsilon;
  g.epsilon_ok = s.epsilon < s.kappa / 20.0;
  g.ok = g.lhs < g.rhs && g.epsilon_ok;
  return g;
}

ScaleWindow scale_window(std::size_t n0, const DeviationProfile& profile, double growth) {
  if (!(growth > 0.0)) throw InvalidInput("growth exponent a must be positive");
  const double t = static_cast<double>(n0);
  return {std::pow(t, 1.0 + growth), profile.psi(t)};
}

InductiveState advance_budget(const InductiveState& s, std::size_t n1) {
  if (n1 <= s.n || s.n == 0) throw InvalidInput("next scale must exceed the current scale");
  InductiveState next = s;
  const double step = s.C * static_cast<double>(s.n) / static_cast<double>(n1);
  next.theta = s.theta + 4.0 * s.eta + step;
  next.eta = step;
  next.n = n1;
  return next;
}

PairedStep measure_step(const Cocycle& B, const Cocycle* A, const ErgodicSystem& system, std::size_t n0,
                        std::size_t n1, const McOptions& mc) {
  if (n0 == 0 || n1 <= 2 * n0) throw InvalidInput("measure_step needs 1 <= n0 and n1 > 2 n0");
  if (mc.samples == 0) throw InvalidInput("samples must be >= 1");
  B.check_compatible(system);
  if (A) {
    A->check_compatible(system);
    if (A->dim() != B.dim()) throw InvalidInput("reference cocycle has a different dimension");
  }
  const std::size_t checkpoints[] = {n0, 2 * n0, n1};
  const auto cols = parallel_map_multi(mc.samples, mc.workers, A ? 4 : 3, [&](std::size_t i, std::span<double> out) {
    const Phase x = sample_phase(system, derive_seed(mc.seed, i));
    const auto logs = iterate_checkpoints(B, system, x, checkpoints);
    out[0] = logs[0] / static_cast<double>(n0);
    out[1] = logs[1] / static_cast<double>(2 * n0);
    out[2] = logs[2] / static_cast<double>(n1);
    if (A) out[3] = iterate(*A, system, x, n0).log_norm / static_cast<double>(n0);
  });

  PairedStep p;
  p.m.b_n0 = le_from(cols[0], n0, mc.seed);
  p.m.b_2n0 = le_from(cols[1], 2 * n0, mc.seed);
  p.m.b_n1 = le_from(cols[2], n1, mc.seed);
  std::vector<double> comb(mc.samples), drop(mc.samples), prox;
  for (std::size_t i = 0; i < mc.samples; ++i) {
    comb[i] = clean(cols[2][i] + cols[0][i] - 2.0 * cols[1][i]);
    drop[i] = clean(cols[0][i] - cols[1][i]);
  }
  const auto c = paired(comb);
  const auto d = paired(drop);
  p.combination = c.mean;
  p.combination_sigma = c.sigma;
  p.drop = d.mean;
  p.drop_sigma = d.sigma;
  if (A) {
    p.m.a_n0 = le_from(cols[3], n0, mc.seed);
    prox.resize(mc.samples);
    for (std::size_t i = 0; i < mc.samples; ++i) prox[i] = clean(cols[0][i] - cols[3][i]);
    const auto q = paired(prox);
    p.proximity = q.mean;
    p.proximity_sigma = q.sigma;
  }
  return p;
}

StepResult inductive_step(const InductiveState& s, std::size_t n1, const PairedStep& data,
                          const DeviationProfile& profile, double growth) {
  StepResult r;
  r.gate = inductive_gate(s);
  if (!r.gate.ok) throw GateError("inductive gate", r.gate.reason());
  const auto window = scale_window(s.n, profile, growth);
  if (!window.contains(static_cast<double>(n1))) {
    throw InvalidInput("n1 = " + std::to_string(n1) + " outside the window " +
                       fmt("[%.17g, %.17g]", window.lower, window.upper));
  }
  if (data.m.b_n0.n != s.n || data.m.b_2n0.n != 2 * s.n || data.m.b_n1.n != n1)
    throw InvalidInput("measurements do not match the scales n0, 2 n0, n1");

  r.hypothesis_a = check_less(data.drop, data.drop_sigma, s.eta);
  if (data.m.a_n0) r.hypothesis_b = check_less(std::abs(data.proximity), data.proximity_sigma, s.theta);
  r.measured = std::abs(data.combination);
  r.sigma = data.combination_sigma;
  r.bound = s.C * static_cast<double>(s.n) / static_cast<double>(n1);
  r.verdict = check_less(r.measured, r.sigma, r.bound);
  r.next = advance_budget(s, n1);
  return r;
}

double estimate_step_constant(const Cocycle& B, const ErgodicSystem& system, std::size_t n0, const McOptions& mc) {
  const auto values = sample_log_norms(B, system, n0, mc);
  double sum = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidInput("step constant undefined: a sampled product vanishes");
    sum += v * v;
  }
  return 2.0 * std::sqrt(sum / static_cast<double>(values.size()));
}

ScaleSandwich scale_sandwich(std::size_t n0, std::size_t n1, double lambda_n_n0, double lambda_n1_n0, double C) {
  if (n0 == 0) throw InvalidInput("n0 must be >= 1");
  if (n1 < n0) throw InvalidInput("scale sandwich needs n1 = n n0 + r with n >= 1 and 0 <= r <= n0");
  if (!(C >= 0.0)) throw InvalidInput("constant C must be >= 0");
  ScaleSandwich s;
  s.blocks = n1 / n0;
  s.remainder = n1 % n0;
  const double pad = 2.0 * C * static_cast<double>(n0) / static_cast<double>(n1);
  s.lower = lambda_n1_n0 - pad;
  s.upper = lambda_n_n0 + pad;
  return s;
}

SandwichCheck scale_sandwich_check(const Cocycle& B, const ErgodicSystem& system, std::size_t n0, std::size_t n1,
                                   double C, const McOptions& mc) {
  if (n0 == 0 || n1 < n0) throw InvalidInput("scale sandwich needs n1 >= n0 >= 1");
  if (mc.samples == 0) throw InvalidInput("samples must be >= 1");
  const std::size_t n = n1 / n0;
  const std::size_t a = n * n0, b = (n + 1) * n0;
  // a <= n1 < b; a == n1 when n0 divides n1.
  std::vector<std::size_t> cps{a};
  if (n1 > a) cps.push_back(n1);
  cps.push_back(b);
  const auto cols = parallel_map_multi(mc.samples, mc.workers, 3, [&](std::size_t i, std::span<double> out) {
    const Phase x = sample_phase(system, derive_seed(mc.seed, i));
    const auto logs = iterate_checkpoints(B, system, x, cps);
    out[0] = logs.front() / static_cast<double>(a);
    out[1] = (n1 > a ? logs[1] : logs.front()) / static_cast<double>(n1);
    out[2] = logs.back() / static_cast<double>(b);
  });
  SandwichCheck r;
  r.direct = le_from(cols[1], n1, mc.seed);
  r.interval = scale_sandwich(n0, n1, summarize(cols[0]).mean, summarize(cols[2]).mean, C);
  const double pad = 2.0 * C * static_cast<double>(n0) / static_cast<double>(n1);
  std::vector<double> up(mc.samples), low(mc.samples);
  for (std::size_t i = 0; i < mc.samples; ++i) {
    up[i] = clean(cols[1][i] - cols[0][i]);   // Lambda^(n1) - Lambda^(n n0)
    low[i] = clean(cols[2][i] - cols[1][i]);  // Lambda^((n+1) n0) - Lambda^(n1)
  }
  const auto u = paired(up);
  const auto l = paired(low);
  r.sigma = std::max(u.sigma, l.sigma);
  r.upper_ok = check_less(u.mean, u.sigma, pad);
  r.lower_ok = check_less(l.mean, l.sigma, pad);
  return r;
}

AngleCheck angle_bound_check(const Cocycle& B, const ErgodicSystem& system, std::size_t m1, std::size_t m2,
                             double eta, std::size_t n, const DeviationProfile& profile, const McOptions& mc) {
  if (static_cast<double>(n) < profile.t_min()) throw InvalidInput("scale n is below the profile threshold");
  if (m1 < n || m2 < n) throw InvalidInput("angle bound needs m1, m2 >= n");
  if (!(eta >= 0.0)) throw InvalidInput("eta must be >= 0");
  if (mc.samples == 0) throw InvalidInput("samples must be >= 1");
  B.check_compatible(system);
  const std::size_t cps[] = {m1, m1 + m2};
  const auto cols = parallel_map_multi(mc.samples, mc.workers, 3, [&](std::size_t i, std::span<double> out) {
    const Phase x = sample_phase(system, derive_seed(mc.seed, i));
    const auto logs = iterate_checkpoints(B, system, x, cps);
    Phase y = x;
    y.shift_by(system, m1);
    out[0] = logs[0];
    out[1] = iterate(B, system, y, m2).log_norm;
    out[2] = logs[1];
  });

  const double dm1 = static_cast<double>(m1), dm2 = static_cast<double>(m2), dm = dm1 + dm2;
  std::vector<double> d1(mc.samples), d2(mc.samples);
  for (std::size_t i = 0; i < mc.samples; ++i) {
    d1[i] = clean(cols[2][i] / dm - cols[0][i] / dm1);
    d2[i] = clean(cols[2][i] / dm - cols[1][i] / dm2);
  }
  const auto p1 = paired(d1);
  const auto p2 = paired(d2);
  const Verdict v1 = check_less(std::abs(p1.mean), p1.sigma, eta);
  const Verdict v2 = check_less(std::abs(p2.mean), p2.sigma, eta);
  if (v1 == Verdict::Fails || v2 == Verdict::Fails) {
    throw GateError("angle proximity",
                    fmt("|Lambda^(m1+m2) - Lambda^(mi)| reaches %.17g against eta = %.17g",
                        std::max(std::abs(p1.mean), std::abs(p2.mean)), eta));
  }

  AngleCheck r;
  r.proximity = (v1 == Verdict::Holds && v2 == Verdict::Holds) ? Verdict::Holds : Verdict::Inconclusive;
  const double eps_n = profile.epsilon(static_cast<double>(n));
  r.threshold = -dm * (eta + 2.0 * eps_n);
  std::size_t bad = 0;
  for (std::size_t i = 0; i < mc.samples; ++i) {
    const double log_ratio = cols[2][i] - cols[0][i] - cols[1][i];
    if (!(log_ratio > r.threshold)) ++bad;
  }
  r.samples = mc.samples;
  r.violation = static_cast<double>(bad) / static_cast<double>(mc.samples);
  r.ci_radius = binomial_ci_radius(r.violation, mc.samples);
  r.predicted = 3.0 * profile.iota(static_cast<double>(n));
  r.verdict = check_less(r.violation, r.ci_radius / kSigmaMultiplier, r.predicted);
  return r;
}

BlockwiseAP blockwise_ap_log_norm(const Cocycle& B, const ErgodicSystem& system, const Phase& x, std::size_t n0,
                                  std::size_t n) {
  if (n < 2) throw InvalidInput("blockwise AP needs n >= 2 blocks");
  if (n0 == 0) throw InvalidInput("block scale n0 must be >= 1");
  if (B.dim() < 2) throw InvalidInput("blockwise AP needs dimension >= 2");
  const Cocycle wedge = Cocycle::exterior(B, 2);

  BlockwiseAP r;
  r.single.resize(n);
  r.log_gap.resize(n);
  std::vector<Matrix> unit(n);
  Phase y = x;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) y.shift_by(system, n0);
    auto it = iterate(B, system, y, n0);
    r.single[i] = it.log_norm;
    unit[i] = std::move(it.direction);
    const double w = iterate(wedge, system, y, n0).log_norm;
    r.log_gap[i] = w == kNegInf ? std::numeric_limits<double>::infinity() : 2.0 * it.log_norm - w;
  }
  r.pair.resize(n - 1);
  r.log_angle.resize(n - 1);
  Matrix tmp(B.dim());
  for (std::size_t i = 1; i < n; ++i) {
    multiply_into(unit[i], unit[i - 1], tmp);
    const double s = op_norm(tmp);
    r.log_angle[i - 1] = s == 0.0 ? kNegInf : std::log(s);
    r.pair[i - 1] = clean(r.single[i] + r.single[i - 1] + r.log_angle[i - 1]);
  }
  const std::span<const double> inner(r.single.data() + 1, n - 2);
  r.predicted = clean(ap_predict_log_norm(r.pair, inner));
  for (double v : r.pair) r.terms_magnitude += std::abs(v);
  for (double v : inner) r.terms_magnitude += std::abs(v);
  r.direct = iterate(B, system, x, n * n0).log_norm;
  return r;
}

GapProbe gap_lower_bound_probe(const Cocycle& B, const Cocycle& A, const ErgodicSystem& system, std::size_t n,
                               double theta, double epsilon, double kappa, const DeviationProfile& profile,
                               const McOptions& mc) {
  if (n == 0) throw InvalidInput("scale n must be >= 1");
  if (B.dim() < 2) throw InvalidInput("gap probe needs dimension >= 2");
  if (A.dim() != B.dim()) throw InvalidInput("reference cocycle has a different dimension");
  if (!(theta >= 0.0) || !(epsilon > 0.0) || !(kappa > 0.0)) throw InvalidInput("need theta >= 0, eps > 0, kappa > 0");
  if (mc.samples == 0) throw InvalidInput("samples must be >= 1");
  B.check_compatible(system);
  A.check_compatible(system);
  const Cocycle wedge = Cocycle::exterior(B, 2);
  const double dn = static_cast<double>(n);
  const auto cols = parallel_map_multi(mc.samples, mc.workers, 3, [&](std::size_t i, std::span<double> out) {
    const Phase x = sample_phase(system, derive_seed(mc.seed, i));
    const double l1 = iterate(B, system, x, n).log_norm;
    const double l2 = iterate(wedge, system, x, n).log_norm;
    out[0] = l2 == kNegInf ? std::numeric_limits<double>::infinity() : (2.0 * l1 - l2) / dn;
    out[1] = l1 / dn;
    out[2] = iterate(A, system, x, n).log_norm / dn;
  });

  std::vector<double> prox(mc.samples);
  for (std::size_t i = 0; i < mc.samples; ++i) prox[i] = clean(cols[1][i] - cols[2][i]);
  const auto p = paired(prox);
  if (check_less(std::abs(p.mean), p.sigma, theta) == Verdict::Fails) {
    throw GateError("gap proximity", fmt("|Lambda^(n)(B) - Lambda^(n)(A)| = %.17g is not below theta = %.17g",
                                         std::abs(p.mean), theta));
  }

  GapProbe r;
  r.samples = mc.samples;
  r.threshold = kappa - 2.0 * theta - 3.0 * epsilon;
  std::size_t bad = 0;
  std::vector<double> gaps(mc.samples);
  for (std::size_t i = 0; i < mc.samples; ++i) {
    const double g = cols[0][i];
    if (!(g > r.threshold)) ++bad;
    gaps[i] = std::isinf(g) && g > 0 ? kDefaultKappaCap : g;
  }
  r.violation = static_cast<double>(bad) / static_cast<double>(mc.samples);
  r.ci_radius = binomial_ci_radius(r.violation, mc.samples);
  const auto gs = summarize(gaps);
  r.gap = gs.mean;
  r.gap_sigma = gs.std_error;
  r.predicted = static_cast<double>(n) >= profile.t_min() ? profile.iota(dn) : 1.0;
  r.gap_bound = r.threshold * (1.0 - r.predicted);
  r.gap_verdict = check_less(r.gap_bound, r.gap_sigma, r.gap);
  return r;
}

BudgetCheck check_budget(const std::vector<InductiveState>& history) {
  if (history.empty()) throw InvalidInput("budget check needs a state history");
  const auto& first = history.front();
  double ratio_sum = 0.0;
  for (std::size_t k = 1; k < history.size(); ++k)
    ratio_sum += static_cast<double>(history[k - 1].n) / static_cast<double>(history[k].n);
  BudgetCheck b;
  b.theta_final = history.back().theta;
  b.bound = first.theta + 4.0 * first.eta + 5.0 * first.C * ratio_sum;
  b.ok = b.theta_final <= b.bound * (1.0 + 1e-12);
  return b;
}

bool ScaleSchedule::overlapping() const noexcept {
  for (std::size_t k = 1; k < intervals_.size(); ++k)
    if (!(intervals_[k].lower < intervals_[k - 1].upper)) return false;
  return true;
}

namespace {

template <class F>
std::vector<ScaleInterval> build_schedule(double n00, std::size_t count, F&& f) {
  if (!(n00 >= 1.0)) throw InvalidInput("first scale must be >= 1");
  if (count == 0) throw InvalidInput("schedule needs at least one interval");
  std::vector<ScaleInterval> out;
  out.push_back({n00, std::floor(std::exp(n00))});
  if (!std::isfinite(out.back().upper)) throw CapacityError("exp(n00) overflows");
  for (std::size_t k = 1; k < count; ++k) {
    const auto& prev = out.back();
    const double lo = f(prev.lower), hi = f(prev.upper);
    if (!std::isfinite(lo) || !std::isfinite(hi)) throw CapacityError("scale interval endpoint overflows");
    if (!(lo < prev.upper)) throw InvalidInput("consecutive scale intervals do not overlap");
    out.push_back({lo, hi});
  }
  return out;
}

}  // namespace

ScaleSchedule ScaleSchedule::power(double n00, double growth, std::size_t count) {
  if (!(growth > 0.0)) throw InvalidInput("growth exponent a must be positive");
  ScaleSchedule s;
  s.intervals_ = build_schedule(n00, count, [&](double t) { return std::pow(t, 1.0 + growth); });
  return s;
}

ScaleSchedule ScaleSchedule::psi(double n00, const DeviationProfile& profile, std::size_t count) {
  if (n00 < profile.t_min()) throw InvalidInput("first scale is below the profile threshold");
  ScaleSchedule s;
  s.intervals_ = build_schedule(n00, count, [&](double t) { return std::floor(profile.psi(t)); });
  return s;
}

std::vector<std::size_t> power_scales(std::size_t n0, double growth, std::size_t steps) {
  if (n0 == 0) throw InvalidInput("n0 must be >= 1");
  if (!(growth > 0.0)) throw InvalidInput("growth exponent a must be positive");
  std::vector<std::size_t> out{n0};
  for (std::size_t k = 0; k < steps; ++k) {
    const std::size_t n = out.back();
    const auto factor = static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(n), growth)));
    if (n > std::numeric_limits<std::size_t>::max() / std::max<std::size_t>(factor, 1))
      throw CapacityError("scale overflow in the power schedule");
    out.push_back(n * std::max<std::size_t>(factor, 2));
  }
  return out;
}

}  // namespace lyap
