#include "lyap/avalanche.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "lyap/errors.hpp"
#include "lyap/monte_carlo.hpp"
#include "lyap/rng.hpp"

namespace lyap {

void APHypotheses::validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidInput("AP epsilon must lie in (0, 1)");
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw InvalidInput("AP kappa must be positive");
  if (!(c_gate > 0.0) || !std::isfinite(c_gate)) throw InvalidInput("AP gate constant must be positive");
}

std::string_view to_string(APCondition c) noexcept {
  switch (c) {
    case APCondition::None: return "none";
    case APCondition::Gap: return "gap";
    case APCondition::Angle: return "angle";
  }
  return "unknown";
}

namespace {

void require_chain(std::span<const Matrix> chain) {
  if (chain.size() < 2) throw InvalidInput("AP chain needs at least two matrices");
  const auto d = chain.front().dim();
  if (d < 2) throw InvalidInput("AP chain matrices need dimension >= 2");
  for (const auto& g : chain)
    if (g.dim() != d) throw InvalidInput("AP chain matrices must share one dimension");
}

double op_norm_nonzero(const Matrix& g) {
  const double s = op_norm(g);
  if (s == 0.0) throw InvalidInput("AP chain contains a zero matrix");
  return s;
}

double log_op_norm_nonzero(const Matrix& g) { return std::log(op_norm_nonzero(g)); }

// Division rather than multiplication by 1/s, so that exact cases stay exact.
void divide_by(Matrix& m, double s) {
  for (double& v : m.data()) v /= s;
}

}  // namespace

HypothesisCheck check_hypotheses(std::span<const Matrix> chain, const APHypotheses& hyp) {
  require_chain(chain);
  hyp.validate();
  const std::size_t n = chain.size();
  std::vector<double> log_gap(n);
  std::vector<double> log_angle(n - 1);
  std::vector<double> log_norm(n);
  for (std::size_t i = 0; i < n; ++i) {
    log_gap[i] = std::log(gap_ratio(chain[i]));
    log_norm[i] = log_op_norm_nonzero(chain[i]);
  }
  for (std::size_t i = 1; i < n; ++i) {
    const double pair = op_norm(chain[i] * chain[i - 1]);
    log_angle[i - 1] = (pair == 0.0 ? -std::numeric_limits<double>::infinity() : std::log(pair)) -
                       log_norm[i] - log_norm[i - 1];
  }
  return check_hypotheses_log(log_gap, log_angle, hyp);
}

HypothesisCheck check_hypotheses_log(std::span<const double> log_gap, std::span<const double> log_angle,
                                     const APHypotheses& hyp) {
  hyp.validate();
  if (log_gap.size() < 2 || log_angle.size() + 1 != log_gap.size())
    throw InvalidInput("hypothesis data must describe a chain of length >= 2");
  const double gap_threshold = -std::log(hyp.kappa);
  const double angle_threshold = std::log(hyp.epsilon);
  for (std::size_t i = 0; i < log_gap.size(); ++i) {
    if (!(log_gap[i] > gap_threshold)) return {false, i, APCondition::Gap};
    if (i >= 1 && !(log_angle[i - 1] > angle_threshold)) return {false, i, APCondition::Angle};
  }
  return {};
}

double ap_defect(std::span<const Matrix> chain) {
  require_chain(chain);
  const std::size_t n = chain.size();
  // Every log||g_i|| enters with net coefficient zero, so the defect is
  // evaluated on the unit-norm blocks; this keeps it exactly scale invariant.
  std::vector<Matrix> unit;
  unit.reserve(n);
  for (const auto& g : chain) {
    Matrix u = g;
    divide_by(u, op_norm_nonzero(g));
    unit.push_back(std::move(u));
  }
  const auto log_of = [](double s) { return s == 0.0 ? -std::numeric_limits<double>::infinity() : std::log(s); };

  double log_total = 0.0;
  Matrix prod = unit[0];
  Matrix next(prod.dim());
  for (std::size_t i = 1; i < n; ++i) {
    multiply_into(unit[i], prod, next);
    std::swap(prod, next);
    if (i + 1 < n) {
      const double r = op_norm(prod);
      if (r == 0.0) {
        log_total = -std::numeric_limits<double>::infinity();
        break;
      }
      divide_by(prod, r);
      log_total += std::log(r);
    }
  }
  if (std::isfinite(log_total)) log_total += log_of(op_norm(prod));

  double pairs = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    multiply_into(unit[i], unit[i - 1], next);
    pairs += log_of(op_norm(next));
  }
  const double defect = std::abs(log_total - pairs);
  return std::isnan(defect) ? std::numeric_limits<double>::infinity() : defect;
}

double ap_predict_log_norm(std::span<const double> pair_log_norms, std::span<const double> single_log_norms) {
  if (pair_log_norms.empty() || single_log_norms.size() + 1 != pair_log_norms.size())
    throw InvalidInput("AP prediction needs n-1 pair norms and n-2 single norms");
  double s = 0.0;
  for (double v : pair_log_norms) s += v;
  for (double v : single_log_norms) s -= v;
  return s;
}

APReport verify_ap(std::span<const Matrix> chain, const APHypotheses& hyp, double c_ap) {
  if (!(c_ap >= 0.0) || !std::isfinite(c_ap)) throw InvalidInput("C_AP must be finite and >= 0");
  APReport r;
  r.n = chain.size();
  r.check = check_hypotheses(chain, hyp);
  r.hypotheses_ok = r.check.ok;
  r.gate_ok = hyp.gate_ok();
  r.lhs_defect = ap_defect(chain);
  r.bound = c_ap * static_cast<double>(r.n) * hyp.kappa / (hyp.epsilon * hyp.epsilon);
  r.satisfied = r.hypotheses_ok && r.lhs_defect <= r.bound;
  return r;
}

std::vector<Matrix> hyperbolic_chain(std::size_t n, const APHypotheses& hyp, std::uint64_t seed) {
  hyp.validate();
  if (n < 2) throw InvalidInput("chain length must be >= 2");
  Rng rng(seed);
  const double delta_max = 0.95 * std::acos(hyp.epsilon);
  std::vector<double> theta(n + 1), delta(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    theta[i] = 2.0 * std::numbers::pi * rng.uniform();
    delta[i] = delta_max * (2.0 * rng.uniform() - 1.0);
  }
  std::vector<Matrix> chain;
  chain.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = std::exp(std::numbers::ln2 * (2.0 * rng.uniform() - 1.0));
    const double k = hyp.kappa * (0.1 + 0.8 * rng.uniform());
    const Matrix d = Matrix::diagonal({s, s * k});
    chain.push_back(Matrix::rotation(theta[i + 1] + delta[i + 1]) * d * Matrix::rotation(theta[i]).transpose());
  }
  return chain;
}

CalibrationResult calibrate_c_ap(const APHypotheses& hyp, std::span<const std::size_t> lengths,
                                 std::size_t trials, std::uint64_t seed, unsigned workers) {
  hyp.validate();
  if (lengths.empty()) throw InvalidInput("calibration needs at least one chain length");
  const double scale = hyp.epsilon * hyp.epsilon / hyp.kappa;
  // -1 marks a chain that failed the hypotheses.
  const auto ratios = parallel_map(trials, workers, [&](std::size_t t) {
    const std::size_t n = lengths[t % lengths.size()];
    const auto chain = hyperbolic_chain(n, hyp, derive_seed(seed, t));
    if (!check_hypotheses(chain, hyp).ok) return -1.0;
    return ap_defect(chain) * scale / static_cast<double>(n);
  });
  CalibrationResult r;
  r.chains = trials;
  for (double v : ratios) {
    if (v < 0.0) continue;
    ++r.passing;
    r.max_ratio = std::max(r.max_ratio, v);
  }
  r.c_ap = 2.0 * r.max_ratio;
  return r;
}

std::vector<std::size_t> calibration_lengths() {
  std::vector<std::size_t> out;
  for (std::size_t n = kCalibrationMinLength; n <= kCalibrationMaxLength; ++n) out.push_back(n);
  return out;
}

}  // namespace lyap
