#include "lyap/continuity.hpp"

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

double clean(double v) { return std::isnan(v) ? kNegInf : v; }

std::string fmt(const char* pattern, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, pattern, a, b);
  return buf;
}

FiniteScaleLE le_from(std::span<const double> values, std::size_t n, std::size_t k, std::uint64_t seed) {
  const auto s = summarize(values);
  return {n, k, s.mean, s.std_error, s.samples, s.neg_inf, seed};
}

}  // namespace

ContinuityEntry finite_scale_continuity_probe(const Cocycle& A, const Cocycle& B1, const Cocycle& B2,
                                              const ErgodicSystem& system, std::size_t n,
                                              const DeviationProfile& profile, double C1, double delta0,
                                              const McOptions& mc, double p) {
  if (n == 0 || static_cast<double>(n) < profile.t_min()) throw InvalidInput("scale n is below the profile threshold");
  if (!(C1 > 0.0) || !(delta0 > 0.0)) throw InvalidInput("C1 and delta0 must be positive");
  if (mc.samples == 0) throw InvalidInput("samples must be >= 1");
  ContinuityEntry e;
  e.n = n;
  e.distance = distance(B1, B2, system, p);
  e.threshold = std::exp(-C1 * static_cast<double>(n));
  if (!(e.distance < e.threshold))
    throw GateError("continuity distance", fmt("dist(B1, B2) = %.17g is not below exp(-C1 n) = %.17g",
                                               e.distance, e.threshold));
  for (const Cocycle* b : {&B1, &B2}) {
    const double d = distance(*b, A, system, p);
    if (!(d < delta0))
      throw GateError("continuity neighborhood", fmt("dist(B, A) = %.17g is not below delta0 = %.17g", d, delta0));
  }

  const auto cols = parallel_map_multi(mc.samples, mc.workers, 2, [&](std::size_t i, std::span<double> out) {
    const Phase x = sample_phase(system, derive_seed(mc.seed, i));
    out[0] = iterate(B1, system, x, n).log_norm / static_cast<double>(n);
    out[1] = iterate(B2, system, x, n).log_norm / static_cast<double>(n);
  });
  e.lambda_b1 = le_from(cols[0], n, 1, mc.seed);
  e.lambda_b2 = le_from(cols[1], n, 1, mc.seed);
  std::vector<double> diff(mc.samples);
  for (std::size_t i = 0; i < mc.samples; ++i) diff[i] = clean(cols[0][i] - cols[1][i]);
  const auto s = summarize(diff);
  e.delta = std::abs(s.mean);
  e.sigma = s.std_error;
  e.bound = std::sqrt(profile.iota(static_cast<double>(n)));
  e.verdict = check_less(e.delta, e.sigma, e.bound);
  return e;
}

double estimate_c0(const Cocycle& B, const ErgodicSystem& system, std::size_t n, const McOptions& mc) {
  const double sup = sup_norm(B, system);
  if (!(sup > 0.0)) throw InvalidInput("C0 undefined for the zero cocycle");
  return std::max(std::log(sup), lp_bound(B, system, n, 2.0, mc));
}

double calibrate_c1(double C0, double kappa, double margin) {
  if (!(C0 >= 0.0) || !(kappa > 0.0) || !(margin > 0.0)) throw InvalidInput("need C0 >= 0, kappa > 0, margin > 0");
  return 2.0 * C0 + kappa / 10.0 + margin;
}

UscResult usc_probe(const Cocycle& A, const Cocycle& B, const ErgodicSystem& system, std::size_t n, UscMode mode,
                    double value, double l1_a, double delta, const DeviationProfile& profile, const McOptions& mc,
                    double p) {
  if (n == 0 || static_cast<double>(n) < profile.t_min()) throw InvalidInput("scale n is below the profile threshold");
  if (!(delta > 0.0)) throw InvalidInput("delta must be positive");
  if (!std::isfinite(value)) throw InvalidInput("usc threshold must be finite");
  if (mode == UscMode::Finite && (!(value > 0.0) || !std::isfinite(l1_a)))
    throw InvalidInput("finite mode needs eps > 0 and a finite L1(A)");
  UscResult r;
  r.n = n;
  r.distance = distance(B, A, system, p);
  if (!(r.distance < delta))
    throw GateError("usc neighborhood", fmt("dist(B, A) = %.17g is not below delta = %.17g", r.distance, delta));
  r.bound = mode == UscMode::Finite ? l1_a + value : -value;
  const auto values = sample_log_norms(B, system, n, mc);
  std::size_t bad = 0;
  for (double v : values)
    if (v > r.bound) ++bad;
  r.samples = values.size();
  r.violation = static_cast<double>(bad) / static_cast<double>(r.samples);
  r.ci_radius = binomial_ci_radius(r.violation, r.samples);
  r.predicted = profile.iota(static_cast<double>(n));
  r.verdict = check_less(r.violation, r.ci_radius / kSigmaMultiplier, r.predicted);
  return r;
}

SpeedReport speed_probe(const Cocycle& B, const ErgodicSystem& system, const DeviationProfile& profile,
                        std::vector<std::size_t> grid, double C, const McOptions& mc) {
  if (grid.empty()) throw InvalidInput("speed probe needs a scale grid");
  if (!(C > 0.0)) throw InvalidInput("constant C must be positive");
  if (mc.samples == 0) throw InvalidInput("samples must be >= 1");
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (static_cast<double>(grid.front()) < profile.psi_min())
    throw InvalidInput("speed probe scales must be >= psi(t_min) so that n-- is defined");

  SpeedReport rep;
  rep.proxy_scale = std::min<std::size_t>(1000000, 100 * grid.back());
  const std::size_t N = rep.proxy_scale;

  std::vector<SpeedRow> rows(grid.size());
  std::vector<std::size_t> cps;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    auto& row = rows[j];
    row.n = grid[j];
    std::size_t npp = N;
    try {
      npp = profile.next_scale(row.n);
    } catch (const CapacityError&) {
      npp = N;
      row.truncated = true;
    }
    if (npp > N) {
      npp = N;
      row.truncated = true;
    }
    row.n_plus = npp;
    if (2 * row.n > N) throw InvalidInput("scale grid too large for the proxy scale");
    cps.insert(cps.end(), {row.n, 2 * row.n, row.n_plus});
  }
  cps.push_back(N);
  std::sort(cps.begin(), cps.end());
  cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
  const auto index_of = [&](std::size_t c) {
    return static_cast<std::size_t>(std::lower_bound(cps.begin(), cps.end(), c) - cps.begin());
  };

  const auto cols = parallel_map_multi(mc.samples, mc.workers, cps.size(), [&](std::size_t i, std::span<double> out) {
    const Phase x = sample_phase(system, derive_seed(mc.seed, i));
    const auto logs = iterate_checkpoints(B, system, x, cps);
    for (std::size_t c = 0; c < cps.size(); ++c) out[c] = logs[c] / static_cast<double>(cps[c]);
  });
  const auto& proxy = cols[index_of(N)];
  rep.l1_proxy = le_from(proxy, N, 1, mc.seed);

  std::vector<double> tmp(mc.samples);
  for (auto& row : rows) {
    const auto& ln = cols[index_of(row.n)];
    const auto& l2n = cols[index_of(2 * row.n)];
    const auto& lpp = cols[index_of(row.n_plus)];
    row.lambda_n = summarize(ln).mean;
    for (std::size_t i = 0; i < mc.samples; ++i) tmp[i] = clean(ln[i] - proxy[i]);
    auto s = summarize(tmp);
    row.excess = s.mean;
    row.excess_sigma = s.std_error;
    const double dn = static_cast<double>(row.n);
    const double nmm = profile.phi(dn);
    row.bound_phi = C * nmm / dn;
    const double nmm_floor = std::floor(nmm);
    row.bound_iota = nmm_floor >= profile.t_min() ? std::sqrt(profile.iota(nmm_floor)) : 1.0;
    row.excess_verdict = check_less(row.excess, row.excess_sigma, row.bound_phi);

    for (std::size_t i = 0; i < mc.samples; ++i) tmp[i] = clean(lpp[i] + ln[i] - 2.0 * l2n[i]);
    s = summarize(tmp);
    row.combination = std::abs(s.mean);
    row.combination_sigma = s.std_error;
    row.bound_step = C * dn / static_cast<double>(row.n_plus);
    row.bound_step_iota = std::sqrt(profile.iota(dn));
    row.combination_verdict = check_less(row.combination, row.combination_sigma, row.bound_step);
  }
  rep.rows = std::move(rows);
  return rep;
}

double modulus_omega(const DeviationProfile& profile, double c, double p, double h) {
  if (!(c > 0.0)) throw InvalidInput("modulus constant c must be positive");
  if (!(p > 1.0)) throw InvalidInput("modulus exponent p must be > 1");
  if (!(h >= 0.0)) throw InvalidInput("h must be >= 0");
  if (h == 0.0) return 0.0;
  const double t = c * std::log(1.0 / h);
  const double exponent = std::isinf(p) ? 1.0 : 1.0 - 1.0 / p;
  const bool in_domain = t > 0.0 && (!std::holds_alternative<MesSubExpLog>(profile.mesf()) || t > 1.0);
  if (!in_domain) return 1.0;
  return std::min(1.0, std::exp(exponent * profile.log_iota_extended(t)));
}

ModulusReport modulus_scan(const Cocycle& A, const Cocycle& E, const ErgodicSystem& system,
                           const std::vector<double>& h_grid, const DeviationProfile& profile, double c, double p,
                           std::size_t proxy_n, const McOptions& mc) {
  if (A.dim() != E.dim()) throw InvalidInput("perturbation direction has the wrong dimension");
  if (h_grid.empty()) throw InvalidInput("modulus scan needs an h grid");
  for (double h : h_grid)
    if (!(h >= 0.0) || !std::isfinite(h)) throw InvalidInput("h grid values must be finite and >= 0");
  A.check_compatible(system);
  E.check_compatible(system);

  ModulusReport rep;
  rep.c = c;
  rep.p = p;
  const auto* ca = std::get_if<detail::ConstantNode>(&A.node());
  const auto* ce = std::get_if<detail::ConstantNode>(&E.node());
  rep.exact = ca && ce;
  rep.rows.resize(h_grid.size());

  if (rep.exact) {
    const double base = log_spectral_radius(ca->value);
    for (std::size_t j = 0; j < h_grid.size(); ++j) {
      auto& row = rep.rows[j];
      row.h = h_grid[j];
      const double pert = row.h == 0.0 ? base : log_spectral_radius(ca->value + row.h * ce->value);
      row.delta = std::abs(pert - base);
    }
  } else {
    if (proxy_n == 0) throw InvalidInput("proxy scale must be >= 1");
    if (mc.samples == 0) throw InvalidInput("samples must be >= 1");
    rep.proxy_scale = proxy_n;
    const double dn = static_cast<double>(proxy_n);
    std::vector<Cocycle> perturbed;
    perturbed.reserve(h_grid.size());
    for (double h : h_grid) perturbed.push_back(Cocycle::perturbed(A, E, h));
    const auto cols =
        parallel_map_multi(mc.samples, mc.workers, h_grid.size() + 1, [&](std::size_t i, std::span<double> out) {
          const Phase x = sample_phase(system, derive_seed(mc.seed, i));
          out[0] = iterate(A, system, x, proxy_n).log_norm / dn;
          for (std::size_t j = 0; j < perturbed.size(); ++j)
            out[j + 1] = iterate(perturbed[j], system, x, proxy_n).log_norm / dn;
        });
    std::vector<double> diff(mc.samples);
    for (std::size_t j = 0; j < h_grid.size(); ++j) {
      auto& row = rep.rows[j];
      row.h = h_grid[j];
      for (std::size_t i = 0; i < mc.samples; ++i) diff[i] = clean(cols[j + 1][i] - cols[0][i]);
      const auto s = summarize(diff);
      row.delta = std::abs(s.mean);
      row.sigma = s.std_error;
    }
  }

  std::vector<double> xs, ys;
  for (auto& row : rep.rows) {
    row.omega = modulus_omega(profile, c, p, row.h);
    // The bound is non-strict, so exact rows compare with <=.
    if (row.sigma == 0.0)
      row.verdict = row.delta <= row.omega ? Verdict::Holds : Verdict::Fails;
    else
      row.verdict = check_less(row.delta, row.sigma, row.omega);
    if (row.h > 0.0 && row.delta > 0.0 && std::isfinite(row.delta)) {
      xs.push_back(std::log(row.h));
      ys.push_back(std::log(row.delta));
    }
  }
  if (xs.size() >= 2) {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      mx += xs[i];
      my += ys[i];
    }
    mx /= static_cast<double>(xs.size());
    my /= static_cast<double>(xs.size());
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxx += (xs[i] - mx) * (xs[i] - mx);
      sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx > 0.0) rep.slope = sxy / sxx;
  }
  return rep;
}

Spectrum le_spectrum(const Cocycle& A, const ErgodicSystem& system, std::size_t n, const McOptions& mc) {
  if (n == 0) throw InvalidInput("scale n must be >= 1");
  if (mc.samples == 0) throw InvalidInput("samples must be >= 1");
  A.check_compatible(system);
  const std::size_t m = A.dim();
  std::vector<Cocycle> powers;
  powers.reserve(m);
  for (std::size_t k = 1; k <= m; ++k) powers.push_back(Cocycle::exterior(A, k));
  const double dn = static_cast<double>(n);
  const auto cols = parallel_map_multi(mc.samples, mc.workers, m, [&](std::size_t i, std::span<double> out) {
    const Phase x = sample_phase(system, derive_seed(mc.seed, i));
    for (std::size_t k = 0; k < m; ++k) out[k] = iterate(powers[k], system, x, n).log_norm / dn;
  });
  Spectrum s;
  s.n = n;
  std::vector<double> diff(mc.samples);
  for (std::size_t k = 0; k < m; ++k) {
    s.blocks.push_back(le_from(cols[k], n, k + 1, mc.seed));
    if (k == 0) {
      s.exponents.push_back(s.blocks[0].value);
      s.sigmas.push_back(s.blocks[0].std_error);
      continue;
    }
    for (std::size_t i = 0; i < mc.samples; ++i)
      diff[i] = cols[k][i] == kNegInf ? kNegInf : cols[k][i] - cols[k - 1][i];
    const auto st = summarize(diff);
    s.exponents.push_back(st.mean);
    s.sigmas.push_back(st.std_error);
  }
  return s;
}

}  // namespace lyap
