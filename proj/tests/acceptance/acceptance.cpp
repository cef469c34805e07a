// Acceptance suite: one pass/fail line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "lyap/avalanche.hpp"
#include "lyap/cli/run.hpp"
#include "lyap/cocycle.hpp"
#include "lyap/continuity.hpp"
#include "lyap/dynamics.hpp"
#include "lyap/errors.hpp"
#include "lyap/io.hpp"
#include "lyap/ldt.hpp"
#include "lyap/linalg.hpp"
#include "lyap/multiscale.hpp"
#include "lyap/rng.hpp"
#include "lyap/verdict.hpp"
#include "oracles.hpp"

using namespace lyap;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double time_limit;  // seconds, 0 for none
  std::function<Outcome()> run;
};

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string fmt(const char* f, auto... args) {
  std::string out(std::snprintf(nullptr, 0, f, args...), '\0');
  std::snprintf(out.data(), out.size() + 1, f, args...);
  return out;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

// 1. Linear algebra identities on random matrices.
Outcome linear_algebra() {
  Rng rng(20240101);
  constexpr double kTol = 1e-9;
  std::size_t fails = 0;
  double worst = 0.0;
  auto note = [&](double err) {
    worst = std::max(worst, err);
    if (err > kTol) ++fails;
  };
  std::vector<Matrix> ms;
  for (int i = 0; i < 1000; ++i) ms.push_back(oracle::random_matrix(2 + rng.next() % 4, rng));

  for (std::size_t i = 0; i < ms.size(); ++i) {
    const Matrix& g = ms[i];
    const auto s = singular_values(g).values;
    const Matrix w = exterior_power(g, 2);

    note(rel_err(op_norm(w), s[0] * s[1]));
    note(rel_err(gap_ratio(g), op_norm(g) * op_norm(g) / op_norm(w)));
    note(rel_err(gap_ratio(g), s[0] / s[1]));
    // independent references: trace of g^T g, |det|, direct minors
    note(rel_err(std::inner_product(s.begin(), s.end(), s.begin(), 0.0), std::pow(g.frobenius_norm(), 2)));
    note(rel_err(std::accumulate(s.begin(), s.end(), 1.0, std::multiplies<>()), std::abs(determinant(g))));
    note((w - oracle::wedge2_direct(g)).max_abs() / (s[0] * s[1]));
    if (g.dim() == 3) {
      const auto o = oracle::singular_values_3x3(g);
      for (int k = 0; k < 3; ++k) note(std::abs(s[k] - o[k]) / s[0]);
    }

    // products of matrices of the same size: next one of matching dimension
    for (std::size_t j = i + 1; j < ms.size(); ++j) {
      if (ms[j].dim() != g.dim()) continue;
      const Matrix& h = ms[j];
      const auto sh = singular_values(h).values;
      const auto sgh = singular_values(g * h).values;
      double lhs = 1.0, rhs = 1.0;
      for (std::size_t k = 0; k < s.size(); ++k) {
        lhs *= sgh[k];
        rhs *= s[k] * sh[k];
        note(std::max(0.0, lhs - rhs) / rhs);
      }
      const Matrix wgh = exterior_power(g * h, 2);
      note((wgh - w * exterior_power(h, 2)).max_abs() / (s[0] * s[1] * sh[0] * sh[1]));
      break;
    }
  }
  return {fails == 0, fmt("1000 matrices, worst relative error %.2e, %zu over 1e-9", worst, fails)};
}

// 2. Avalanche Principle: exact cases, calibrated bound, rescaling invariance.
Outcome avalanche() {
  Rng rng(7);
  std::size_t nonzero = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t m = 2 + t % 4;
    const std::vector<Matrix> pair{oracle::random_matrix(m, rng), oracle::random_matrix(m, rng)};
    if (ap_defect(pair) != 0.0) ++nonzero;
    std::vector<Matrix> diag;
    const std::size_t n = 2 + rng.next() % 200;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> d(m);
      for (auto& v : d) v = std::exp(4.0 * rng.uniform() - 2.0);
      std::sort(d.begin(), d.end(), std::greater<>());
      diag.push_back(Matrix::diagonal(d));
    }
    if (ap_defect(diag) != 0.0) ++nonzero;
  }

  const APHypotheses hyp{0.5, 1e-4};
  const auto lengths = calibration_lengths();
  const auto cal = calibrate_c_ap(hyp, lengths, kCalibrationTrials, 0, workers());
  const bool same_constant = cal.c_ap == kCalibratedCAP;

  std::size_t outside = 0, passing = 0;
  double worst_scale = 0.0;
  for (std::size_t t = 0; t < kCalibrationTrials; ++t) {
    const std::size_t n = lengths[t % lengths.size()];
    auto chain = hyperbolic_chain(n, hyp, derive_seed(0, t));
    const auto r = verify_ap(chain, hyp, kCalibratedCAP);
    if (r.hypotheses_ok) {
      ++passing;
      if (!r.satisfied) ++outside;
    }
    const std::size_t i = rng.next() % n;
    chain[i] *= std::exp(14.0 * rng.uniform() - 7.0);
    worst_scale = std::max(worst_scale, std::abs(ap_defect(chain) - r.lhs_defect));
  }
  const bool ok = nonzero == 0 && same_constant && outside == 0 && passing > 0 && worst_scale <= 1e-9;
  return {ok, fmt("exact cases nonzero %zu; recalibrated C_AP %.17g (%s); %zu/%zu chains pass the hypotheses, %zu "
                  "outside the bound; rescaling change %.2e",
                  nonzero, cal.c_ap, same_constant ? "matches" : "differs", passing, kCalibrationTrials, outside,
                  worst_scale)};
}

// 3. Monte Carlo against exact enumeration.
Outcome oracle_equivalence() {
  Rng rng(33);
  std::size_t agree = 0, oracle_mismatch = 0;
  constexpr std::size_t kConfigs = 50;
  for (std::size_t i = 0; i < kConfigs; ++i) {
    const std::vector<Matrix> letters{oracle::random_matrix(2, rng), oracle::random_matrix(2, rng)};
    const double p0 = 0.2 + 0.6 * rng.uniform();
    const std::vector<double> p{p0, 1.0 - p0};
    const std::size_t n = 1 + i % 12;
    const auto sys = ErgodicSystem::bernoulli(p);
    const auto A = Cocycle::locally_constant(letters);
    const double exact = static_cast<double>(oracle::enumerate_lambda1(letters, p, n));
    if (std::abs(finite_scale_le_exact(A, sys, n, 1) - exact) > 1e-12 * std::max(1.0, std::abs(exact)))
      ++oracle_mismatch;
    const auto mc = finite_scale_le(A, sys, n, 1, {100000, derive_seed(33, i), workers()});
    if (std::abs(mc.value - exact) <= 3.0 * mc.std_error) ++agree;
  }
  const double frac = static_cast<double>(agree) / kConfigs;
  return {frac >= 0.95 && oracle_mismatch == 0,
          fmt("%zu/%zu configurations within 3 std errors (n = 1..12); library exact vs oracle mismatches %zu", agree,
              kConfigs, oracle_mismatch)};
}

// 4. Known limits.
Outcome known_limits() {
  const auto one = ErgodicSystem::bernoulli({1.0});
  const auto D = Cocycle::constant(Matrix::diagonal({2.0, 0.5}));
  double worst = 0.0;
  for (std::size_t n : {1, 2, 3, 10, 100, 1000, 10000}) {
    const auto r = finite_scale_le(D, one, n, 1, {8, 1, 1});
    worst = std::max(worst, std::abs(r.value - std::log(2.0)));
  }
  const bool diag_ok = worst <= 1e-12;

  const auto sys = ErgodicSystem::bernoulli({0.3, 0.7});
  const auto S = Cocycle::locally_constant({Matrix::diagonal({3.0}), Matrix::diagonal({-0.5})});
  const double closed = 0.3 * std::log(3.0) + 0.7 * std::log(0.5);
  std::size_t scalar_off = 0;
  for (std::size_t n : {1, 10, 100}) {
    const auto r = finite_scale_le(S, sys, n, 1, {100000, 40 + n, workers()});
    if (std::abs(r.value - closed) > 3.0 * r.std_error) ++scalar_off;
  }

  const auto spec = le_spectrum(Cocycle::constant(Matrix::diagonal({3.0, 2.0, 1.0})), one, 50, {8, 1, 1});
  const std::vector<double> expect{std::log(3.0), std::log(2.0), 0.0};
  double spec_err = 0.0;
  for (int k = 0; k < 3; ++k) spec_err = std::max(spec_err, std::abs(spec.exponents[k] - expect[k]));

  Rng rng(44);
  const auto M = Cocycle::locally_constant({oracle::random_matrix(3, rng), oracle::random_matrix(3, rng)});
  const auto two = ErgodicSystem::bernoulli({0.5, 0.5});
  const McOptions mc{20000, 45, workers()};
  const auto full = le_spectrum(M, two, 20, mc);
  const auto det = log_det_average(M, two, 20, mc);
  const double sum = full.blocks.back().value;
  const double sigma = std::hypot(full.blocks.back().std_error, det.std_error);
  const bool det_ok = std::abs(sum - det.mean) <= 3.0 * sigma;

  return {diag_ok && scalar_off == 0 && spec_err <= 1e-12 && det_ok,
          fmt("diag(2,1/2) error %.1e; scalar outside 3 sigma %zu/3; diag(3,2,1) spectrum error %.1e; "
              "sum Lambda_k - E log|det|/n = %.2e (3 sigma %.2e)",
              worst, scalar_off, spec_err, sum - det.mean, 3.0 * sigma)};
}

// 5. One inductive step n0 = 30 -> n1 = 900 on the reference cocycle.
Outcome inductive_step_verdict() {
  const auto sys = reference_system();
  const auto B = reference_cocycle();
  constexpr std::size_t kSamples = 100000, n0 = 30, n1 = 900;
  constexpr double kEps = 0.05;
  const std::uint64_t seed = 55;

  const auto gap = estimate_gap(B, sys, n1, {10000, derive_seed(seed, 1), workers()});

  std::vector<MeasurePoint> pts;
  for (std::size_t n : {10, 15, 20, 25, 30}) {
    const auto d = empirical_fiber_ldt(B, sys, n, kEps, {kSamples, derive_seed(seed, 100 + n), workers()});
    pts.push_back({static_cast<double>(n), d.measure});
  }
  const auto env = envelope_mesf(pts, kSamples);
  const DeviationProfile profile(DevConstant{kEps}, MesExponential{env.c});

  const McOptions mc{kSamples, derive_seed(seed, 2), workers()};
  const double C = estimate_step_constant(B, sys, n0, {10000, derive_seed(seed, 3), workers()});
  const auto data = measure_step(B, &B, sys, n0, n1, mc);

  InductiveState s;
  s.n = n0;
  s.eta = std::max(0.0, data.drop) + 3.0 * data.drop_sigma + 0.01;
  s.theta = 0.01;
  s.epsilon = kEps;
  s.kappa = gap.kappa;
  s.C = C;

  StepResult r;
  try {
    r = inductive_step(s, n1, data, profile, 1.0);
  } catch (const GateError& e) {
    return {false, std::string("gate rejected: ") + e.what()};
  }
  const bool step_ok = r.gate.ok && r.verdict != Verdict::Fails;

  const APHypotheses hyp{0.5, 1e-9};
  const double ap_bound = kCalibratedCAP * static_cast<double>(n1 / n0) * hyp.kappa / (hyp.epsilon * hyp.epsilon);
  constexpr std::size_t kPhases = 2000;
  std::vector<double> ok_flags = parallel_map(kPhases, workers(), [&](std::size_t i) {
    const auto x = sample_phase(sys, derive_seed(seed, 1000000 + i));
    const auto b = blockwise_ap_log_norm(B, sys, x, n0, n1 / n0);
    if (!check_hypotheses_log(b.log_gap, b.log_angle, hyp).ok) return -1.0;
    return std::abs(b.predicted - b.direct) <= ap_bound ? 1.0 : 0.0;
  });
  const auto passing = static_cast<std::size_t>(std::count_if(ok_flags.begin(), ok_flags.end(), [](double v) { return v >= 0.0; }));
  const auto within = static_cast<std::size_t>(std::count(ok_flags.begin(), ok_flags.end(), 1.0));
  const double frac = passing ? static_cast<double>(within) / passing : 0.0;

  return {step_ok && passing > 0 && frac >= 0.99,
          fmt("kappa %.4f, envelope c %.4f, C %.4f; gate %.4f < %.4f; |combination| %.3e sigma %.1e vs C*30/900 %.4f "
              "(%s); blockwise AP within %.2e on %zu/%zu hypothesis-passing phases (%zu sampled)",
              gap.kappa, env.c, C, r.gate.lhs, r.gate.rhs, r.measured, r.sigma, r.bound,
              std::string(to_string(r.verdict)).c_str(), ap_bound, within, passing, kPhases)};
}

// 6. Hoeffding sanity and exact recovery of a synthetic rate.
Outcome ldt_sanity() {
  const auto sys = ErgodicSystem::bernoulli({0.5, 0.5});
  const Observable xi(CylinderIndicator{{0}});
  std::string rows;
  bool below = true;
  for (std::size_t n : {50, 100, 200, 400, 800}) {
    const auto d = empirical_base_ldt(sys, xi, n, 0.1, {100000, derive_seed(66, n), workers()});
    const double h = oracle::hoeffding(n, 0.1);
    // a proportion from finite samples: fails only when above the curve by more than 3 sigma
    const auto v = check_less(d.measure, d.ci_radius / 3.0, h);
    below = below && v != Verdict::Fails;
    rows += fmt(" n=%zu:%zu/%zu (%.1e, 3 sigma %.1e) vs %.2e %s", n, d.violations, d.samples, d.measure, d.ci_radius, h,
                std::string(to_string(v)).c_str());
  }
  std::vector<MeasurePoint> pts;
  constexpr double kRate = 0.0375;
  for (int n = 20; n <= 200; n += 20) pts.push_back({static_cast<double>(n), 0.8 * std::exp(-kRate * n)});
  const auto fit = fit_mesf(pts, 100000);
  const double err = std::abs(fit.c - kRate);
  return {below && err <= 1e-9, "measures" + rows + fmt("; synthetic rate error %.1e", err)};
}

// 7. Scale maps for the three measure classes.
Outcome scale_maps() {
  const std::vector<std::pair<const char*, DeviationProfile>> profiles{
      {"exponential", DeviationProfile(DevConstant{0.1}, MesExponential{1.0})},
      {"subexp_power", DeviationProfile(DevPower{0.1}, MesSubExpPower{1.0, 0.5})},
      {"subexp_log", DeviationProfile(DevConstant{0.1}, MesSubExpLog{1.0, 0.5})},
  };
  bool ok = true;
  std::string detail;
  for (const auto& [name, prof] : profiles) {
    double worst = 0.0;
    for (double t = prof.t_min(); t <= 200.0; t *= 1.07) worst = std::max(worst, std::abs(prof.phi(prof.psi(t)) - t));
    long long worst_round = 0;
    for (std::uint64_t n = 3; n <= 60; ++n) {
      std::uint64_t up = 0;
      try {
        up = prof.next_scale(n);
      } catch (const CapacityError&) {
        break;
      }
      worst_round = std::max(worst_round, std::llabs(static_cast<long long>(prof.prev_scale(up)) - static_cast<long long>(n)));
    }
    const auto adm = prof.admissibility();
    ok = ok && worst <= 1e-8 && worst_round <= 1 && adm.ok();
    detail += fmt("%s%s: phi(psi) %.1e, round trip %lld, phi doubling %.3f", detail.empty() ? "" : "; ", name, worst,
                  worst_round, adm.max_phi_doubling);
  }
  return {ok, detail};
}

std::vector<std::vector<std::string>> csv_rows(const std::string& csv) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    auto& row = out.emplace_back();
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(cell);
  }
  return out;
}

// 8. Modulus law on diag(2, 1/2) + h diag(1, 0), default c and profile.
Outcome modulus_law() {
  const json params{{"seed", 8},
                    {"samples", 1000},
                    {"system", {{"type", "bernoulli"}, {"p", {1.0}}}},
                    {"cocycle", {{"type", "constant"}, {"matrix", {{2.0, 0.0}, {0.0, 0.5}}}}},
                    {"direction", {{"type", "constant"}, {"matrix", {{1.0, 0.0}, {0.0, 0.0}}}}}};
  const auto r = cli::execute(cli::ExperimentConfig::from_params("modulus-scan", params));
  const auto rows = csv_rows(r.csv);
  double worst = 0.0;
  bool bounded = rows.size() == 7;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double h = std::stod(rows[i][0]), delta = std::stod(rows[i][1]), omega = std::stod(rows[i][3]);
    worst = std::max(worst, std::abs(delta - std::log1p(h / 2.0)));
    bounded = bounded && delta <= omega && rows[i][4] == "holds";
  }
  const bool exact = r.summary["result"]["exact"].get<bool>();
  return {exact && worst <= 1e-10 && bounded,
          fmt("h = 1e-1..1e-6, exact %s, error %.1e, c = %.4f, all below omega: %s", exact ? "yes" : "no", worst,
              r.summary["result"]["c"].get<double>(), bounded ? "yes" : "no")};
}

// 9. Byte-identical CLI output across worker counts.
Outcome reproducibility() {
  const json ref = "reference";
  const std::vector<std::pair<std::string, json>> campaigns{
      {"estimate-le", {{"cocycle", ref}, {"n_grid", {10, 50, 200}}, {"samples", 5000}}},
      {"spectrum", {{"cocycle", ref}, {"n", 40}, {"samples", 2000}}},
      {"verify-ap", {{"n_grid", {5, 50, 120}}, {"trials", 60}}},
      {"ldt-probe", {{"cocycle", ref}, {"epsilon", 0.02}, {"n_grid", {10, 20, 30, 40}}, {"samples", 3000}}},
      {"multiscale", {{"cocycle", ref}, {"n0", 10}, {"epsilon", 0.05}, {"samples", 3000}}},
      {"continuity-scan", {{"cocycle", ref}, {"n_grid", {5, 10}}, {"samples", 1000}}},
      {"usc-probe", {{"cocycle", ref}, {"n_grid", {10, 20}}, {"proxy_n", 200}, {"samples", 1000}}},
      {"speed-probe", {{"cocycle", ref}, {"n_grid", {20, 40}}, {"samples", 500}}},
      {"modulus-scan", {{"cocycle", ref}, {"h_grid", {0.1, 0.01}}, {"proxy_n", 100}, {"samples", 500}}},
  };
  std::size_t identical = 0;
  std::string differing;
  for (const auto& [cmd, base] : campaigns) {
    std::vector<std::string> outputs;
    for (unsigned w : {1u, 4u, 7u, 1u}) {
      json p = base;
      p["seed"] = 99;
      p["workers"] = w;
      const auto r = cli::execute(cli::ExperimentConfig::from_params(cmd, p));
      outputs.push_back(r.csv + "\n" + r.summary.dump());
    }
    if (std::all_of(outputs.begin(), outputs.end(), [&](const auto& o) { return o == outputs[0]; }))
      ++identical;
    else
      differing += " " + cmd;
  }
  return {identical == campaigns.size(),
          fmt("%zu/%zu campaigns byte-identical for workers 1, 4, 7 and a rerun", identical, campaigns.size()) +
              (differing.empty() ? "" : "; differing:" + differing)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "linear algebra identities", 10, linear_algebra},
      {2, "avalanche principle", 60, avalanche},
      {3, "oracle equivalence", 120, oracle_equivalence},
      {4, "known limits", 0, known_limits},
      {5, "inductive step", 300, inductive_step_verdict},
      {6, "LDT sanity", 120, ldt_sanity},
      {7, "scale maps", 5, scale_maps},
      {8, "modulus law", 5, modulus_law},
      {9, "reproducibility", 0, reproducibility},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.time_limit <= 0 || secs < c.time_limit;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::printf("criterion %d %s: %s (%.2fs%s) %s\n", c.id, c.name, pass ? "PASS" : "FAIL", secs,
                in_time ? "" : fmt(", limit %.0fs", c.time_limit).c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
