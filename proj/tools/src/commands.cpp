#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "lyap/avalanche.hpp"
#include "lyap/continuity.hpp"
#include "lyap/errors.hpp"
#include "lyap/io.hpp"
#include "lyap/multiscale.hpp"
#include "lyap/rng.hpp"

namespace lyap::cli {

namespace {

McOptions mc_for(const ExperimentConfig& cfg, std::uint64_t index) {
  return {cfg.samples, derive_seed(cfg.seed, index), cfg.workers};
}

// Seeds for auxiliary estimates (constants, proxies) live on a separate stream.
McOptions aux_mc(const ExperimentConfig& cfg, std::uint64_t index) {
  return {cfg.samples, derive_seed(derive_seed(cfg.seed, 0xA5A5A5A5ULL), index), cfg.workers};
}

std::string verdict(Verdict v) { return std::string(to_string(v)); }

Matrix matrix_from(const json& j, const std::string& where) {
  if (!j.is_array()) throw InvalidInput(where + ": expected an array of rows");
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array()) throw InvalidInput(where + "[" + std::to_string(i) + "]: expected a row");
    auto& row = rows.emplace_back();
    for (std::size_t k = 0; k < j[i].size(); ++k) {
      if (!j[i][k].is_number())
        throw InvalidInput(where + "[" + std::to_string(i) + "][" + std::to_string(k) + "]: expected a number");
      row.push_back(j[i][k].get<double>());
    }
  }
  try {
    return Matrix::from_rows(rows);
  } catch (const InvalidInput& e) {
    throw InvalidInput(where + ": " + e.what());
  }
}

Cocycle direction_or_default(const Params& p, const Cocycle& A) {
  if (p.has("direction")) {
    auto E = p.cocycle("direction");
    if (E.dim() != A.dim()) throw InvalidInput("direction: dimension differs from the cocycle");
    return E;
  }
  Matrix e(A.dim());
  e(0, 0) = 1.0;
  return Cocycle::constant(e);
}

Observable observable_from(const Params& p, const ErgodicSystem& sys) {
  if (!p.has("observable")) {
    if (sys.is_torus()) {
      const auto d = std::get<TorusTranslation>(sys.variant()).alpha.size();
      return BoxIndicator{std::vector<double>(d, 0.0), std::vector<double>(d, 0.5)};
    }
    return CylinderIndicator{{0}};
  }
  const auto& o = p.raw("observable");
  if (o.is_object() && o.contains("cylinder")) {
    const Params q(o);
    std::vector<std::uint32_t> word;
    for (auto s : q.integers("cylinder")) word.push_back(static_cast<std::uint32_t>(s));
    return CylinderIndicator{word};
  }
  if (o.is_object() && o.contains("box") && o["box"].is_object()) {
    const Params q(o["box"]);
    return BoxIndicator{q.numbers("lower"), q.numbers("upper")};
  }
  throw InvalidInput("observable: expected {\"cylinder\": [...]} or {\"box\": {\"lower\": [...], \"upper\": [...]}}");
}

double kappa_of(const Params& p, const Cocycle& A, const ErgodicSystem& sys, std::size_t n, const McOptions& mc) {
  if (p.has("kappa")) return p.number("kappa");
  if (A.dim() < 2) throw InvalidInput("kappa: required for one-dimensional cocycles");
  return estimate_gap(A, sys, n, mc).kappa;
}

json le_json(const FiniteScaleLE& e) {
  return {{"n", e.n}, {"k", e.k}, {"value", e.value}, {"std_error", e.std_error}, {"samples", e.samples},
          {"neg_inf", e.neg_inf}};
}

// ---------------------------------------------------------------------------

RunOutput estimate_le(const ExperimentConfig& cfg, const Params& p) {
  const auto sys = p.system();
  const auto A = p.cocycle("cocycle");
  const auto grid = p.scale_grid("n_grid", "n");
  const std::size_t k = p.integer("k", 1);
  const bool exact = p.flag("exact", false);

  RunOutput r;
  Csv csv({"n", "k", "value", "std_error", "samples", "seed", "neg_inf", "exact"});
  json rows = json::array();
  for (std::size_t j = 0; j < grid.size(); ++j) {
    FiniteScaleLE e;
    if (exact) {
      e = {grid[j], k, finite_scale_le_exact(A, sys, grid[j], k), 0.0, 0, 0, cfg.seed};
    } else {
      e = finite_scale_le(A, sys, grid[j], k, mc_for(cfg, j));
    }
    csv << e.n << e.k << e.value << e.std_error << e.samples << std::size_t{e.seed} << e.neg_inf << exact;
    csv.end_row();
    rows.push_back(le_json(e));
    r.plot.emplace_back(static_cast<double>(e.n), e.value);
  }
  r.csv = csv.str();
  r.summary["estimates"] = rows;
  return r;
}

RunOutput spectrum(const ExperimentConfig& cfg, const Params& p) {
  const auto sys = p.system();
  const auto A = p.cocycle("cocycle");
  const std::size_t n = p.integer("n");
  const auto mc = mc_for(cfg, 0);
  const auto s = le_spectrum(A, sys, n, mc);
  const auto det = log_det_average(A, sys, n, mc);

  RunOutput r;
  Csv csv({"n", "k", "exponent", "sigma", "block", "block_sigma"});
  double sum = 0.0;
  for (std::size_t k = 0; k < s.exponents.size(); ++k) {
    csv << n << (k + 1) << s.exponents[k] << s.sigmas[k] << s.blocks[k].value << s.blocks[k].std_error;
    csv.end_row();
    sum += s.exponents[k];
    r.plot.emplace_back(static_cast<double>(k + 1), s.exponents[k]);
  }
  r.csv = csv.str();
  r.summary["sum_exponents"] = sum;
  r.summary["log_det_average"] = det.mean;
  r.summary["log_det_sigma"] = det.std_error;
  return r;
}

RunOutput verify_ap_cmd(const ExperimentConfig& cfg, const Params& p) {
  APHypotheses hyp;
  hyp.epsilon = p.number("epsilon", hyp.epsilon);
  hyp.kappa = p.number("kappa", hyp.kappa);
  hyp.c_gate = p.number("c_gate", hyp.c_gate);
  hyp.validate();
  const double c_ap = p.number("c_ap", kCalibratedCAP);
  if (!(c_ap > 0.0)) throw InvalidInput("c_ap: must be positive");
  if (!hyp.gate_ok()) {
    char buf[200];
    std::snprintf(buf, sizeof buf, "kappa = %.17g exceeds c * eps^2 = %.17g", hyp.kappa,
                  hyp.c_gate * hyp.epsilon * hyp.epsilon);
    throw GateError("ap gate", buf);
  }

  std::vector<std::vector<Matrix>> given;
  std::vector<std::size_t> lengths;
  std::size_t trials = 0;
  if (p.has("chain")) {
    const auto& c = p.raw("chain");
    if (!c.is_array()) throw InvalidInput("chain: expected an array of matrices");
    std::vector<Matrix> chain;
    for (std::size_t i = 0; i < c.size(); ++i) chain.push_back(matrix_from(c[i], "chain[" + std::to_string(i) + "]"));
    given.push_back(std::move(chain));
    trials = 1;
  } else {
    lengths = p.scale_grid("n_grid", "n");
    trials = p.integer("trials", 1);
    if (trials == 0) throw InvalidInput("trials: must be >= 1");
  }

  const auto cols = parallel_map_multi(trials, cfg.workers, 7, [&](std::size_t t, std::span<double> out) {
    const auto chain = given.empty() ? hyperbolic_chain(lengths[t % lengths.size()], hyp, derive_seed(cfg.seed, t))
                                     : given.front();
    const auto rep = verify_ap(chain, hyp, c_ap);
    out[0] = static_cast<double>(rep.n);
    out[1] = rep.lhs_defect;
    out[2] = rep.bound;
    out[3] = rep.hypotheses_ok ? 1.0 : 0.0;
    out[4] = static_cast<double>(static_cast<int>(rep.check.failed));
    out[5] = static_cast<double>(rep.check.index);
    out[6] = rep.satisfied ? 1.0 : 0.0;
  });

  RunOutput r;
  Csv csv({"trial", "n", "measured", "sigma", "bound", "hypotheses_ok", "failed_condition", "failed_index",
           "verdict"});
  std::size_t ok = 0, satisfied = 0;
  double max_ratio = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto n = static_cast<std::size_t>(cols[0][t]);
    const bool hyp_ok = cols[3][t] == 1.0;
    const auto failed = static_cast<APCondition>(static_cast<int>(cols[4][t]));
    const char* v = !hyp_ok ? "skipped" : (cols[6][t] == 1.0 ? "holds" : "fails");
    csv << t << n << cols[1][t] << 0.0 << cols[2][t] << hyp_ok << to_string(failed);
    if (hyp_ok)
      csv.blank();
    else
      csv << static_cast<std::size_t>(cols[5][t]);
    csv << v;
    csv.end_row();
    if (hyp_ok) {
      ++ok;
      max_ratio = std::max(max_ratio, cols[1][t] * hyp.epsilon * hyp.epsilon / (static_cast<double>(n) * hyp.kappa));
    }
    if (cols[6][t] == 1.0) ++satisfied;
    r.plot.emplace_back(static_cast<double>(n), cols[1][t]);
  }
  r.csv = csv.str();
  r.summary["c_ap"] = c_ap;
  r.summary["trials"] = trials;
  r.summary["hypotheses_ok"] = ok;
  r.summary["satisfied"] = satisfied;
  r.summary["max_ratio"] = max_ratio;
  return r;
}

RunOutput ldt_probe(const ExperimentConfig& cfg, const Params& p) {
  const auto sys = p.system();
  const double eps = p.number("epsilon");
  const auto grid = p.scale_grid("n_grid", "n");
  const bool fiber = p.has("cocycle");
  std::optional<Cocycle> A;
  std::optional<Observable> xi;
  if (fiber)
    A = p.cocycle("cocycle");
  else
    xi = observable_from(p, sys);
  const bool indicator = xi && !std::holds_alternative<BoundedFunction>(xi->variant());

  RunOutput r;
  Csv csv({"n", "epsilon", "measure", "ci_radius", "violations", "samples", "center", "hoeffding"});
  std::vector<MeasurePoint> points;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const auto e = fiber ? empirical_fiber_ldt(*A, sys, grid[j], eps, mc_for(cfg, j))
                         : empirical_base_ldt(sys, *xi, grid[j], eps, mc_for(cfg, j));
    csv << e.n << e.epsilon << e.measure << e.ci_radius << e.violations << e.samples << e.center;
    if (indicator)
      csv << 2.0 * std::exp(-2.0 * static_cast<double>(e.n) * eps * eps);
    else
      csv.blank();
    csv.end_row();
    points.push_back({static_cast<double>(e.n), e.measure});
    r.plot.emplace_back(static_cast<double>(e.n), e.measure);
  }
  r.csv = csv.str();
  r.summary["mode"] = fiber ? "fiber" : "base";
  if (points.size() >= 4) {
    const auto fit = fit_mesf(points, cfg.samples);
    const auto env = envelope_mesf(points, cfg.samples);
    r.summary["fit"] = {{"c", fit.c}, {"intercept", fit.intercept}, {"r_squared", fit.r_squared},
                        {"corrected", fit.corrected}};
    r.summary["envelope"] = {{"c", env.c}};
  } else {
    r.summary["fit"] = nullptr;
  }
  return r;
}

std::vector<std::size_t> multiscale_schedule(std::size_t n0, double growth, std::size_t steps) {
  std::vector<std::size_t> out{n0};
  for (std::size_t k = 0; k < steps; ++k) {
    const double n = static_cast<double>(out.back());
    const double next = std::max(std::ceil(std::pow(n, 1.0 + growth)), 2.0 * n + 1.0);
    if (!(next < 9.0e15)) throw CapacityError("scale schedule overflows");
    out.push_back(static_cast<std::size_t>(next));
  }
  return out;
}

RunOutput multiscale(const ExperimentConfig& cfg, const Params& p) {
  const auto sys = p.system();
  const auto B = p.cocycle("cocycle");
  const auto A = p.has("reference") ? p.cocycle("reference") : B;
  const auto profile = p.profile();
  const std::size_t n0 = p.integer("n0");
  const double growth = p.number("growth", 1.0);
  const std::size_t steps = p.integer("steps", 1);
  if (steps == 0) throw InvalidInput("steps: must be >= 1");
  const auto scales = multiscale_schedule(n0, growth, steps);

  InductiveState s;
  s.n = n0;
  s.epsilon = p.number("epsilon");
  s.kappa = kappa_of(p, A, sys, 2 * n0, aux_mc(cfg, 0));
  s.C = p.has("C") ? p.number("C") : estimate_step_constant(B, sys, n0, aux_mc(cfg, 1));
  s.theta = p.number("theta0", 0.01);

  RunOutput r;
  Csv csv({"k", "n_k", "eta_k", "theta_k", "Lambda_k_estimate", "Lambda_k_sigma", "measured", "sigma", "bound",
           "verdict", "hypothesis_a", "hypothesis_b"});
  std::vector<InductiveState> history;
  for (std::size_t k = 0; k < steps; ++k) {
    const auto data = measure_step(B, &A, sys, scales[k], scales[k + 1], mc_for(cfg, k));
    if (k == 0) {
      // eta0 defaults to the measured drop plus a 3 sigma margin and 0.01.
      s.eta = p.has("eta0") ? p.number("eta0")
                            : std::max(0.0, data.drop + kSigmaMultiplier * data.drop_sigma) + 0.01;
      s.validate();
      history.push_back(s);
      csv << std::size_t{0} << s.n << s.eta << s.theta << data.m.b_n0.value << data.m.b_n0.std_error << data.drop
          << data.drop_sigma << s.eta << verdict(check_less(data.drop, data.drop_sigma, s.eta));
      csv.blank().blank().end_row();
      r.plot.emplace_back(static_cast<double>(s.n), data.m.b_n0.value);
    }
    StepResult step;
    try {
      step = inductive_step(s, scales[k + 1], data, profile, growth);
    } catch (const GateError& e) {
      const auto g = inductive_gate(s);
      r.rejection = json{{"schema", kRejectionSchema}, {"command", cfg.command}, {"gate", e.reason()},
                         {"detail", e.what()}, {"step", k + 1}, {"lhs", g.lhs}, {"rhs", g.rhs}};
      break;
    }
    s = step.next;
    history.push_back(s);
    csv << (k + 1) << s.n << s.eta << s.theta << data.m.b_n1.value << data.m.b_n1.std_error << step.measured
        << step.sigma << step.bound << verdict(step.verdict) << verdict(step.hypothesis_a)
        << verdict(step.hypothesis_b);
    csv.end_row();
    r.plot.emplace_back(static_cast<double>(s.n), data.m.b_n1.value);
  }
  r.csv = csv.str();
  r.summary["kappa"] = s.kappa;
  r.summary["C"] = s.C;
  r.summary["scales"] = scales;
  r.summary["completed_steps"] = history.empty() ? 0 : history.size() - 1;
  if (!history.empty()) {
    const auto b = check_budget(history);
    r.summary["budget"] = {{"theta_final", b.theta_final}, {"bound", b.bound}, {"ok", b.ok}};
  }
  return r;
}

double c1_of(const Params& p, const Cocycle& A, const ErgodicSystem& sys, std::size_t n, const ExperimentConfig& cfg) {
  if (p.has("C1")) return p.number("C1");
  const double kappa = kappa_of(p, A, sys, n, aux_mc(cfg, 2));
  return calibrate_c1(estimate_c0(A, sys, n, aux_mc(cfg, 3)), std::max(kappa, 1e-12));
}

RunOutput continuity_scan(const ExperimentConfig& cfg, const Params& p) {
  const auto sys = p.system();
  const auto A = p.cocycle("cocycle");
  const auto E = direction_or_default(p, A);
  const auto profile = p.profile();
  const auto grid = p.scale_grid("n_grid", "n");
  const double pexp = p.number("p", 2.0);
  const double delta0 = p.number("delta0", 0.1);
  const double C1 = c1_of(p, A, sys, *std::min_element(grid.begin(), grid.end()), cfg);

  RunOutput r;
  Csv csv({"n", "h", "distance", "threshold", "lambda_b1", "lambda_b2", "measured", "sigma", "bound", "verdict"});
  const double e_norm = std::max(1.0, sup_norm(E, sys));
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double threshold = std::exp(-C1 * static_cast<double>(grid[j]));
    double h = 0.5 * threshold / e_norm;
    auto B2 = Cocycle::perturbed(A, E, h);
    for (int tries = 0; tries < 200 && !(distance(A, B2, sys, pexp) < threshold); ++tries) {
      h *= 0.5;
      B2 = Cocycle::perturbed(A, E, h);
    }
    const auto e = finite_scale_continuity_probe(A, A, B2, sys, grid[j], profile, C1, delta0, mc_for(cfg, j), pexp);
    csv << e.n << h << e.distance << e.threshold << e.lambda_b1.value << e.lambda_b2.value << e.delta << e.sigma
        << e.bound << verdict(e.verdict);
    csv.end_row();
    r.plot.emplace_back(static_cast<double>(e.n), e.delta);
  }
  r.csv = csv.str();
  r.summary["C1"] = C1;
  return r;
}

RunOutput usc_probe_cmd(const ExperimentConfig& cfg, const Params& p) {
  const auto sys = p.system();
  const auto A = p.cocycle("cocycle");
  const auto B = p.has("cocycle_b") ? p.cocycle("cocycle_b")
                                    : Cocycle::perturbed(A, direction_or_default(p, A), p.number("h", 1e-3));
  const auto profile = p.profile();
  const auto grid = p.scale_grid("n_grid", "n");
  const auto mode_name = p.string("mode", "finite");
  UscMode mode;
  if (mode_name == "finite")
    mode = UscMode::Finite;
  else if (mode_name == "minus_infinity")
    mode = UscMode::MinusInfinity;
  else
    throw InvalidInput("mode: expected \"finite\" or \"minus_infinity\"");
  const double value = p.number("value", mode == UscMode::Finite ? 0.1 : 5.0);
  const double delta = p.number("delta", 0.1);
  const double pexp = p.number("p", 2.0);
  double l1 = 0.0;
  std::size_t proxy_n = 0;
  if (mode == UscMode::Finite) {
    if (p.has("l1")) {
      l1 = p.number("l1");
    } else {
      proxy_n = p.integer("proxy_n", 100 * *std::max_element(grid.begin(), grid.end()));
      l1 = finite_scale_le(A, sys, proxy_n, 1, aux_mc(cfg, 4)).value;
    }
  }

  RunOutput r;
  Csv csv({"n", "distance", "level", "measured", "sigma", "bound", "verdict"});
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const auto u = usc_probe(A, B, sys, grid[j], mode, value, l1, delta, profile, mc_for(cfg, j), pexp);
    csv << u.n << u.distance << u.bound << u.violation << u.ci_radius / kSigmaMultiplier << u.predicted
        << verdict(u.verdict);
    csv.end_row();
    r.plot.emplace_back(static_cast<double>(u.n), u.violation);
  }
  r.csv = csv.str();
  r.summary["mode"] = mode_name;
  r.summary["l1"] = l1;
  r.summary["proxy_n"] = proxy_n;
  return r;
}

RunOutput speed_probe_cmd(const ExperimentConfig& cfg, const Params& p) {
  const auto sys = p.system();
  const auto B = p.cocycle("cocycle");
  const auto profile = p.profile();
  const auto grid = p.scale_grid("n_grid", "n");
  const double C = p.has("C") ? p.number("C")
                              : estimate_step_constant(B, sys, *std::min_element(grid.begin(), grid.end()),
                                                       aux_mc(cfg, 5));
  const auto rep = speed_probe(B, sys, profile, grid, C, mc_for(cfg, 0));

  RunOutput r;
  Csv csv({"n", "n_plus", "truncated", "lambda_n", "excess", "excess_sigma", "bound_phi", "bound_iota",
           "excess_verdict", "combination", "combination_sigma", "bound_step", "bound_step_iota",
           "combination_verdict"});
  for (const auto& row : rep.rows) {
    csv << row.n << row.n_plus << row.truncated << row.lambda_n << row.excess << row.excess_sigma << row.bound_phi
        << row.bound_iota << verdict(row.excess_verdict) << row.combination << row.combination_sigma
        << row.bound_step << row.bound_step_iota << verdict(row.combination_verdict);
    csv.end_row();
    r.plot.emplace_back(static_cast<double>(row.n), row.excess);
  }
  r.csv = csv.str();
  r.summary["C"] = C;
  r.summary["proxy_scale"] = rep.proxy_scale;
  r.summary["l1_proxy"] = le_json(rep.l1_proxy);
  return r;
}

RunOutput modulus_scan_cmd(const ExperimentConfig& cfg, const Params& p) {
  const auto sys = p.system();
  const auto A = p.cocycle("cocycle");
  const auto E = direction_or_default(p, A);
  const auto profile = p.profile();
  const auto hs = p.has("h_grid") ? p.numbers("h_grid") : std::vector<double>{1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  const double pexp = p.number("p", 2.0);
  const std::size_t proxy_n = p.integer("proxy_n", 1000);
  double C1 = 0.0;
  double c = 0.0;
  if (p.has("c")) {
    c = p.number("c");
  } else {
    C1 = c1_of(p, A, sys, std::min<std::size_t>(proxy_n, 100), cfg);
    c = 1.0 / (2.0 * C1);
  }
  const auto rep = modulus_scan(A, E, sys, hs, profile, c, pexp, proxy_n, mc_for(cfg, 0));

  RunOutput r;
  Csv csv({"h", "measured", "sigma", "bound", "verdict"});
  for (const auto& row : rep.rows) {
    csv << row.h << row.delta << row.sigma << row.omega << verdict(row.verdict);
    csv.end_row();
    r.plot.emplace_back(row.h, row.delta);
  }
  r.csv = csv.str();
  r.summary["exact"] = rep.exact;
  r.summary["c"] = c;
  if (C1 > 0.0) r.summary["C1"] = C1;
  r.summary["p"] = pexp;
  r.summary["slope"] = rep.slope;
  r.summary["proxy_scale"] = rep.proxy_scale;
  return r;
}

}  // namespace

const std::vector<CommandSpec>& command_table() {
  static const std::vector<CommandSpec> table{
      {"estimate-le", "finite-scale Lyapunov exponents Lambda_k^(n)", "n,k,value,std_error,samples,seed,neg_inf,exact",
       estimate_le},
      {"spectrum", "all finite-scale exponents through exterior powers", "n,k,exponent,sigma,block,block_sigma",
       spectrum},
      {"verify-ap", "Avalanche Principle defect on a given chain or a generated ensemble",
       "trial,n,measured,sigma,bound,hypotheses_ok,failed_condition,failed_index,verdict", verify_ap_cmd},
      {"ldt-probe", "empirical large-deviation measures of Birkhoff averages or fiber norms",
       "n,epsilon,measure,ci_radius,violations,samples,center,hoeffding", ldt_probe},
      {"multiscale", "inductive step campaign n_0 < n_1 < ... with the (eta, theta) ledger",
       "k,n_k,eta_k,theta_k,Lambda_k_estimate,Lambda_k_sigma,measured,sigma,bound,verdict,hypothesis_a,"
       "hypothesis_b",
       multiscale},
      {"continuity-scan", "finite-scale continuity |Lambda^(n)(B1) - Lambda^(n)(B2)| at dist < exp(-C1 n)",
       "n,h,distance,threshold,lambda_b1,lambda_b2,measured,sigma,bound,verdict", continuity_scan},
      {"usc-probe", "nearly uniform upper semicontinuity violation measures",
       "n,distance,level,measured,sigma,bound,verdict", usc_probe_cmd},
      {"speed-probe", "speed of convergence of Lambda^(n) against a long-scale proxy",
       "n,n_plus,truncated,lambda_n,excess,excess_sigma,bound_phi,bound_iota,excess_verdict,combination,"
       "combination_sigma,bound_step,bound_step_iota,combination_verdict",
       speed_probe_cmd},
      {"modulus-scan", "|L1(A + h E) - L1(A)| against the modulus omega(h)", "h,measured,sigma,bound,verdict",
       modulus_scan_cmd},
  };
  return table;
}

}  // namespace lyap::cli
