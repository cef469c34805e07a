#include "lyap/cocycle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "lyap/errors.hpp"
#include "lyap/rng.hpp"

namespace lyap {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double trig_value(const TrigPolynomial& poly, std::span<const double> x) {
  double v = 0.0;
  for (const auto& term : poly) {
    double phase = 0.0;
    for (std::size_t i = 0; i < term.freq.size(); ++i) phase += term.freq[i] * x[i];
    phase *= 2.0 * std::numbers::pi;
    if (term.cos_coef != 0.0) v += term.cos_coef * std::cos(phase);
    if (term.sin_coef != 0.0) v += term.sin_coef * std::sin(phase);
  }
  return v;
}

// Frobenius norm without the overflow guard; iterates stay normalized.
double fast_frobenius(const Matrix& m) {
  double s = 0.0;
  for (double v : m.data()) s += v * v;
  return std::sqrt(s);
}

// (1/n)(a - b) where -inf - -inf is taken as -inf (both blocks vanish).
double log_difference(double a, double b) {
  if (a == kNegInf) return kNegInf;
  return a - b;
}

}  // namespace

Cocycle::Cocycle(std::size_t dim, Node node)
    : dim_(dim), node_(std::make_shared<const Node>(std::move(node))) {}

Cocycle Cocycle::constant(Matrix value) {
  if (value.empty() || !value.is_finite()) throw InvalidInput("constant cocycle needs a finite matrix of dim >= 1");
  const auto d = value.dim();
  return Cocycle(d, detail::ConstantNode{std::move(value)});
}

Cocycle Cocycle::locally_constant(std::vector<Matrix> values) {
  if (values.empty()) throw InvalidInput("locally constant cocycle needs at least one matrix");
  const auto d = values.front().dim();
  for (const auto& m : values) {
    if (m.dim() != d || d == 0) throw InvalidInput("locally constant cocycle matrices must share one dimension");
    if (!m.is_finite()) throw InvalidInput("locally constant cocycle matrices must be finite");
  }
  return Cocycle(d, detail::LocallyConstantNode{std::move(values)});
}

Cocycle Cocycle::torus_function(std::size_t dim, std::vector<TrigPolynomial> entries) {
  if (dim == 0 || entries.size() != dim * dim) throw InvalidInput("torus cocycle needs dim*dim entry polynomials");
  std::size_t tdim = 0;
  for (const auto& poly : entries) {
    for (const auto& term : poly) {
      if (term.freq.empty()) throw InvalidInput("trigonometric term needs a frequency vector");
      if (tdim == 0) tdim = term.freq.size();
      if (term.freq.size() != tdim) throw InvalidInput("trigonometric terms disagree on the torus dimension");
      if (!std::isfinite(term.cos_coef) || !std::isfinite(term.sin_coef))
        throw InvalidInput("trigonometric coefficients must be finite");
    }
  }
  if (tdim == 0) throw InvalidInput("torus cocycle has no terms; use a constant cocycle");
  return Cocycle(dim, detail::TorusFunctionNode{dim, tdim, std::move(entries)});
}

Cocycle Cocycle::perturbed(const Cocycle& base, const Cocycle& direction, double h) {
  if (!(h >= 0.0) || !std::isfinite(h)) throw InvalidInput("perturbation magnitude must be finite and >= 0");
  if (base.dim() != direction.dim()) throw InvalidInput("perturbation direction has the wrong dimension");
  return Cocycle(base.dim(), detail::PerturbedNode{std::make_shared<const Cocycle>(base),
                                                   std::make_shared<const Cocycle>(direction), h});
}

Cocycle Cocycle::exterior(const Cocycle& base, std::size_t k) {
  const std::size_t m = base.dim();
  if (k < 1 || k > m) throw InvalidInput("exterior power degree must satisfy 1 <= k <= dim");
  if (k == 1) return base;
  const std::size_t d = binomial(m, k);
  if (d > kMaxExteriorDim) throw CapacityError("exterior power dimension " + std::to_string(d) + " exceeds limit");
  if (const auto* c = std::get_if<detail::ConstantNode>(base.node_.get())) {
    return constant(exterior_power(c->value, k));
  }
  if (const auto* lc = std::get_if<detail::LocallyConstantNode>(base.node_.get())) {
    std::vector<Matrix> values;
    values.reserve(lc->values.size());
    for (const auto& v : lc->values) values.push_back(exterior_power(v, k));
    return locally_constant(std::move(values));
  }
  return Cocycle(d, detail::ExteriorNode{std::make_shared<const Cocycle>(base), k});
}

const Matrix& Cocycle::evaluate_ref(const Phase& x, Matrix& scratch) const {
  return std::visit(
      Overloaded{
          [&](const detail::ConstantNode& n) -> const Matrix& { return n.value; },
          [&](const detail::LocallyConstantNode& n) -> const Matrix& {
            if (!x.is_symbolic()) throw InvalidInput("locally constant cocycle evaluated on a torus phase");
            const auto s = x.symbol();
            if (s >= n.values.size()) throw InvalidInput("symbol outside the cocycle's alphabet");
            return n.values[s];
          },
          [&](const detail::TorusFunctionNode& n) -> const Matrix& {
            if (x.is_symbolic()) throw InvalidInput("torus cocycle evaluated on a symbolic phase");
            const auto p = x.point();
            if (p.size() != n.torus_dim) throw InvalidInput("torus cocycle evaluated on a torus of wrong dimension");
            if (scratch.dim() != n.dim) scratch = Matrix(n.dim);
            for (std::size_t i = 0; i < n.dim * n.dim; ++i) scratch.data()[i] = trig_value(n.entries[i], p);
            return scratch;
          },
          [&](const detail::PerturbedNode& n) -> const Matrix& {
            Matrix tmp;
            scratch = n.base->evaluate_ref(x, scratch);
            const Matrix& dir = n.direction->evaluate_ref(x, tmp);
            auto out = scratch.data();
            auto d = dir.data();
            for (std::size_t i = 0; i < out.size(); ++i) out[i] += n.h * d[i];
            return scratch;
          },
          [&](const detail::ExteriorNode& n) -> const Matrix& {
            Matrix tmp;
            scratch = exterior_power(n.base->evaluate_ref(x, tmp), n.k);
            return scratch;
          },
      },
      *node_);
}

Matrix Cocycle::evaluate(const Phase& x) const {
  Matrix scratch;
  return evaluate_ref(x, scratch);
}

void Cocycle::check_compatible(const ErgodicSystem& system) const {
  std::visit(Overloaded{
                 [](const detail::ConstantNode&) {},
                 [&](const detail::LocallyConstantNode& n) {
                   if (!system.is_shift()) throw InvalidInput("locally constant cocycle needs a shift system");
                   if (n.values.size() != system.alphabet_size())
                     throw InvalidInput("cocycle has " + std::to_string(n.values.size()) +
                                        " matrices but the shift has " + std::to_string(system.alphabet_size()) +
                                        " symbols");
                 },
                 [&](const detail::TorusFunctionNode& n) {
                   if (!system.is_torus() || system.torus_dim() != n.torus_dim)
                     throw InvalidInput("torus cocycle needs a torus translation of matching dimension");
                 },
                 [&](const detail::PerturbedNode& n) {
                   n.base->check_compatible(system);
                   n.direction->check_compatible(system);
                 },
                 [&](const detail::ExteriorNode& n) { n.base->check_compatible(system); },
             },
             *node_);
}

bool Cocycle::depends_on_current_symbol_only() const noexcept {
  return std::visit(Overloaded{
                        [](const detail::ConstantNode&) { return true; },
                        [](const detail::LocallyConstantNode&) { return true; },
                        [](const detail::TorusFunctionNode&) { return false; },
                        [](const detail::PerturbedNode& n) {
                          return n.base->depends_on_current_symbol_only() &&
                                 n.direction->depends_on_current_symbol_only();
                        },
                        [](const detail::ExteriorNode& n) { return n.base->depends_on_current_symbol_only(); },
                    },
                    *node_);
}

IterateResult iterate(const Cocycle& A, const ErgodicSystem& system, const Phase& x, std::size_t n) {
  if (n == 0) throw InvalidInput("iterate requires n >= 1");
  A.check_compatible(system);
  if (x.is_symbolic() != system.is_shift()) throw InvalidInput("phase does not belong to this system");

  const std::size_t m = A.dim();
  Phase y = x;
  Matrix scratch(m);
  Matrix prod = A.evaluate_ref(y, scratch);
  Matrix next(m);
  double log_scale = 0.0;

  auto renormalize = [&]() -> bool {
    const double f = fast_frobenius(prod);
    if (f == 0.0) return false;
    prod *= 1.0 / f;
    log_scale += std::log(f);
    return true;
  };

  if (!renormalize()) return {kNegInf, Matrix(m)};
  for (std::size_t j = 1; j < n; ++j) {
    y.shift_by(system, 1);
    multiply_into(A.evaluate_ref(y, scratch), prod, next);
    std::swap(prod, next);
    if (!renormalize()) return {kNegInf, Matrix(m)};
  }
  const double s = op_norm(prod);
  prod *= 1.0 / s;
  return {log_scale + std::log(s), std::move(prod)};
}

std::vector<double> iterate_checkpoints(const Cocycle& A, const ErgodicSystem& system, const Phase& x,
                                        std::span<const std::size_t> checkpoints) {
  if (checkpoints.empty()) return {};
  if (checkpoints.front() == 0) throw InvalidInput("checkpoints must be >= 1");
  for (std::size_t i = 1; i < checkpoints.size(); ++i)
    if (checkpoints[i] <= checkpoints[i - 1]) throw InvalidInput("checkpoints must be strictly increasing");
  A.check_compatible(system);
  if (x.is_symbolic() != system.is_shift()) throw InvalidInput("phase does not belong to this system");

  std::vector<double> out(checkpoints.size(), kNegInf);
  const std::size_t m = A.dim();
  Phase y = x;
  Matrix scratch(m);
  Matrix prod = A.evaluate_ref(y, scratch);
  Matrix next(m);
  double log_scale = 0.0;
  std::size_t c = 0;
  for (std::size_t j = 1;; ++j) {
    if (j > 1) {
      y.shift_by(system, 1);
      multiply_into(A.evaluate_ref(y, scratch), prod, next);
      std::swap(prod, next);
    }
    const double f = fast_frobenius(prod);
    if (f == 0.0) return out;  // remaining checkpoints stay -inf
    prod *= 1.0 / f;
    log_scale += std::log(f);
    if (j == checkpoints[c]) {
      out[c] = log_scale + std::log(op_norm(prod));
      if (++c == checkpoints.size()) return out;
    }
  }
}

std::vector<double> sample_log_norms(const Cocycle& A, const ErgodicSystem& system, std::size_t n,
                                     const McOptions& mc) {
  if (n == 0) throw InvalidInput("scale n must be >= 1");
  if (mc.samples == 0) throw InvalidInput("samples must be >= 1");
  A.check_compatible(system);
  const double inv_n = 1.0 / static_cast<double>(n);
  return parallel_map(mc.samples, mc.workers, [&](std::size_t i) {
    const Phase x = sample_phase(system, derive_seed(mc.seed, i));
    return iterate(A, system, x, n).log_norm * inv_n;
  });
}

FiniteScaleLE finite_scale_le(const Cocycle& A, const ErgodicSystem& system, std::size_t n, std::size_t k,
                              const McOptions& mc) {
  if (k < 1 || k > A.dim()) throw InvalidInput("singular value index must satisfy 1 <= k <= dim");
  std::vector<double> values;
  if (k == 1) {
    values = sample_log_norms(A, system, n, mc);
  } else {
    if (n == 0) throw InvalidInput("scale n must be >= 1");
    if (mc.samples == 0) throw InvalidInput("samples must be >= 1");
    A.check_compatible(system);
    const Cocycle upper = Cocycle::exterior(A, k);
    const Cocycle lower = Cocycle::exterior(A, k - 1);
    const double inv_n = 1.0 / static_cast<double>(n);
    values = parallel_map(mc.samples, mc.workers, [&](std::size_t i) {
      const Phase x = sample_phase(system, derive_seed(mc.seed, i));
      const double a = iterate(upper, system, x, n).log_norm;
      const double b = iterate(lower, system, x, n).log_norm;
      return log_difference(a, b) * inv_n;
    });
  }
  const auto stats = summarize(values);
  return {n, k, stats.mean, stats.std_error, stats.samples, stats.neg_inf, mc.seed};
}

namespace {

struct Enumerator {
  const std::vector<Matrix>& upper;  // wedge_k of each letter
  const std::vector<Matrix>* lower;  // wedge_{k-1}, or null when k = 1
  const ErgodicSystem& system;
  std::size_t n;
  double total = 0.0;
  bool hit_zero = false;

  void run() {
    const auto marginal = system.symbol_marginal();
    for (std::uint32_t s = 0; s < marginal.size(); ++s) {
      if (marginal[s] == 0.0) continue;
      Matrix pu = upper[s];
      double lu = normalize(pu);
      Matrix pl;
      double ll = 0.0;
      if (lower) {
        pl = (*lower)[s];
        ll = normalize(pl);
      }
      descend(1, s, marginal[s], pu, lu, pl, ll);
    }
  }

  static double normalize(Matrix& p) {
    const double f = p.frobenius_norm();
    if (f == 0.0) return kNegInf;
    p *= 1.0 / f;
    return std::log(f);
  }

  double transition(std::uint32_t from, std::uint32_t to) const {
    if (const auto* m = std::get_if<MarkovShift>(&system.variant())) return m->transition[from][to];
    return system.symbol_marginal()[to];
  }

  void descend(std::size_t depth, std::uint32_t last, double weight, const Matrix& pu, double lu, const Matrix& pl,
               double ll) {
    if (depth == n) {
      const double a = lu == kNegInf ? kNegInf : lu + std::log(op_norm(pu));
      double b = 0.0;
      if (lower) b = ll == kNegInf ? kNegInf : ll + std::log(op_norm(pl));
      const double v = log_difference(a, b);
      if (v == kNegInf) {
        hit_zero = true;
        return;
      }
      total += weight * v / static_cast<double>(n);
      return;
    }
    const std::size_t k = upper.size();
    for (std::uint32_t s = 0; s < k; ++s) {
      const double w = weight * transition(last, s);
      if (w == 0.0) continue;
      Matrix nu = upper[s] * pu;
      const double lnu = lu == kNegInf ? kNegInf : lu + normalize(nu);
      Matrix nl;
      double lnl = 0.0;
      if (lower) {
        nl = (*lower)[s] * pl;
        lnl = ll == kNegInf ? kNegInf : ll + normalize(nl);
      }
      descend(depth + 1, s, w, nu, lnu, nl, lnl);
    }
  }
};

std::vector<Matrix> letters_of(const Cocycle& A, const ErgodicSystem& system) {
  if (const auto* c = std::get_if<detail::ConstantNode>(&A.node()))
    return std::vector<Matrix>(system.alphabet_size(), c->value);
  if (const auto* lc = std::get_if<detail::LocallyConstantNode>(&A.node())) return lc->values;
  throw InvalidInput("exact enumeration needs a constant or locally constant cocycle");
}

}  // namespace

double finite_scale_le_exact(const Cocycle& A, const ErgodicSystem& system, std::size_t n, std::size_t k) {
  if (!system.is_shift()) throw InvalidInput("exact enumeration needs a Bernoulli or Markov shift");
  if (n == 0) throw InvalidInput("scale n must be >= 1");
  if (k < 1 || k > A.dim()) throw InvalidInput("singular value index must satisfy 1 <= k <= dim");
  A.check_compatible(system);
  const double words = std::pow(static_cast<double>(system.alphabet_size()), static_cast<double>(n));
  if (words > kMaxEnumeratedWords)
    throw CapacityError("enumeration of " + std::to_string(words) + " words exceeds the limit");

  const auto upper = letters_of(Cocycle::exterior(A, k), system);
  std::vector<Matrix> lower;
  if (k >= 2) lower = letters_of(Cocycle::exterior(A, k - 1), system);
  Enumerator e{upper, k >= 2 ? &lower : nullptr, system, n};
  e.run();
  return e.hit_zero ? kNegInf : e.total;
}

DistanceBreakdown distance_breakdown(const Cocycle& A, const Cocycle& B, const ErgodicSystem& system, double p) {
  if (A.dim() != B.dim()) throw InvalidInput("distance between cocycles of different dimensions");
  if (!(p > 1.0)) throw InvalidInput("distance exponent p must lie in (1, inf]");
  A.check_compatible(system);
  B.check_compatible(system);

  const auto grid = evaluation_grid(system);
  DistanceBreakdown out;
  double lp_sum = 0.0;
  bool invertible = true;
  Matrix sa, sb;
  for (const auto& [x, w] : grid) {
    if (w == 0.0) continue;
    const Matrix& a = A.evaluate_ref(x, sa);
    const Matrix diff = a - B.evaluate_ref(x, sb);
    out.sup_term = std::max(out.sup_term, op_norm(diff));
    if (std::isfinite(p) && invertible) {
      const double amin = singular_values(A.evaluate_ref(x, sa)).smallest();
      const double bmin = singular_values(B.evaluate_ref(x, sb)).smallest();
      if (amin <= 0.0 || bmin <= 0.0) {
        invertible = false;
        continue;
      }
      // ||A^-1|| = 1 / s_min(A)
      lp_sum += w * std::pow(std::abs(std::log(bmin) - std::log(amin)), p);
    }
  }
  out.value = out.sup_term;
  if (std::isfinite(p) && invertible) {
    out.inverse_term = std::pow(lp_sum, 1.0 / p);
    out.value += out.inverse_term;
    out.sup_only = false;
  }
  return out;
}

double distance(const Cocycle& A, const Cocycle& B, const ErgodicSystem& system, double p) {
  return distance_breakdown(A, B, system, p).value;
}

double sup_norm(const Cocycle& A, const ErgodicSystem& system) {
  A.check_compatible(system);
  double best = 0.0;
  Matrix scratch;
  for (const auto& [x, w] : evaluation_grid(system)) {
    if (w == 0.0) continue;
    best = std::max(best, op_norm(A.evaluate_ref(x, scratch)));
  }
  return best;
}

double lp_bound(const Cocycle& A, const ErgodicSystem& system, std::size_t n, double p, const McOptions& mc) {
  if (!(p >= 1.0)) throw InvalidInput("L^p exponent must be >= 1");
  const auto values = sample_log_norms(A, system, n, mc);
  if (std::isinf(p)) {
    double best = 0.0;
    for (double v : values) best = std::max(best, std::abs(v));
    return best;
  }
  double sum = 0.0;
  for (double v : values) {
    if (v == kNegInf) return std::numeric_limits<double>::infinity();
    sum += std::pow(std::abs(v), p);
  }
  return std::pow(sum / static_cast<double>(values.size()), 1.0 / p);
}

SampleStats log_det_average(const Cocycle& A, const ErgodicSystem& system, std::size_t n, const McOptions& mc) {
  if (n == 0) throw InvalidInput("scale n must be >= 1");
  A.check_compatible(system);
  const auto values = parallel_map(mc.samples, mc.workers, [&](std::size_t i) {
    Phase y = sample_phase(system, derive_seed(mc.seed, i));
    Matrix scratch;
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j > 0) y.shift_by(system, 1);
      const double d = std::abs(determinant(A.evaluate_ref(y, scratch)));
      if (d == 0.0) return kNegInf;
      sum += std::log(d);
    }
    return sum / static_cast<double>(n);
  });
  return summarize(values);
}

SpectralGapEstimate estimate_gap(const Cocycle& A, const ErgodicSystem& system, std::size_t n, const McOptions& mc,
                                 double kappa_cap) {
  if (A.dim() < 2) throw InvalidInput("spectral gap needs dim >= 2");
  if (!(kappa_cap > 0.0)) throw InvalidInput("kappa cap must be positive");
  SpectralGapEstimate g;
  g.kappa_cap = kappa_cap;
  g.lambda1 = finite_scale_le(A, system, n, 1, mc);
  g.lambda2 = finite_scale_le(A, system, n, 2, mc);
  if (g.lambda2.value == kNegInf) {
    g.kappa = kappa_cap;
  } else {
    g.kappa = std::min(kappa_cap, g.lambda1.value - g.lambda2.value);
  }
  return g;
}

double log_spectral_radius(const Matrix& M) {
  if (M.empty() || !M.is_finite()) throw InvalidInput("spectral radius needs a finite matrix");
  // log||M^{2^K}|| / 2^K -> log rho(M). With K = 60 the bias of the limit is
  // below double precision for any fixed matrix.
  constexpr int kSquarings = 60;
  Matrix q = M;
  double f = q.frobenius_norm();
  if (f == 0.0) return kNegInf;
  q *= 1.0 / f;
  double rate = std::log(f);
  double weight = 1.0;
  Matrix sq(M.dim());
  for (int i = 0; i < kSquarings; ++i) {
    multiply_into(q, q, sq);
    f = sq.frobenius_norm();
    if (f == 0.0) return kNegInf;
    sq *= 1.0 / f;
    std::swap(q, sq);
    weight *= 0.5;
    rate += weight * std::log(f);
  }
  return rate + weight * std::log(op_norm(q));
}

std::vector<double> constant_spectrum(const Matrix& M) {
  const std::size_t m = M.dim();
  std::vector<double> out(m);
  double prev = 0.0;
  for (std::size_t k = 1; k <= m; ++k) {
    const double block = log_spectral_radius(exterior_power(M, k));
    out[k - 1] = log_difference(block, prev);
    prev = block;
  }
  return out;
}

}  // namespace lyap
