#include "lyap/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lyap/errors.hpp"
#include "lyap/rng.hpp"

namespace lyap {

namespace detail {

/// Cumulative sampling tables. `initial` is the law of x_0; `rows` (Markov
/// only) are the conditional laws of x_{j+1} given x_j.
struct ShiftLaw {
  std::vector<double> initial_cdf;
  std::vector<std::vector<double>> row_cdf;
  std::vector<double> marginal;

  static std::uint32_t draw(const std::vector<double>& cdf, double u) {
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    auto idx = static_cast<std::uint32_t>(it - cdf.begin());
    // Guard against u landing beyond a cdf whose last entry rounds below 1,
    // and skip trailing zero-probability symbols.
    if (idx >= cdf.size()) idx = static_cast<std::uint32_t>(cdf.size() - 1);
    while (idx > 0 && cdf[idx] == cdf[idx - 1]) --idx;
    return idx;
  }
};

class SymbolSource {
 public:
  SymbolSource(std::shared_ptr<const ShiftLaw> law, std::uint64_t seed, std::vector<std::uint32_t> prefix)
      : law_(std::move(law)), rng_(seed), symbols_(std::move(prefix)) {}

  std::uint32_t at(std::size_t j) {
    while (symbols_.size() <= j) extend();
    return symbols_[j];
  }

 private:
  void extend() {
    const double u = rng_.uniform();
    if (symbols_.empty() || law_->row_cdf.empty()) {
      symbols_.push_back(ShiftLaw::draw(law_->initial_cdf, u));
    } else {
      symbols_.push_back(ShiftLaw::draw(law_->row_cdf[symbols_.back()], u));
    }
  }

  std::shared_ptr<const ShiftLaw> law_;
  Rng rng_;
  std::vector<std::uint32_t> symbols_;
};

}  // namespace detail

namespace {

constexpr double kProbabilityTolerance = 1e-12;

void validate_probability_vector(const std::vector<double>& p, const char* what) {
  if (p.empty()) throw InvalidInput(std::string(what) + " must be non-empty");
  double sum = 0.0;
  for (double v : p) {
    if (!std::isfinite(v) || v < 0.0) throw InvalidInput(std::string(what) + " entries must be finite and >= 0");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kProbabilityTolerance)
    throw InvalidInput(std::string(what) + " must sum to 1 (got " + std::to_string(sum) + ")");
}

std::vector<double> cdf_of(const std::vector<double>& p) {
  std::vector<double> cdf(p.size());
  std::partial_sum(p.begin(), p.end(), cdf.begin());
  return cdf;
}

// Solves pi (P - I) = 0, sum pi = 1 by Gaussian elimination with the last
// balance equation replaced by the normalization.
std::vector<double> stationary_vector(const std::vector<std::vector<double>>& P) {
  const std::size_t k = P.size();
  std::vector<std::vector<double>> a(k, std::vector<double>(k + 1, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) a[i][j] = P[j][i] - (i == j ? 1.0 : 0.0);
  }
  for (std::size_t j = 0; j < k; ++j) a[k - 1][j] = 1.0;
  a[k - 1][k] = 1.0;

  for (std::size_t col = 0; col < k; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < k; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    if (std::abs(a[pivot][col]) < 1e-14)
      throw InvalidInput("Markov chain has no unique stationary vector (reducible transition matrix)");
    std::swap(a[pivot], a[col]);
    for (std::size_t r = 0; r < k; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (std::size_t j = col; j <= k; ++j) a[r][j] -= f * a[col][j];
    }
  }
  std::vector<double> pi(k);
  for (std::size_t i = 0; i < k; ++i) pi[i] = std::max(0.0, a[i][k] / a[i][i]);
  const double total = std::accumulate(pi.begin(), pi.end(), 0.0);
  for (double& v : pi) v /= total;
  return pi;
}

double frac(double v) {
  double r = v - std::floor(v);
  if (r >= 1.0) r = 0.0;  // v slightly below an integer can round up to 1
  return r;
}

}  // namespace

ErgodicSystem::ErgodicSystem(Variant v) : variant_(std::move(v)) {
  if (auto* b = std::get_if<BernoulliShift>(&variant_)) {
    auto law = std::make_shared<detail::ShiftLaw>();
    law->initial_cdf = cdf_of(b->p);
    law->marginal = b->p;
    law_ = std::move(law);
  } else if (auto* m = std::get_if<MarkovShift>(&variant_)) {
    auto law = std::make_shared<detail::ShiftLaw>();
    law->initial_cdf = cdf_of(m->stationary);
    for (const auto& row : m->transition) law->row_cdf.push_back(cdf_of(row));
    law->marginal = m->stationary;
    law_ = std::move(law);
  }
}

ErgodicSystem ErgodicSystem::bernoulli(std::vector<double> p) {
  validate_probability_vector(p, "Bernoulli probability vector");
  return ErgodicSystem(BernoulliShift{std::move(p)});
}

ErgodicSystem ErgodicSystem::markov(std::vector<std::vector<double>> transition) {
  const std::size_t k = transition.size();
  if (k == 0) throw InvalidInput("Markov transition matrix must be non-empty");
  for (const auto& row : transition) {
    if (row.size() != k) throw InvalidInput("Markov transition matrix must be square");
    validate_probability_vector(row, "Markov transition row");
  }
  auto pi = stationary_vector(transition);
  for (std::size_t j = 0; j < k; ++j) {
    double v = 0.0;
    for (std::size_t i = 0; i < k; ++i) v += pi[i] * transition[i][j];
    if (std::abs(v - pi[j]) > 1e-10) throw InvalidInput("stationary vector did not satisfy pi P = pi");
  }
  return ErgodicSystem(MarkovShift{std::move(transition), std::move(pi)});
}

ErgodicSystem ErgodicSystem::torus(std::vector<double> alpha) {
  if (alpha.empty()) throw InvalidInput("torus dimension must be >= 1");
  for (double a : alpha)
    if (!std::isfinite(a) || a < 0.0 || a >= 1.0) throw InvalidInput("torus frequencies must lie in [0, 1)");
  return ErgodicSystem(TorusTranslation{std::move(alpha)});
}

std::size_t ErgodicSystem::alphabet_size() const noexcept {
  return law_ ? law_->marginal.size() : 0;
}

std::size_t ErgodicSystem::torus_dim() const noexcept {
  if (const auto* t = std::get_if<TorusTranslation>(&variant_)) return t->alpha.size();
  return 0;
}

std::span<const double> ErgodicSystem::symbol_marginal() const {
  if (!law_) throw InvalidInput("torus translations have no symbol marginal");
  return law_->marginal;
}

Phase Phase::on_torus(const ErgodicSystem& system, std::vector<double> point) {
  if (!system.is_torus()) throw InvalidInput("torus phase requested for a shift system");
  if (point.size() != system.torus_dim()) throw InvalidInput("torus point has the wrong dimension");
  for (double& v : point) {
    if (!std::isfinite(v)) throw InvalidInput("torus point must be finite");
    v = frac(v);
  }
  Phase x;
  x.point_ = std::move(point);
  return x;
}

Phase Phase::with_prefix(const ErgodicSystem& system, std::vector<std::uint32_t> prefix, std::uint64_t seed) {
  if (!system.is_shift()) throw InvalidInput("symbolic phase requested for a torus system");
  for (auto s : prefix)
    if (s >= system.alphabet_size()) throw InvalidInput("prefix symbol outside the alphabet");
  Phase x;
  x.source_ = std::make_shared<detail::SymbolSource>(system.law(), seed, std::move(prefix));
  return x;
}

std::uint32_t Phase::symbol(std::size_t offset) const {
  if (!source_) throw InvalidInput("torus phases have no symbols");
  return source_->at(cursor_ + offset);
}

void Phase::shift_by(const ErgodicSystem& system, std::size_t steps) {
  if (source_) {
    cursor_ += steps;
    return;
  }
  const auto& alpha = std::get<TorusTranslation>(system.variant()).alpha;
  if (alpha.size() != point_.size()) throw InvalidInput("phase does not belong to this torus");
  for (std::size_t s = 0; s < steps; ++s)
    for (std::size_t i = 0; i < point_.size(); ++i) point_[i] = frac(point_[i] + alpha[i]);
}

Phase sample_phase(const ErgodicSystem& system, std::uint64_t seed) {
  if (system.is_shift()) {
    Phase x;
    x.source_ = std::make_shared<detail::SymbolSource>(system.law(), seed, std::vector<std::uint32_t>{});
    return x;
  }
  Rng rng(seed);
  std::vector<double> p(system.torus_dim());
  for (double& v : p) v = rng.uniform();
  return Phase::on_torus(system, std::move(p));
}

Phase advance(const ErgodicSystem& system, const Phase& x, long long steps) {
  if (steps < 0) throw InvalidInput("advance requires steps >= 0 (one-sided dynamics)");
  if (x.is_symbolic() != system.is_shift()) throw InvalidInput("phase does not belong to this system");
  Phase y = x;
  y.shift_by(system, static_cast<std::size_t>(steps));
  return y;
}

Observable::Observable(BoxIndicator b) {
  if (b.lower.size() != b.upper.size() || b.lower.empty())
    throw InvalidInput("box bounds must be non-empty and of equal dimension");
  variant_ = std::move(b);
}

Observable::Observable(BoundedFunction f) {
  if (!f.fn) throw InvalidInput("observable function is empty");
  if (!(f.bound >= 0.0) || !std::isfinite(f.bound)) throw InvalidInput("observable bound must be finite and >= 0");
  variant_ = std::move(f);
}

Observable Observable::constant(double value) {
  return Observable(BoundedFunction{[value](const Phase&) { return value; }, std::abs(value)});
}

double Observable::operator()(const Phase& x) const {
  return std::visit(
      [&](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, CylinderIndicator>) {
          for (std::size_t i = 0; i < v.word.size(); ++i)
            if (x.symbol(i) != v.word[i]) return 0.0;
          return 1.0;
        } else if constexpr (std::is_same_v<T, BoxIndicator>) {
          const auto p = x.point();
          if (p.size() != v.lower.size()) throw InvalidInput("box dimension does not match the phase");
          for (std::size_t i = 0; i < p.size(); ++i)
            if (p[i] < v.lower[i] || p[i] >= v.upper[i]) return 0.0;
          return 1.0;
        } else {
          const double value = v.fn(x);
          if (!(std::abs(value) <= v.bound)) throw InvalidInput("observable exceeded its declared bound");
          return value;
        }
      },
      variant_);
}

double Observable::bound() const noexcept {
  if (const auto* f = std::get_if<BoundedFunction>(&variant_)) return f->bound;
  return 1.0;
}

double birkhoff_average(const ErgodicSystem& system, const Observable& xi, const Phase& x, std::size_t n) {
  if (n == 0) throw InvalidInput("Birkhoff average requires n >= 1");
  if (x.is_symbolic() != system.is_shift()) throw InvalidInput("phase does not belong to this system");
  Phase y = x;
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    sum += xi(y);
    if (j + 1 < n) y.shift_by(system, 1);
  }
  return sum / static_cast<double>(n);
}

double observable_mean(const ErgodicSystem& system, const Observable& xi) {
  return std::visit(
      [&](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, CylinderIndicator>) {
          if (!system.is_shift()) throw InvalidInput("cylinder observable on a torus system");
          if (v.word.empty()) return 1.0;
          for (auto s : v.word)
            if (s >= system.alphabet_size()) return 0.0;
          const auto marginal = system.symbol_marginal();
          double mass = marginal[v.word[0]];
          if (const auto* m = std::get_if<MarkovShift>(&system.variant())) {
            for (std::size_t i = 1; i < v.word.size(); ++i) mass *= m->transition[v.word[i - 1]][v.word[i]];
          } else {
            for (std::size_t i = 1; i < v.word.size(); ++i) mass *= marginal[v.word[i]];
          }
          return mass;
        } else if constexpr (std::is_same_v<T, BoxIndicator>) {
          if (!system.is_torus() || v.lower.size() != system.torus_dim())
            throw InvalidInput("box observable does not match the torus dimension");
          double vol = 1.0;
          for (std::size_t i = 0; i < v.lower.size(); ++i) {
            const double lo = std::clamp(v.lower[i], 0.0, 1.0);
            const double hi = std::clamp(v.upper[i], 0.0, 1.0);
            vol *= std::max(0.0, hi - lo);
          }
          return vol;
        } else {
          throw InvalidInput("user observables have no closed-form mean; estimate it by sampling");
        }
      },
      xi.variant());
}

std::vector<WeightedPhase> evaluation_grid(const ErgodicSystem& system, std::size_t torus_points) {
  std::vector<WeightedPhase> grid;
  if (system.is_shift()) {
    const auto marginal = system.symbol_marginal();
    for (std::uint32_t s = 0; s < marginal.size(); ++s)
      grid.push_back({Phase::with_prefix(system, {s}), marginal[s]});
    return grid;
  }
  if (torus_points == 0) throw InvalidInput("torus evaluation grid needs at least one point");
  // R_d sequence: frequencies are powers of the inverse of the unique
  // positive root of x^{d+1} = x + 1.
  const std::size_t d = system.torus_dim();
  double g = 2.0;
  for (int it = 0; it < 64; ++it) g = std::pow(1.0 + g, 1.0 / static_cast<double>(d + 1));
  std::vector<double> freq(d);
  for (std::size_t i = 0; i < d; ++i) freq[i] = frac(1.0 / std::pow(g, static_cast<double>(i + 1)));
  const double w = 1.0 / static_cast<double>(torus_points);
  grid.reserve(torus_points);
  for (std::size_t j = 0; j < torus_points; ++j) {
    std::vector<double> p(d);
    for (std::size_t i = 0; i < d; ++i) p[i] = frac(0.5 + freq[i] * static_cast<double>(j));
    grid.push_back({Phase::on_torus(system, std::move(p)), w});
  }
  return grid;
}

}  // namespace lyap
