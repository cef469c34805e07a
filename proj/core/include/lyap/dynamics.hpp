#pragma once

// Ergodic base systems (X, mu, T): Bernoulli and Markov one-sided shifts and
// torus translations, their phases, observables and Birkhoff averages.

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <variant>
#include <vector>

namespace lyap {

struct BernoulliShift {
  std::vector<double> p;
};

struct MarkovShift {
  std::vector<std::vector<double>> transition;  // row-stochastic
  std::vector<double> stationary;               // pi with pi P = pi
};

struct TorusTranslation {
  std::vector<double> alpha;  // each coordinate in [0, 1)
};

namespace detail {
class SymbolSource;
struct ShiftLaw;
}  // namespace detail

/// Immutable description of a base system. Cheap to copy; safe to share
/// across threads.
class ErgodicSystem {
 public:
  using Variant = std::variant<BernoulliShift, MarkovShift, TorusTranslation>;

  /// Probability vector must be non-negative and sum to 1 within 1e-12.
  static ErgodicSystem bernoulli(std::vector<double> p);
  /// Rows must be probability vectors. The stationary vector is solved for.
  static ErgodicSystem markov(std::vector<std::vector<double>> transition);
  /// Every frequency must lie in [0, 1).
  static ErgodicSystem torus(std::vector<double> alpha);

  const Variant& variant() const noexcept { return variant_; }
  bool is_shift() const noexcept { return !std::holds_alternative<TorusTranslation>(variant_); }
  bool is_torus() const noexcept { return !is_shift(); }
  /// Number of symbols (shifts) or 0 (torus).
  std::size_t alphabet_size() const noexcept;
  /// Torus dimension, or 0 for shifts.
  std::size_t torus_dim() const noexcept;

  /// Marginal law of a single symbol: p for Bernoulli, pi for Markov.
  std::span<const double> symbol_marginal() const;

  const std::shared_ptr<const detail::ShiftLaw>& law() const noexcept { return law_; }

 private:
  explicit ErgodicSystem(Variant v);

  Variant variant_;
  std::shared_ptr<const detail::ShiftLaw> law_;  // null for torus
};

/// A point of X. For shifts: a cursor into a symbol stream that is generated
/// lazily and deterministically from a seed, so a phase is a small value that
/// can be copied freely; copies share the materialized prefix. The stream is
/// not synchronized: a phase and its copies belong to one thread.
/// For the torus: a point of [0,1)^d.
class Phase {
 public:
  /// Torus point. Coordinates are reduced into [0, 1).
  static Phase on_torus(const ErgodicSystem& system, std::vector<double> point);
  /// Shift phase whose first symbols are `prefix`; later symbols continue
  /// according to the system's law (Markov continues from the last prefix symbol).
  static Phase with_prefix(const ErgodicSystem& system, std::vector<std::uint32_t> prefix,
                           std::uint64_t seed = 0);

  bool is_symbolic() const noexcept { return source_ != nullptr; }

  /// Symbol x_{offset} of this phase (i.e. the current symbol of T^offset x).
  std::uint32_t symbol(std::size_t offset = 0) const;

  /// Torus coordinates.
  std::span<const double> point() const noexcept { return point_; }

  /// Applies T `steps` times in place. Hot loops use this; everything else
  /// should prefer the functional `advance`.
  void shift_by(const ErgodicSystem& system, std::size_t steps);

 private:
  friend Phase sample_phase(const ErgodicSystem& system, std::uint64_t seed);

  std::shared_ptr<detail::SymbolSource> source_;
  std::size_t cursor_ = 0;
  std::vector<double> point_;
};

/// Draws a phase from mu: product measure, Markov measure started from pi, or
/// Lebesgue measure. Deterministic given the seed.
Phase sample_phase(const ErgodicSystem& system, std::uint64_t seed);

/// T^steps x. Negative steps are rejected (one-sided dynamics).
Phase advance(const ErgodicSystem& system, const Phase& x, long long steps);

/// Indicator of the cylinder {x : x_0 .. x_{|w|-1} = w}.
struct CylinderIndicator {
  std::vector<std::uint32_t> word;
};

/// Indicator of the half-open box prod [lower_i, upper_i).
struct BoxIndicator {
  std::vector<double> lower;
  std::vector<double> upper;
};

/// User function with a declared sup bound.
struct BoundedFunction {
  std::function<double(const Phase&)> fn;
  double bound = 1.0;
};

class Observable {
 public:
  using Variant = std::variant<CylinderIndicator, BoxIndicator, BoundedFunction>;

  Observable(CylinderIndicator c) : variant_(std::move(c)) {}
  Observable(BoxIndicator b);
  Observable(BoundedFunction f);

  /// Constant function.
  static Observable constant(double value);

  /// Throws InvalidInput when a user function exceeds its declared bound.
  double operator()(const Phase& x) const;
  double bound() const noexcept;
  const Variant& variant() const noexcept { return variant_; }

 private:
  Variant variant_;
};

/// (1/n) sum_{j<n} xi(T^j x). Requires n >= 1.
double birkhoff_average(const ErgodicSystem& system, const Observable& xi, const Phase& x,
                        std::size_t n);

/// Exact integral of an indicator observable against mu. Throws InvalidInput
/// for user functions, whose mean must be estimated by sampling.
double observable_mean(const ErgodicSystem& system, const Observable& xi);

/// Phases on which a cocycle's sup and L^p norms are evaluated, with mu-weights
/// summing to 1. Shifts: one phase per symbol, weighted by the marginal.
/// Torus: `torus_points` Kronecker (golden-ratio) low-discrepancy points.
struct WeightedPhase {
  Phase phase;
  double weight;
};
std::vector<WeightedPhase> evaluation_grid(const ErgodicSystem& system,
                                           std::size_t torus_points = 10000);

}  // namespace lyap
