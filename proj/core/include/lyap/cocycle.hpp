#pragma once

// Linear cocycles A : X -> Mat_m(R) over a base system, their iterates
// A^(n)(x) = A(T^{n-1}x) ... A(Tx) A(x), finite-scale Lyapunov exponents and
// cocycle distances.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "lyap/dynamics.hpp"
#include "lyap/linalg.hpp"
#include "lyap/monte_carlo.hpp"

namespace lyap {

/// a cos(2 pi <k, x>) + b sin(2 pi <k, x>)
struct TrigTerm {
  std::vector<int> freq;
  double cos_coef = 0.0;
  double sin_coef = 0.0;
};
using TrigPolynomial = std::vector<TrigTerm>;

class Cocycle;

namespace detail {
struct ConstantNode {
  Matrix value;
};
struct LocallyConstantNode {
  std::vector<Matrix> values;  // indexed by the current symbol x_0
};
struct TorusFunctionNode {
  std::size_t dim;
  std::size_t torus_dim;
  std::vector<TrigPolynomial> entries;  // row-major, dim * dim
};
struct PerturbedNode {
  std::shared_ptr<const Cocycle> base;
  std::shared_ptr<const Cocycle> direction;
  double h;
};
struct ExteriorNode {
  std::shared_ptr<const Cocycle> base;
  std::size_t k;
};
}  // namespace detail

/// Immutable, cheap to copy, shareable across threads.
class Cocycle {
 public:
  using Node = std::variant<detail::ConstantNode, detail::LocallyConstantNode, detail::TorusFunctionNode,
                            detail::PerturbedNode, detail::ExteriorNode>;

  static Cocycle constant(Matrix value);
  /// One matrix per symbol; all of the same dimension.
  static Cocycle locally_constant(std::vector<Matrix> values);
  /// Entry (i, j) is entries[i * dim + j]. Every frequency vector must have
  /// the same length, which fixes the torus dimension.
  static Cocycle torus_function(std::size_t dim, std::vector<TrigPolynomial> entries);
  /// B(x) = base(x) + h * direction(x), h >= 0.
  static Cocycle perturbed(const Cocycle& base, const Cocycle& direction, double h);
  /// x -> wedge_k A(x). Constant and locally constant cocycles are reduced
  /// eagerly to cocycles of the same kind.
  static Cocycle exterior(const Cocycle& base, std::size_t k);

  std::size_t dim() const noexcept { return dim_; }
  const Node& node() const noexcept { return *node_; }

  /// A(x). Throws InvalidInput on system/phase mismatch.
  Matrix evaluate(const Phase& x) const;

  /// Writes A(x) into `scratch` or returns a reference to stored data.
  const Matrix& evaluate_ref(const Phase& x, Matrix& scratch) const;

  /// Throws InvalidInput when the cocycle cannot be evaluated on phases of `system`.
  void check_compatible(const ErgodicSystem& system) const;

  /// True when A(x) depends only on the current symbol (or not at all), so
  /// the evaluation grid of a shift covers every value of A.
  bool depends_on_current_symbol_only() const noexcept;

 private:
  Cocycle(std::size_t dim, Node node);

  std::size_t dim_ = 0;
  std::shared_ptr<const Node> node_;
};

struct IterateResult {
  double log_norm;     // log ||A^(n)(x)||, -inf when the product vanishes
  Matrix direction;    // A^(n)(x) / ||A^(n)(x)||, zero when the product vanishes
};

/// A^(n)(x) with renormalization after every factor. Requires n >= 1.
IterateResult iterate(const Cocycle& A, const ErgodicSystem& system, const Phase& x, std::size_t n);

/// log||A^(c)(x)|| for each checkpoint c (strictly increasing, c >= 1) from a
/// single renormalized pass.
std::vector<double> iterate_checkpoints(const Cocycle& A, const ErgodicSystem& system, const Phase& x,
                                        std::span<const std::size_t> checkpoints);

struct FiniteScaleLE {
  std::size_t n = 0;
  std::size_t k = 1;
  double value = 0.0;      // estimate of Lambda_k^(n)
  double std_error = 0.0;  // sample stddev / sqrt(samples)
  std::size_t samples = 0;
  std::size_t neg_inf = 0;  // phases with a vanishing product
  std::uint64_t seed = 0;
};

/// Exterior dimensions above this are refused.
inline constexpr std::size_t kMaxExteriorDim = 500;

/// Monte Carlo estimate of Lambda_k^(n)(A) = int (1/n) log s_k(A^(n)(x)) dmu.
/// For k >= 2 each sample is (1/n)(log||wedge_k A^(n)|| - log||wedge_{k-1} A^(n)||)
/// on the same phase.
FiniteScaleLE finite_scale_le(const Cocycle& A, const ErgodicSystem& system, std::size_t n, std::size_t k,
                              const McOptions& mc);

/// Per-sample values of (1/n) log||A^(n)(x)|| at phases seeded by (mc.seed, i).
std::vector<double> sample_log_norms(const Cocycle& A, const ErgodicSystem& system, std::size_t n,
                                     const McOptions& mc);

/// Largest number of words finite_scale_le_exact will enumerate.
inline constexpr double kMaxEnumeratedWords = 2e7;

/// Exact Lambda_k^(n) for a constant or locally constant cocycle over a
/// Bernoulli or Markov shift: the mu-weighted sum over all words of length n.
double finite_scale_le_exact(const Cocycle& A, const ErgodicSystem& system, std::size_t n, std::size_t k);

struct DistanceBreakdown {
  double value = 0.0;
  double sup_term = 0.0;      // ess sup ||A - B||
  double inverse_term = 0.0;  // || log||A^-1|| - log||B^-1|| ||_{L^p}
  bool sup_only = true;       // dist_infinity used (p = inf or a cocycle is singular)
};

/// dist_p(A, B) evaluated on the system's evaluation grid; p in (1, inf].
DistanceBreakdown distance_breakdown(const Cocycle& A, const Cocycle& B, const ErgodicSystem& system,
                                     double p);
double distance(const Cocycle& A, const Cocycle& B, const ErgodicSystem& system, double p);

/// ess sup ||A(x)|| on the evaluation grid.
double sup_norm(const Cocycle& A, const ErgodicSystem& system);

/// (E |(1/n) log||A^(n)||^p|)^{1/p}; +inf when some product vanishes.
double lp_bound(const Cocycle& A, const ErgodicSystem& system, std::size_t n, double p, const McOptions& mc);

/// (1/n) E log|det A^(n)(x)| computed from the one-step determinants.
SampleStats log_det_average(const Cocycle& A, const ErgodicSystem& system, std::size_t n, const McOptions& mc);

inline constexpr double kDefaultKappaCap = 50.0;

struct SpectralGapEstimate {
  double kappa = 0.0;  // min(Lambda_1 - Lambda_2, kappa_cap)
  double kappa_cap = kDefaultKappaCap;
  FiniteScaleLE lambda1;
  FiniteScaleLE lambda2;
};

/// Finite-scale proxy of kappa(A) = L_1 - L_2; the cap is substituted when
/// Lambda_2 = -inf. Requires dim >= 2.
SpectralGapEstimate estimate_gap(const Cocycle& A, const ErgodicSystem& system, std::size_t n,
                                 const McOptions& mc, double kappa_cap = kDefaultKappaCap);

/// log of the spectral radius of M, i.e. L_1 of the constant cocycle M,
/// computed by renormalized repeated squaring. -inf for nilpotent M.
double log_spectral_radius(const Matrix& M);

/// Exact Lyapunov spectrum L_1 >= ... >= L_m of a constant cocycle.
std::vector<double> constant_spectrum(const Matrix& M);

}  // namespace lyap
