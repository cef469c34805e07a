#pragma once

// JSON descriptions of systems, cocycles and deviation profiles, and the
// round-trip float format used by every output.

#include <string>
#include <string_view>

#include "lyap/cocycle.hpp"
#include "lyap/dynamics.hpp"
#include "lyap/ldt.hpp"

namespace lyap {

/// %.17g: parses back to the same double.
std::string format_double(double v);

/// {"type": "bernoulli", "p": [...]}
/// {"type": "markov", "P": [[...], ...]}
/// {"type": "torus", "alpha": [...]}
/// {"type": "reference"}: Bernoulli(1/2, 1/2)
ErgodicSystem parse_system(std::string_view json);

/// {"type": "constant", "matrix": [[...], ...]}
/// {"type": "locally_constant", "matrices": [M0, M1, ...]}
/// {"type": "rotation_diagonal", "angles": [t0, t1, ...], "diagonal": [...]}: M_j = R(t_j) diag
/// {"type": "torus_function", "dim": m, "entries": [[{"freq": [..], "cos": a, "sin": b}, ...], ...]}
/// {"type": "perturbed", "base": {...}, "direction": {...}, "h": 0.1}
/// {"type": "reference"}: rotation_diagonal with angles (0.25, -0.25), diagonal (2, 1/2)
/// Malformed input throws InvalidInput naming the line or field.
Cocycle parse_cocycle(std::string_view json);

/// {"devf": {"type": "constant", "eps": e} | {"type": "power", "a": a},
///  "mesf": {"type": "exponential", "c": c} | {"type": "subexp_power", "c": c, "b": b}
///        | {"type": "subexp_log", "c": c, "b": b},
///  "t_min": 3}
DeviationProfile parse_profile(std::string_view json);

/// Bernoulli(1/2, 1/2) with M_{0,1} = R(+-0.25) diag(2, 1/2).
ErgodicSystem reference_system();
Cocycle reference_cocycle();

}  // namespace lyap
