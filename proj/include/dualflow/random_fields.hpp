#pragma once

#include <random>

#include "dualflow/fields.hpp"
#include "dualflow/problem.hpp"

namespace dualflow {

/// Band-limited random field: Fourier modes with |k_i| <= max_mode (mean excluded),
/// quadratic time profiles, max amplitude about `amplitude`.
/// With terminal_zero the profile carries a factor (1 - t/T).
Field random_smooth_field(const Grid& g, FieldKind kind, std::mt19937_64& rng,
                          double amplitude, int max_mode = 2, bool terminal_zero = false);

/// Single-slice divergence-free, zero-mean random vector field.
Field random_solenoidal_slice(const Grid& g, std::mt19937_64& rng, double amplitude,
                              int max_mode = 2);

/// Random constants and base fields. nu is drawn in [0, 0.05] unless `viscous` is false.
ProblemData random_problem(const Grid& g, std::mt19937_64& rng, bool viscous = true);

/// Random dual of the variant, scaled so that a*Id + 2B keeps eigenvalues >= (1-fill)*a.
DualState random_dual(const Grid& g, Variant v, std::mt19937_64& rng, double a,
                      double fill = 0.5, double amplitude = 0.2);

}  // namespace dualflow
