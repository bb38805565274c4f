#pragma once

#include "dualflow/fields.hpp"

namespace dualflow {

/// Relative feasibility floor: a*Id + 2B must dominate kFeasFloorRel * a * Id.
inline constexpr double kFeasFloorRel = 1e-8;

/// Constants and given fields of a dual problem.
struct ProblemData {
  double a_V = 1.0;
  double a_W = 1.0;
  double a_p = 1.0;
  double nu = 0.0;
  Field Vbar;  ///< base velocity (vector)
  Field Wbar;  ///< base stress (sym)
  Field pbar;  ///< base pressure (scalar)
  Field F;     ///< forcing (vector)
  Field V0;    ///< initial velocity (single-slice vector)

  /// All fields zero, a_V = a_W = a_p = 1, nu = 0.
  static ProblemData zeros(const Grid& g);

  const Grid& grid() const { return Vbar.grid(); }
  /// Checks shapes, positivity of constants, and that V0 is divergence-free with zero mean.
  void validate() const;
};

}  // namespace dualflow
