#pragma once

#include <cstddef>

#include "dualflow/fields.hpp"
#include "dualflow/problem.hpp"

namespace dualflow {

/// Parameters of a dual objective family sharing one evaluation kernel.
struct DualModel {
  Variant variant = Variant::euler;
  double a = 1.0;          ///< effective a_V in N = a Id + 2B
  double chi_coeff = 0.5;  ///< c in -c |chi - B - a_W Wbar|^2
  bool with_forcing = true;
  double floor_rel = kFeasFloorRel;
};

/// Model of the euler / ns / ns_pressure objective of `prob`.
DualModel standard_model(Variant v, const ProblemData& prob);

struct DualEvaluation {
  double value = 0.0;
  DualState gradient;  ///< L2-weighted representer, projected onto the variant's constraints
  PrimalState primal;  ///< recovered V (and W, p)
  double min_margin = 0.0;
};

/// Minimum eigenvalue of a*Id + 2B over all nodes, with its location.
struct MarginInfo {
  double value = 0.0;
  std::size_t k = 0;
  std::size_t s = 0;
};
MarginInfo min_margin(const Field& B, double a);

/// Copy of lambda with the terminal slice set to zero.
Field terminal_zeroed(const Field& lambda);

/// Applies the variant's constraints to a lambda-like field: zero terminal slice,
/// plus Leray projection for the solenoidal variants.
void project_lambda(Field& lambda, Variant v);
/// Projects every block of a dual-shaped state (gamma mean removed per slice).
void project_dual(DualState& s);

/// Objective value, and optionally its gradient and the recovered primal state.
/// Throws Infeasible when the floor is violated.
DualEvaluation evaluate_dual(const DualState& dual, const ProblemData& prob,
                             const DualModel& model, bool with_gradient);

/// Applies the inverse of the objective's quadratic model at the zero dual, mode by
/// mode in space and exactly in time. Used as the initial inverse Hessian of the ascent.
void apply_preconditioner(DualState& g, const ProblemData& prob, const DualModel& model);

}  // namespace dualflow
