#pragma once

#include "dualflow/euler_dual.hpp"
#include "dualflow/fields.hpp"
#include "dualflow/problem.hpp"

namespace dualflow {

/// Pressure-variant combinations.
struct PressureDerived {
  Field P;   ///< E + 2 B Vbar
  Field Q;   ///< B - chi
  Field r;   ///< div lambda
  Field NN;  ///< Id + (2/a_V) B
  double min_margin = 0.0;  ///< min eigenvalue of NN
};

PressureDerived compute_pressure_derived(const DualState& dual, const ProblemData& prob);

double ns_objective(const DualState& dual, const ProblemData& prob);
DualState ns_gradient(const DualState& dual, const ProblemData& prob);
/// V = -N^{-1}(E - a_V Vbar), W = Wbar + (B - chi)/a_W.
PrimalState recover_VW(const DualState& dual, const ProblemData& prob);

double nsp_objective(const DualState& dual, const ProblemData& prob);
DualState nsp_gradient(const DualState& dual, const ProblemData& prob);
/// V = Vbar - NN^{-1}P/a_V, W = Wbar + Q/a_W, p = pbar - r/a_p.
PrimalState nsp_recover(const DualState& dual, const ProblemData& prob);

/// L E = sym grad E - grad grad InvLap div E.
Field operator_L(const Field& E);
/// grad grad InvLap (div div chi) - sym grad div chi.
Field chi_source(const Field& chi);

/// Space-time L2 norm of B(t) - B(T) + int_t^T [L E + nu S(chi)] ds.
double compatibility_residual(const Field& E, const Field& B, const Field& chi, double nu);

/// Per-block residual fields of a primal state.
struct ResidualFields {
  Field momentum;      ///< slices 0..n_t-2; terminal slice zero
  Field continuity;    ///< -div V
  Field constitutive;  ///< W - nu sym grad V (empty for euler)
  Field initial;       ///< V(0) - V0 (single slice)
};
ResidualFields residual_fields(const PrimalState& primal, const ProblemData& prob, Variant v);

}  // namespace dualflow
