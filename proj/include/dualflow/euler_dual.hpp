#pragma once

#include "dualflow/fields.hpp"
#include "dualflow/problem.hpp"

namespace dualflow {

/// E (or the NS combination with nu div chi), B and the eigenvalue margin of a_V Id + 2B.
struct DerivedDual {
  Field E;
  Field B;
  Field min_eig_margin;
  double min_margin = 0.0;
  bool feasible = false;
};

DerivedDual compute_derived(const DualState& dual, const ProblemData& prob);

double euler_objective(const DualState& dual, const ProblemData& prob);
DualState euler_gradient(const DualState& dual, const ProblemData& prob);
/// V = N^{-1}(a_V Vbar - E) with divergence and momentum-residual diagnostics.
PrimalState recover_velocity(const DualState& dual, const ProblemData& prob);

/// -1/2 int E.(Id+2B)^{-1}E - int E.V0, evaluated with an explicit inverse.
double brenier_objective(const Field& E, const Field& B, const Field& V0);

/// Initial-data pairing int lambda(0).V0 dx.
double initial_pairing(const Field& lambda, const Field& V0);

}  // namespace dualflow
