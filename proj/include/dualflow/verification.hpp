#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dualflow/exact_solutions.hpp"
#include "dualflow/fields.hpp"
#include "dualflow/maximizer.hpp"
#include "dualflow/problem.hpp"

namespace dualflow {

struct FdCheckResult {
  double max_rel_error = 0.0;
  std::vector<double> rel_errors;
};

/// Fourth-order central-difference directional derivatives along random smooth projected directions
/// against the gradient pairing.
FdCheckResult fd_gradient_check(const DualObjective& objective, const DualState& point,
                                int n_directions, double step, std::mt19937_64& rng);

struct WeakResiduals {
  double momentum = 0.0;
  double continuity = 0.0;
  double constitutive = 0.0;
  double initial = 0.0;
};

WeakResiduals weak_residual_report(const PrimalState& primal, const ProblemData& prob,
                                   Variant v);

struct ConsistencyReport {
  std::string problem;
  std::string variant;
  int n = 0;
  int n_t = 0;
  double abs_J = 0.0;
  double dual_norm = 0.0;
  double V_error = 0.0;
  double W_error = 0.0;  ///< NaN when not applicable
  double p_error = 0.0;  ///< NaN when not applicable
  WeakResiduals residuals;
  double final_grad_norm = 0.0;
  int iterations = 0;
  std::string termination;
  double wall_time = 0.0;
};

struct ConsistencyOptions {
  std::uint64_t seed = 1;
  double perturbation = 0.1;  ///< L2 norm of the random initial dual
  double vbar_scale = 1.0;    ///< Vbar multiplier; V0 stays the solution's initial value
  double a_V = 1.0;
  double a_W = 1.0;
  double a_p = 1.0;
};

struct ConsistencyRun {
  ConsistencyReport report;
  MaxResult result;
  PrimalState primal;
  ProblemData problem;
};

/// Maximizes the variant's objective of `prob` from a random feasible initial dual of the
/// given norm, and reports optimum value, dual size and recovery errors against the base state.
ConsistencyRun solve_dual_problem(const ProblemData& prob, Variant v, const std::string& name,
                                  const MaxOptions& opts, std::uint64_t seed, double perturbation,
                                  const IterateObserver& observer = {});

/// Maximizes the variant's objective with the exact solution as base state, from a
/// random feasible initial dual, and reports optimum value, dual size and recovery errors.
ConsistencyRun consistency_experiment(const ExactSolution& sol, Variant v, const Grid& g,
                                      const MaxOptions& opts, const ConsistencyOptions& copts = {},
                                      const IterateObserver& observer = {});

struct SupRepResult {
  double max_violation = 0.0;     ///< max of 2E.Z - N:M - E.N^{-1}E over samples
  double max_equality_gap = 0.0;  ///< max |.| at Z = N^{-1}E, M = Z Z^T
  int samples = 0;
};

/// Samples (Z, M = Z Z^T + S), S random PSD, at random nodes.
SupRepResult sup_representation_check(const Field& E, const Field& B, double a, int n_samples,
                                      std::mt19937_64& rng);

struct AuditCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool passed = true;
  bool skipped = false;
  std::string reason;
};

struct AuditRecord {
  std::vector<AuditCheck> checks;
  bool all_passed() const;
};

/// A-priori bounds at a dual state. epsilon present means the state is an
/// epsilon-maximizer; otherwise the optimality-based bounds are skipped.
AuditRecord apriori_bound_audit(const DualState& dual, const ProblemData& prob,
                                std::optional<double> epsilon, double tol = 1e-10);
/// Audit of a maximizer run; optimality bounds use epsilon = grad_tol when converged.
AuditRecord apriori_bound_audit(const MaxResult& result, const ProblemData& prob,
                                double grad_tol);

/// Eigenvalue window and Frobenius bound of B (euler/ns duals).
struct EigenWindow {
  double min_eig = 0.0;
  double max_eig = 0.0;
  double max_frobenius = 0.0;
};
EigenWindow eigen_window(const DualState& dual);
bool within_eigen_bounds(const EigenWindow& w, double a, int d, double tol);

/// Feasibility-floor sensitivity of a consistency run.
struct FloorSensitivityRow {
  double floor_rel = 0.0;
  double abs_J = 0.0;
  double min_margin = 0.0;
  double dual_norm = 0.0;
  int iterations = 0;
  std::string termination;
};
std::vector<FloorSensitivityRow> floor_sensitivity(const ExactSolution& sol, Variant v,
                                                   const Grid& g, const MaxOptions& opts,
                                                   const ConsistencyOptions& copts,
                                                   const std::vector<double>& floors);

}  // namespace dualflow
