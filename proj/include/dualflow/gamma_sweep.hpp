#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dualflow/dual_core.hpp"
#include "dualflow/fields.hpp"
#include "dualflow/maximizer.hpp"
#include "dualflow/problem.hpp"

namespace dualflow {

/// How the chi penalty is normalized in the shifted functional.
enum class ChiNormalization {
  literal,   ///< 1/2 |chi - B - a_W Wbar|^2
  divided,   ///< 1/(2 a_W) |chi - B - a_W Wbar|^2, as in the NS dual
};

/// Strict upper bound on the shift exponent: 1/([d/2] + 4).
double alpha_bound(int d);

struct SweepConfig {
  std::vector<double> nu_list{0.1, 0.05, 0.02, 0.01, 0.005};  ///< strictly decreasing, > 0 (a trailing 0 is allowed)
  double alpha = 0.1;
  ProblemData base;  ///< base states and initial data; base.nu is ignored
  double kappa = 2.0;  ///< k_max(nu) = floor(kappa * nu^(-1/(s+1))), s = [d/2] + 3
  ChiNormalization chi_normalization = ChiNormalization::literal;
  MaxOptions opts;                   ///< used for nu > 0
  double reference_grad_tol = 1e-9;  ///< tolerance of the nu = 0 reference
  double compat_tol = 1e-2;          ///< nu = 0 compatibility pre-check on recovery targets

  /// Throws ConfigError on a bad grid of viscosities or exponent.
  void validate() const;
  /// nu_list without a trailing zero.
  std::vector<double> positive_nus() const;
};

/// The triple (E, B, chi) on which the shifted functionals act.
struct FieldTriple {
  Field E;    ///< d_t lambda + grad gamma + nu div chi
  Field B;    ///< sym grad lambda
  Field chi;

  const Grid& grid() const { return E.grid(); }
};

FieldTriple dual_fields(const DualState& dual, double nu);

/// Problem data at viscosity nu.
ProblemData shifted_problem(const ProblemData& base, double nu);
/// Model whose objective equals minus the shifted functional A^nu.
DualModel shifted_model(const ProblemData& prob, double nu, double alpha,
                        ChiNormalization norm = ChiNormalization::literal);
/// Maximization objective -A^nu on dual variables.
std::unique_ptr<ModelObjective> make_shifted_objective(const ProblemData& base, double nu,
                                                       double alpha,
                                                       ChiNormalization norm = ChiNormalization::literal);

/// A^nu at a dual state (prob.a_V, prob.a_W used; prob.nu and prob.F ignored).
double shifted_objective(const DualState& dual, const ProblemData& prob, double nu, double alpha,
                         ChiNormalization norm = ChiNormalization::literal);
/// Gradient of A^nu in the weighted L2 inner product, projected.
DualState shifted_gradient(const DualState& dual, const ProblemData& prob, double nu, double alpha,
                           ChiNormalization norm = ChiNormalization::literal);
/// A^nu evaluated directly on (E, B, chi). Throws Infeasible below the floor.
double shifted_objective_fields(const FieldTriple& f, const ProblemData& prob, double nu,
                                double alpha, ChiNormalization norm = ChiNormalization::literal);
/// Pure Euler functional A_E(E, B).
double euler_functional_fields(const Field& E, const Field& B, const ProblemData& prob);

/// Explicit uniform lower bound on min A^nu, evaluated at viscosity nu.
double sweep_lower_bound(const ProblemData& prob, double nu, double alpha);

/// Radii of the ball containing all minimizers for viscosities up to nu0.
struct SweepBall {
  double E2 = 0.0;    ///< bound on ||E||^2
  double chi2 = 0.0;  ///< bound on ||chi||^2
  double B = 0.0;     ///< bound on sup |B|_F
};
SweepBall sweep_ball(const ProblemData& prob, double nu0, double alpha);
bool inside_ball(const FieldTriple& f, const SweepBall& ball);

/// max_k |<f1 - f2, phi_k>| over a fixed dictionary of smooth space-time test fields.
double surrogate_distance(const FieldTriple& a, const FieldTriple& b);

/// Stalled solves whose final margin is below this multiple of a are reported as "boundary".
inline constexpr double kBoundaryMarginRel = 1e-5;

struct SweepRow {
  double nu = 0.0;
  double A_min = 0.0;
  double surrogate_distance = 0.0;
  int iters = 0;
  std::string status;  ///< termination reason, or "boundary" for an active feasibility constraint
  double min_margin = 0.0;
  double lower_bound = 0.0;  ///< uniform lower bound at nu_max
  bool lower_bound_ok = false;
  bool in_ball = false;
  double grad_norm = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;          ///< nu descending, final row nu = 0
  std::vector<DualState> minimizers;   ///< aligned with rows
  std::vector<std::vector<IterationRecord>> logs;  ///< aligned with rows
};

/// Solves nu = 0 first, then descends the nu grid with warm starts.
SweepResult run_sweep(const SweepConfig& cfg);

/// Low-passed chi and the compatible B at viscosity nu; E unchanged.
/// Throws ConfigError when the target fails the nu = 0 compatibility check.
FieldTriple build_recovery_sequence(const FieldTriple& target, double nu, const SweepConfig& cfg);
/// Integer cutoff of the chi mollifier at viscosity nu.
double recovery_cutoff(double nu, double kappa, int d);

struct LimsupRow {
  double nu = 0.0;
  double A_recovery = 0.0;
  double A_target = 0.0;
  double gap = 0.0;           ///< A^nu(recovery) - A^0(target)
  double positive_gap = 0.0;  ///< max(gap, 0)
  double compat_residual = 0.0;
};

struct LimsupCertificate {
  std::vector<LimsupRow> rows;  ///< in the order of nu_list
  bool tail_monotone = false;   ///< positive gap nonincreasing along the grid
  bool passed = false;          ///< tail monotone and final positive gap at most tol
};

LimsupCertificate limsup_certificate(const FieldTriple& target, const std::vector<double>& nu_list,
                                     const SweepConfig& cfg, double tol = 5e-2);

}  // namespace dualflow
