#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dualflow/dual_core.hpp"
#include "dualflow/fields.hpp"
#include "dualflow/problem.hpp"

namespace dualflow {

/// Objective + gradient oracle over dual states.
class DualObjective {
 public:
  virtual ~DualObjective() = default;

  virtual Variant variant() const = 0;
  /// Objective value. Throws Infeasible below the floor.
  virtual double value(const DualState& dual) const = 0;
  /// Value, projected gradient and recovered primal state.
  virtual DualEvaluation evaluate(const DualState& dual) const = 0;
  /// a in N = a Id + 2B.
  virtual double margin_scale() const = 0;
  /// Absolute feasibility floor on the eigenvalues of N.
  virtual double floor() const { return kFeasFloorRel * margin_scale(); }
  /// Structural constraints: terminal zero, solenoidality, gamma mean.
  virtual void project(DualState& dual) const { project_dual(dual); }
  /// Initial inverse-Hessian approximation applied to an ascent direction.
  virtual void precondition(DualState&) const {}
  virtual bool has_preconditioner() const { return false; }
};

/// Objective of a DualModel (euler, ns, ns_pressure, or the sweep family) on fixed data.
class ModelObjective : public DualObjective {
 public:
  ModelObjective(ProblemData prob, DualModel model);

  Variant variant() const override { return model_.variant; }
  double value(const DualState& dual) const override;
  DualEvaluation evaluate(const DualState& dual) const override;
  double margin_scale() const override { return model_.a; }
  double floor() const override { return model_.floor_rel * model_.a; }
  void precondition(DualState& g) const override;
  bool has_preconditioner() const override { return true; }

  const ProblemData& problem() const { return prob_; }
  const DualModel& model() const { return model_; }

 private:
  ProblemData prob_;
  DualModel model_;
};

/// Standard euler / ns / ns_pressure objective of `prob`.
std::unique_ptr<ModelObjective> make_objective(Variant v, const ProblemData& prob);

struct MaxOptions {
  int max_iters = 20000;
  double grad_tol = 1e-9;
  int memory = 10;
  double backtrack = 0.5;
  double feas_floor_rel = kFeasFloorRel;
  double initial_step = 1.0;
  int max_line_search = 60;
  double armijo = 1e-4;
  /// A step may lower the eigenvalue margin to at most this fraction of its current value.
  double boundary_fraction = 0.25;
  bool precondition = true;  ///< spectral-in-space, exact-in-time initial inverse Hessian
};

/// Throws std::invalid_argument on nonpositive entries or backtrack >= 1.
void validate(const MaxOptions& opts);

enum class Termination { converged, max_iters, stalled };
const char* termination_name(Termination t);

struct IterationRecord {
  int iteration = 0;
  double objective = 0.0;
  double grad_norm = 0.0;
  double min_margin = 0.0;
  double step = 0.0;
};

struct MaxResult {
  DualState final;
  std::vector<double> objective_history;
  std::vector<double> grad_norm_history;
  std::vector<double> margin_history;
  std::vector<IterationRecord> log;
  Termination termination = Termination::max_iters;
  int iterations = 0;
  double final_objective = 0.0;
  double final_grad_norm = 0.0;
};

/// Called with every accepted iterate (including the initial point).
using IterateObserver = std::function<void(const DualState&, const IterationRecord&)>;

/// Limited-memory quasi-Newton ascent with feasibility-capped backtracking.
MaxResult maximize(const DualObjective& objective, const DualState& init, const MaxOptions& opts,
                   const IterateObserver& observer = {});

/// Largest alpha <= alpha_max with min eig(a Id + 2B(current + alpha*direction)) >= floor.
double feasible_step_bound(const DualState& current, const DualState& direction, double a,
                           double floor, double alpha_max);

/// Same bound on precomputed B fields.
double feasible_step_bound(const Field& B_current, const Field& B_direction, double a,
                           double floor, double alpha_max);

}  // namespace dualflow
