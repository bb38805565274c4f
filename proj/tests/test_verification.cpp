#include <cmath>
#include <random>

#include "doctest.h"
#include "dualflow/euler_dual.hpp"
#include "dualflow/exact_solutions.hpp"
#include "dualflow/grid_ops.hpp"
#include "dualflow/ns_dual.hpp"
#include "dualflow/random_fields.hpp"
#include "dualflow/verification.hpp"

using namespace dualflow;

namespace {

/// J(D) = -|D|^2 / 2 + <c, D>.
class QuadraticOracle : public DualObjective {
 public:
  explicit QuadraticOracle(DualState c) : c_(std::move(c)) {}
  Variant variant() const override { return c_.variant; }
  double margin_scale() const override { return 1.0; }
  double value(const DualState& d) const override { return -0.5 * inner(d, d) + inner(c_, d); }
  DualEvaluation evaluate(const DualState& d) const override {
    DualEvaluation ev;
    ev.value = value(d);
    ev.gradient = c_ - d;
    project_dual(ev.gradient);
    return ev;
  }

 private:
  DualState c_;
};

const AuditCheck& find(const AuditRecord& r, const std::string& name) {
  for (const auto& c : r.checks)
    if (c.name == name) return c;
  FAIL("missing audit check " << name);
  return r.checks.front();
}

}  // namespace

TEST_CASE("finite-difference check is exact on a quadratic") {
  const Grid g = make_grid(2, 8, 5, 1.0);
  std::mt19937_64 rng(51);
  DualState c = random_dual(g, Variant::ns, rng, 1.0);
  const QuadraticOracle q(c);
  // any step is exact on a quadratic; a larger one keeps roundoff small
  const FdCheckResult r = fd_gradient_check(q, random_dual(g, Variant::ns, rng, 1.0), 10, 1e-3, rng);
  CHECK(r.rel_errors.size() == 10u);
  CHECK(r.max_rel_error <= 1e-10);
}

TEST_CASE("finite-difference check detects a wrong gradient") {
  const Grid g = make_grid(2, 8, 5, 1.0);
  std::mt19937_64 rng(52);

  class Wrong : public QuadraticOracle {
   public:
    using QuadraticOracle::QuadraticOracle;
    DualEvaluation evaluate(const DualState& d) const override {
      DualEvaluation ev = QuadraticOracle::evaluate(d);
      ev.gradient *= 1.01;
      return ev;
    }
  };
  const Wrong w(random_dual(g, Variant::euler, rng, 1.0));
  CHECK(fd_gradient_check(w, random_dual(g, Variant::euler, rng, 1.0), 5, 1e-5, rng).max_rel_error > 1e-3);
}

TEST_CASE("named exact solutions satisfy the strong equations") {
  const Grid g = make_grid(2, 16, 9, 1.0);
  for (const char* name : {"steady_shear_2d", "taylor_green_2d", "gradient_flow_check"}) {
    const ExactSolution s = exact_solution_by_name(name, 0.01);
    CHECK(s.name == name);
    CHECK(strong_residual(s, g) <= 1e-10);
  }
  CHECK_THROWS_AS(exact_solution_by_name("vortex", 0.0), std::invalid_argument);
}

TEST_CASE("exact problems carry the solution as base state") {
  const Grid g = make_grid(2, 8, 5, 1.0);
  const ExactSolution tg = taylor_green_2d(0.02);
  const ProblemData p = exact_problem(tg, g, 1.5, 2.0, 0.5);
  CHECK(p.a_V == 1.5);
  CHECK(p.a_W == 2.0);
  CHECK(p.nu == 0.02);
  CHECK(max_abs(p.Wbar - 0.02 * sym_gradient(p.Vbar)) <= 1e-12);
  CHECK(max_abs(p.F) == 0.0);
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("sup representation: zero E and the optimizing pair") {
  const Grid g = make_grid(2, 8, 4, 1.0);
  std::mt19937_64 rng(53);
  const DualState s = random_dual(g, Variant::euler, rng, 1.0, 0.9);
  const Field B = sym_gradient(terminal_zeroed(s.lambda));
  const SupRepResult zero = sup_representation_check(vector_field(g), B, 1.0, 2000, rng);
  CHECK(zero.max_violation <= 1e-10);
  CHECK(zero.max_equality_gap <= 1e-10);
  CHECK(zero.samples == 2000);
}

TEST_CASE("sup representation inequality on random feasible fields") {
  std::mt19937_64 rng(54);
  for (int d : {2, 3}) {
    const Grid g = make_grid(d, 8, 4, 1.0);
    const double a = 0.7;
    const DualState s = random_dual(g, Variant::euler, rng, a, 0.95, 1.0);
    const DerivedDual dd = compute_derived(s, [&] {
      ProblemData p = ProblemData::zeros(g);
      p.a_V = a;
      return p;
    }());
    const SupRepResult r = sup_representation_check(dd.E, dd.B, a, 10000, rng);
    CHECK(r.max_violation <= 1e-10);
    CHECK(r.max_equality_gap <= 1e-10);
  }
}

TEST_CASE("audit at the zero dual") {
  const Grid g = make_grid(2, 8, 5, 1.0);
  const ProblemData p = exact_problem(steady_shear_2d(), g);
  const AuditRecord r = apriori_bound_audit(DualState::zeros(g, Variant::euler), p, 1e-9);
  CHECK(r.all_passed());
  CHECK(!find(r, "E_minus_aVbar_bound").skipped);
  CHECK(find(r, "E_chi_bound_ns").skipped);
}

TEST_CASE("audit at a random non-optimal dual skips optimality bounds") {
  const Grid g = make_grid(2, 8, 5, 1.0);
  std::mt19937_64 rng(55);
  const ProblemData p = random_problem(g, rng, false);
  const DualState s = random_dual(g, Variant::euler, rng, p.a_V, 0.99, 1.0);
  const AuditRecord r = apriori_bound_audit(s, p, std::nullopt);
  CHECK(r.all_passed());
  CHECK(find(r, "eigenvalue_lower").passed);
  CHECK(find(r, "eigenvalue_upper").passed);
  CHECK(find(r, "frobenius").passed);
  CHECK(find(r, "lambda_l2_bound").passed);
  const AuditCheck& e = find(r, "E_minus_aVbar_bound");
  CHECK(e.skipped);
  CHECK(e.reason == "epsilon-maximizer hypothesis unmet");
}

TEST_CASE("audit of the pressure variant skips solenoidal bounds") {
  const Grid g = make_grid(2, 8, 5, 1.0);
  std::mt19937_64 rng(56);
  const ProblemData p = random_problem(g, rng);
  const AuditRecord r =
      apriori_bound_audit(random_dual(g, Variant::ns_pressure, rng, p.a_V), p, std::nullopt);
  CHECK(find(r, "frobenius").skipped);
  CHECK(find(r, "E_chi_bound_ns").skipped);
}

TEST_CASE("weak residuals at the zero dual isolate each block") {
  const Grid g = make_grid(2, 8, 6, 1.0);
  std::mt19937_64 rng(57);
  {
    ProblemData p = exact_problem(steady_shear_2d(), g);
    p.Vbar = random_smooth_field(g, FieldKind::vector, rng, 1.0);
    const PrimalState V = recover_velocity(DualState::zeros(g, Variant::euler), p);
    const WeakResiduals r = weak_residual_report(V, p, Variant::euler);
    CHECK(r.continuity == doctest::Approx(norm(divergence(p.Vbar))).epsilon(1e-12));
  }
  {
    ProblemData p = exact_problem(steady_shear_2d(), g);
    p.V0 = random_solenoidal_slice(g, rng, 0.5);
    const PrimalState V = recover_velocity(DualState::zeros(g, Variant::euler), p);
    const WeakResiduals r = weak_residual_report(V, p, Variant::euler);
    CHECK(r.initial > 1e-2);
    CHECK(r.momentum <= 1e-10);
    CHECK(r.continuity <= 1e-10);
  }
  {
    const ProblemData p = exact_problem(taylor_green_2d(0.01), g);
    const PrimalState VW = recover_VW(DualState::zeros(g, Variant::ns), p);
    const WeakResiduals r = weak_residual_report(VW, p, Variant::ns);
    CHECK(r.constitutive <= 1e-12);
    CHECK(r.initial <= 1e-12);
  }
}

TEST_CASE("consistency experiment on the steady shear and its negative control") {
  const Grid g = make_grid(2, 8, 8, 1.0);
  MaxOptions o;
  ConsistencyOptions c;
  c.seed = 3;
  const ConsistencyRun run = consistency_experiment(steady_shear_2d(), Variant::euler, g, o, c);
  CHECK(run.report.termination == "converged");
  CHECK(run.report.abs_J <= 1e-8);
  CHECK(run.report.V_error <= 1e-6);
  CHECK(run.report.problem == "steady_shear_2d");
  CHECK(std::isnan(run.report.W_error));

  c.vbar_scale = 1.1;
  const ConsistencyRun neg = consistency_experiment(steady_shear_2d(), Variant::euler, g, o, c);
  CHECK(neg.report.dual_norm > 1e-3);
  CHECK(neg.report.abs_J > 1e-6);
}

TEST_CASE("eigen window of the zero dual") {
  const Grid g = make_grid(3, 4, 3, 1.0);
  const EigenWindow w = eigen_window(DualState::zeros(g, Variant::ns));
  CHECK(w.min_eig == 0.0);
  CHECK(w.max_eig == 0.0);
  CHECK(w.max_frobenius == 0.0);
  CHECK(within_eigen_bounds(w, 1.0, 3, 0.0));
  CHECK(!within_eigen_bounds(EigenWindow{-0.6, 0.0, 0.6}, 1.0, 2, 1e-10));
}

TEST_CASE("floor sensitivity reports one row per floor") {
  const Grid g = make_grid(2, 8, 6, 1.0);
  MaxOptions o;
  o.max_iters = 200;
  const auto rows = floor_sensitivity(steady_shear_2d(), Variant::euler, g, o, {}, {1e-6, 1e-8});
  REQUIRE(rows.size() == 2u);
  CHECK(rows[0].floor_rel == 1e-6);
  for (const auto& r : rows) CHECK(r.min_margin >= r.floor_rel);
}
