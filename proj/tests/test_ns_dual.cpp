#include <cmath>
#include <random>

#include "doctest.h"
#include "dualflow/errors.hpp"
#include "dualflow/euler_dual.hpp"
#include "dualflow/exact_solutions.hpp"
#include "dualflow/grid_ops.hpp"
#include "dualflow/maximizer.hpp"
#include "dualflow/ns_dual.hpp"
#include "dualflow/random_fields.hpp"
#include "dualflow/verification.hpp"

using namespace dualflow;

namespace {

double scale_of(const ProblemData& p) {
  return 1.0 + p.a_V * inner(p.Vbar, p.Vbar) + p.a_W * inner(p.Wbar, p.Wbar) + norm(p.F) +
         norm(p.V0) + norm(p.pbar);
}

Field B_of(const DualState& s) { return sym_gradient(terminal_zeroed(s.lambda)); }

double compat_of(const DualState& s, const ProblemData& p) {
  const DerivedDual dd = compute_derived(s, p);
  return compatibility_residual(dd.E, dd.B, s.chi, p.nu);
}

}  // namespace

TEST_CASE("ns and pressure objectives vanish at the zero dual") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const Grid g = make_grid(trial % 5 == 4 ? 3 : 2, 8, 4 + trial % 3, 1.0);
    const ProblemData p = random_problem(g, rng);
    const double s = scale_of(p);
    CHECK(std::abs(ns_objective(DualState::zeros(g, Variant::ns), p)) <= 1e-12 * s);
    CHECK(std::abs(nsp_objective(DualState::zeros(g, Variant::ns_pressure), p)) <= 1e-12 * s);
  }
}

TEST_CASE("ns objective reduces to the euler objective at zero viscosity") {
  const Grid g = make_grid(2, 8, 6, 1.0);
  std::mt19937_64 rng(22);
  ProblemData p = random_problem(g, rng, false);
  for (int trial = 0; trial < 5; ++trial) {
    DualState s = random_dual(g, Variant::ns, rng, p.a_V);
    s.chi = B_of(s) + p.a_W * p.Wbar;
    DualState e = DualState::zeros(g, Variant::euler);
    e.lambda = s.lambda;
    e.gamma = s.gamma;
    const double expect = euler_objective(e, p) + 0.5 * p.a_W * inner(p.Wbar, p.Wbar);
    CHECK(ns_objective(s, p) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("chi = B + a_W Wbar maximizes over chi at zero viscosity") {
  const Grid g = make_grid(2, 8, 5, 1.0);
  std::mt19937_64 rng(23);
  ProblemData p = random_problem(g, rng);
  DualState s = random_dual(g, Variant::ns, rng, p.a_V);
  s.chi = B_of(s) + p.a_W * p.Wbar;
  ProblemData q = p;
  q.nu = 0.0;
  const double at_min = ns_objective(s, q);
  DualState t = s;
  t.chi += random_smooth_field(g, FieldKind::sym, rng, 0.3);
  CHECK(ns_objective(t, q) < at_min);
}

TEST_CASE("ns and pressure gradients pass finite differences") {
  const Grid g = make_grid(2, 8, 6, 1.0);
  std::mt19937_64 rng(24);
  const ProblemData p = random_problem(g, rng);
  for (Variant v : {Variant::ns, Variant::ns_pressure}) {
    const auto obj = make_objective(v, p);
    for (int trial = 0; trial < 2; ++trial) {
      const DualState s = random_dual(g, v, rng, p.a_V);
      CHECK(fd_gradient_check(*obj, s, 10, 1e-5, rng).max_rel_error <= 1e-6);
    }
  }
}

TEST_CASE("oracle wrappers agree with the objective classes") {
  const Grid g = make_grid(2, 8, 5, 1.0);
  std::mt19937_64 rng(25);
  const ProblemData p = random_problem(g, rng);
  const DualState s = random_dual(g, Variant::ns, rng, p.a_V);
  CHECK(make_objective(Variant::ns, p)->value(s) == ns_objective(s, p));
  CHECK(norm(ns_gradient(s, p) - make_objective(Variant::ns, p)->evaluate(s).gradient) == 0.0);
  const DualState r = random_dual(g, Variant::ns_pressure, rng, p.a_V);
  CHECK(make_objective(Variant::ns_pressure, p)->value(r) == nsp_objective(r, p));
  CHECK(norm(nsp_gradient(r, p) - make_objective(Variant::ns_pressure, p)->evaluate(r).gradient) == 0.0);
}

TEST_CASE("chi gradient at zero is the constitutive mismatch of the base state") {
  const Grid g = make_grid(2, 8, 5, 1.0);
  std::mt19937_64 rng(26);
  const ProblemData p = random_problem(g, rng);
  const DualState grad = ns_gradient(DualState::zeros(g, Variant::ns), p);
  const Field mismatch = p.Wbar - p.nu * sym_gradient(p.Vbar);
  CHECK(norm(mismatch) > 1e-2);
  CHECK(max_abs(grad.chi - mismatch) <= 1e-12);
}

TEST_CASE("zero dual gradient for Taylor-Green vanishes under time refinement") {
  // interior slices: second order; one-sided end rows: first order on slices of weight dt/2
  std::vector<double> total, interior;
  for (int n_t : {16, 32, 64}) {
    const Grid g = make_grid(2, 16, n_t, 1.0);
    const ProblemData p = exact_problem(taylor_green_2d(0.05), g);
    const DualState grad = ns_gradient(DualState::zeros(g, Variant::ns), p);
    CHECK(norm(grad.gamma) <= 1e-12);
    CHECK(norm(grad.chi) <= 1e-12);
    double worst = 0.0;
    for (int k = 2; k < n_t - 2; ++k) {
      double s = 0.0;
      for (int c = 0; c < 2; ++c)
        for (double v : grad.lambda.slice(k, c)) s += v * v;
      worst = std::max(worst, std::sqrt(s / g.n_space()));
    }
    total.push_back(norm(grad));
    interior.push_back(worst);
  }
  CHECK(interior[1] / interior[2] >= 3.5);
  CHECK(interior[1] / interior[2] <= 4.5);
  CHECK(std::log2(total[0] / total[1]) >= 1.4);
  CHECK(std::log2(total[1] / total[2]) >= 1.4);
}

TEST_CASE("recover_VW examples") {
  const Grid g = make_grid(2, 8, 5, 1.0);
  std::mt19937_64 rng(27);
  const ProblemData p = random_problem(g, rng);
  const PrimalState z = recover_VW(DualState::zeros(g, Variant::ns), p);
  CHECK(max_abs(z.V - p.Vbar) <= 1e-14);
  CHECK(max_abs(z.W - p.Wbar) <= 1e-14);

  DualState s = random_dual(g, Variant::ns, rng, p.a_V);
  s.chi = B_of(s);
  CHECK(max_abs(recover_VW(s, p).W - p.Wbar) <= 1e-14);
}

TEST_CASE("pressure recovery at the zero dual returns the base state") {
  const Grid g = make_grid(2, 8, 5, 1.0);
  std::mt19937_64 rng(28);
  const ProblemData p = random_problem(g, rng);
  const PrimalState z = nsp_recover(DualState::zeros(g, Variant::ns_pressure), p);
  CHECK(max_abs(z.V - p.Vbar) <= 1e-14);
  CHECK(max_abs(z.W - p.Wbar) <= 1e-14);
  CHECK(max_abs(z.p - p.pbar) <= 1e-14);
}

TEST_CASE("pressure objective with gamma only has the closed form") {
  const Grid g = make_grid(2, 8, 5, 1.0);
  std::mt19937_64 rng(29);
  const ProblemData p = random_problem(g, rng);
  DualState s = DualState::zeros(g, Variant::ns_pressure);
  s.gamma = random_smooth_field(g, FieldKind::scalar, rng, 0.5);
  project_dual(s);
  const Field G = spatial_gradient(s.gamma);
  const double expect = -inner(G, G) / (2.0 * p.a_V) + inner(p.Vbar, G);
  CHECK(nsp_objective(s, p) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("pressure objective matches ns objective for solenoidal lambda and chi = B") {
  const Grid g = make_grid(2, 8, 6, 1.0);
  std::mt19937_64 rng(30);
  ProblemData p = random_problem(g, rng);
  p.F = vector_field(g);
  for (int trial = 0; trial < 5; ++trial) {
    DualState s = random_dual(g, Variant::ns, rng, p.a_V);
    s.chi = B_of(s);
    DualState q = s;
    q.variant = Variant::ns_pressure;
    CHECK(max_abs(compute_pressure_derived(q, p).r) <= 1e-10);
    CHECK(nsp_objective(q, p) == doctest::Approx(ns_objective(s, p)).epsilon(1e-11));
  }
}

TEST_CASE("pressure variant keeps lambda unprojected") {
  const Grid g = make_grid(2, 8, 5, 1.0);
  std::mt19937_64 rng(31);
  const ProblemData p = random_problem(g, rng);
  const DualState grad = nsp_gradient(random_dual(g, Variant::ns_pressure, rng, p.a_V), p);
  CHECK(max_abs(divergence(grad.lambda)) > 1e-6);
  for (int c = 0; c < 2; ++c)
    for (double v : grad.lambda.slice(g.n_t - 1, c)) CHECK(v == 0.0);
}

TEST_CASE("ns objective is concave along feasible segments") {
  const Grid g = make_grid(2, 8, 5, 1.0);
  std::mt19937_64 rng(32);
  const ProblemData p = random_problem(g, rng);
  for (Variant v : {Variant::ns, Variant::ns_pressure}) {
    const auto obj = make_objective(v, p);
    for (int trial = 0; trial < 3; ++trial) {
      const DualState d1 = random_dual(g, v, rng, p.a_V, 0.9, 1.0);
      const DualState d2 = random_dual(g, v, rng, p.a_V, 0.9, 1.0);
      const double j1 = obj->value(d1), j2 = obj->value(d2);
      DualState m = d1;
      m *= 0.5;
      m.axpy(0.5, d2);
      CHECK(obj->value(m) >= 0.5 * (j1 + j2) - 1e-10);
    }
  }
}

TEST_CASE("compatibility residual of generated fields refines at second order") {
  std::vector<double> res;
  for (int n_t : {16, 32, 64}) {
    const Grid g = make_grid(2, 8, n_t, 1.0);
    std::mt19937_64 rng(33);
    ProblemData p = ProblemData::zeros(g);
    p.nu = 0.02;
    const DualState s = random_dual(g, Variant::ns, rng, 1.0);
    res.push_back(compat_of(s, p));
  }
  CHECK(std::log2(res[0] / res[1]) >= 1.9);
  CHECK(std::log2(res[1] / res[2]) >= 1.9);
}

TEST_CASE("compatibility residual at zero viscosity on euler duals") {
  std::vector<double> res;
  for (int n_t : {16, 32}) {
    const Grid g = make_grid(2, 8, n_t, 1.0);
    std::mt19937_64 rng(34);
    const DualState s = random_dual(g, Variant::euler, rng, 1.0);
    const DerivedDual dd = compute_derived(s, ProblemData::zeros(g));
    res.push_back(compatibility_residual(dd.E, dd.B, sym_field(g), 0.0));
  }
  CHECK(res[1] < res[0] / 3.5);
}

TEST_CASE("compatibility residual detects an incompatible triple") {
  const Grid g = make_grid(2, 8, 8, 1.0);
  std::mt19937_64 rng(35);
  Field E = leray_project(random_smooth_field(g, FieldKind::vector, rng, 1.0));
  CHECK(compatibility_residual(E, sym_field(g), sym_field(g), 0.0) > 1e-2);
  CHECK(max_abs(operator_L(E) - sym_gradient(E)) <= 1e-10);
}

TEST_CASE("operator_L annihilates gradients") {
  const Grid g = make_grid(2, 8, 4, 1.0);
  std::mt19937_64 rng(36);
  const Field grad = spatial_gradient(random_smooth_field(g, FieldKind::scalar, rng, 1.0));
  CHECK(max_abs(operator_L(grad)) <= 1e-10);
}
