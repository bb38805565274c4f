#include "dualflow/exact_solutions.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "dualflow/grid_ops.hpp"

namespace dualflow {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

ExactSolution steady_shear_2d() {
  ExactSolution s;
  s.name = "steady_shear_2d";
  s.V = [](double, const Point& x) { return Vec{std::sin(kTwoPi * x[1]), 0.0, 0.0}; };
  s.dVdt = [](double, const Point&) { return Vec{}; };
  s.p = [](double, const Point&) { return 0.0; };
  return s;
}

ExactSolution taylor_green_2d(double nu) {
  ExactSolution s;
  s.name = "taylor_green_2d";
  s.nu = nu;
  const double rate = nu * kTwoPi * kTwoPi;  // (nu/2) * 8 pi^2
  auto shape = [](const Point& x) {
    return Vec{std::sin(kTwoPi * x[0]) * std::cos(kTwoPi * x[1]),
               -std::cos(kTwoPi * x[0]) * std::sin(kTwoPi * x[1]), 0.0};
  };
  s.V = [=](double t, const Point& x) {
    Vec v = shape(x);
    const double f = std::exp(-rate * t);
    return Vec{f * v[0], f * v[1], 0.0};
  };
  s.dVdt = [=](double t, const Point& x) {
    Vec v = shape(x);
    const double f = -rate * std::exp(-rate * t);
    return Vec{f * v[0], f * v[1], 0.0};
  };
  s.p = [=](double t, const Point& x) {
    return 0.25 * (std::cos(2.0 * kTwoPi * x[0]) + std::cos(2.0 * kTwoPi * x[1])) *
           std::exp(-2.0 * rate * t);
  };
  return s;
}

ExactSolution gradient_flow_check() {
  ExactSolution s;
  s.name = "gradient_flow_check";
  s.V = [](double, const Point& x) {
    return Vec{std::cos(kTwoPi * x[1]), std::sin(kTwoPi * x[0]), 0.0};
  };
  s.dVdt = [](double, const Point&) { return Vec{}; };
  s.p = [](double, const Point& x) { return -std::cos(kTwoPi * x[0]) * std::sin(kTwoPi * x[1]); };
  return s;
}

ExactSolution exact_solution_by_name(const std::string& name, double nu) {
  if (name == "steady_shear_2d") return steady_shear_2d();
  if (name == "taylor_green_2d") return taylor_green_2d(nu);
  if (name == "gradient_flow_check") return gradient_flow_check();
  throw std::invalid_argument("unknown exact solution '" + name + "'");
}

namespace {
void require_2d(const Grid& g) {
  if (g.d != 2) throw std::invalid_argument("exact solutions are two-dimensional");
}
}  // namespace

Field sample_velocity(const ExactSolution& sol, const Grid& g) {
  require_2d(g);
  return sample_field(g, FieldKind::vector, g.n_t,
                      [&](int c, double t, const Point& x) { return sol.V(t, x)[c]; });
}

Field sample_pressure(const ExactSolution& sol, const Grid& g) {
  require_2d(g);
  return sample_field(g, FieldKind::scalar, g.n_t,
                      [&](int, double t, const Point& x) { return sol.p(t, x); });
}

Field sample_stress(const ExactSolution& sol, const Grid& g) {
  return sol.nu * sym_gradient(sample_velocity(sol, g));
}

double strong_residual(const ExactSolution& sol, const Grid& g) {
  const Field V = sample_velocity(sol, g);
  const Field W = sample_stress(sol, g);
  const Field p = sample_pressure(sol, g);
  const Field dV = sample_field(g, FieldKind::vector, g.n_t,
                                [&](int c, double t, const Point& x) { return sol.dVdt(t, x)[c]; });
  Field flux = sym_field(g);
  for (int k = 0; k < g.n_t; ++k)
    for (std::size_t s = 0; s < g.n_space(); ++s) {
      const Vec u = vec_at(V, k, s);
      for (int i = 0; i < g.d; ++i)
        for (int j = i; j < g.d; ++j) flux.at(k, sym_index(g.d, i, j), s) = u[i] * u[j];
    }
  const Field momentum = dV + div_sym(flux - W) + spatial_gradient(p);
  const Field constitutive = W - sol.nu * sym_gradient(V);
  return std::max({max_abs(momentum), max_abs(constitutive), max_abs(divergence(V))});
}

ProblemData exact_problem(const ExactSolution& sol, const Grid& g, double a_V, double a_W,
                          double a_p) {
  ProblemData p = ProblemData::zeros(g);
  p.a_V = a_V;
  p.a_W = a_W;
  p.a_p = a_p;
  p.nu = sol.nu;
  p.Vbar = sample_velocity(sol, g);
  p.Wbar = sample_stress(sol, g);
  p.pbar = sample_pressure(sol, g);
  p.V0 = sample_field(g, FieldKind::vector, 1,
                      [&](int c, double, const Point& x) { return sol.V(0.0, x)[c]; });
  return p;
}

}  // namespace dualflow
