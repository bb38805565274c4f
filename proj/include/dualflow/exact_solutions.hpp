#pragma once

#include <array>
#include <functional>
#include <string>

#include "dualflow/fields.hpp"
#include "dualflow/problem.hpp"

namespace dualflow {

using Point = std::array<double, 3>;

/// Closed-form 2D solution of the first-order Navier-Stokes system (Euler when nu = 0).
struct ExactSolution {
  std::string name;
  double nu = 0.0;
  std::function<Vec(double, const Point&)> V;
  std::function<Vec(double, const Point&)> dVdt;
  std::function<double(double, const Point&)> p;
};

/// V = (sin 2 pi y, 0), p = 0.
ExactSolution steady_shear_2d();
/// V = e^{-4 pi^2 nu t}(sin 2 pi x cos 2 pi y, -cos 2 pi x sin 2 pi y),
/// p = (cos 4 pi x + cos 4 pi y) e^{-8 pi^2 nu t} / 4.
ExactSolution taylor_green_2d(double nu);
/// Steady Euler flow V = (cos 2 pi y, sin 2 pi x), p = -cos 2 pi x sin 2 pi y.
ExactSolution gradient_flow_check();
/// Looks up a solution by name; nu is used by taylor_green_2d only.
ExactSolution exact_solution_by_name(const std::string& name, double nu);

Field sample_velocity(const ExactSolution& sol, const Grid& g);
Field sample_pressure(const ExactSolution& sol, const Grid& g);
/// W = nu sym grad V.
Field sample_stress(const ExactSolution& sol, const Grid& g);

/// Max pointwise residual of the strong equations (momentum, constitutive, continuity).
double strong_residual(const ExactSolution& sol, const Grid& g);

/// Problem with Vbar = V, Wbar = W, pbar = p, V0 = V(0), F = 0.
ProblemData exact_problem(const ExactSolution& sol, const Grid& g, double a_V = 1.0,
                          double a_W = 1.0, double a_p = 1.0);

}  // namespace dualflow
