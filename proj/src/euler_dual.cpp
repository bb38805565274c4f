#include "dualflow/euler_dual.hpp"

#include "dualflow/dual_core.hpp"
#include "dualflow/errors.hpp"
#include "dualflow/grid_ops.hpp"
#include "dualflow/ns_dual.hpp"

namespace dualflow {

DerivedDual compute_derived(const DualState& dual, const ProblemData& prob) {
  const Grid& g = dual.grid();
  const Field lam = terminal_zeroed(dual.lambda);
  DerivedDual out;
  out.E = time_derivative(lam, false) + spatial_gradient(dual.gamma);
  if (dual.has_chi() && prob.nu != 0.0) out.E.axpy(prob.nu, div_sym(dual.chi));
  out.B = sym_gradient(lam);
  out.min_eig_margin = scalar_field(g);
  double lo = 0.0;
  bool first = true;
  for (int k = 0; k < g.n_t; ++k) {
    for (std::size_t s = 0; s < g.n_space(); ++s) {
      SymMat N = sym_at(out.B, k, s);
      for (double& v : N.a) v *= 2.0;
      for (int i = 0; i < g.d; ++i) N(i, i) += prob.a_V;
      const double m = sym_min_eigenvalue(N);
      out.min_eig_margin.at(k, 0, s) = m;
      if (first || m < lo) lo = m;
      first = false;
    }
  }
  out.min_margin = lo;
  out.feasible = lo >= kFeasFloorRel * prob.a_V;
  return out;
}

double euler_objective(const DualState& dual, const ProblemData& prob) {
  return evaluate_dual(dual, prob, standard_model(Variant::euler, prob), false).value;
}

DualState euler_gradient(const DualState& dual, const ProblemData& prob) {
  return evaluate_dual(dual, prob, standard_model(Variant::euler, prob), true).gradient;
}

PrimalState recover_velocity(const DualState& dual, const ProblemData& prob) {
  const DerivedDual dd = compute_derived(dual, prob);
  const Grid& g = dual.grid();
  PrimalState out;
  out.V = vector_field(g);
  for (int k = 0; k < g.n_t; ++k) {
    for (std::size_t s = 0; s < g.n_space(); ++s) {
      SymMat N = sym_at(dd.B, k, s);
      for (double& v : N.a) v *= 2.0;
      for (int i = 0; i < g.d; ++i) N(i, i) += prob.a_V;
      Vec rhs = vec_at(prob.Vbar, k, s);
      const Vec e = vec_at(dd.E, k, s);
      for (int i = 0; i < g.d; ++i) rhs[i] = prob.a_V * rhs[i] - e[i];
      set_vec(out.V, k, s, spd_solve(N, rhs));
    }
  }
  const ResidualFields res = residual_fields(out, prob, Variant::euler);
  out.max_div_V = max_abs(res.continuity);
  out.momentum_residual = norm(res.momentum);
  return out;
}

double brenier_objective(const Field& E, const Field& B, const Field& V0) {
  const Grid& g = E.grid();
  const int d = g.d;
  double total = 0.0;
  for (int k = 0; k < g.n_t; ++k) {
    double slice_sum = 0.0;
    for (std::size_t s = 0; s < g.n_space(); ++s) {
      SymMat M = sym_at(B, k, s);
      for (double& v : M.a) v *= 2.0;
      for (int i = 0; i < d; ++i) M(i, i) += 1.0;
      const double det = sym_determinant(M);
      if (!(det > 0.0) || !(sym_min_eigenvalue(M) > 0.0))
        throw NotPositiveDefinite("brenier_objective: Id + 2B not positive definite");
      // adjugate inverse
      double inv[3][3];
      if (d == 2) {
        inv[0][0] = M(1, 1) / det;
        inv[1][1] = M(0, 0) / det;
        inv[0][1] = inv[1][0] = -M(0, 1) / det;
      } else {
        for (int i = 0; i < 3; ++i) {
          for (int j = 0; j < 3; ++j) {
            const int i1 = (j + 1) % 3, i2 = (j + 2) % 3;
            const int j1 = (i + 1) % 3, j2 = (i + 2) % 3;
            inv[i][j] = (M(i1, j1) * M(i2, j2) - M(i1, j2) * M(i2, j1)) / det;
          }
        }
      }
      const Vec e = vec_at(E, k, s);
      const Vec v0 = vec_at(V0, 0, s);
      double quad = 0.0, lin = 0.0;
      for (int i = 0; i < d; ++i) {
        lin += e[i] * v0[i];
        for (int j = 0; j < d; ++j) quad += e[i] * inv[i][j] * e[j];
      }
      slice_sum += -0.5 * quad - lin;
    }
    total += g.time_weight(k) * slice_sum / static_cast<double>(g.n_space());
  }
  return total;
}

double initial_pairing(const Field& lambda, const Field& V0) {
  double s = 0.0;
  for (int c = 0; c < lambda.ncomp(); ++c) {
    auto l = lambda.slice(0, c);
    auto v = V0.slice(0, c);
    for (std::size_t i = 0; i < l.size(); ++i) s += l[i] * v[i];
  }
  return s / static_cast<double>(lambda.n_space());
}

}  // namespace dualflow
