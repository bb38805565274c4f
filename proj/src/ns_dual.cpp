#include "dualflow/ns_dual.hpp"

#include "dualflow/dual_core.hpp"
#include "dualflow/grid_ops.hpp"

namespace dualflow {

PressureDerived compute_pressure_derived(const DualState& dual, const ProblemData& prob) {
  const Grid& g = dual.grid();
  const DerivedDual dd = compute_derived(dual, prob);
  PressureDerived out;
  out.P = dd.E;
  out.Q = dd.B - dual.chi;
  out.r = divergence(terminal_zeroed(dual.lambda));
  out.NN = (2.0 / prob.a_V) * dd.B;
  for (int k = 0; k < g.n_t; ++k) {
    for (std::size_t s = 0; s < g.n_space(); ++s) {
      const SymMat Bm = sym_at(dd.B, k, s);
      const Vec Bv = sym_apply(Bm, vec_at(prob.Vbar, k, s));
      for (int i = 0; i < g.d; ++i) {
        out.P.at(k, i, s) += 2.0 * Bv[i];
        out.NN.at(k, sym_index(g.d, i, i), s) += 1.0;
      }
    }
  }
  out.min_margin = dd.min_margin / prob.a_V;
  return out;
}

double ns_objective(const DualState& dual, const ProblemData& prob) {
  return evaluate_dual(dual, prob, standard_model(Variant::ns, prob), false).value;
}

DualState ns_gradient(const DualState& dual, const ProblemData& prob) {
  return evaluate_dual(dual, prob, standard_model(Variant::ns, prob), true).gradient;
}

namespace {

void attach_diagnostics(PrimalState& out, const ProblemData& prob, Variant v) {
  const ResidualFields res = residual_fields(out, prob, v);
  out.max_div_V = max_abs(res.continuity);
  out.momentum_residual = norm(res.momentum);
  if (!res.constitutive.empty()) out.constitutive_residual = norm(res.constitutive);
}

}  // namespace

PrimalState recover_VW(const DualState& dual, const ProblemData& prob) {
  PrimalState out = evaluate_dual(dual, prob, standard_model(Variant::ns, prob), false).primal;
  attach_diagnostics(out, prob, Variant::ns);
  return out;
}

double nsp_objective(const DualState& dual, const ProblemData& prob) {
  return evaluate_dual(dual, prob, standard_model(Variant::ns_pressure, prob), false).value;
}

DualState nsp_gradient(const DualState& dual, const ProblemData& prob) {
  return evaluate_dual(dual, prob, standard_model(Variant::ns_pressure, prob), true).gradient;
}

PrimalState nsp_recover(const DualState& dual, const ProblemData& prob) {
  PrimalState out =
      evaluate_dual(dual, prob, standard_model(Variant::ns_pressure, prob), false).primal;
  attach_diagnostics(out, prob, Variant::ns_pressure);
  return out;
}

Field operator_L(const Field& E) {
  return sym_gradient(E) - hessian(inverse_laplacian(divergence(E)));
}

Field chi_source(const Field& chi) {
  return hessian(inverse_laplacian(div_div(chi))) - sym_gradient(div_sym(chi));
}

double compatibility_residual(const Field& E, const Field& B, const Field& chi, double nu) {
  const Grid& g = E.grid();
  const int N = g.n_t - 1;
  Field src = operator_L(E);
  if (!chi.empty() && nu != 0.0) src.axpy(nu, chi_source(chi));
  Field R = integrate_to_final(src);
  R += B;
  for (int k = 0; k <= N; ++k)
    for (int c = 0; c < R.ncomp(); ++c) {
      auto dst = R.slice(k, c);
      auto last = B.slice(N, c);
      for (std::size_t s = 0; s < dst.size(); ++s) dst[s] -= last[s];
    }
  return norm(R);
}

ResidualFields residual_fields(const PrimalState& primal, const ProblemData& prob, Variant v) {
  const Grid& g = primal.V.grid();
  const int d = g.d;
  ResidualFields out;
  Field flux = sym_field(g);
  for (int k = 0; k < g.n_t; ++k) {
    for (std::size_t s = 0; s < g.n_space(); ++s) {
      const Vec u = vec_at(primal.V, k, s);
      for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) flux.at(k, sym_index(d, i, j), s) = u[i] * u[j];
    }
  }
  if (!primal.W.empty()) flux -= primal.W;
  out.momentum = prob.F - time_derivative(primal.V, false) - div_sym(flux);
  if (v == Variant::ns_pressure && !primal.p.empty()) out.momentum -= spatial_gradient(primal.p);
  project_lambda(out.momentum, v);
  out.continuity = -1.0 * divergence(primal.V);
  if (v != Variant::euler && !primal.W.empty())
    out.constitutive = primal.W - prob.nu * sym_gradient(primal.V);
  out.initial = vector_slice(g);
  for (int c = 0; c < d; ++c) {
    auto dst = out.initial.slice(0, c);
    auto a = primal.V.slice(0, c);
    auto b = prob.V0.slice(0, c);
    for (std::size_t s = 0; s < dst.size(); ++s) dst[s] = a[s] - b[s];
  }
  if (v != Variant::ns_pressure) out.initial = leray_project(out.initial);
  return out;
}

}  // namespace dualflow
