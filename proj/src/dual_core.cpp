#include "dualflow/dual_core.hpp"

#include <cmath>
#include <limits>

#include "dualflow/errors.hpp"
#include "dualflow/euler_dual.hpp"
#include "dualflow/grid_ops.hpp"

namespace dualflow {

DualModel standard_model(Variant v, const ProblemData& prob) {
  DualModel m;
  m.variant = v;
  m.a = prob.a_V;
  m.chi_coeff = 0.5 / prob.a_W;
  m.with_forcing = true;
  return m;
}

MarginInfo min_margin(const Field& B, double a) {
  MarginInfo info{std::numeric_limits<double>::infinity(), 0, 0};
  const int d = B.grid().d;
  for (int k = 0; k < B.n_slices(); ++k) {
    for (std::size_t s = 0; s < B.n_space(); ++s) {
      SymMat N = sym_at(B, k, s);
      for (double& v : N.a) v *= 2.0;
      for (int i = 0; i < d; ++i) N(i, i) += a;
      const double m = sym_min_eigenvalue(N);
      if (m < info.value) info = {m, static_cast<std::size_t>(k), s};
    }
  }
  return info;
}

Field terminal_zeroed(const Field& lambda) {
  Field out = lambda;
  out.zero_slice(lambda.grid().n_t - 1);
  return out;
}

void project_lambda(Field& lambda, Variant v) {
  lambda.zero_slice(lambda.grid().n_t - 1);
  if (v != Variant::ns_pressure) lambda = leray_project(lambda);
}

void project_dual(DualState& s) {
  project_lambda(s.lambda, s.variant);
  for (int k = 0; k < s.gamma.n_slices(); ++k) {
    const double m = spatial_mean(s.gamma, k, 0);
    for (double& v : s.gamma.slice(k, 0)) v -= m;
  }
}

namespace {

double dot(const Vec& x, const Vec& y, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) s += x[i] * y[i];
  return s;
}

double frob(const SymMat& x, const SymMat& y) {
  double s = 0.0;
  for (int i = 0; i < x.d; ++i)
    for (int j = 0; j < x.d; ++j) s += x(i, j) * y(i, j);
  return s;
}

SymMat outer(const Vec& x, int d) {
  SymMat m;
  m.d = d;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) m(i, j) = x[i] * x[j];
  return m;
}

}  // namespace

DualEvaluation evaluate_dual(const DualState& dual, const ProblemData& prob,
                             const DualModel& model, bool with_gradient) {
  const Grid& g = dual.grid();
  const int d = g.d;
  const int N = g.n_t - 1;
  const std::size_t ns = g.n_space();
  const bool pressure = model.variant == Variant::ns_pressure;
  const bool viscous = model.variant != Variant::euler;
  const double a = model.a;
  const double floor = model.floor_rel * a;

  const Field lam = terminal_zeroed(dual.lambda);
  Field E = time_derivative(lam, false) + spatial_gradient(dual.gamma);
  if (viscous && prob.nu != 0.0) E.axpy(prob.nu, div_sym(dual.chi));
  const Field B = sym_gradient(lam);
  Field r;
  if (pressure) r = divergence(lam);
  Field symV0;
  if (viscous && prob.nu != 0.0) symV0 = sym_gradient(prob.V0);

  DualEvaluation out;
  out.min_margin = std::numeric_limits<double>::infinity();
  Field V = vector_field(g);
  Field a_e = vector_field(g);  // derivative of the integrand in E
  Field G_B = sym_field(g);     // derivative of the integrand in B
  Field Wc;
  if (viscous) Wc = sym_field(g);
  Field p;
  if (pressure) p = scalar_field(g);

  const double c = model.chi_coeff;
  const double aW = prob.a_W;
  double total = 0.0;
  for (int k = 0; k <= N; ++k) {
    double slice_sum = 0.0;
    for (std::size_t s = 0; s < ns; ++s) {
      const SymMat Bm = sym_at(B, k, s);
      SymMat Nm = Bm;
      for (double& v : Nm.a) v *= 2.0;
      for (int i = 0; i < d; ++i) Nm(i, i) += a;
      const double margin = sym_min_eigenvalue(Nm);
      if (margin < out.min_margin) out.min_margin = margin;
      if (!(margin >= floor)) throw Infeasible(margin, k, s);

      const Vec e = vec_at(E, k, s);
      const Vec vb = vec_at(prob.Vbar, k, s);
      const Vec v0 = vec_at(prob.V0, 0, s);
      const Vec Bvb = sym_apply(Bm, vb);
      Vec rhs{};
      for (int i = 0; i < d; ++i) rhs[i] = e[i] + 2.0 * Bvb[i];
      const Vec delta = spd_solve(Nm, rhs);
      Vec u{};
      for (int i = 0; i < d; ++i) u[i] = vb[i] - delta[i];

      double phi = 0.0;
      if (pressure) {
        // P = E + 2 B Vbar = rhs, z = delta = N^{-1} P
        const double rv = r.at(k, 0, s);
        phi += -0.5 * dot(rhs, delta, d) - rv * rv / (2.0 * prob.a_p) + dot(vb, rhs, d) -
               dot(vb, Bvb, d) + prob.pbar.at(k, 0, s) * rv;
        p.at(k, 0, s) = prob.pbar.at(k, 0, s) - rv / prob.a_p;
      } else {
        const Vec Bu = sym_apply(Bm, u);
        phi += a * dot(delta, vb, d) - 0.5 * a * dot(delta, delta, d) - dot(u, Bu, d) -
               dot(v0, e, d);
      }
      if (model.with_forcing) {
        const Vec f = vec_at(prob.F, k, s);
        const Vec l = vec_at(lam, k, s);
        phi += dot(f, l, d);
      }

      SymMat gb = outer(u, d);
      if (viscous) {
        const SymMat chi = sym_at(dual.chi, k, s);
        const SymMat wb = sym_at(prob.Wbar, k, s);
        SymMat W;
        W.d = d;
        if (pressure) {
          // Q = B - chi ; penalty -|Q|^2/(2 a_W) - Wbar:Q
          SymMat Q;
          Q.d = d;
          for (int i = 0; i < 6; ++i) Q.a[i] = Bm.a[i] - chi.a[i];
          phi += -frob(Q, Q) / (2.0 * aW) - frob(wb, Q);
          for (int i = 0; i < 6; ++i) W.a[i] = wb.a[i] + Q.a[i] / aW;
        } else {
          // psi = chi - B ; penalty -c|psi - a_W Wbar|^2 + a_W/2 |Wbar|^2, expanded
          SymMat psi;
          psi.d = d;
          for (int i = 0; i < 6; ++i) psi.a[i] = chi.a[i] - Bm.a[i];
          phi += -c * frob(psi, psi) + 2.0 * c * aW * frob(psi, wb) -
                 (c * aW * aW - 0.5 * aW) * frob(wb, wb);
          for (int i = 0; i < 6; ++i) W.a[i] = -2.0 * c * (psi.a[i] - aW * wb.a[i]);
          if (prob.nu != 0.0) phi -= prob.nu * frob(sym_at(symV0, 0, s), chi);
        }
        for (int i = 0; i < 6; ++i) gb.a[i] -= W.a[i];
        set_sym(Wc, k, s, W);
      }
      slice_sum += phi;

      set_vec(V, k, s, u);
      Vec ae = u;
      if (!pressure)
        for (int i = 0; i < d; ++i) ae[i] -= v0[i];
      set_vec(a_e, k, s, ae);
      set_sym(G_B, k, s, gb);
    }
    total += g.time_weight(k) * slice_sum / static_cast<double>(ns);
  }
  if (pressure) total += initial_pairing(lam, prob.V0);
  out.value = total;

  out.primal.V = std::move(V);
  if (viscous) out.primal.W = Wc;
  if (pressure) out.primal.p = p;
  if (!with_gradient) return out;

  DualState grad = DualState::zeros(g, dual.variant);
  grad.lambda = time_derivative_adjoint(a_e) - div_sym(G_B);
  if (model.with_forcing) grad.lambda += prob.F;
  if (pressure) {
    grad.lambda -= spatial_gradient(p);
    const double w0 = g.time_weight(0);
    for (int comp = 0; comp < d; ++comp) {
      auto dst = grad.lambda.slice(0, comp);
      auto src = prob.V0.slice(0, comp);
      for (std::size_t s = 0; s < ns; ++s) dst[s] += src[s] / w0;
    }
  }
  project_lambda(grad.lambda, dual.variant);
  grad.gamma = -1.0 * divergence(a_e);
  if (viscous) {
    grad.chi = Wc;
    if (prob.nu != 0.0) grad.chi.axpy(-prob.nu, sym_gradient(out.primal.V));
  }
  out.gradient = std::move(grad);
  return out;
}

void apply_preconditioner(DualState& g, const ProblemData& prob, const DualModel& model) {
  const Grid& gr = g.grid();
  const double a = model.a;
  const double v2 = inner(prob.Vbar, prob.Vbar) / gr.T;
  const bool pressure = model.variant == Variant::ns_pressure;
  double pen = 0.0;
  if (model.variant == Variant::ns) pen = model.chi_coeff;
  if (pressure) pen = 0.5 / prob.a_W;

  double ck = 2.0 * v2 / a + pen;
  if (pressure) ck += 1.0 / prob.a_p;
  g.lambda = time_mode_solve(g.lambda, 1.0 / a, ck, 0.0, true);
  g.gamma = time_mode_solve(g.gamma, 0.0, 1.0 / a, 0.0, false);
  if (g.has_chi()) {
    const double c0 = pressure ? 1.0 / prob.a_W : 2.0 * model.chi_coeff;
    g.chi = time_mode_solve(g.chi, 0.0, prob.nu * prob.nu / a, c0, false);
  }
  project_dual(g);
}

}  // namespace dualflow
