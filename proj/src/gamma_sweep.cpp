#include "dualflow/gamma_sweep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "dualflow/errors.hpp"
#include "dualflow/grid_ops.hpp"
#include "dualflow/ns_dual.hpp"

namespace dualflow {

namespace {

double shift(double nu, double alpha) { return nu > 0.0 ? std::pow(nu, alpha) : 0.0; }

double chi_coefficient(const ProblemData& prob, ChiNormalization norm) {
  return norm == ChiNormalization::literal ? 0.5 : 0.5 / prob.a_W;
}

/// ||grad V0||^2 over space (full gradient, Frobenius).
double grad_v0_sq(const Field& V0) { return -inner(V0, laplacian(V0)); }

}  // namespace

double alpha_bound(int d) { return 1.0 / static_cast<double>(d / 2 + 4); }

void SweepConfig::validate() const {
  if (base.Vbar.empty()) throw ConfigError("sweep: base problem is empty");
  base.validate();
  const int d = base.grid().d;
  if (!(alpha > 0.0) || !(alpha < alpha_bound(d)))
    throw ConfigError("sweep: alpha must satisfy 0 < alpha < " + std::to_string(alpha_bound(d)) +
                      " for d = " + std::to_string(d));
  const auto nus = positive_nus();
  if (nus.empty()) throw ConfigError("sweep: nu_list needs at least one positive viscosity");
  for (std::size_t i = 0; i < nus.size(); ++i) {
    if (!(nus[i] > 0.0) || !std::isfinite(nus[i]))
      throw ConfigError("sweep: viscosities must be positive and finite");
    if (i > 0 && !(nus[i] < nus[i - 1]))
      throw ConfigError("sweep: nu_list must be strictly decreasing");
  }
  if (!(kappa > 0.0)) throw ConfigError("sweep: kappa must be positive");
  if (!(reference_grad_tol > 0.0)) throw ConfigError("sweep: reference_grad_tol must be positive");
  if (!(compat_tol > 0.0)) throw ConfigError("sweep: compat_tol must be positive");
  dualflow::validate(opts);
}

std::vector<double> SweepConfig::positive_nus() const {
  std::vector<double> out = nu_list;
  if (!out.empty() && out.back() == 0.0) out.pop_back();
  return out;
}

FieldTriple dual_fields(const DualState& dual, double nu) {
  const Field lam = terminal_zeroed(dual.lambda);
  FieldTriple f;
  f.E = time_derivative(lam, false) + spatial_gradient(dual.gamma);
  if (dual.has_chi() && nu != 0.0) f.E.axpy(nu, div_sym(dual.chi));
  f.B = sym_gradient(lam);
  f.chi = dual.has_chi() ? dual.chi : sym_field(dual.grid());
  return f;
}

ProblemData shifted_problem(const ProblemData& base, double nu) {
  ProblemData p = base;
  p.nu = nu;
  return p;
}

DualModel shifted_model(const ProblemData& prob, double nu, double alpha, ChiNormalization norm) {
  DualModel m;
  m.variant = Variant::ns;
  m.a = prob.a_V + shift(nu, alpha);
  m.chi_coeff = chi_coefficient(prob, norm);
  m.with_forcing = false;
  return m;
}

std::unique_ptr<ModelObjective> make_shifted_objective(const ProblemData& base, double nu,
                                                       double alpha, ChiNormalization norm) {
  ProblemData p = shifted_problem(base, nu);
  DualModel m = shifted_model(p, nu, alpha, norm);
  return std::make_unique<ModelObjective>(std::move(p), m);
}

double shifted_objective(const DualState& dual, const ProblemData& prob, double nu, double alpha,
                         ChiNormalization norm) {
  const ProblemData p = shifted_problem(prob, nu);
  return -evaluate_dual(dual, p, shifted_model(p, nu, alpha, norm), false).value;
}

DualState shifted_gradient(const DualState& dual, const ProblemData& prob, double nu, double alpha,
                           ChiNormalization norm) {
  const ProblemData p = shifted_problem(prob, nu);
  DualState g = evaluate_dual(dual, p, shifted_model(p, nu, alpha, norm), true).gradient;
  g *= -1.0;
  return g;
}

namespace {

/// int int 1/2 (E - a Vbar) N(a)^{-1} (E - a Vbar) + V0.E - a/2 |Vbar|^2
double matrix_fractional_part(const Field& E, const Field& B, const ProblemData& prob, double a) {
  const Grid& g = E.grid();
  const int d = g.d;
  const double floor = kFeasFloorRel * a;
  double total = 0.0;
  for (int k = 0; k < g.n_t; ++k) {
    double slice_sum = 0.0;
    for (std::size_t s = 0; s < g.n_space(); ++s) {
      SymMat Nm = sym_at(B, k, s);
      for (double& v : Nm.a) v *= 2.0;
      for (int i = 0; i < d; ++i) Nm(i, i) += a;
      const double margin = sym_min_eigenvalue(Nm);
      if (!(margin >= floor)) throw Infeasible(margin, k, s);

      const Vec e = vec_at(E, k, s);
      const Vec vb = vec_at(prob.Vbar, k, s);
      const Vec v0 = vec_at(prob.V0, 0, s);
      Vec r{};
      for (int i = 0; i < d; ++i) r[i] = e[i] - a * vb[i];
      const Vec z = spd_solve(Nm, r);
      for (int i = 0; i < d; ++i)
        slice_sum += 0.5 * r[i] * z[i] + v0[i] * e[i] - 0.5 * a * vb[i] * vb[i];
    }
    total += g.time_weight(k) * slice_sum / static_cast<double>(g.n_space());
  }
  return total;
}

}  // namespace

double shifted_objective_fields(const FieldTriple& f, const ProblemData& prob, double nu,
                                double alpha, ChiNormalization norm) {
  const double a = prob.a_V + shift(nu, alpha);
  const double c = chi_coefficient(prob, norm);
  const double aW = prob.a_W;
  double total = matrix_fractional_part(f.E, f.B, prob, a);
  const Field q = f.chi - f.B - aW * prob.Wbar;
  total += c * inner(q, q) - 0.5 * aW * inner(prob.Wbar, prob.Wbar);
  if (nu != 0.0) {
    // sym grad V0 paired with chi at every time
    const Field sv = sym_gradient(prob.V0);
    const Grid& g = f.grid();
    double pair = 0.0;
    for (int k = 0; k < g.n_t; ++k) {
      double slice_sum = 0.0;
      for (int cc = 0; cc < f.chi.ncomp(); ++cc) {
        auto x = f.chi.slice(k, cc);
        auto y = sv.slice(0, cc);
        double acc = 0.0;
        for (std::size_t s = 0; s < x.size(); ++s) acc += x[s] * y[s];
        slice_sum += component_weight(FieldKind::sym, g.d, cc) * acc;
      }
      pair += g.time_weight(k) * slice_sum / static_cast<double>(g.n_space());
    }
    total += nu * pair;
  }
  return total;
}

double euler_functional_fields(const Field& E, const Field& B, const ProblemData& prob) {
  return matrix_fractional_part(E, B, prob, prob.a_V) -
         0.5 * prob.a_W * inner(prob.Wbar, prob.Wbar);
}

double sweep_lower_bound(const ProblemData& prob, double nu, double alpha) {
  const Grid& g = prob.grid();
  const double d = g.d;
  const double T = g.T;
  const double a = prob.a_V + shift(nu, alpha);
  const double aW = prob.a_W;
  const double v0 = T * inner(prob.V0, prob.V0);
  const double gv0 = T * grad_v0_sq(prob.V0);
  return -(a * (3.0 + d) / (2.0 * d) * inner(prob.Vbar, prob.Vbar) +
           3.5 * aW * inner(prob.Wbar, prob.Wbar) + 4.0 * d * a * v0 + 2.0 * aW * nu * nu * gv0 +
           3.0 * a * a / (4.0 * aW) * (d - 1.0) * (d - 1.0) * d * T);
}

SweepBall sweep_ball(const ProblemData& prob, double nu0, double alpha) {
  const Grid& g = prob.grid();
  const double d = g.d;
  const double T = g.T;
  const double a = prob.a_V + shift(nu0, alpha);
  const double aW = prob.a_W;
  const double vb = inner(prob.Vbar, prob.Vbar);
  const double wb = inner(prob.Wbar, prob.Wbar);
  const double v0 = T * inner(prob.V0, prob.V0);
  const double gv0 = T * grad_v0_sq(prob.V0);
  SweepBall b;
  b.E2 = 8.0 / 5.0 * a * a * (3.0 + d) * vb + 56.0 / 5.0 * d * aW * a * wb +
         64.0 / 5.0 * d * d * a * a * 5.0 * v0 + 32.0 / 5.0 * d * a * aW * nu0 * nu0 * gv0 +
         12.0 * a * a * a / (5.0 * aW) * (d - 1.0) * (d - 1.0) * d * d * T;
  b.chi2 = 2.0 * (3.0 + d) / d * a * aW * vb + 14.0 * aW * aW * wb + 16.0 * d * a * aW * v0 +
           8.0 * aW * aW * nu0 * nu0 * gv0 + 3.0 * a * a * (d - 1.0) * (d - 1.0) * d * T;
  b.B = std::sqrt(d) * (d - 1.0) / 2.0 * a;
  return b;
}

bool inside_ball(const FieldTriple& f, const SweepBall& ball) {
  const Grid& g = f.grid();
  double bsup = 0.0;
  for (int k = 0; k < g.n_t; ++k)
    for (std::size_t s = 0; s < g.n_space(); ++s)
      bsup = std::max(bsup, frobenius_norm(sym_at(f.B, k, s)));
  return inner(f.E, f.E) <= ball.E2 && inner(f.chi, f.chi) <= ball.chi2 && bsup <= ball.B;
}

double surrogate_distance(const FieldTriple& a, const FieldTriple& b) {
  const Grid& g = a.grid();
  const int d = g.d;
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<std::array<int, 3>> modes;
  for (int i = 0; i < d; ++i) {
    std::array<int, 3> m{0, 0, 0};
    m[i] = 1;
    modes.push_back(m);
    for (int j = i + 1; j < d; ++j) {
      std::array<int, 3> p = m, q = m;
      p[j] = 1;
      q[j] = -1;
      modes.push_back(p);
      modes.push_back(q);
    }
  }

  const std::size_t ns = g.n_space();
  std::vector<std::array<double, 3>> x(ns);
  for (std::size_t s = 0; s < ns; ++s) {
    std::size_t rem = s;
    for (int ax = d - 1; ax >= 0; --ax) {
      x[s][ax] = static_cast<double>(rem % g.n) * g.dx();
      rem /= g.n;
    }
  }

  double worst = 0.0;
  auto scan = [&](const Field& fa, const Field& fb) {
    const Field diff = fa - fb;
    for (int c = 0; c < diff.ncomp(); ++c) {
      for (const auto& m : modes) {
        for (int parity = 0; parity < 2; ++parity) {
          for (int tp = 0; tp < 2; ++tp) {
            double total = 0.0;
            for (int k = 0; k < g.n_t; ++k) {
              const double ft = tp == 0 ? 1.0 : g.t(k) / g.T;
              auto vals = diff.slice(k, c);
              double s_sum = 0.0;
              for (std::size_t s = 0; s < ns; ++s) {
                double ph = 0.0;
                for (int ax = 0; ax < d; ++ax) ph += m[ax] * x[s][ax];
                ph *= two_pi;
                s_sum += vals[s] * (parity == 0 ? std::cos(ph) : std::sin(ph));
              }
              total += g.time_weight(k) * ft * s_sum / static_cast<double>(ns);
            }
            worst = std::max(worst, std::abs(total));
          }
        }
      }
    }
  };
  scan(a.E, b.E);
  scan(a.B, b.B);
  scan(a.chi, b.chi);
  return worst;
}

namespace {

SweepRow make_row(double nu, double a, const MaxResult& r, const FieldTriple& f,
                  const FieldTriple& ref, double lower, const SweepBall& ball) {
  SweepRow row;
  row.nu = nu;
  row.A_min = -r.final_objective;
  row.surrogate_distance = surrogate_distance(f, ref);
  row.iters = r.iterations;
  row.status = termination_name(r.termination);
  row.min_margin = r.margin_history.empty() ? 0.0 : r.margin_history.back();
  // line search blocked by the feasibility floor: the constrained optimum is on the cone boundary
  if (r.termination == Termination::stalled && row.min_margin <= kBoundaryMarginRel * a)
    row.status = "boundary";
  row.lower_bound = lower;
  row.lower_bound_ok = row.A_min >= lower;
  row.in_ball = inside_ball(f, ball);
  row.grad_norm = r.final_grad_norm;
  return row;
}

}  // namespace

SweepResult run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  const Grid& g = cfg.base.grid();
  const auto nus = cfg.positive_nus();
  const double nu_max = nus.front();
  const double lower = sweep_lower_bound(cfg.base, nu_max, cfg.alpha);
  const SweepBall ball = sweep_ball(cfg.base, nu_max, cfg.alpha);

  MaxOptions ref_opts = cfg.opts;
  ref_opts.grad_tol = std::min(cfg.opts.grad_tol, cfg.reference_grad_tol);
  const auto ref_obj = make_shifted_objective(cfg.base, 0.0, cfg.alpha, cfg.chi_normalization);
  MaxResult ref = maximize(*ref_obj, DualState::zeros(g, Variant::ns), ref_opts);
  const FieldTriple ref_fields = dual_fields(ref.final, 0.0);

  SweepResult out;
  DualState warm = ref.final;
  for (double nu : nus) {
    const auto obj = make_shifted_objective(cfg.base, nu, cfg.alpha, cfg.chi_normalization);
    MaxResult r = maximize(*obj, warm, cfg.opts);
    out.rows.push_back(make_row(nu, obj->model().a, r, dual_fields(r.final, nu), ref_fields, lower, ball));
    warm = r.final;
    out.minimizers.push_back(std::move(r.final));
    out.logs.push_back(std::move(r.log));
  }
  out.rows.push_back(make_row(0.0, ref_obj->model().a, ref, ref_fields, ref_fields, lower, ball));
  out.minimizers.push_back(std::move(ref.final));
  out.logs.push_back(std::move(ref.log));
  return out;
}

double recovery_cutoff(double nu, double kappa, int d) {
  if (!(nu > 0.0)) return std::numeric_limits<double>::infinity();
  const int s = d / 2 + 3;
  return std::floor(kappa * std::pow(nu, -1.0 / (s + 1)));
}

FieldTriple build_recovery_sequence(const FieldTriple& target, double nu, const SweepConfig& cfg) {
  const double res0 = compatibility_residual(target.E, target.B, target.chi, 0.0);
  const double scale = 1.0 + norm(target.B);
  if (!(res0 <= cfg.compat_tol * scale))
    throw ConfigError("recovery target fails the nu = 0 compatibility check (residual " +
                      std::to_string(res0) + ")");
  FieldTriple out;
  out.E = target.E;
  const double kmax = recovery_cutoff(nu, cfg.kappa, target.grid().d);
  out.chi = std::isfinite(kmax) ? spectral_lowpass(target.chi, kmax) : target.chi;
  out.B = target.B;
  if (nu > 0.0) out.B.axpy(-nu, integrate_to_final(chi_source(out.chi)));
  return out;
}

LimsupCertificate limsup_certificate(const FieldTriple& target, const std::vector<double>& nu_list,
                                     const SweepConfig& cfg, double tol) {
  LimsupCertificate cert;
  const ProblemData& prob = cfg.base;
  const double A0 = shifted_objective_fields(target, prob, 0.0, cfg.alpha, cfg.chi_normalization);
  for (double nu : nu_list) {
    LimsupRow row;
    row.nu = nu;
    row.A_target = A0;
    const FieldTriple rec = build_recovery_sequence(target, nu, cfg);
    row.compat_residual = compatibility_residual(rec.E, rec.B, rec.chi, nu);
    try {
      row.A_recovery = shifted_objective_fields(rec, prob, nu, cfg.alpha, cfg.chi_normalization);
    } catch (const Infeasible&) {
      row.A_recovery = std::numeric_limits<double>::infinity();
    }
    row.gap = row.A_recovery - A0;
    row.positive_gap = std::max(row.gap, 0.0);
    cert.rows.push_back(row);
  }
  const double slack = 1e-12 * (1.0 + std::abs(A0));
  cert.tail_monotone = true;
  for (std::size_t i = 1; i < cert.rows.size(); ++i)
    if (cert.rows[i].positive_gap > cert.rows[i - 1].positive_gap + slack) cert.tail_monotone = false;
  cert.passed = !cert.rows.empty() && cert.tail_monotone && cert.rows.back().positive_gap <= tol;
  return cert;
}

}  // namespace dualflow
