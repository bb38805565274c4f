#include "dualflow/maximizer.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

#include "dualflow/errors.hpp"
#include "dualflow/grid_ops.hpp"

namespace dualflow {

ModelObjective::ModelObjective(ProblemData prob, DualModel model)
    : prob_(std::move(prob)), model_(model) {}

double ModelObjective::value(const DualState& dual) const {
  return evaluate_dual(dual, prob_, model_, false).value;
}

void ModelObjective::precondition(DualState& g) const { apply_preconditioner(g, prob_, model_); }

DualEvaluation ModelObjective::evaluate(const DualState& dual) const {
  return evaluate_dual(dual, prob_, model_, true);
}

std::unique_ptr<ModelObjective> make_objective(Variant v, const ProblemData& prob) {
  return std::make_unique<ModelObjective>(prob, standard_model(v, prob));
}

void validate(const MaxOptions& o) {
  if (o.max_iters <= 0 || !(o.grad_tol > 0.0) || o.memory <= 0 || !(o.backtrack > 0.0) ||
      !(o.backtrack < 1.0) || !(o.feas_floor_rel > 0.0) || !(o.initial_step > 0.0) ||
      o.max_line_search <= 0 || !(o.boundary_fraction >= 0.0) || !(o.boundary_fraction < 1.0) ||
      !(o.armijo > 0.0) || !(o.armijo < 1.0))
    throw std::invalid_argument(
        "optimizer options must be positive, with backtrack, armijo and boundary_fraction below 1");
}

const char* termination_name(Termination t) {
  switch (t) {
    case Termination::converged: return "converged";
    case Termination::max_iters: return "max_iters";
    case Termination::stalled: return "stalled";
  }
  return "?";
}

namespace {

Field dual_B(const DualState& s) { return sym_gradient(terminal_zeroed(s.lambda)); }

double shifted_min_margin(const Field& B0, const Field& B1, double a, double alpha) {
  const int d = B0.grid().d;
  double lo = std::numeric_limits<double>::infinity();
  for (int k = 0; k < B0.n_slices(); ++k) {
    for (std::size_t s = 0; s < B0.n_space(); ++s) {
      SymMat N;
      N.d = d;
      for (int c = 0; c < B0.ncomp(); ++c) N.a[c] = 2.0 * (B0.at(k, c, s) + alpha * B1.at(k, c, s));
      for (int i = 0; i < d; ++i) N(i, i) += a;
      lo = std::min(lo, sym_min_eigenvalue(N));
    }
  }
  return lo;
}

}  // namespace

double feasible_step_bound(const Field& B_current, const Field& B_direction, double a,
                           double floor, double alpha_max) {
  if (shifted_min_margin(B_current, B_direction, a, alpha_max) >= floor) return alpha_max;
  if (shifted_min_margin(B_current, B_direction, a, 0.0) < floor) return 0.0;
  double lo = 0.0, hi = alpha_max;
  for (int it = 0; it < 100 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (shifted_min_margin(B_current, B_direction, a, mid) >= floor)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

double feasible_step_bound(const DualState& current, const DualState& direction, double a,
                           double floor, double alpha_max) {
  return feasible_step_bound(dual_B(current), dual_B(direction), a, floor, alpha_max);
}

namespace {

struct Pair {
  DualState s;
  DualState y;  // gradient difference of the minimized function -J
  double rho;
};

DualState two_loop(const DualState& g, const std::deque<Pair>& mem, const DualObjective& obj,
                   bool precondition) {
  DualState q = g;
  std::vector<double> alpha(mem.size());
  for (std::size_t i = mem.size(); i-- > 0;) {
    alpha[i] = mem[i].rho * inner(mem[i].s, q);
    q.axpy(-alpha[i], mem[i].y);
  }
  if (precondition) {
    obj.precondition(q);
    if (!mem.empty()) {
      const Pair& last = mem.back();
      DualState Py = last.y;
      obj.precondition(Py);
      const double yPy = inner(last.y, Py);
      if (yPy > 0.0) q *= inner(last.s, last.y) / yPy;
    }
  } else if (!mem.empty()) {
    const Pair& last = mem.back();
    q *= inner(last.s, last.y) / inner(last.y, last.y);
  }
  for (std::size_t i = 0; i < mem.size(); ++i) {
    const double beta = mem[i].rho * inner(mem[i].y, q);
    q.axpy(alpha[i] - beta, mem[i].s);
  }
  return q;
}

}  // namespace

MaxResult maximize(const DualObjective& objective, const DualState& init, const MaxOptions& opts,
                   const IterateObserver& observer) {
  validate(opts);
  const double a = objective.margin_scale();
  const double floor = std::max(objective.floor(), opts.feas_floor_rel * a);

  DualState x = init;
  objective.project(x);
  DualEvaluation ev;
  bool ok = false;
  for (int shrink = 0; shrink < 60 && !ok; ++shrink) {
    if (min_margin(dual_B(x), a).value >= floor) {
      try {
        ev = objective.evaluate(x);
        ok = true;
        break;
      } catch (const Infeasible&) {
      }
    }
    x *= 0.5;
  }
  if (!ok) {
    x = DualState::zeros(init.grid(), init.variant);
    ev = objective.evaluate(x);
  }

  MaxResult res;
  double J = ev.value;
  DualState g = std::move(ev.gradient);
  double gn = norm(g);
  double margin = ev.min_margin;
  auto record = [&](int it, double step) {
    IterationRecord r{it, J, gn, margin, step};
    res.objective_history.push_back(J);
    res.grad_norm_history.push_back(gn);
    res.margin_history.push_back(margin);
    res.log.push_back(r);
    if (observer) observer(x, r);
  };
  record(0, 0.0);

  const bool precond = opts.precondition && objective.has_preconditioner();
  std::deque<Pair> mem;
  Field Bx = dual_B(x);
  res.termination = Termination::max_iters;
  int it = 0;
  for (; it < opts.max_iters; ++it) {
    if (gn <= opts.grad_tol * (1.0 + std::abs(J))) {
      res.termination = Termination::converged;
      break;
    }
    bool accepted = false;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      DualState p = two_loop(g, mem, objective, precond);
      objective.project(p);
      double slope = inner(g, p);
      if (!(slope > 0.0)) {
        mem.clear();
        p = g;
        if (precond) {
          objective.precondition(p);
          slope = inner(g, p);
        }
        if (!(slope > 0.0)) {
          p = g;
          slope = gn * gn;
        }
      }
      double alpha = (mem.empty() && !precond) ? std::min(1.0, opts.initial_step / gn) : 1.0;
      const Field Bp = dual_B(p);
      const double target = std::max(floor, opts.boundary_fraction * margin);
      alpha = feasible_step_bound(Bx, Bp, a, target, alpha);
      const double eps_f = 1e-14 * (1.0 + std::abs(J));
      for (int trial = 0; trial < opts.max_line_search && alpha > 0.0; ++trial, alpha *= opts.backtrack) {
        DualState xn = x;
        xn.axpy(alpha, p);
        objective.project(xn);
        DualEvaluation evn;
        try {
          evn = objective.evaluate(xn);
        } catch (const Infeasible&) {
          continue;
        }
        const double Jn = evn.value;
        bool accept = Jn >= J + opts.armijo * alpha * slope;
        if (!accept && Jn >= J - eps_f) {
          const double slope_n = inner(evn.gradient, p);
          accept = slope_n <= 0.9 * slope && slope_n >= -0.8 * slope;
        }
        if (!accept) continue;

        DualState s = xn - x;
        DualState y = g - evn.gradient;
        const double sy = inner(s, y);
        if (sy > 1e-12 * norm(s) * norm(y)) {
          mem.push_back({std::move(s), std::move(y), 1.0 / sy});
          if (static_cast<int>(mem.size()) > opts.memory) mem.pop_front();
        }
        x = std::move(xn);
        J = Jn;
        g = std::move(evn.gradient);
        gn = norm(g);
        margin = evn.min_margin;
        Bx = dual_B(x);
        record(it + 1, alpha);
        accepted = true;
        break;
      }
      if (!accepted) {
        if (mem.empty()) break;
        mem.clear();
      }
    }
    if (!accepted) {
      res.termination = Termination::stalled;
      break;
    }
  }
  if (res.termination == Termination::max_iters && gn <= opts.grad_tol * (1.0 + std::abs(J)))
    res.termination = Termination::converged;
  res.iterations = static_cast<int>(res.log.size()) - 1;
  res.final = std::move(x);
  res.final_objective = J;
  res.final_grad_norm = gn;
  return res;
}

}  // namespace dualflow
