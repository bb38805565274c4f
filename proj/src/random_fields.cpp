#include "dualflow/random_fields.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "dualflow/dual_core.hpp"
#include "dualflow/grid_ops.hpp"

namespace dualflow {

namespace {

struct Mode {
  int k[3];
};

std::vector<Mode> modes(int d, int max_mode) {
  std::vector<Mode> out;
  const int lo = -max_mode, hi = max_mode;
  for (int a = lo; a <= hi; ++a)
    for (int b = lo; b <= hi; ++b)
      for (int c = (d == 3 ? lo : 0); c <= (d == 3 ? hi : 0); ++c) {
        if (a == 0 && b == 0 && c == 0) continue;
        out.push_back({{a, b, c}});
      }
  return out;
}

void fill_random(Field& f, std::mt19937_64& rng, double amplitude, int max_mode,
                 bool terminal_zero, bool spatial_only) {
  const Grid& g = f.grid();
  const int d = g.d;
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const auto ms = modes(d, max_mode);
  const double scale = amplitude / std::sqrt(static_cast<double>(ms.size()));
  const double two_pi = 2.0 * std::numbers::pi;
  for (int c = 0; c < f.ncomp(); ++c) {
    for (const Mode& m : ms) {
      double coef[2][3];
      for (auto& row : coef)
        for (double& v : row) v = U(rng);
      for (int k = 0; k < f.n_slices(); ++k) {
        const double tau = spatial_only ? 0.0 : g.t(k) / g.T;
        double prof[2];
        for (int j = 0; j < 2; ++j) {
          prof[j] = coef[j][0] + coef[j][1] * tau + coef[j][2] * tau * tau;
          if (terminal_zero) prof[j] *= (1.0 - tau);
        }
        auto dst = f.slice(k, c);
        for (std::size_t s = 0; s < dst.size(); ++s) {
          std::size_t rem = s;
          double phase = 0.0;
          for (int a = d - 1; a >= 0; --a) {
            const double x = static_cast<double>(rem % g.n) / g.n;
            rem /= g.n;
            phase += m.k[a] * x;
          }
          phase *= two_pi;
          dst[s] += scale * (prof[0] * std::cos(phase) + prof[1] * std::sin(phase));
        }
      }
    }
  }
}

}  // namespace

Field random_smooth_field(const Grid& g, FieldKind kind, std::mt19937_64& rng,
                          double amplitude, int max_mode, bool terminal_zero) {
  Field f(g, kind);
  fill_random(f, rng, amplitude, max_mode, terminal_zero, false);
  if (terminal_zero) f.zero_slice(g.n_t - 1);
  return f;
}

Field random_solenoidal_slice(const Grid& g, std::mt19937_64& rng, double amplitude,
                              int max_mode) {
  Field f = vector_slice(g);
  fill_random(f, rng, amplitude, max_mode, false, true);
  return leray_project(f);
}

ProblemData random_problem(const Grid& g, std::mt19937_64& rng, bool viscous) {
  std::uniform_real_distribution<double> U(0.5, 2.0);
  std::uniform_real_distribution<double> Unu(0.0, 0.05);
  ProblemData p = ProblemData::zeros(g);
  p.a_V = U(rng);
  p.a_W = U(rng);
  p.a_p = U(rng);
  p.nu = viscous ? Unu(rng) : 0.0;
  p.Vbar = random_smooth_field(g, FieldKind::vector, rng, 1.0);
  p.Wbar = random_smooth_field(g, FieldKind::sym, rng, 0.5);
  p.pbar = random_smooth_field(g, FieldKind::scalar, rng, 0.5);
  p.F = random_smooth_field(g, FieldKind::vector, rng, 0.5);
  p.V0 = random_solenoidal_slice(g, rng, 1.0);
  return p;
}

DualState random_dual(const Grid& g, Variant v, std::mt19937_64& rng, double a, double fill,
                      double amplitude) {
  DualState s = DualState::zeros(g, v);
  s.lambda = random_smooth_field(g, FieldKind::vector, rng, 1.0, 2, true);
  if (v != Variant::ns_pressure) s.lambda = leray_project(s.lambda);
  const Field B = sym_gradient(s.lambda);
  double worst = 0.0;
  for (int k = 0; k < g.n_t; ++k)
    for (std::size_t i = 0; i < g.n_space(); ++i)
      worst = std::max(worst, -sym_min_eigenvalue(sym_at(B, k, i)));
  // 2 * scale * worst <= fill * a
  const double scale = worst > 0.0 ? fill * a / (2.0 * worst) : 1.0;
  s.lambda *= scale;
  s.gamma = random_smooth_field(g, FieldKind::scalar, rng, amplitude);
  if (s.has_chi()) s.chi = random_smooth_field(g, FieldKind::sym, rng, amplitude);
  project_dual(s);
  return s;
}

}  // namespace dualflow
