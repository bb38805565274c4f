#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "dualflow/errors.hpp"
#include "dualflow/grid_ops.hpp"
#include "dualflow/random_fields.hpp"

using namespace dualflow;
using std::numbers::pi;
using X = std::array<double, 3>;

namespace {

double max_diff(const Field& a, const Field& b) { return max_abs(a - b); }

}  // namespace

TEST_CASE("make_grid validates and reports spacings") {
  const Grid g = make_grid(2, 16, 8, 1.0);
  CHECK(g.n_nodes() == 16u * 16u * 8u);
  CHECK(g.dx() == doctest::Approx(1.0 / 16));
  CHECK(g.dt() == doctest::Approx(1.0 / 7));
  CHECK(g.t(7) == 1.0);
  CHECK(make_grid(3, 8, 4, 0.5).n_nodes() == 8u * 8u * 8u * 4u);
  CHECK_THROWS_AS(make_grid(2, 15, 8, 1.0), GridError);
  CHECK_THROWS_AS(make_grid(2, 16, 2, 1.0), GridError);
  CHECK_THROWS_AS(make_grid(2, 16, 8, 0.0), GridError);
  CHECK_THROWS_AS(make_grid(4, 16, 8, 1.0), GridError);
}

TEST_CASE("spatial_gradient of single modes") {
  const Grid g = make_grid(2, 16, 3, 1.0);
  auto f = sample_field(g, FieldKind::scalar, g.n_t,
                        [](int, double, const X& x) { return std::sin(2 * pi * x[0]); });
  auto expect = sample_field(g, FieldKind::vector, g.n_t, [](int c, double, const X& x) {
    return c == 0 ? 2 * pi * std::cos(2 * pi * x[0]) : 0.0;
  });
  CHECK(max_diff(spatial_gradient(f), expect) <= 1e-12);

  auto f2 = sample_field(g, FieldKind::scalar, g.n_t, [](int, double, const X& x) {
    return std::sin(2 * pi * x[0]) * std::sin(2 * pi * x[1]);
  });
  auto e2 = sample_field(g, FieldKind::vector, g.n_t, [](int c, double, const X& x) {
    return c == 0 ? 2 * pi * std::cos(2 * pi * x[0]) * std::sin(2 * pi * x[1])
                  : 2 * pi * std::sin(2 * pi * x[0]) * std::cos(2 * pi * x[1]);
  });
  CHECK(max_diff(spatial_gradient(f2), e2) <= 1e-12);

  auto c = sample_field(g, FieldKind::scalar, g.n_t, [](int, double, const X&) { return 3.5; });
  CHECK(max_abs(spatial_gradient(c)) <= 1e-13);
}

TEST_CASE("spatial_gradient in 3D") {
  const Grid g = make_grid(3, 8, 3, 1.0);
  auto f = sample_field(g, FieldKind::scalar, g.n_t,
                        [](int, double, const X& x) { return std::cos(2 * pi * (x[0] + 2 * x[2])); });
  auto e = sample_field(g, FieldKind::vector, g.n_t, [](int c, double, const X& x) {
    const double s = -2 * pi * std::sin(2 * pi * (x[0] + 2 * x[2]));
    return c == 0 ? s : (c == 2 ? 2 * s : 0.0);
  });
  CHECK(max_diff(spatial_gradient(f), e) <= 1e-12);
}

TEST_CASE("sym_gradient of shear and translation") {
  const Grid g = make_grid(2, 16, 3, 1.0);
  auto u = sample_field(g, FieldKind::vector, g.n_t,
                        [](int c, double, const X& x) { return c == 0 ? std::sin(2 * pi * x[1]) : 0.0; });
  auto B = sym_gradient(u);
  auto expect = sample_field(g, FieldKind::sym, g.n_t, [](int c, double, const X& x) {
    return c == 1 ? pi * std::cos(2 * pi * x[1]) : 0.0;
  });
  CHECK(max_diff(B, expect) <= 1e-12);
  auto t = sample_field(g, FieldKind::vector, g.n_t, [](int c, double, const X&) { return 1.0 + c; });
  CHECK(max_abs(sym_gradient(t)) <= 1e-13);
}

TEST_CASE("trace of sym_gradient vanishes on projected fields") {
  std::mt19937_64 rng(7);
  for (int d : {2, 3}) {
    const Grid g = make_grid(d, 8, 3, 1.0);
    auto u = leray_project(random_smooth_field(g, FieldKind::vector, rng, 1.0, 3));
    auto B = sym_gradient(u);
    double worst = 0.0;
    for (int k = 0; k < g.n_t; ++k)
      for (std::size_t s = 0; s < g.n_space(); ++s)
        worst = std::max(worst, std::abs(sym_trace(sym_at(B, k, s))));
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("time_derivative exactness") {
  const Grid g = make_grid(2, 4, 6, 2.0);
  auto u = sample_field(g, FieldKind::vector, g.n_t, [&](int c, double t, const X& x) {
    return (g.T - t) * (c == 0 ? std::sin(2 * pi * x[1]) : 0.5);
  });
  auto expect = sample_field(g, FieldKind::vector, g.n_t, [](int c, double, const X& x) {
    return -(c == 0 ? std::sin(2 * pi * x[1]) : 0.5);
  });
  CHECK(max_diff(time_derivative(u, false), expect) <= 1e-12);
  CHECK(max_diff(time_derivative(u, true), expect) <= 1e-12);

  auto cst = sample_field(g, FieldKind::scalar, g.n_t, [](int, double, const X&) { return 4.0; });
  CHECK(max_abs(time_derivative(cst, false)) == 0.0);

  const Grid g1 = make_grid(2, 4, 5, 1.0);
  auto sq = sample_field(g1, FieldKind::scalar, g1.n_t, [](int, double t, const X&) { return t * t; });
  auto dsq = time_derivative(sq, false);
  for (int k = 1; k < g1.n_t - 1; ++k) CHECK(dsq.at(k, 0, 0) == doctest::Approx(2 * g1.t(k)).epsilon(1e-14));
}

TEST_CASE("time_derivative_adjoint is the weighted transpose") {
  std::mt19937_64 rng(3);
  const Grid g = make_grid(2, 4, 7, 0.8);
  auto u = random_smooth_field(g, FieldKind::vector, rng, 1.0);
  auto v = random_smooth_field(g, FieldKind::vector, rng, 1.0);
  for (double& x : u.values()) x += std::normal_distribution<double>()(rng);
  for (double& x : v.values()) x += std::normal_distribution<double>()(rng);
  const double lhs = inner(time_derivative(u, false), v);
  const double rhs = inner(u, time_derivative_adjoint(v));
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));
}

TEST_CASE("summation by parts: integral of derivative telescopes") {
  std::mt19937_64 rng(11);
  const Grid g = make_grid(2, 4, 9, 1.3);
  auto u = random_smooth_field(g, FieldKind::scalar, rng, 1.0);
  for (double& x : u.values()) x += std::normal_distribution<double>()(rng);
  auto du = time_derivative(u, false);
  for (std::size_t s = 0; s < g.n_space(); ++s) {
    double acc = 0.0;
    for (int k = 0; k < g.n_t; ++k) acc += g.time_weight(k) * du.at(k, 0, s);
    CHECK(acc == doctest::Approx(u.at(g.n_t - 1, 0, s) - u.at(0, 0, s)).epsilon(1e-13));
  }
}

TEST_CASE("inverse_laplacian") {
  const Grid g = make_grid(2, 16, 3, 1.0);
  auto f = sample_field(g, FieldKind::scalar, g.n_t,
                        [](int, double, const X& x) { return std::sin(2 * pi * x[0]); });
  auto expect = sample_field(g, FieldKind::scalar, g.n_t, [](int, double, const X& x) {
    return -std::sin(2 * pi * x[0]) / (4 * pi * pi);
  });
  CHECK(max_diff(inverse_laplacian(f), expect) <= 1e-14);
  auto c = sample_field(g, FieldKind::scalar, g.n_t, [](int, double, const X&) { return 2.0; });
  CHECK(max_abs(inverse_laplacian(c)) <= 1e-15);

  std::mt19937_64 rng(5);
  auto r = random_smooth_field(g, FieldKind::scalar, rng, 1.0, 4);
  for (double& v : r.values()) v += 0.3;
  auto back = laplacian(inverse_laplacian(r));
  for (double& v : r.values()) v -= 0.3;
  CHECK(max_diff(back, r) <= 1e-12);
}

TEST_CASE("leray_project") {
  std::mt19937_64 rng(9);
  for (int d : {2, 3}) {
    const Grid g = make_grid(d, 8, 3, 1.0);
    auto phi = random_smooth_field(g, FieldKind::scalar, rng, 1.0, 3);
    auto grad = spatial_gradient(phi);
    CHECK(max_abs(leray_project(grad)) <= 1e-12);

    auto u = random_smooth_field(g, FieldKind::vector, rng, 1.0, 3);
    for (double& v : u.values()) v += std::normal_distribution<double>()(rng);
    auto pu = leray_project(u);
    CHECK(max_abs(divergence(pu)) <= 1e-12);
    CHECK(max_diff(leray_project(pu), pu) <= 1e-12);
    for (int c = 0; c < d; ++c)
      CHECK(spatial_mean(pu, 1, c) == doctest::Approx(spatial_mean(u, 1, c)).epsilon(1e-12));
  }
}

TEST_CASE("adjoint pairs of spatial operators") {
  std::mt19937_64 rng(13);
  for (int d : {2, 3}) {
    const Grid g = make_grid(d, 8, 3, 1.0);
    auto u = random_smooth_field(g, FieldKind::vector, rng, 1.0, 4);
    auto S = random_smooth_field(g, FieldKind::sym, rng, 1.0, 4);
    auto f = random_smooth_field(g, FieldKind::scalar, rng, 1.0, 4);
    CHECK(inner(sym_gradient(u), S) == doctest::Approx(-inner(u, div_sym(S))).epsilon(1e-12));
    CHECK(inner(spatial_gradient(f), u) == doctest::Approx(-inner(f, divergence(u))).epsilon(1e-12));
    CHECK(max_diff(div_div(S), divergence(div_sym(S))) <= 1e-10);
  }
}

TEST_CASE("integrate_spacetime") {
  const Grid g = make_grid(2, 8, 5, 1.0);
  auto one = sample_field(g, FieldKind::scalar, g.n_t, [](int, double, const X&) { return 1.0; });
  CHECK(integrate_spacetime(one) == doctest::Approx(1.0).epsilon(1e-15));
  auto s = sample_field(g, FieldKind::scalar, g.n_t,
                        [](int, double, const X& x) { return std::sin(2 * pi * x[0]); });
  CHECK(std::abs(integrate_spacetime(s)) <= 1e-14);
  auto t = sample_field(g, FieldKind::scalar, g.n_t, [](int, double t, const X&) { return t; });
  CHECK(integrate_spacetime(t) == doctest::Approx(0.5).epsilon(1e-15));

  std::mt19937_64 rng(1);
  auto pos = random_smooth_field(g, FieldKind::scalar, rng, 1.0);
  for (double& v : pos.values()) v = std::abs(v);
  CHECK(integrate_spacetime(pos) >= 0.0);
  auto a = random_smooth_field(g, FieldKind::scalar, rng, 1.0);
  CHECK(integrate_spacetime(2.0 * a + pos) ==
        doctest::Approx(2.0 * integrate_spacetime(a) + integrate_spacetime(pos)).epsilon(1e-13));
}

TEST_CASE("integrate_to_final matches trapezoid of a linear profile") {
  const Grid g = make_grid(2, 4, 5, 2.0);
  auto u = sample_field(g, FieldKind::scalar, g.n_t, [](int, double t, const X&) { return t; });
  auto I = integrate_to_final(u);
  for (int k = 0; k < g.n_t; ++k)
    CHECK(I.at(k, 0, 0) == doctest::Approx(0.5 * (4.0 - g.t(k) * g.t(k))).epsilon(1e-14));
}

TEST_CASE("spectral_lowpass and sobolev_norm") {
  const Grid g = make_grid(2, 16, 3, 1.0);
  auto f = sample_field(g, FieldKind::scalar, g.n_t, [](int, double, const X& x) {
    return std::sin(2 * pi * x[0]) + std::cos(2 * pi * 5 * x[1]);
  });
  auto low = spectral_lowpass(f, 3.0);
  auto expect = sample_field(g, FieldKind::scalar, g.n_t,
                             [](int, double, const X& x) { return std::sin(2 * pi * x[0]); });
  CHECK(max_diff(low, expect) <= 1e-13);
  CHECK(sobolev_norm(expect, 0) == doctest::Approx(norm(expect)).epsilon(1e-12));
  const double k2 = 4 * pi * pi;
  CHECK(sobolev_norm(expect, 1) == doctest::Approx(std::sqrt(1 + k2) * norm(expect)).epsilon(1e-12));
}
