#include <cmath>
#include <random>

#include "doctest.h"
#include "dualflow/errors.hpp"
#include "dualflow/fields.hpp"
#include "dualflow/grid_ops.hpp"
#include "dualflow/random_fields.hpp"

using namespace dualflow;
using X = std::array<double, 3>;

namespace {

SymMat random_sym(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> N(0.0, 1.0);
  SymMat m;
  m.d = d;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) m(i, j) = N(rng);
  return m;
}

SymMat random_spd(int d, std::mt19937_64& rng) {
  const SymMat a = random_sym(d, rng);
  SymMat m;
  m.d = d;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      double s = 0.0;
      for (int k = 0; k < d; ++k) s += a(i, k) * a(k, j);
      m(i, j) = s + (i == j ? 0.1 : 0.0);
    }
  return m;
}

}  // namespace

TEST_CASE("sym_eigenvalues of classic matrices") {
  SymMat swap;
  swap.d = 2;
  swap(0, 1) = 1.0;
  const Vec e = sym_eigenvalues(swap);
  CHECK(e[0] == doctest::Approx(-1.0));
  CHECK(e[1] == doctest::Approx(1.0));

  for (int d : {2, 3}) {
    const Vec id = sym_eigenvalues(SymMat::identity(d));
    for (int i = 0; i < d; ++i) CHECK(id[i] == doctest::Approx(1.0));
  }

  SymMat diag;
  diag.d = 3;
  diag(0, 0) = 3.0;
  diag(1, 1) = -2.0;
  diag(2, 2) = 0.5;
  const Vec de = sym_eigenvalues(diag);
  CHECK(de[0] == doctest::Approx(-2.0));
  CHECK(de[1] == doctest::Approx(0.5));
  CHECK(de[2] == doctest::Approx(3.0));
}

TEST_CASE("sym_eigenvalues: sum is the trace, product the determinant") {
  std::mt19937_64 rng(11);
  for (int d : {2, 3})
    for (int trial = 0; trial < 200; ++trial) {
      const SymMat m = random_sym(d, rng);
      const Vec e = sym_eigenvalues(m);
      double sum = 0.0, prod = 1.0, scale = 0.0;
      for (int i = 0; i < d; ++i) {
        sum += e[i];
        prod *= e[i];
        scale = std::max(scale, std::abs(e[i]));
        if (i > 0) CHECK(e[i - 1] <= e[i]);
      }
      CHECK(std::abs(sum - sym_trace(m)) <= 1e-10 * (1.0 + scale));
      CHECK(std::abs(prod - sym_determinant(m)) <= 1e-10 * (1.0 + std::pow(scale, d)));
      CHECK(sym_min_eigenvalue(m) == e[0]);
    }
}

TEST_CASE("sym_eigenvalues handles repeated eigenvalues in 3D") {
  SymMat m = SymMat::identity(3, 2.0);
  m(0, 1) = 1e-9;
  const Vec e = sym_eigenvalues(m);
  CHECK(e[0] == doctest::Approx(2.0));
  CHECK(e[2] == doctest::Approx(2.0));
}

TEST_CASE("spd_solve examples") {
  SymMat two = SymMat::identity(2, 2.0);
  Vec x = spd_solve(two, {4.0, 2.0, 0.0});
  CHECK(x[0] == doctest::Approx(2.0));
  CHECK(x[1] == doctest::Approx(1.0));

  x = spd_solve(SymMat::identity(3), {0.3, -1.0, 7.0});
  CHECK(x[0] == 0.3);
  CHECK(x[1] == -1.0);
  CHECK(x[2] == 7.0);

  SymMat m;
  m.d = 2;
  m(0, 0) = 2.0;
  m(1, 1) = 2.0;
  m(0, 1) = 1.0;
  x = spd_solve(m, {3.0, 3.0, 0.0});
  CHECK(x[0] == doctest::Approx(1.0));
  CHECK(x[1] == doctest::Approx(1.0));
}

TEST_CASE("spd_solve round trip on random SPD matrices") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> N(0.0, 1.0);
  for (int d : {2, 3})
    for (int trial = 0; trial < 200; ++trial) {
      const SymMat m = random_spd(d, rng);
      Vec r{};
      double rn = 0.0;
      for (int i = 0; i < d; ++i) {
        r[i] = N(rng);
        rn += r[i] * r[i];
      }
      const Vec back = sym_apply(m, spd_solve(m, r));
      double err = 0.0;
      for (int i = 0; i < d; ++i) err += (back[i] - r[i]) * (back[i] - r[i]);
      CHECK(std::sqrt(err) <= 1e-12 * std::sqrt(rn) * (1.0 + frobenius_norm(m)));
    }
}

TEST_CASE("spd_solve rejects indefinite matrices") {
  SymMat m;
  m.d = 2;
  m(0, 1) = 1.0;
  CHECK_THROWS_AS(spd_solve(m, {1.0, 1.0, 0.0}), NotPositiveDefinite);
  CHECK_THROWS_AS(spd_solve(SymMat::identity(3, -1.0), {1.0, 0.0, 0.0}), NotPositiveDefinite);
}

TEST_CASE("symmetric storage indexes both triangles alike") {
  CHECK(sym_size(2) == 3);
  CHECK(sym_size(3) == 6);
  CHECK(sym_index(3, 0, 2) == sym_index(3, 2, 0));
  CHECK(sym_index(3, 2, 2) == 5);
  SymMat m;
  m.d = 3;
  m(2, 1) = 4.0;
  CHECK(m(1, 2) == 4.0);
  CHECK(component_count(FieldKind::sym, 3) == 6);
  CHECK(component_count(FieldKind::vector, 2) == 2);
  CHECK(component_count(FieldKind::scalar, 3) == 1);
  CHECK(component_weight(FieldKind::sym, 2, 1) == 2.0);
  CHECK(component_weight(FieldKind::sym, 2, 2) == 1.0);
}

TEST_CASE("field layout is time, then component, then space") {
  const Grid g = make_grid(2, 4, 3, 1.0);
  Field f = vector_field(g);
  CHECK(f.values().size() == 4u * 4u * 2u * 3u);
  f.at(1, 1, 5) = 2.5;
  CHECK(f.values()[(1 * 2 + 1) * 16 + 5] == 2.5);
  CHECK(f.slice(1, 1)[5] == 2.5);
  f.zero_slice(1);
  CHECK(max_abs(f) == 0.0);
  const Field v0 = vector_slice(g);
  CHECK(v0.n_slices() == 1);
  CHECK(!v0.same_shape(f));
}

TEST_CASE("field arithmetic") {
  const Grid g = make_grid(2, 4, 3, 1.0);
  std::mt19937_64 rng(5);
  const Field a = random_smooth_field(g, FieldKind::sym, rng, 1.0);
  const Field b = random_smooth_field(g, FieldKind::sym, rng, 1.0);
  Field c = a;
  c.axpy(2.0, b);
  CHECK(max_abs(c - (a + 2.0 * b)) <= 1e-15);
  c -= a;
  c *= 0.5;
  CHECK(max_abs(c - b) <= 1e-15);
  CHECK_THROWS(Field(a) += vector_field(g));
}

TEST_CASE("inner product weights: trapezoid in time, Frobenius for matrices") {
  const Grid g = make_grid(2, 8, 5, 2.0);
  Field off = sym_field(g);
  for (int k = 0; k < g.n_t; ++k)
    for (double& v : off.slice(k, sym_index(2, 0, 1))) v = 1.0;
  CHECK(inner(off, off) == doctest::Approx(2.0 * g.T));

  const Field lin = sample_field(g, FieldKind::scalar, g.n_t,
                                 [](int, double t, const X&) { return t; });
  const Field one = sample_field(g, FieldKind::scalar, g.n_t, [](int, double, const X&) { return 1.0; });
  CHECK(inner(lin, one) == doctest::Approx(0.5 * g.T * g.T));

  const Field s = sample_field(g, FieldKind::vector, 1, [](int c, double, const X&) { return c + 1.0; });
  CHECK(inner(s, s) == doctest::Approx(5.0));
  CHECK(norm(s) == doctest::Approx(std::sqrt(5.0)));
}

TEST_CASE("set and gather pointwise values") {
  const Grid g = make_grid(3, 4, 3, 1.0);
  Field S = sym_field(g);
  SymMat m;
  m.d = 3;
  for (int i = 0; i < 6; ++i) m.a[i] = i + 1.0;
  set_sym(S, 2, 7, m);
  CHECK(sym_at(S, 2, 7).a == m.a);
  Field V = vector_field(g);
  set_vec(V, 1, 3, {1.0, 2.0, 3.0});
  CHECK(vec_at(V, 1, 3)[2] == 3.0);
}

TEST_CASE("DualState zeros and algebra") {
  const Grid g = make_grid(2, 4, 3, 1.0);
  const DualState e = DualState::zeros(g, Variant::euler);
  CHECK(!e.has_chi());
  CHECK(e.chi.empty());
  DualState n = DualState::zeros(g, Variant::ns);
  CHECK(n.has_chi());
  CHECK(n.chi.kind() == FieldKind::sym);
  std::mt19937_64 rng(1);
  const DualState r = random_dual(g, Variant::ns, rng, 1.0);
  n += r;
  n *= 2.0;
  CHECK(norm(n) == doctest::Approx(2.0 * norm(r)));
  CHECK(inner(r, r) == doctest::Approx(norm(r) * norm(r)));
  CHECK(norm(n - n) == 0.0);
  CHECK(std::string(variant_name(Variant::ns_pressure)) == "ns_pressure");
}
