#include "dualflow/fields.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "dualflow/errors.hpp"

namespace dualflow {

int component_count(FieldKind kind, int d) {
  switch (kind) {
    case FieldKind::scalar: return 1;
    case FieldKind::vector: return d;
    case FieldKind::sym: return sym_size(d);
  }
  return 0;
}

Field::Field(const Grid& grid, FieldKind kind) : Field(grid, kind, grid.n_t) {}

Field::Field(const Grid& grid, FieldKind kind, int n_slices)
    : grid_(grid),
      kind_(kind),
      ncomp_(component_count(kind, grid.d)),
      n_slices_(n_slices),
      n_space_(grid.n_space()),
      data_(static_cast<std::size_t>(n_slices) * ncomp_ * n_space_, 0.0) {}

void Field::zero_slice(int k) {
  std::fill_n(data_.begin() + offset(k, 0), ncomp_ * n_space_, 0.0);
}

bool Field::same_shape(const Field& o) const {
  return grid_ == o.grid_ && kind_ == o.kind_ && n_slices_ == o.n_slices_;
}

namespace {
void require_shape(const Field& a, const Field& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("field shape mismatch");
}
}  // namespace

Field& Field::operator+=(const Field& o) {
  require_shape(*this, o);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

Field& Field::operator-=(const Field& o) {
  require_shape(*this, o);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

Field& Field::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

void Field::axpy(double s, const Field& o) {
  require_shape(*this, o);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * o.data_[i];
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }

Field sample_field(const Grid& g, FieldKind kind, int n_slices,
                   const std::function<double(int, double, const std::array<double, 3>&)>& fn) {
  Field f(g, kind, n_slices);
  std::array<double, 3> x{};
  for (int k = 0; k < n_slices; ++k) {
    const double t = n_slices == 1 ? 0.0 : g.t(k);
    for (int c = 0; c < f.ncomp(); ++c) {
      auto dst = f.slice(k, c);
      for (std::size_t s = 0; s < dst.size(); ++s) {
        std::size_t rem = s;
        for (int a = g.d - 1; a >= 0; --a) {
          x[a] = static_cast<double>(rem % g.n) / g.n;
          rem /= g.n;
        }
        dst[s] = fn(c, t, x);
      }
    }
  }
  return f;
}

double component_weight(FieldKind kind, int d, int c) {
  if (kind != FieldKind::sym) return 1.0;
  for (int i = 0; i < d; ++i)
    if (sym_index(d, i, i) == c) return 1.0;
  return 2.0;
}

double inner(const Field& a, const Field& b) {
  require_shape(a, b);
  const Grid& g = a.grid();
  const double inv_space = 1.0 / static_cast<double>(a.n_space());
  double total = 0.0;
  for (int k = 0; k < a.n_slices(); ++k) {
    double slice_sum = 0.0;
    for (int c = 0; c < a.ncomp(); ++c) {
      auto x = a.slice(k, c);
      auto y = b.slice(k, c);
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
      slice_sum += component_weight(a.kind(), g.d, c) * s;
    }
    const double w = a.n_slices() == 1 ? 1.0 : g.time_weight(k);
    total += w * slice_sum * inv_space;
  }
  return total;
}

double norm(const Field& a) { return std::sqrt(std::max(0.0, inner(a, a))); }

double max_abs(const Field& a) {
  double m = 0.0;
  for (double v : a.values()) m = std::max(m, std::abs(v));
  return m;
}

// ---- symmetric-matrix algebra ----

SymMat SymMat::identity(int d, double s) {
  SymMat m;
  m.d = d;
  for (int i = 0; i < d; ++i) m(i, i) = s;
  return m;
}

double sym_trace(const SymMat& m) {
  double t = 0.0;
  for (int i = 0; i < m.d; ++i) t += m(i, i);
  return t;
}

double sym_determinant(const SymMat& m) {
  if (m.d == 2) return m(0, 0) * m(1, 1) - m(0, 1) * m(0, 1);
  return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(1, 2)) -
         m(0, 1) * (m(0, 1) * m(2, 2) - m(1, 2) * m(0, 2)) +
         m(0, 2) * (m(0, 1) * m(1, 2) - m(1, 1) * m(0, 2));
}

double frobenius_norm(const SymMat& m) {
  double s = 0.0;
  for (int i = 0; i < m.d; ++i)
    for (int j = 0; j < m.d; ++j) s += m(i, j) * m(i, j);
  return std::sqrt(s);
}

Vec sym_eigenvalues(const SymMat& m) {
  if (m.d == 2) {
    const double mid = 0.5 * (m(0, 0) + m(1, 1));
    const double r = std::hypot(0.5 * (m(0, 0) - m(1, 1)), m(0, 1));
    return {mid - r, mid + r, 0.0};
  }
  const double p1 = m(0, 1) * m(0, 1) + m(0, 2) * m(0, 2) + m(1, 2) * m(1, 2);
  const double q = sym_trace(m) / 3.0;
  const double d0 = m(0, 0) - q, d1 = m(1, 1) - q, d2 = m(2, 2) - q;
  const double p2 = d0 * d0 + d1 * d1 + d2 * d2 + 2.0 * p1;
  if (p2 <= 0.0) return {q, q, q};
  const double p = std::sqrt(p2 / 6.0);
  SymMat b = m;
  for (int i = 0; i < 3; ++i) b(i, i) -= q;
  for (double& v : b.a) v /= p;
  const double r = std::clamp(0.5 * sym_determinant(b), -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double hi = q + 2.0 * p * std::cos(phi);
  const double lo = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
  const double mid = 3.0 * q - hi - lo;
  Vec e{lo, mid, hi};
  std::sort(e.begin(), e.end());
  return e;
}

double sym_min_eigenvalue(const SymMat& m) { return sym_eigenvalues(m)[0]; }

Vec sym_apply(const SymMat& m, const Vec& x) {
  Vec y{};
  for (int i = 0; i < m.d; ++i)
    for (int j = 0; j < m.d; ++j) y[i] += m(i, j) * x[j];
  return y;
}

Vec spd_solve(const SymMat& N, const Vec& rhs) {
  const int d = N.d;
  double L[3][3] = {};
  for (int j = 0; j < d; ++j) {
    double diag = N(j, j);
    for (int k = 0; k < j; ++k) diag -= L[j][k] * L[j][k];
    if (!(diag > 0.0)) throw NotPositiveDefinite("spd_solve: nonpositive Cholesky pivot");
    L[j][j] = std::sqrt(diag);
    for (int i = j + 1; i < d; ++i) {
      double v = N(i, j);
      for (int k = 0; k < j; ++k) v -= L[i][k] * L[j][k];
      L[i][j] = v / L[j][j];
    }
  }
  Vec y{};
  for (int i = 0; i < d; ++i) {
    double v = rhs[i];
    for (int k = 0; k < i; ++k) v -= L[i][k] * y[k];
    y[i] = v / L[i][i];
  }
  Vec x{};
  for (int i = d - 1; i >= 0; --i) {
    double v = y[i];
    for (int k = i + 1; k < d; ++k) v -= L[k][i] * x[k];
    x[i] = v / L[i][i];
  }
  return x;
}

SymMat sym_at(const Field& f, int k, std::size_t s) {
  SymMat m;
  m.d = f.grid().d;
  for (int c = 0; c < f.ncomp(); ++c) m.a[c] = f.at(k, c, s);
  return m;
}

Vec vec_at(const Field& f, int k, std::size_t s) {
  Vec v{};
  for (int c = 0; c < f.ncomp(); ++c) v[c] = f.at(k, c, s);
  return v;
}

void set_sym(Field& f, int k, std::size_t s, const SymMat& m) {
  for (int c = 0; c < f.ncomp(); ++c) f.at(k, c, s) = m.a[c];
}

void set_vec(Field& f, int k, std::size_t s, const Vec& v) {
  for (int c = 0; c < f.ncomp(); ++c) f.at(k, c, s) = v[c];
}

// ---- dual state ----

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::euler: return "euler";
    case Variant::ns: return "ns";
    case Variant::ns_pressure: return "ns_pressure";
  }
  return "?";
}

DualState DualState::zeros(const Grid& g, Variant v) {
  DualState s;
  s.variant = v;
  s.lambda = vector_field(g);
  s.gamma = scalar_field(g);
  if (v != Variant::euler) s.chi = sym_field(g);
  return s;
}

DualState& DualState::operator+=(const DualState& o) {
  lambda += o.lambda;
  gamma += o.gamma;
  if (has_chi()) chi += o.chi;
  return *this;
}

DualState& DualState::operator*=(double s) {
  lambda *= s;
  gamma *= s;
  if (has_chi()) chi *= s;
  return *this;
}

void DualState::axpy(double s, const DualState& o) {
  lambda.axpy(s, o.lambda);
  gamma.axpy(s, o.gamma);
  if (has_chi()) chi.axpy(s, o.chi);
}

DualState operator-(DualState a, const DualState& b) {
  a.axpy(-1.0, b);
  return a;
}

double inner(const DualState& a, const DualState& b) {
  double s = inner(a.lambda, b.lambda) + inner(a.gamma, b.gamma);
  if (a.has_chi()) s += inner(a.chi, b.chi);
  return s;
}

double norm(const DualState& a) { return std::sqrt(std::max(0.0, inner(a, a))); }

}  // namespace dualflow
