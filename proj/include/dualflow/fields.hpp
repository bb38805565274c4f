#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "dualflow/grid.hpp"

namespace dualflow {

enum class FieldKind { scalar, vector, sym };

/// Number of stored components of a field kind in dimension d.
int component_count(FieldKind kind, int d);

/// Real-valued space-time field. Layout: time slice, then component, then space row-major.
class Field {
 public:
  Field() = default;
  /// Zero field on all n_t slices of `grid`.
  Field(const Grid& grid, FieldKind kind);
  /// Zero field with an explicit slice count (1 for spatial-only data such as V0).
  Field(const Grid& grid, FieldKind kind, int n_slices);

  const Grid& grid() const { return grid_; }
  FieldKind kind() const { return kind_; }
  int ncomp() const { return ncomp_; }
  int n_slices() const { return n_slices_; }
  std::size_t n_space() const { return n_space_; }
  bool empty() const { return data_.empty(); }

  std::span<double> slice(int k, int c) {
    return {data_.data() + offset(k, c), n_space_};
  }
  std::span<const double> slice(int k, int c) const {
    return {data_.data() + offset(k, c), n_space_};
  }
  double& at(int k, int c, std::size_t s) { return data_[offset(k, c) + s]; }
  double at(int k, int c, std::size_t s) const { return data_[offset(k, c) + s]; }

  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  /// Sets every value of slice k to zero.
  void zero_slice(int k);
  bool same_shape(const Field& other) const;

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(double s);
  /// this += s * other
  void axpy(double s, const Field& other);

  friend bool operator==(const Field&, const Field&) = default;

 private:
  std::size_t offset(int k, int c) const {
    return (static_cast<std::size_t>(k) * ncomp_ + c) * n_space_;
  }

  Grid grid_{};
  FieldKind kind_ = FieldKind::scalar;
  int ncomp_ = 0;
  int n_slices_ = 0;
  std::size_t n_space_ = 0;
  std::vector<double> data_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double s, Field a);

using ScalarField = Field;
using VectorField = Field;
using SymMatrixField = Field;

inline Field scalar_field(const Grid& g) { return Field(g, FieldKind::scalar); }
inline Field vector_field(const Grid& g) { return Field(g, FieldKind::vector); }
inline Field sym_field(const Grid& g) { return Field(g, FieldKind::sym); }
/// Single-slice vector field (initial data).
inline Field vector_slice(const Grid& g) { return Field(g, FieldKind::vector, 1); }

/// Samples fn(component, t, x) at every node. Single-slice fields use t = 0.
Field sample_field(const Grid& g, FieldKind kind, int n_slices,
                   const std::function<double(int, double, const std::array<double, 3>&)>& fn);

/// Frobenius multiplicity of stored component c (2 for off-diagonal entries).
double component_weight(FieldKind kind, int d, int c);

/// Weighted L2 inner product: trapezoid in time, mean over space, Frobenius for matrices.
/// Single-slice fields are integrated over space only.
double inner(const Field& a, const Field& b);
double norm(const Field& a);
/// Max absolute value over all entries.
double max_abs(const Field& a);

// ---- pointwise symmetric-matrix algebra ----

using Vec = std::array<double, 3>;

/// Symmetric matrix of size d <= 3 in upper-triangle row-major storage.
struct SymMat {
  int d = 2;
  std::array<double, 6> a{};

  double operator()(int i, int j) const { return a[sym_index(d, i, j)]; }
  double& operator()(int i, int j) { return a[sym_index(d, i, j)]; }
  static SymMat identity(int d, double s = 1.0);
};

/// Ascending eigenvalues (entries beyond d are zero).
Vec sym_eigenvalues(const SymMat& m);
double sym_min_eigenvalue(const SymMat& m);
double sym_determinant(const SymMat& m);
double sym_trace(const SymMat& m);
double frobenius_norm(const SymMat& m);
/// Solves N x = rhs by Cholesky. Throws NotPositiveDefinite on a nonpositive pivot.
Vec spd_solve(const SymMat& N, const Vec& rhs);
Vec sym_apply(const SymMat& m, const Vec& x);

/// Gathers a symmetric matrix / vector at (slice k, node s).
SymMat sym_at(const Field& f, int k, std::size_t s);
Vec vec_at(const Field& f, int k, std::size_t s);
void set_sym(Field& f, int k, std::size_t s, const SymMat& m);
void set_vec(Field& f, int k, std::size_t s, const Vec& v);

}  // namespace dualflow

namespace dualflow {

enum class Variant { euler, ns, ns_pressure };

const char* variant_name(Variant v);

/// Dual unknowns. chi is empty for the Euler variant.
struct DualState {
  Variant variant = Variant::euler;
  Field lambda;
  Field gamma;
  Field chi;

  /// Zero dual of the given variant.
  static DualState zeros(const Grid& g, Variant v);

  const Grid& grid() const { return lambda.grid(); }
  bool has_chi() const { return variant != Variant::euler; }

  DualState& operator+=(const DualState& o);
  DualState& operator*=(double s);
  void axpy(double s, const DualState& o);

  friend bool operator==(const DualState&, const DualState&) = default;
};

DualState operator-(DualState a, const DualState& b);

double inner(const DualState& a, const DualState& b);
double norm(const DualState& a);

/// Recovered primal fields. W and p are empty when the variant does not produce them.
struct PrimalState {
  Field V;
  Field W;
  Field p;
  double max_div_V = 0.0;
  double momentum_residual = 0.0;
  double constitutive_residual = 0.0;
};

}  // namespace dualflow
