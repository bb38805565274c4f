#pragma once

#include <cstddef>

namespace dualflow {

/// Uniform space-time grid on [0,T] x unit torus T^d.
struct Grid {
  int d = 2;
  int n = 0;
  int n_t = 0;
  double T = 1.0;

  double dx() const { return 1.0 / n; }
  double dt() const { return T / (n_t - 1); }
  double t(int k) const { return k == n_t - 1 ? T : k * dt(); }
  std::size_t n_space() const;
  std::size_t n_nodes() const { return n_space() * static_cast<std::size_t>(n_t); }
  /// Trapezoid weight of time slice k.
  double time_weight(int k) const;

  friend bool operator==(const Grid&, const Grid&) = default;
};

/// Validates d in {2,3}, n >= 4 a power of two, n_t >= 3, T > 0. Throws GridError.
Grid make_grid(int d, int n, int n_t, double T);

/// Number of distinct entries of a symmetric d x d matrix.
constexpr int sym_size(int d) { return d * (d + 1) / 2; }

/// Storage slot of entry (i,j) in the upper-triangle row-major layout.
constexpr int sym_index(int d, int i, int j) {
  if (i > j) {
    const int tmp = i;
    i = j;
    j = tmp;
  }
  return i * d - i * (i - 1) / 2 + (j - i);
}

}  // namespace dualflow
