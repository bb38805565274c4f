#include "dualflow/grid.hpp"

#include <string>

#include "dualflow/errors.hpp"

namespace dualflow {

std::size_t Grid::n_space() const {
  std::size_t s = 1;
  for (int i = 0; i < d; ++i) s *= static_cast<std::size_t>(n);
  return s;
}

double Grid::time_weight(int k) const {
  const double h = dt();
  return (k == 0 || k == n_t - 1) ? 0.5 * h : h;
}

Grid make_grid(int d, int n, int n_t, double T) {
  if (d != 2 && d != 3) throw GridError("grid: d must be 2 or 3, got " + std::to_string(d));
  if (n < 4 || (n & (n - 1)) != 0)
    throw GridError("grid: n must be a power of two >= 4, got " + std::to_string(n));
  if (n_t < 3) throw GridError("grid: n_t must be >= 3, got " + std::to_string(n_t));
  if (!(T > 0.0)) throw GridError("grid: T must be positive");
  return Grid{d, n, n_t, T};
}

}  // namespace dualflow
