#include "dualflow/problem.hpp"

#include <stdexcept>
#include <string>

#include "dualflow/grid_ops.hpp"

namespace dualflow {

ProblemData ProblemData::zeros(const Grid& g) {
  ProblemData p;
  p.Vbar = vector_field(g);
  p.Wbar = sym_field(g);
  p.pbar = scalar_field(g);
  p.F = vector_field(g);
  p.V0 = vector_slice(g);
  return p;
}

void ProblemData::validate() const {
  if (!(a_V > 0.0) || !(a_W > 0.0) || !(a_p > 0.0))
    throw std::invalid_argument("problem: a_V, a_W, a_p must be positive");
  if (!(nu >= 0.0)) throw std::invalid_argument("problem: nu must be nonnegative");
  const Grid& g = grid();
  auto check = [&](const Field& f, FieldKind kind, int slices, const char* name) {
    if (f.grid() != g || f.kind() != kind || f.n_slices() != slices)
      throw std::invalid_argument(std::string("problem: field ") + name + " has wrong shape");
  };
  check(Vbar, FieldKind::vector, g.n_t, "Vbar");
  check(Wbar, FieldKind::sym, g.n_t, "Wbar");
  check(pbar, FieldKind::scalar, g.n_t, "pbar");
  check(F, FieldKind::vector, g.n_t, "F");
  check(V0, FieldKind::vector, 1, "V0");
  if (max_abs(divergence(V0)) > 1e-10)
    throw std::invalid_argument("problem: V0 must be divergence-free");
  for (int c = 0; c < g.d; ++c)
    if (std::abs(spatial_mean(V0, 0, c)) > 1e-10)
      throw std::invalid_argument("problem: V0 must have zero spatial mean");
}

}  // namespace dualflow
