#include "dualflow/grid_ops.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

namespace dualflow {

namespace {

using cplx = std::complex<double>;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

class Spectral {
 public:
  Spectral(int d, int n) : d_(d), n_(n) {
    n_real_ = 1;
    for (int i = 0; i < d; ++i) n_real_ *= static_cast<std::size_t>(n);
    const int half = n / 2 + 1;
    n_cplx_ = n_real_ / n * half;

    std::vector<double> rbuf(n_real_);
    std::vector<cplx> cbuf(n_cplx_);
    auto* r = rbuf.data();
    auto* c = reinterpret_cast<fftw_complex*>(cbuf.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    if (d == 2) {
      fwd_ = fftw_plan_dft_r2c_2d(n, n, r, c, flags);
      bwd_ = fftw_plan_dft_c2r_2d(n, n, c, r, flags);
    } else {
      fwd_ = fftw_plan_dft_r2c_3d(n, n, n, r, c, flags);
      bwd_ = fftw_plan_dft_c2r_3d(n, n, n, c, r, flags);
    }

    keff_.resize(n_cplx_);
    k2_.resize(n_cplx_);
    kmag_.resize(n_cplx_);
    half_weight_.resize(n_cplx_);
    for (std::size_t idx = 0; idx < n_cplx_; ++idx) {
      std::size_t rem = idx;
      int m[3] = {0, 0, 0};
      m[d - 1] = static_cast<int>(rem % half);
      rem /= half;
      for (int a = d - 2; a >= 0; --a) {
        m[a] = static_cast<int>(rem % n);
        rem /= n;
      }
      double k2 = 0.0, kint2 = 0.0;
      for (int a = 0; a < d; ++a) {
        const int signed_k = m[a] <= n / 2 ? m[a] : m[a] - n;
        const bool nyquist = m[a] == n / 2;
        keff_[idx][a] = nyquist ? 0.0 : kTwoPi * signed_k;
        k2 += keff_[idx][a] * keff_[idx][a];
        kint2 += static_cast<double>(signed_k) * signed_k;
      }
      k2_[idx] = k2;
      kmag_[idx] = std::sqrt(kint2);
      const int last = m[d - 1];
      half_weight_[idx] = (last == 0 || last == n / 2) ? 1.0 : 2.0;
    }
  }

  ~Spectral() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
  }

  Spectral(const Spectral&) = delete;
  Spectral& operator=(const Spectral&) = delete;

  std::size_t n_real() const { return n_real_; }
  std::size_t n_cplx() const { return n_cplx_; }
  int d() const { return d_; }
  double k(std::size_t idx, int axis) const { return keff_[idx][axis]; }
  double k2(std::size_t idx) const { return k2_[idx]; }
  double kmag(std::size_t idx) const { return kmag_[idx]; }
  double half_weight(std::size_t idx) const { return half_weight_[idx]; }

  void forward(std::span<const double> in, std::vector<cplx>& out) const {
    out.resize(n_cplx_);
    fftw_execute_dft_r2c(fwd_, const_cast<double*>(in.data()),
                         reinterpret_cast<fftw_complex*>(out.data()));
  }

  /// Normalized inverse; destroys `in`.
  void backward(std::vector<cplx>& in, std::span<double> out) const {
    fftw_execute_dft_c2r(bwd_, reinterpret_cast<fftw_complex*>(in.data()), out.data());
    const double s = 1.0 / static_cast<double>(n_real_);
    for (double& v : out) v *= s;
  }

 private:
  int d_;
  int n_;
  std::size_t n_real_ = 0;
  std::size_t n_cplx_ = 0;
  fftw_plan fwd_ = nullptr;
  fftw_plan bwd_ = nullptr;
  std::vector<std::array<double, 3>> keff_;
  std::vector<double> k2_;
  std::vector<double> kmag_;
  std::vector<double> half_weight_;
};

const Spectral& spectral(const Grid& g) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::unique_ptr<Spectral>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[{g.d, g.n}];
  if (!slot) slot = std::make_unique<Spectral>(g.d, g.n);
  return *slot;
}

inline cplx times_ik(cplx z, double k) { return {-k * z.imag(), k * z.real()}; }

void require_kind(const Field& f, FieldKind kind, const char* op) {
  if (f.kind() != kind) throw std::invalid_argument(std::string(op) + ": wrong field kind");
}

}  // namespace

Field spatial_gradient(const Field& f) {
  require_kind(f, FieldKind::scalar, "spatial_gradient");
  const Spectral& sp = spectral(f.grid());
  Field out(f.grid(), FieldKind::vector, f.n_slices());
  std::vector<cplx> hat, work;
  for (int k = 0; k < f.n_slices(); ++k) {
    sp.forward(f.slice(k, 0), hat);
    for (int a = 0; a < sp.d(); ++a) {
      work.resize(hat.size());
      for (std::size_t i = 0; i < hat.size(); ++i) work[i] = times_ik(hat[i], sp.k(i, a));
      sp.backward(work, out.slice(k, a));
    }
  }
  return out;
}

Field divergence(const Field& u) {
  require_kind(u, FieldKind::vector, "divergence");
  const Spectral& sp = spectral(u.grid());
  Field out(u.grid(), FieldKind::scalar, u.n_slices());
  std::vector<cplx> hat, acc;
  for (int k = 0; k < u.n_slices(); ++k) {
    acc.assign(sp.n_cplx(), cplx{});
    for (int a = 0; a < sp.d(); ++a) {
      sp.forward(u.slice(k, a), hat);
      for (std::size_t i = 0; i < hat.size(); ++i) acc[i] += times_ik(hat[i], sp.k(i, a));
    }
    sp.backward(acc, out.slice(k, 0));
  }
  return out;
}

Field sym_gradient(const Field& u) {
  require_kind(u, FieldKind::vector, "sym_gradient");
  const Spectral& sp = spectral(u.grid());
  const int d = sp.d();
  Field out(u.grid(), FieldKind::sym, u.n_slices());
  std::vector<std::vector<cplx>> hat(d);
  std::vector<cplx> work;
  for (int k = 0; k < u.n_slices(); ++k) {
    for (int a = 0; a < d; ++a) sp.forward(u.slice(k, a), hat[a]);
    for (int i = 0; i < d; ++i) {
      for (int j = i; j < d; ++j) {
        work.resize(sp.n_cplx());
        for (std::size_t m = 0; m < sp.n_cplx(); ++m)
          work[m] = 0.5 * (times_ik(hat[j][m], sp.k(m, i)) + times_ik(hat[i][m], sp.k(m, j)));
        sp.backward(work, out.slice(k, sym_index(d, i, j)));
      }
    }
  }
  return out;
}

Field div_sym(const Field& S) {
  require_kind(S, FieldKind::sym, "div_sym");
  const Spectral& sp = spectral(S.grid());
  const int d = sp.d();
  Field out(S.grid(), FieldKind::vector, S.n_slices());
  std::vector<std::vector<cplx>> hat(sym_size(d));
  std::vector<cplx> work;
  for (int k = 0; k < S.n_slices(); ++k) {
    for (int c = 0; c < sym_size(d); ++c) sp.forward(S.slice(k, c), hat[c]);
    for (int i = 0; i < d; ++i) {
      work.assign(sp.n_cplx(), cplx{});
      for (int l = 0; l < d; ++l) {
        const auto& h = hat[sym_index(d, i, l)];
        for (std::size_t m = 0; m < sp.n_cplx(); ++m) work[m] += times_ik(h[m], sp.k(m, l));
      }
      sp.backward(work, out.slice(k, i));
    }
  }
  return out;
}

Field hessian(const Field& f) {
  require_kind(f, FieldKind::scalar, "hessian");
  const Spectral& sp = spectral(f.grid());
  const int d = sp.d();
  Field out(f.grid(), FieldKind::sym, f.n_slices());
  std::vector<cplx> hat, work;
  for (int k = 0; k < f.n_slices(); ++k) {
    sp.forward(f.slice(k, 0), hat);
    for (int i = 0; i < d; ++i) {
      for (int j = i; j < d; ++j) {
        work.resize(hat.size());
        for (std::size_t m = 0; m < hat.size(); ++m) work[m] = -sp.k(m, i) * sp.k(m, j) * hat[m];
        sp.backward(work, out.slice(k, sym_index(d, i, j)));
      }
    }
  }
  return out;
}

Field div_div(const Field& S) {
  require_kind(S, FieldKind::sym, "div_div");
  const Spectral& sp = spectral(S.grid());
  const int d = sp.d();
  Field out(S.grid(), FieldKind::scalar, S.n_slices());
  std::vector<cplx> hat, acc;
  for (int k = 0; k < S.n_slices(); ++k) {
    acc.assign(sp.n_cplx(), cplx{});
    for (int i = 0; i < d; ++i) {
      for (int j = i; j < d; ++j) {
        sp.forward(S.slice(k, sym_index(d, i, j)), hat);
        const double mult = i == j ? 1.0 : 2.0;
        for (std::size_t m = 0; m < hat.size(); ++m)
          acc[m] -= mult * sp.k(m, i) * sp.k(m, j) * hat[m];
      }
    }
    sp.backward(acc, out.slice(k, 0));
  }
  return out;
}

namespace {

template <class Symbol>
Field apply_scalar_symbol(const Field& f, Symbol symbol) {
  const Spectral& sp = spectral(f.grid());
  Field out(f.grid(), f.kind(), f.n_slices());
  std::vector<cplx> hat;
  for (int k = 0; k < f.n_slices(); ++k) {
    for (int c = 0; c < f.ncomp(); ++c) {
      sp.forward(f.slice(k, c), hat);
      for (std::size_t m = 0; m < hat.size(); ++m) hat[m] *= symbol(sp, m);
      sp.backward(hat, out.slice(k, c));
    }
  }
  return out;
}

}  // namespace

Field laplacian(const Field& f) {
  return apply_scalar_symbol(f, [](const Spectral& sp, std::size_t m) { return -sp.k2(m); });
}

Field inverse_laplacian(const Field& f) {
  return apply_scalar_symbol(f, [](const Spectral& sp, std::size_t m) {
    const double k2 = sp.k2(m);
    return k2 > 0.0 ? -1.0 / k2 : 0.0;
  });
}

Field spectral_lowpass(const Field& f, double kmax) {
  return apply_scalar_symbol(
      f, [kmax](const Spectral& sp, std::size_t m) { return sp.kmag(m) <= kmax ? 1.0 : 0.0; });
}

Field leray_project(const Field& u) {
  require_kind(u, FieldKind::vector, "leray_project");
  const Spectral& sp = spectral(u.grid());
  const int d = sp.d();
  Field out(u.grid(), FieldKind::vector, u.n_slices());
  std::vector<std::vector<cplx>> hat(d);
  for (int k = 0; k < u.n_slices(); ++k) {
    for (int a = 0; a < d; ++a) sp.forward(u.slice(k, a), hat[a]);
    for (std::size_t m = 0; m < sp.n_cplx(); ++m) {
      const double k2 = sp.k2(m);
      if (k2 == 0.0) continue;
      cplx kdotu{};
      for (int a = 0; a < d; ++a) kdotu += sp.k(m, a) * hat[a][m];
      for (int a = 0; a < d; ++a) hat[a][m] -= sp.k(m, a) * kdotu / k2;
    }
    for (int a = 0; a < d; ++a) sp.backward(hat[a], out.slice(k, a));
  }
  return out;
}

double sobolev_norm(const Field& f, int s) {
  const Spectral& sp = spectral(f.grid());
  const Grid& g = f.grid();
  const double inv = 1.0 / (static_cast<double>(sp.n_real()) * sp.n_real());
  std::vector<cplx> hat;
  double total = 0.0;
  for (int k = 0; k < f.n_slices(); ++k) {
    double slice_sum = 0.0;
    for (int c = 0; c < f.ncomp(); ++c) {
      sp.forward(f.slice(k, c), hat);
      double acc = 0.0;
      for (std::size_t m = 0; m < hat.size(); ++m) {
        const double kk = kTwoPi * sp.kmag(m);
        acc += sp.half_weight(m) * std::pow(1.0 + kk * kk, s) * std::norm(hat[m]);
      }
      slice_sum += component_weight(f.kind(), g.d, c) * acc * inv;
    }
    total += (f.n_slices() == 1 ? 1.0 : g.time_weight(k)) * slice_sum;
  }
  return std::sqrt(total);
}

Field time_derivative(const Field& u, bool terminal_zero) {
  const Grid& g = u.grid();
  const int N = g.n_t - 1;
  const double h = g.dt();
  Field out(g, u.kind());
  const std::size_t ns = u.n_space();
  for (int c = 0; c < u.ncomp(); ++c) {
    auto value = [&](int k, std::size_t s) {
      return (terminal_zero && k == N) ? 0.0 : u.at(k, c, s);
    };
    for (std::size_t s = 0; s < ns; ++s) {
      out.at(0, c, s) = (value(1, s) - value(0, s)) / h;
      for (int k = 1; k < N; ++k) out.at(k, c, s) = (value(k + 1, s) - value(k - 1, s)) / (2.0 * h);
      out.at(N, c, s) = (value(N, s) - value(N - 1, s)) / h;
    }
  }
  return out;
}

Field time_derivative_adjoint(const Field& u) {
  const Grid& g = u.grid();
  const int N = g.n_t - 1;
  const double h = g.dt();
  Field out(g, u.kind());
  const std::size_t ns = u.n_space();
  std::vector<double> y(g.n_t), z(g.n_t);
  for (int c = 0; c < u.ncomp(); ++c) {
    for (std::size_t s = 0; s < ns; ++s) {
      for (int k = 0; k <= N; ++k) y[k] = g.time_weight(k) * u.at(k, c, s);
      std::fill(z.begin(), z.end(), 0.0);
      z[0] -= y[0] / h;
      z[1] += y[0] / h;
      for (int k = 1; k < N; ++k) {
        z[k - 1] -= y[k] / (2.0 * h);
        z[k + 1] += y[k] / (2.0 * h);
      }
      z[N - 1] -= y[N] / h;
      z[N] += y[N] / h;
      for (int k = 0; k <= N; ++k) out.at(k, c, s) = z[k] / g.time_weight(k);
    }
  }
  return out;
}

Field integrate_to_final(const Field& u) {
  const Grid& g = u.grid();
  const int N = g.n_t - 1;
  const double h = g.dt();
  Field out(g, u.kind());
  for (int c = 0; c < u.ncomp(); ++c) {
    for (std::size_t s = 0; s < u.n_space(); ++s) {
      double acc = 0.0;
      out.at(N, c, s) = 0.0;
      for (int k = N - 1; k >= 0; --k) {
        acc += 0.5 * h * (u.at(k, c, s) + u.at(k + 1, c, s));
        out.at(k, c, s) = acc;
      }
    }
  }
  return out;
}

namespace {

/// Dense Cholesky factor of a small SPD matrix (row-major, lower triangle).
struct DenseCholesky {
  int n = 0;
  std::vector<double> L;

  bool factor(std::vector<double> A, int size) {
    n = size;
    L.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int j = 0; j < n; ++j) {
      double diag = A[j * n + j];
      for (int k = 0; k < j; ++k) diag -= L[j * n + k] * L[j * n + k];
      if (!(diag > 0.0)) return false;
      L[j * n + j] = std::sqrt(diag);
      for (int i = j + 1; i < n; ++i) {
        double v = A[i * n + j];
        for (int k = 0; k < j; ++k) v -= L[i * n + k] * L[j * n + k];
        L[i * n + j] = v / L[j * n + j];
      }
    }
    return true;
  }

  void solve(std::vector<cplx>& b) const {
    for (int i = 0; i < n; ++i) {
      cplx v = b[i];
      for (int k = 0; k < i; ++k) v -= L[i * n + k] * b[k];
      b[i] = v / L[i * n + i];
    }
    for (int i = n - 1; i >= 0; --i) {
      cplx v = b[i];
      for (int k = i + 1; k < n; ++k) v -= L[k * n + i] * b[k];
      b[i] = v / L[i * n + i];
    }
  }
};

}  // namespace

namespace {

struct ModeSolveKey {
  int d, n, n_t;
  double T, c_t, c_k, c_0;
  bool terminal_zero;
  auto operator<=>(const ModeSolveKey&) const = default;
};

/// Per-|k|^2 factors of one time operator; null entries mark singular modes.
using ModeFactors = std::map<double, std::shared_ptr<const DenseCholesky>>;

std::shared_ptr<const ModeFactors> mode_factors(const Grid& g, const Spectral& sp, double c_t,
                                                double c_k, double c_0, bool terminal_zero) {
  static std::mutex mutex;
  static std::map<ModeSolveKey, std::shared_ptr<const ModeFactors>> cache;
  const ModeSolveKey key{g.d, g.n, g.n_t, g.T, c_t, c_k, c_0, terminal_zero};
  {
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }

  const int nt = g.n_t;
  const int N = nt - 1;
  const int m = terminal_zero ? N : nt;
  const double h = g.dt();

  // D^T H D for the summation-by-parts operator
  std::vector<double> D(static_cast<std::size_t>(nt) * nt, 0.0), DtHD(D.size(), 0.0);
  D[0 * nt + 0] = -1.0 / h;
  D[0 * nt + 1] = 1.0 / h;
  for (int k = 1; k < N; ++k) {
    D[k * nt + k - 1] = -0.5 / h;
    D[k * nt + k + 1] = 0.5 / h;
  }
  D[N * nt + N - 1] = -1.0 / h;
  D[N * nt + N] = 1.0 / h;
  for (int i = 0; i < nt; ++i)
    for (int j = 0; j < nt; ++j) {
      double v = 0.0;
      for (int k = 0; k < nt; ++k) v += D[k * nt + i] * g.time_weight(k) * D[k * nt + j];
      DtHD[i * nt + j] = v;
    }

  auto factors = std::make_shared<ModeFactors>();
  for (std::size_t mode = 0; mode < sp.n_cplx(); ++mode) {
    const double k2 = sp.k2(mode);
    if (factors->count(k2)) continue;
    std::vector<double> A(static_cast<std::size_t>(m) * m, 0.0);
    const double shift = c_k * k2 + c_0;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) A[i * m + j] = c_t * DtHD[i * nt + j];
      A[i * m + i] += shift * g.time_weight(i);
    }
    auto f = std::make_shared<DenseCholesky>();
    (*factors)[k2] = f->factor(std::move(A), m) ? f : nullptr;
  }

  std::lock_guard<std::mutex> lock(mutex);
  if (cache.size() > 64) cache.clear();
  cache[key] = factors;
  return factors;
}

}  // namespace

Field time_mode_solve(const Field& r, double c_t, double c_k, double c_0, bool terminal_zero) {
  const Grid& g = r.grid();
  const Spectral& sp = spectral(g);
  const int nt = g.n_t;
  const int N = nt - 1;
  Field out(g, r.kind());
  std::vector<cplx> hat;

  if (c_t == 0.0) {
    // diagonal in time
    for (int k = 0; k < nt; ++k)
      for (int c = 0; c < r.ncomp(); ++c) {
        sp.forward(r.slice(k, c), hat);
        for (std::size_t mode = 0; mode < hat.size(); ++mode) {
          const double shift = c_k * sp.k2(mode) + c_0;
          if (shift > 0.0) hat[mode] /= shift;
        }
        if (terminal_zero && k == N) std::fill(hat.begin(), hat.end(), cplx{});
        sp.backward(hat, out.slice(k, c));
      }
    return out;
  }

  const auto factors = mode_factors(g, sp, c_t, c_k, c_0, terminal_zero);
  const int m = terminal_zero ? N : nt;
  std::vector<std::vector<cplx>> slices(nt);
  std::vector<cplx> b(m);
  for (int c = 0; c < r.ncomp(); ++c) {
    for (int k = 0; k < nt; ++k) sp.forward(r.slice(k, c), slices[k]);
    for (std::size_t mode = 0; mode < sp.n_cplx(); ++mode) {
      const DenseCholesky* f = factors->at(sp.k2(mode)).get();
      if (!f) continue;
      for (int k = 0; k < m; ++k) b[k] = g.time_weight(k) * slices[k][mode];
      f->solve(b);
      for (int k = 0; k < m; ++k) slices[k][mode] = b[k];
      if (terminal_zero) slices[N][mode] = 0.0;
    }
    for (int k = 0; k < nt; ++k) sp.backward(slices[k], out.slice(k, c));
  }
  return out;
}

double spatial_mean(const Field& f, int k, int c) {
  double s = 0.0;
  for (double v : f.slice(k, c)) s += v;
  return s / static_cast<double>(f.n_space());
}

double integrate_spacetime(const Field& f) {
  const Grid& g = f.grid();
  double total = 0.0;
  for (int k = 0; k < f.n_slices(); ++k) {
    double slice_sum = 0.0;
    for (int c = 0; c < f.ncomp(); ++c) slice_sum += spatial_mean(f, k, c);
    total += (f.n_slices() == 1 ? 1.0 : g.time_weight(k)) * slice_sum;
  }
  return total;
}

}  // namespace dualflow
