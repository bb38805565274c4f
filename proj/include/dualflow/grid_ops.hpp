#pragma once

#include "dualflow/fields.hpp"

namespace dualflow {

// Spectral operators act slice by slice on the Fourier collocation grid.
// First derivatives zero the Nyquist mode of each axis.

Field spatial_gradient(const Field& f);
Field divergence(const Field& u);
/// B_ij = (d_i u_j + d_j u_i) / 2
Field sym_gradient(const Field& u);
/// (div S)_i = d_l S_il
Field div_sym(const Field& S);
/// d_i d_j f
Field hessian(const Field& f);
/// d_i d_j S_ij
Field div_div(const Field& S);
Field laplacian(const Field& f);
/// Solves Lap g = f - mean(f) with mean(g) = 0.
Field inverse_laplacian(const Field& f);
/// u - grad InvLap div u
Field leray_project(const Field& u);
/// Zeros Fourier modes with integer wavenumber magnitude above kmax.
Field spectral_lowpass(const Field& f, double kmax);
/// Sobolev H^s norm (space-time L2 in time), with weights (1+4 pi^2 |k|^2)^s.
double sobolev_norm(const Field& f, int s);

/// Summation-by-parts time derivative: central differences inside,
/// one-sided closures at t=0 and t=T. With terminal_zero the final slice
/// is treated as zero.
Field time_derivative(const Field& u, bool terminal_zero);
/// Adjoint of time_derivative (terminal_zero = false) in the trapezoid-weighted inner product.
Field time_derivative_adjoint(const Field& u);
/// Trapezoid integral from t_k to T for every k.
Field integrate_to_final(const Field& u);

/// Per spatial Fourier mode, solves (c_t D*D + (c_k |k|^2 + c_0) I) x = r in the
/// trapezoid-weighted inner product, D the time_derivative operator. With terminal_zero
/// the final slice is constrained to zero. Modes whose operator vanishes are copied.
Field time_mode_solve(const Field& r, double c_t, double c_k, double c_0, bool terminal_zero);

/// Trapezoid in time times mean over the unit torus.
double integrate_spacetime(const Field& f);
/// Mean over space of slice k, component c.
double spatial_mean(const Field& f, int k, int c);

}  // namespace dualflow
