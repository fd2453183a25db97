// Weyl symbols from the operator-valued kernel W(zbar, z): matrix elements
// of the kernel in the Fock basis and the regularized trace Tr(H W).
// Independent oracle for the derivative-series conversions in symbols.hpp;
// shares no code with them.
#pragma once

#include <Eigen/Dense>

#include "csprop/operator_algebra.hpp"
#include "csprop/symbols.hpp"
#include "csprop/types.hpp"

namespace csprop {

/// Fock matrix elements <m|W(zbar,z)|n> for m,n <= nmax, from the explicit
/// expansion of the generating function 2 exp(-2(zb2-zb)(z1-z) + zb2 z1).
/// Intended for modest nmax (factorial-scaled finite sums).
Eigen::MatrixXcd weyl_kernel_matrix(const PhasePoint& pt, int nmax);

/// Weyl symbol of op reconstructed from kernel traces.
///
/// Tr(H W) truncated in the Fock basis oscillates without converging (the
/// kernel at the origin is twice the parity operator), so each trace is
/// damped with s^N and extrapolated s -> 1; the polynomial coefficients are
/// then recovered from traces on the real slice zbar = z = r, where the
/// Laguerre-banded sums stay polynomially bounded.
SymbolPolynomial weyl_symbol_via_kernel_trace(const NormalOrderedOperator& op,
                                              int nmax = 256,
                                              double tol = 1e-9);

/// Tr(H W(zbar,z)) at one point. nmax is the starting Fock allowance; it is
/// grown until the damped tails are negligible. Throws
/// NumericalError("oracle_no_convergence") if the extrapolation error
/// estimate exceeds tol or the basis cap is hit.
Complex weyl_kernel_trace_oracle(const NormalOrderedOperator& op,
                                 const PhasePoint& pt, int nmax = 256,
                                 double tol = 1e-9);

}  // namespace csprop
