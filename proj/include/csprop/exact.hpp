// Exact quantum propagators by matrix exponentiation in a truncated Fock
// basis (particle) or the full (2j+1)-dimensional spin space. Ground truth
// for the semiclassical tests.
#pragma once

#include <Eigen/Dense>

#include "csprop/operator_algebra.hpp"
#include "csprop/spin.hpp"
#include "csprop/types.hpp"

namespace csprop {

/// Fock matrix <m|op|n> for m,n = 0..nmax from exact ladder matrix elements.
Eigen::MatrixXcd fock_matrix(const NormalOrderedOperator& op, int nmax);

/// K(zbar_f, z_i; T) = <zbar_f| e^{-i H T} |z_i> with unnormalized coherent
/// states. Hermitian H goes through a unitary eigendecomposition; otherwise
/// a scaling-and-squaring exponential is used. nmax doubles until |delta K|
/// < tol; throws NumericalError("oracle_no_convergence") past the cap.
Complex exact_propagator_particle(const NormalOrderedOperator& op,
                                  Complex zbar_f, Complex z_i, double T,
                                  int nmax = 32, double tol = 1e-12);

/// Spin analogue over the (2j+1)-dimensional space.
Complex exact_propagator_spin(const SpinOperator& op, Complex zbar_f,
                              Complex z_i, double T);

}  // namespace csprop
