// Spin-j operators, spin coherent states in stereographic coordinates, and
// their Q/W/P symbols at the asymptotic multipole-rescaling accuracy.
#pragma once

#include <Eigen/Dense>
#include <tuple>
#include <vector>

#include "csprop/operator_algebra.hpp"
#include "csprop/types.hpp"

namespace csprop {

struct SpinQuantum {
  int two_j = 1;  // j = two_j / 2 may be half-integral
  double j() const { return 0.5 * two_j; }
  double jtilde() const { return 0.5 * two_j + 0.5; }
  int dim() const { return two_j + 1; }
};

/// Matrix in the |j,m> basis ordered m = j, j-1, ..., -j.
struct SpinOperator {
  SpinQuantum j;
  Eigen::MatrixXcd matrix;

  bool hermitian(double tol = 1e-12) const {
    return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff() <=
           tol * (1.0 + matrix.cwiseAbs().maxCoeff());
  }
};

struct SpinMatrices {
  SpinOperator jx, jy, jz, jplus, jminus;
};

SpinMatrices spin_matrices(SpinQuantum j);

/// Operator assembled from ordered monomials J+^p Jz^q J-^r.
SpinOperator spin_operator_from_monomials(
    SpinQuantum j,
    const std::vector<std::tuple<int, int, int, Complex>>& monomials);

/// Components of |z> = e^{z J-} |j,j> on |j, j-k>: sqrt(C(2j,k)) z^k.
Eigen::VectorXcd coherent_state_vector(Complex z, SpinQuantum j);

/// Function on the sphere of the form numerator(zbar,z) / (1+zbar z)^L in
/// stereographic coordinates z = tan(theta/2) e^{i phi}. Closed under +, *,
/// d/dz, d/dzbar, and the phase-space L^2 operator.
class SpinSymbol {
 public:
  SpinSymbol() = default;
  SpinSymbol(SpinQuantum j, Rep rep, TermMap numerator, int denom_power);

  SpinQuantum j() const { return j_; }
  Rep rep() const { return rep_; }
  const TermMap& numerator() const { return num_; }
  int denom_power() const { return denom_power_; }
  SpinSymbol with_rep(Rep r) const { return {j_, r, num_, denom_power_}; }

  /// Analytic value at independent complex (zbar, z).
  Complex eval(Complex zbar, Complex z) const;
  /// Value at a real sphere point, via bounded half-angle powers
  /// sin^(a+b)(t/2) cos^(2L-a-b)(t/2); stable for large-binomial numerators.
  Complex eval_on_sphere(double theta, double phi) const;

  SpinSymbol derivative_z() const;
  SpinSymbol derivative_zbar() const;

  SpinSymbol operator+(const SpinSymbol& o) const;
  SpinSymbol operator-(const SpinSymbol& o) const;
  SpinSymbol operator*(const SpinSymbol& o) const;
  SpinSymbol scaled(Complex c) const;

  /// Cancel common (1 + zbar z) factors when the division is exact.
  /// Skipped for very large coefficient scales, where the cancellation
  /// check could silently erode precision.
  SpinSymbol reduced() const;

  double max_abs_coeff() const;

 private:
  SpinQuantum j_;
  Rep rep_ = Rep::Q;
  TermMap num_;
  int denom_power_ = 0;
};

/// H^Q(zbar,z) = <zbar|op|z> / (1+zbar z)^(2j), exact.
SpinSymbol spin_q_symbol(const SpinOperator& op);

/// -(1+zbar z)^2 d^2/dz dzbar, the phase-space angular momentum squared.
SpinSymbol apply_Lsq(const SpinSymbol& sym);

/// Gauss-Legendre x uniform-phi sphere quadrature, exact for band limit
/// min(2*ntheta-1, nphi-1).
struct SphereQuadrature {
  std::vector<double> x, wx;  // cos(theta) nodes and weights
  int nphi = 0;
  double phi(int k) const { return 2.0 * M_PI * k / nphi; }
  double wphi() const { return 2.0 * M_PI / nphi; }
};
SphereQuadrature sphere_quadrature(int ntheta, int nphi);

/// Orthonormal spherical harmonic Y_lm in stereographic form, as a
/// SpinSymbol with denominator power l (rep tag W, j carried through).
SpinSymbol spherical_harmonic_symbol(SpinQuantum j, int l, int m);

/// Multipole coefficients c_lm of sym, l = 0..lmax (lmax = band limit).
/// Layout: coeffs[l][m + l], m = -l..l.
std::vector<std::vector<Complex>> multipole_coefficients(const SpinSymbol& sym);

/// The l-components of sym as symbols; summing them reproduces sym.
std::vector<SpinSymbol> multipole_components(const SpinSymbol& sym);

/// Rescales each multipole by the factor implied by
/// H^{Q,P} = (1 -/+ L^2/(4 jtilde)) H^W: multipole l carries
/// f(l) = 1 -/+ l(l+1)/(4 jtilde). Correct up to relative O(jtilde^-2).
/// Throws NumericalError("spin_convert_invalid") if a needed factor is <= 0
/// on a multipole with significant content.
SpinSymbol spin_convert(const SpinSymbol& sym, Rep target);

}  // namespace csprop
