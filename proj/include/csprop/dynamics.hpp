// Complexified classical trajectories under any symbol: fixed-step RK4
// initial-value integration with Jacobi fields, Newton shooting for the
// two-point boundary problem, action evaluation, and the Riccati flow.
#pragma once

#include <Eigen/Dense>
#include <memory>
#include <utility>
#include <vector>

#include "csprop/spin.hpp"
#include "csprop/symbols.hpp"
#include "csprop/types.hpp"

namespace csprop {

enum class SystemKind { particle, spin };

struct TimeGrid {
  double T = 1.0;
  int M = 200;
  double delta() const { return T / M; }
};

/// Second derivatives of the Hamiltonian entering the fluctuation machinery:
/// A = d2H/dzbar dz, B = d2H/dzbar^2, Bbar = d2H/dz^2 for particles. For
/// spin the EOM factor (1+zbar z)^2/(2 kappa) is absorbed and A is the
/// symmetrized combination, matching the SK integrand.
struct SecondDerivs {
  Complex A, B, Bbar;
};

/// Hamiltonian flow on the complexified phase plane: dz/dt = -i dH/dzbar,
/// dzbar/dt = +i dH/dz (times (1+zbar z)^2/(2 kappa) for spin).
class HamiltonianFlow {
 public:
  virtual ~HamiltonianFlow() = default;
  virtual SystemKind kind() const = 0;
  virtual Complex hamiltonian(Complex zbar, Complex z) const = 0;
  /// (dz/dt, dzbar/dt).
  virtual std::pair<Complex, Complex> rhs(Complex zbar, Complex z) const = 0;
  /// Jacobian of (dz/dt, dzbar/dt) with respect to (z, zbar).
  virtual Eigen::Matrix2cd jacobian(Complex zbar, Complex z) const = 0;
  /// Integrand A(t) of the SK phase.
  virtual Complex sk_integrand(Complex zbar, Complex z) const = 0;
  virtual SecondDerivs second_derivs(Complex zbar, Complex z) const = 0;
  /// Action coefficient: j or jtilde for spin; unused for particles.
  virtual double kappa() const { return 0.0; }
};

class ParticleFlow : public HamiltonianFlow {
 public:
  explicit ParticleFlow(SymbolPolynomial symbol);
  SystemKind kind() const override { return SystemKind::particle; }
  Complex hamiltonian(Complex zbar, Complex z) const override;
  std::pair<Complex, Complex> rhs(Complex zbar, Complex z) const override;
  Eigen::Matrix2cd jacobian(Complex zbar, Complex z) const override;
  Complex sk_integrand(Complex zbar, Complex z) const override;
  SecondDerivs second_derivs(Complex zbar, Complex z) const override;
  const SymbolPolynomial& symbol() const { return sym_; }

 private:
  SymbolPolynomial sym_, dz_, dzb_, dzzb_, dzbzb_, dzz_;
};

class SpinFlow : public HamiltonianFlow {
 public:
  /// kappa is the EOM/action normalization: j for Q and P symbols,
  /// jtilde for the W symbol.
  SpinFlow(SpinSymbol symbol, double kappa);
  SystemKind kind() const override { return SystemKind::spin; }
  Complex hamiltonian(Complex zbar, Complex z) const override;
  std::pair<Complex, Complex> rhs(Complex zbar, Complex z) const override;
  Eigen::Matrix2cd jacobian(Complex zbar, Complex z) const override;
  Complex sk_integrand(Complex zbar, Complex z) const override;
  SecondDerivs second_derivs(Complex zbar, Complex z) const override;
  double kappa() const override { return kappa_; }
  const SpinSymbol& symbol() const { return sym_; }

 private:
  SpinSymbol sym_;
  double kappa_;
  SpinSymbol f_, fb_;          // g dH/dzbar, g dH/dz
  SpinSymbol fz_, fzb_, fbz_, fbzb_;
};

/// (dz/dt, dzbar/dt) at a phase point.
std::pair<Complex, Complex> eom_rhs(const HamiltonianFlow& flow,
                                    const PhasePoint& pt);

struct ClassicalTrajectory {
  TimeGrid grid;
  std::vector<Complex> z, zbar;  // M+1 nodes
  std::vector<Complex> u, v;     // Jacobi fields, u[0] = 0, v[0] = 1
  int newton_iterations = 0;
  double bvp_residual = 0.0;
};

/// Fixed-step RK4 with the Jacobi variational pair integrated alongside.
ClassicalTrajectory integrate_ivp(const HamiltonianFlow& flow, Complex z0,
                                  Complex zbar0, TimeGrid grid);

struct ShootingOptions {
  double tol = 1e-11;
  int max_iter = 40;
  int max_depth = 8;       // homotopy-in-T recursion limit
  Complex guess{0.0};      // initial zbar(0); defaults to conj(z_i)
  bool has_guess = false;
};

/// Newton shooting on the single complex unknown zbar(0), with the Jacobi
/// field v(T) as the Newton derivative and a solve-at-T/2 homotopy fallback.
ClassicalTrajectory solve_bvp_shooting(const HamiltonianFlow& flow,
                                       Complex z_i, Complex zbar_f,
                                       TimeGrid grid,
                                       ShootingOptions opts = {});

/// Composite Simpson (3/8 rule on the tail when the interval count is odd).
Complex simpson(const std::vector<Complex>& values, double delta);

/// iS on a solved trajectory: boundary term plus Simpson over the kinetic
/// and Hamiltonian integrand, with the representation-appropriate form.
Complex action(const HamiltonianFlow& flow, const ClassicalTrajectory& traj);

struct RiccatiState {
  std::vector<Complex> Gud;       // M+1 nodes, Gud[0] = 0
  double closed_form_discrepancy = 0.0;
};

/// Integrates -i dG/dt = B - 2 A G + Bbar G^2 along the trajectory and
/// compares with the closed form (A + i vdot/v)/Bbar where Bbar != 0.
RiccatiState riccati_Gud(const HamiltonianFlow& flow,
                         const ClassicalTrajectory& traj);

/// d^2(iS)/dzbar_f dz_i two ways: the v(T)-based relation and centered
/// finite differences over re-solved boundary problems. Returns the former;
/// throws NumericalError("jacobi_duality_violation") if they disagree by
/// more than 1e-5 relative.
Complex cross_derivative_of_action(const HamiltonianFlow& flow, Complex z_i,
                                   Complex zbar_f, TimeGrid grid);

}  // namespace csprop
