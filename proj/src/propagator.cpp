#include "csprop/propagator.hpp"

#include <cmath>

namespace csprop {

namespace {

/// Square root of 1/v(T) with the branch tracked continuously from t = 0,
/// where v = 1: the argument of v is unwound node to node along the
/// trajectory (steps are << pi on any resolved grid).
Complex inverse_sqrt_v(const ClassicalTrajectory& traj) {
  double arg = 0.0;
  Complex prev{1.0};
  for (std::size_t k = 1; k < traj.v.size(); ++k) {
    const Complex cur = traj.v[k];
    if (std::abs(cur) < 1e-14)
      throw NumericalError("near_caustic", "Jacobi field v(t) vanished");
    const double step = std::arg(cur / prev);
    if (std::abs(step) > 2.5)
      throw NumericalError("near_caustic",
                           "prefactor branch tracking lost (arg step > 2.5)");
    arg += step;
    prev = cur;
  }
  const double mag = std::abs(traj.v.back());
  return std::exp(Complex{-0.5 * std::log(mag), -0.5 * arg});
}

}  // namespace

PropagatorResult propagate_with_flow(const HamiltonianFlow& flow, Rep rep,
                                     Complex z_i, Complex zbar_f,
                                     TimeGrid grid) {
  ClassicalTrajectory traj = solve_bvp_shooting(flow, z_i, zbar_f, grid);

  PropagatorResult out;
  out.rep = rep;
  out.system = flow.kind();
  out.method = Method::continuum;
  out.iS = action(flow, traj);

  // SK phase: +(i/2) int A dt for Q, -(i/2) for P, none for W.
  if (rep != Rep::W && grid.T != 0.0) {
    const int M = grid.M;
    std::vector<Complex> A(M + 1);
    for (int k = 0; k <= M; ++k)
      A[k] = flow.sk_integrand(traj.zbar[k], traj.z[k]);
    const Complex integral = simpson(A, grid.delta());
    out.skPhase = (rep == Rep::Q ? 0.5 : -0.5) * kImag * integral;
  }

  const Complex isqv = inverse_sqrt_v(traj);
  if (flow.kind() == SystemKind::particle) {
    out.prefactor = isqv;
  } else {
    const Complex c0 = traj.zbar.front() * traj.z.front();
    const Complex cT = traj.zbar.back() * traj.z.back();
    if (rep == Rep::W) {
      // (i/(2 jtilde) d2 S^W / dzbar_f dz_i)^(1/2) = [v(T) (1+c0)^2]^(-1/2)
      out.prefactor = isqv / (1.0 + c0);
    } else {
      // Q/P form: [(1+cT)/(1+c0)]^(1/2) v(T)^(-1/2)
      out.prefactor = isqv * std::sqrt((1.0 + cT) / (1.0 + c0));
    }
  }

  out.value = out.prefactor * std::exp(out.iS + out.skPhase);
  out.diagnostics["newton_iterations"] = traj.newton_iterations;
  out.diagnostics["bvp_residual"] = traj.bvp_residual;
  out.diagnostics["v_T_abs"] = std::abs(traj.v.back());
  return out;
}

PropagatorResult propagate_particle(const NormalOrderedOperator& op, Rep rep,
                                    Complex z_i, Complex zbar_f, double T,
                                    int M) {
  const SymbolPolynomial sym = convert_symbol(q_symbol_of_operator(op), rep);
  ParticleFlow flow(sym);
  return propagate_with_flow(flow, rep, z_i, zbar_f, TimeGrid{T, M});
}

PropagatorResult propagate_spin(const SpinOperator& op, Rep rep, Complex z_i,
                                Complex zbar_f, double T, int M) {
  const SpinSymbol q = spin_q_symbol(op);
  const SpinSymbol sym = (rep == Rep::Q) ? q : spin_convert(q, rep);
  const double kappa = (rep == Rep::W) ? op.j.jtilde() : op.j.j();
  SpinFlow flow(sym, kappa);
  return propagate_with_flow(flow, rep, z_i, zbar_f, TimeGrid{T, M});
}

}  // namespace csprop
