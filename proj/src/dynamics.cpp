#include "csprop/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace csprop {

namespace {
constexpr double kDivergenceBound = 1e8;
}

ParticleFlow::ParticleFlow(SymbolPolynomial symbol)
    : sym_(std::move(symbol)),
      dz_(symbol_derivative(sym_, 0, 1)),
      dzb_(symbol_derivative(sym_, 1, 0)),
      dzzb_(symbol_derivative(sym_, 1, 1)),
      dzbzb_(symbol_derivative(sym_, 2, 0)),
      dzz_(symbol_derivative(sym_, 0, 2)) {}

Complex ParticleFlow::hamiltonian(Complex zbar, Complex z) const {
  return eval_symbol(sym_, {zbar, z});
}

std::pair<Complex, Complex> ParticleFlow::rhs(Complex zbar, Complex z) const {
  const PhasePoint pt{zbar, z};
  return {-kImag * eval_symbol(dzb_, pt), kImag * eval_symbol(dz_, pt)};
}

Eigen::Matrix2cd ParticleFlow::jacobian(Complex zbar, Complex z) const {
  const PhasePoint pt{zbar, z};
  const Complex A = eval_symbol(dzzb_, pt);
  const Complex B = eval_symbol(dzbzb_, pt);
  const Complex Bb = eval_symbol(dzz_, pt);
  Eigen::Matrix2cd out;
  out << -kImag * A, -kImag * B, kImag * Bb, kImag * A;
  return out;
}

Complex ParticleFlow::sk_integrand(Complex zbar, Complex z) const {
  return eval_symbol(dzzb_, {zbar, z});
}

SecondDerivs ParticleFlow::second_derivs(Complex zbar, Complex z) const {
  const PhasePoint pt{zbar, z};
  return {eval_symbol(dzzb_, pt), eval_symbol(dzbzb_, pt),
          eval_symbol(dzz_, pt)};
}

SpinFlow::SpinFlow(SpinSymbol symbol, double kappa)
    : sym_(std::move(symbol)), kappa_(kappa) {
  // g = (1 + zbar z)^2 / (2 kappa) as a denominator-free symbol.
  const double inv = 1.0 / (2.0 * kappa_);
  SpinSymbol g(sym_.j(), sym_.rep(),
               {{{0, 0}, inv}, {{1, 1}, 2.0 * inv}, {{2, 2}, inv}}, 0);
  f_ = (g * sym_.derivative_zbar()).reduced();   // dz/dt = -i f
  fb_ = (g * sym_.derivative_z()).reduced();     // dzbar/dt = +i fb
  fz_ = f_.derivative_z().reduced();
  fzb_ = f_.derivative_zbar().reduced();
  fbz_ = fb_.derivative_z().reduced();
  fbzb_ = fb_.derivative_zbar().reduced();
}

Complex SpinFlow::hamiltonian(Complex zbar, Complex z) const {
  return sym_.eval(zbar, z);
}

std::pair<Complex, Complex> SpinFlow::rhs(Complex zbar, Complex z) const {
  return {-kImag * f_.eval(zbar, z), kImag * fb_.eval(zbar, z)};
}

Eigen::Matrix2cd SpinFlow::jacobian(Complex zbar, Complex z) const {
  Eigen::Matrix2cd out;
  out << -kImag * fz_.eval(zbar, z), -kImag * fzb_.eval(zbar, z),
      kImag * fbz_.eval(zbar, z), kImag * fbzb_.eval(zbar, z);
  return out;
}

Complex SpinFlow::sk_integrand(Complex zbar, Complex z) const {
  return 0.5 * (fz_.eval(zbar, z) + fbzb_.eval(zbar, z));
}

SecondDerivs SpinFlow::second_derivs(Complex zbar, Complex z) const {
  return {0.5 * (fz_.eval(zbar, z) + fbzb_.eval(zbar, z)),
          fzb_.eval(zbar, z), fbz_.eval(zbar, z)};
}

std::pair<Complex, Complex> eom_rhs(const HamiltonianFlow& flow,
                                    const PhasePoint& pt) {
  return flow.rhs(pt.zbar, pt.z);
}

namespace {

struct State {
  Complex z, zbar, u, v;
};

State eval_rhs(const HamiltonianFlow& flow, const State& s) {
  auto [dz, dzb] = flow.rhs(s.zbar, s.z);
  const Eigen::Matrix2cd J = flow.jacobian(s.zbar, s.z);
  State d;
  d.z = dz;
  d.zbar = dzb;
  d.u = J(0, 0) * s.u + J(0, 1) * s.v;
  d.v = J(1, 0) * s.u + J(1, 1) * s.v;
  return d;
}

State axpy(const State& s, const State& d, double h) {
  return {s.z + h * d.z, s.zbar + h * d.zbar, s.u + h * d.u, s.v + h * d.v};
}

}  // namespace

ClassicalTrajectory integrate_ivp(const HamiltonianFlow& flow, Complex z0,
                                  Complex zbar0, TimeGrid grid) {
  ClassicalTrajectory traj;
  traj.grid = grid;
  const int M = grid.M;
  traj.z.resize(M + 1);
  traj.zbar.resize(M + 1);
  traj.u.resize(M + 1);
  traj.v.resize(M + 1);
  State s{z0, zbar0, Complex{0.0}, Complex{1.0}};
  const double h = grid.delta();
  for (int k = 0;; ++k) {
    traj.z[k] = s.z;
    traj.zbar[k] = s.zbar;
    traj.u[k] = s.u;
    traj.v[k] = s.v;
    if (k == M) break;
    const State k1 = eval_rhs(flow, s);
    const State k2 = eval_rhs(flow, axpy(s, k1, 0.5 * h));
    const State k3 = eval_rhs(flow, axpy(s, k2, 0.5 * h));
    const State k4 = eval_rhs(flow, axpy(s, k3, h));
    s.z += h / 6.0 * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z);
    s.zbar += h / 6.0 * (k1.zbar + 2.0 * k2.zbar + 2.0 * k3.zbar + k4.zbar);
    s.u += h / 6.0 * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u);
    s.v += h / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
    if (std::abs(s.z) > kDivergenceBound || std::abs(s.zbar) > kDivergenceBound)
      throw NumericalError("trajectory_diverged",
                           "IVP diverged at step " + std::to_string(k + 1));
  }
  return traj;
}

namespace {

/// One Newton attempt from a fixed starting guess. Returns the trajectory
/// with residual data on success, nullopt on stall.
std::optional<ClassicalTrajectory> newton_attempt(const HamiltonianFlow& flow,
                                                  Complex z_i, Complex zbar_f,
                                                  TimeGrid grid, Complex guess,
                                                  const ShootingOptions& opts,
                                                  double* best_residual) {
  Complex zb0 = guess;
  ClassicalTrajectory traj;
  double res = 0.0;
  bool have_traj = false;
  for (int it = 0; it < opts.max_iter; ++it) {
    if (!have_traj) {
      try {
        traj = integrate_ivp(flow, z_i, zb0, grid);
      } catch (const NumericalError&) {
        return std::nullopt;
      }
      have_traj = true;
      res = std::abs(traj.zbar.back() - zbar_f);
      if (best_residual) *best_residual = std::min(*best_residual, res);
    }
    if (res < opts.tol) {
      traj.newton_iterations = it;
      traj.bvp_residual = res;
      return traj;
    }
    const Complex vT = traj.v.back();
    if (std::abs(vT) < 1e-12)
      throw NumericalError("near_caustic",
                           "|v(T)| below 1e-12 in Newton shooting");
    const Complex full_step = (traj.zbar.back() - zbar_f) / vT;
    // Backtracking: halve the step while the residual does not improve.
    double lambda = 1.0;
    bool improved = false;
    for (int bt = 0; bt < 10; ++bt, lambda *= 0.5) {
      const Complex cand = zb0 - lambda * full_step;
      ClassicalTrajectory tcand;
      try {
        tcand = integrate_ivp(flow, z_i, cand, grid);
      } catch (const NumericalError&) {
        continue;
      }
      const double rcand = std::abs(tcand.zbar.back() - zbar_f);
      if (rcand < res || rcand < opts.tol) {
        zb0 = cand;
        traj = std::move(tcand);
        res = rcand;
        if (best_residual) *best_residual = std::min(*best_residual, res);
        improved = true;
        break;
      }
    }
    if (!improved) return std::nullopt;
  }
  return std::nullopt;
}

ClassicalTrajectory solve_bvp_impl(const HamiltonianFlow& flow, Complex z_i,
                                   Complex zbar_f, TimeGrid grid,
                                   const ShootingOptions& opts, Complex guess,
                                   int depth, double* best_residual) {
  if (auto traj =
          newton_attempt(flow, z_i, zbar_f, grid, guess, opts, best_residual))
    return *traj;
  // Second candidate: the T -> 0 limit zbar(0) = zbar_f.
  if (auto traj =
          newton_attempt(flow, z_i, zbar_f, grid, zbar_f, opts, best_residual))
    return *traj;
  if (depth >= opts.max_depth)
    throw NumericalError("bvp_no_convergence",
                         "Newton shooting stalled; best |zbar(T)-zbar_f| = " +
                             std::to_string(*best_residual));
  // Homotopy in T: solve at T/2 and reuse its zbar(0) as the warm start.
  TimeGrid half{0.5 * grid.T, std::max(2, grid.M / 2)};
  ClassicalTrajectory half_traj = solve_bvp_impl(
      flow, z_i, zbar_f, half, opts, guess, depth + 1, best_residual);
  if (auto traj = newton_attempt(flow, z_i, zbar_f, grid,
                                 half_traj.zbar.front(), opts, best_residual))
    return *traj;
  throw NumericalError("bvp_no_convergence",
                       "Newton shooting failed after homotopy; best residual " +
                           std::to_string(*best_residual));
}

}  // namespace

ClassicalTrajectory solve_bvp_shooting(const HamiltonianFlow& flow,
                                       Complex z_i, Complex zbar_f,
                                       TimeGrid grid, ShootingOptions opts) {
  const Complex guess = opts.has_guess ? opts.guess : std::conj(z_i);
  double best = std::numeric_limits<double>::infinity();
  return solve_bvp_impl(flow, z_i, zbar_f, grid, opts, guess, 0, &best);
}

Complex simpson(const std::vector<Complex>& values, double delta) {
  const int n = static_cast<int>(values.size()) - 1;
  if (n <= 0 || delta == 0.0) return {0.0};
  if (n == 1) return 0.5 * delta * (values[0] + values[1]);
  Complex acc{0.0};
  int limit = n;
  if (n % 2 != 0) limit = n - 3;  // close with a 3/8 tail
  for (int k = 0; k + 2 <= limit; k += 2)
    acc += delta / 3.0 * (values[k] + 4.0 * values[k + 1] + values[k + 2]);
  if (n % 2 != 0)
    acc += 3.0 * delta / 8.0 *
           (values[n - 3] + 3.0 * values[n - 2] + 3.0 * values[n - 1] +
            values[n]);
  return acc;
}

Complex action(const HamiltonianFlow& flow, const ClassicalTrajectory& traj) {
  const int M = traj.grid.M;
  std::vector<Complex> integrand(M + 1);
  for (int k = 0; k <= M; ++k) {
    const Complex z = traj.z[k], zb = traj.zbar[k];
    auto [dz, dzb] = flow.rhs(zb, z);
    const Complex H = flow.hamiltonian(zb, z);
    if (flow.kind() == SystemKind::particle) {
      integrand[k] = 0.5 * (dzb * z - zb * dz) - kImag * H;
    } else {
      integrand[k] =
          flow.kappa() * (dzb * z - zb * dz) / (1.0 + zb * z) - kImag * H;
    }
  }
  const Complex integral = simpson(integrand, traj.grid.delta());
  const Complex zT = traj.z.back(), zbT = traj.zbar.back();
  const Complex z0 = traj.z.front(), zb0 = traj.zbar.front();
  if (flow.kind() == SystemKind::particle)
    return 0.5 * (zbT * zT + zb0 * z0) + integral;
  return flow.kappa() *
             (std::log(1.0 + zbT * zT) + std::log(1.0 + zb0 * z0)) +
         integral;
}

RiccatiState riccati_Gud(const HamiltonianFlow& flow,
                         const ClassicalTrajectory& traj) {
  const int M = traj.grid.M;
  const double h = traj.grid.delta();
  RiccatiState out;
  out.Gud.resize(M + 1);

  // Re-integrate (z, zbar, G) together so RK4 midpoints stay consistent.
  struct RState {
    Complex z, zbar, G;
  };
  auto rhs = [&flow](const RState& s) {
    auto [dz, dzb] = flow.rhs(s.zbar, s.z);
    const SecondDerivs d = flow.second_derivs(s.zbar, s.z);
    return RState{dz, dzb,
                  kImag * (d.B - 2.0 * d.A * s.G + d.Bbar * s.G * s.G)};
  };
  RState s{traj.z.front(), traj.zbar.front(), Complex{0.0}};
  for (int k = 0;; ++k) {
    out.Gud[k] = s.G;
    if (k == M) break;
    auto step = [&](const RState& base, const RState& d, double f) {
      return RState{base.z + f * d.z, base.zbar + f * d.zbar,
                    base.G + f * d.G};
    };
    const RState k1 = rhs(s);
    const RState k2 = rhs(step(s, k1, 0.5 * h));
    const RState k3 = rhs(step(s, k2, 0.5 * h));
    const RState k4 = rhs(step(s, k3, h));
    s.z += h / 6.0 * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z);
    s.zbar += h / 6.0 * (k1.zbar + 2.0 * k2.zbar + 2.0 * k3.zbar + k4.zbar);
    s.G += h / 6.0 * (k1.G + 2.0 * k2.G + 2.0 * k3.G + k4.G);
    if (std::abs(s.G) > kDivergenceBound)
      throw NumericalError(
          "riccati_blowup",
          "Riccati G_ud diverged at t = " + std::to_string((k + 1) * h));
  }

  // Closed form (A + i vdot/v)/Bbar wherever Bbar is not negligible.
  double disc = 0.0;
  for (int k = 0; k <= M; ++k) {
    const SecondDerivs d = flow.second_derivs(traj.zbar[k], traj.z[k]);
    const double scale = std::abs(d.A) + std::abs(d.B) + std::abs(d.Bbar);
    if (std::abs(d.Bbar) < 1e-10 * (1.0 + scale)) continue;
    const Eigen::Matrix2cd J = flow.jacobian(traj.zbar[k], traj.z[k]);
    const Complex vdot = J(1, 0) * traj.u[k] + J(1, 1) * traj.v[k];
    const Complex closed = (d.A + kImag * vdot / traj.v[k]) / d.Bbar;
    disc = std::max(disc, std::abs(closed - out.Gud[k]));
  }
  out.closed_form_discrepancy = disc;
  return out;
}

Complex cross_derivative_of_action(const HamiltonianFlow& flow, Complex z_i,
                                   Complex zbar_f, TimeGrid grid) {
  ClassicalTrajectory base = solve_bvp_shooting(flow, z_i, zbar_f, grid);
  const Complex vT = base.v.back();
  Complex route_a;
  if (flow.kind() == SystemKind::particle) {
    route_a = 1.0 / vT;
  } else {
    const Complex c0 = base.zbar.front() * base.z.front();
    route_a = 2.0 * flow.kappa() / (vT * (1.0 + c0) * (1.0 + c0));
  }

  // Finite-difference oracle with one Richardson step, warm-started.
  auto iS = [&](Complex zi, Complex zbf) {
    ShootingOptions opts;
    opts.guess = base.zbar.front();
    opts.has_guess = true;
    ClassicalTrajectory t = solve_bvp_shooting(flow, zi, zbf, grid, opts);
    return action(flow, t);
  };
  auto fd = [&](double h) {
    return (iS(z_i + h, zbar_f + h) - iS(z_i - h, zbar_f + h) -
            iS(z_i + h, zbar_f - h) + iS(z_i - h, zbar_f - h)) /
           (4.0 * h * h);
  };
  const double h0 = 0.02 * std::max({1.0, std::abs(z_i), std::abs(zbar_f)});
  const Complex d1 = fd(h0), d2 = fd(0.5 * h0);
  const Complex route_b = (4.0 * d2 - d1) / 3.0;

  if (std::abs(route_a - route_b) > 1e-5 * std::abs(route_a))
    throw NumericalError(
        "jacobi_duality_violation",
        "v(T)-based cross derivative disagrees with finite differences");
  return route_a;
}

}  // namespace csprop
