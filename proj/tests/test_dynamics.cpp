#include <doctest.h>

#include <random>

#include "csprop/dynamics.hpp"

using namespace csprop;

namespace {

SymbolPolynomial harmonic_q(double omega) {
  TermMap t;
  t[{1, 1}] = omega;
  return {t, Rep::Q};
}

SymbolPolynomial kerr_q(double omega, double chi) {
  TermMap t;
  t[{1, 1}] = omega;
  t[{2, 2}] = chi;
  return {t, Rep::Q};
}

}  // namespace

TEST_CASE("eom right-hand sides") {
  ParticleFlow flow(harmonic_q(1.0));
  auto [dz, dzb] = eom_rhs(flow, {{0.4, 0.1}, {0.3, -0.2}});
  CHECK(std::abs(dz - (-kImag * Complex{0.3, -0.2})) < 1e-15);
  CHECK(std::abs(dzb - (kImag * Complex{0.4, 0.1})) < 1e-15);

  TermMap c;
  c[{0, 0}] = 2.0;
  ParticleFlow constant(SymbolPolynomial{c, Rep::Q});
  auto [dz0, dzb0] = eom_rhs(constant, {{0.4, 0.1}, {0.3, -0.2}});
  CHECK(std::abs(dz0) == 0.0);
  CHECK(std::abs(dzb0) == 0.0);

  // Spin rotation: H = jtilde (1 - zbar z)/(1 + zbar z) with the 2 jtilde
  // factor gives dz/dt = +i z.
  const SpinQuantum j{5};
  SpinSymbol hw(j, Rep::W, {{{0, 0}, j.jtilde()}, {{1, 1}, -j.jtilde()}}, 1);
  SpinFlow sflow(hw, j.jtilde());
  const Complex z{0.3, 0.2}, zb{0.1, -0.4};
  auto [sdz, sdzb] = sflow.rhs(zb, z);
  CHECK(std::abs(sdz - kImag * z) < 1e-13);
  CHECK(std::abs(sdzb - (-kImag * zb)) < 1e-13);
}

TEST_CASE("harmonic IVP matches the closed form") {
  const double omega = 1.0;
  ParticleFlow flow(harmonic_q(omega));
  const Complex z0{0.7, -0.3}, zb0{0.2, 0.5};
  const TimeGrid grid{2.0, 1000};
  const ClassicalTrajectory traj = integrate_ivp(flow, z0, zb0, grid);
  for (int k : {250, 500, 1000}) {
    const double t = grid.delta() * k;
    CHECK(std::abs(traj.z[k] - z0 * std::exp(-kImag * omega * t)) < 1e-10);
    CHECK(std::abs(traj.zbar[k] - zb0 * std::exp(kImag * omega * t)) < 1e-10);
    CHECK(std::abs(traj.v[k] - std::exp(kImag * omega * t)) < 1e-10);
    CHECK(std::abs(traj.u[k]) < 1e-12);
  }
}

TEST_CASE("zero hamiltonian keeps the path constant") {
  ParticleFlow flow(SymbolPolynomial{{}, Rep::Q});
  const ClassicalTrajectory traj =
      integrate_ivp(flow, {0.3, 0.1}, {0.2, -0.2}, {1.5, 64});
  CHECK(std::abs(traj.z.back() - traj.z.front()) == 0.0);
  CHECK(std::abs(traj.v.back() - 1.0) == 0.0);
}

TEST_CASE("harmonic shooting recovers zbar(0) in two Newton steps") {
  const double omega = 1.0, T = 1.3;
  ParticleFlow flow(harmonic_q(omega));
  const Complex z_i{0.8, 0.1}, zbar_f{0.6, -0.4};
  const ClassicalTrajectory traj =
      solve_bvp_shooting(flow, z_i, zbar_f, {T, 400});
  CHECK(traj.newton_iterations <= 2);
  CHECK(std::abs(traj.zbar.front() - zbar_f * std::exp(-kImag * omega * T)) <
        1e-9);
  CHECK(std::abs(traj.z.front() - z_i) == 0.0);
  CHECK(std::abs(traj.zbar.back() - zbar_f) < 1e-11);
}

TEST_CASE("T = 0 shooting is immediate") {
  ParticleFlow flow(kerr_q(1.0, 0.05));
  const ClassicalTrajectory traj =
      solve_bvp_shooting(flow, {1.2, 0.0}, {1.2, 0.0}, {0.0, 8});
  CHECK(std::abs(traj.zbar.front() - Complex{1.2, 0.0}) < 1e-14);
}

TEST_CASE("kerr shooting pins both boundaries and conserves zbar z") {
  const double omega = 1.0, chi = 0.05, T = 1.0;
  ParticleFlow flow(kerr_q(omega, chi));
  const Complex z_i{1.2, 0.0}, zbar_f{1.2, 0.0};
  const ClassicalTrajectory traj =
      solve_bvp_shooting(flow, z_i, zbar_f, {T, 400});
  CHECK(std::abs(traj.z.front() - z_i) == 0.0);
  CHECK(std::abs(traj.zbar.back() - zbar_f) < 1e-10);
  // zbar z is conserved, so z(T) = z_i exp(-i (omega + 2 chi zbar(0) z_i) T).
  const Complex c = traj.zbar.front() * z_i;
  CHECK(std::abs(traj.z.back() -
                 z_i * std::exp(-kImag * (omega + 2.0 * chi * c) * T)) < 1e-9);
  // Energy conservation along the trajectory.
  const Complex e0 = flow.hamiltonian(traj.zbar.front(), traj.z.front());
  for (int k : {100, 200, 399})
    CHECK(std::abs(flow.hamiltonian(traj.zbar[k], traj.z[k]) - e0) < 1e-10);
}

TEST_CASE("newton residuals contract quadratically on the kerr problem") {
  const double T = 1.0;
  ParticleFlow flow(kerr_q(1.0, 0.05));
  const Complex z_i{1.2, 0.0}, zbar_f{1.2, 0.0};
  const TimeGrid grid{T, 200};
  Complex guess = std::conj(z_i);
  std::vector<double> residuals;
  for (int it = 0; it < 12; ++it) {
    const ClassicalTrajectory traj = integrate_ivp(flow, z_i, guess, grid);
    const Complex r = traj.zbar.back() - zbar_f;
    residuals.push_back(std::abs(r));
    if (std::abs(r) < 1e-13) break;
    guess -= r / traj.v.back();
  }
  REQUIRE(residuals.back() < 1e-11);
  for (std::size_t k = 0; k + 1 < residuals.size(); ++k) {
    if (residuals[k] < 1e-3 && residuals[k + 1] > 1e-14)
      CHECK(residuals[k + 1] < 20.0 * residuals[k] * residuals[k]);
  }
}

TEST_CASE("jacobi field matches a perturbed reintegration") {
  ParticleFlow flow(kerr_q(1.0, 0.05));
  const Complex z0{1.1, 0.2}, zb0{0.9, -0.1};
  const TimeGrid grid{1.0, 400};
  const ClassicalTrajectory base = integrate_ivp(flow, z0, zb0, grid);
  const double eps = 1e-6;
  const ClassicalTrajectory bumped = integrate_ivp(flow, z0, zb0 + eps, grid);
  const Complex fd_v = (bumped.zbar.back() - base.zbar.back()) / eps;
  const Complex fd_u = (bumped.z.back() - base.z.back()) / eps;
  CHECK(std::abs(fd_v - base.v.back()) < 1e-5 * (1.0 + std::abs(fd_v)));
  CHECK(std::abs(fd_u - base.u.back()) < 1e-5 * (1.0 + std::abs(fd_u)));
}

TEST_CASE("harmonic action in Q and W representations") {
  const double omega = 1.0, T = 0.9;
  const Complex z_i{0.8, 0.1}, zbar_f{0.5, -0.3};
  ParticleFlow qflow(harmonic_q(omega));
  const ClassicalTrajectory qtraj =
      solve_bvp_shooting(qflow, z_i, zbar_f, {T, 400});
  const Complex iSq = action(qflow, qtraj);
  const Complex expect = zbar_f * z_i * std::exp(-kImag * omega * T);
  CHECK(std::abs(iSq - expect) < 1e-11);

  // W symbol of omega adag a: omega zbar z - omega/2.
  TermMap w;
  w[{1, 1}] = omega;
  w[{0, 0}] = -0.5 * omega;
  ParticleFlow wflow(SymbolPolynomial{w, Rep::W});
  const ClassicalTrajectory wtraj =
      solve_bvp_shooting(wflow, z_i, zbar_f, {T, 400});
  const Complex iSw = action(wflow, wtraj);
  CHECK(std::abs(iSw - (expect + kImag * 0.5 * omega * T)) < 1e-11);
}

TEST_CASE("T = 0 action is the boundary term only") {
  ParticleFlow flow(kerr_q(1.0, 0.05));
  const Complex z_i{0.7, 0.2}, zbar_f{0.4, -0.6};
  const ClassicalTrajectory traj =
      solve_bvp_shooting(flow, z_i, zbar_f, {0.0, 8});
  CHECK(std::abs(action(flow, traj) - zbar_f * z_i) < 1e-13);

  const SpinQuantum j{4};
  SpinSymbol hq(j, Rep::Q, {{{0, 0}, j.j()}, {{1, 1}, -j.j()}}, 1);
  SpinFlow sflow(hq, j.j());
  const ClassicalTrajectory straj =
      solve_bvp_shooting(sflow, z_i, zbar_f, {0.0, 8});
  CHECK(std::abs(action(sflow, straj) -
                 j.j() * 2.0 * std::log(1.0 + zbar_f * z_i)) < 1e-13);
}

TEST_CASE("riccati: source-free, kerr vs closed form, quadratic") {
  // Harmonic: B = Bbar = 0, G stays 0.
  ParticleFlow h(harmonic_q(1.0));
  const ClassicalTrajectory ht =
      solve_bvp_shooting(h, {0.9, 0.0}, {0.8, 0.1}, {1.0, 400});
  const RiccatiState hr = riccati_Gud(h, ht);
  for (Complex g : hr.Gud) CHECK(std::abs(g) < 1e-13);

  // Kerr at M = 1000: ODE route vs closed form to 1e-8.
  ParticleFlow kerr(kerr_q(1.0, 0.05));
  const ClassicalTrajectory kt =
      solve_bvp_shooting(kerr, {1.2, 0.0}, {1.2, 0.0}, {1.0, 1000});
  const RiccatiState kr = riccati_Gud(kerr, kt);
  CHECK(kr.closed_form_discrepancy < 1e-8);

  // Quadratic H = beta/2 (zbar^2 + z^2) + omega zbar z.
  TermMap q;
  q[{2, 0}] = 0.15;
  q[{0, 2}] = 0.15;
  q[{1, 1}] = 1.0;
  ParticleFlow quad(SymbolPolynomial{q, Rep::Q});
  const ClassicalTrajectory qt =
      solve_bvp_shooting(quad, {0.6, 0.1}, {0.5, -0.2}, {0.8, 800});
  const RiccatiState qr = riccati_Gud(quad, qt);
  CHECK(qr.closed_form_discrepancy < 1e-8);
}

TEST_CASE("cross derivative of the action: both routes agree") {
  // Harmonic: d2(iS)/dzbar_f dz_i = e^{-i omega T} = 1/v(T).
  ParticleFlow h(harmonic_q(1.0));
  const double T = 1.1;
  const Complex a =
      cross_derivative_of_action(h, {0.7, 0.1}, {0.5, -0.2}, {T, 300});
  CHECK(std::abs(a - std::exp(-kImag * T)) < 1e-9);

  // T = 0 limit: derivative is 1.
  const Complex a0 =
      cross_derivative_of_action(h, {0.7, 0.1}, {0.5, -0.2}, {0.0, 8});
  CHECK(std::abs(a0 - 1.0) < 1e-12);

  // Kerr at small chi T: the internal dual-route assertion must pass.
  ParticleFlow kerr(kerr_q(1.0, 0.05));
  CHECK_NOTHROW(
      cross_derivative_of_action(kerr, {1.2, 0.0}, {1.2, 0.0}, {1.0, 300}));

  // Spin case: the v(T) relation carries the (1 + zbar(0) z_i)^2 factor.
  const SpinQuantum j{6};
  SpinSymbol hq(j, Rep::Q, {{{0, 0}, j.j()}, {{1, 1}, -j.j()}}, 1);
  SpinFlow sflow(hq, j.j());
  CHECK_NOTHROW(cross_derivative_of_action(sflow, {0.4, 0.1}, {0.3, -0.1},
                                           {0.8, 300}));
}

TEST_CASE("harmonic trajectory composes across [0,T] and [T,2T]") {
  ParticleFlow flow(harmonic_q(1.0));
  const double T = 0.7;
  const Complex z_i{0.8, 0.0}, zbar_f{0.6, 0.2};
  const ClassicalTrajectory full =
      solve_bvp_shooting(flow, z_i, zbar_f, {2.0 * T, 800});
  // First leg: pin zbar at the full trajectory's midpoint value.
  const ClassicalTrajectory leg1 =
      solve_bvp_shooting(flow, z_i, full.zbar[400], {T, 400});
  // Second leg starts from the midpoint z and ends at zbar_f.
  const ClassicalTrajectory leg2 =
      solve_bvp_shooting(flow, full.z[400], zbar_f, {T, 400});
  CHECK(std::abs(leg1.z.back() - full.z[400]) < 1e-9);
  CHECK(std::abs(leg2.zbar.front() - full.zbar[400]) < 1e-9);
}

TEST_CASE("diverging trajectory raises a tagged error") {
  // Anti-Hermitian quartic drives |z| to blow up in finite time.
  TermMap t;
  t[{2, 2}] = Complex{0.0, -4.0};
  ParticleFlow flow(SymbolPolynomial{t, Rep::Q});
  bool caught = false;
  try {
    integrate_ivp(flow, {2.0, 0.0}, {2.0, 0.0}, {50.0, 2000});
  } catch (const NumericalError& err) {
    caught = true;
    CHECK(err.tag() == "trajectory_diverged");
  }
  CHECK(caught);
}
