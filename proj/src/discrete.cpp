#include "csprop/discrete.hpp"

#include <algorithm>
#include <cmath>

#include "csprop/exact.hpp"

namespace csprop {

const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::Qrep: return "Qrep";
    case Scheme::Prep: return "Prep";
    case Scheme::Alternating: return "Alternating";
  }
  return "?";
}

namespace {

/// One Hamiltonian slice term -i Delta H(zbar_a, z_b). Index a ranges over
/// 1..N+1 (N+1 = fixed zbar_f) and b over 0..N (0 = fixed z_i).
struct SliceTerm {
  const SymbolPolynomial* h;
  int a, b;
};

std::vector<SliceTerm> slice_terms(const DiscreteAction& act) {
  std::vector<SliceTerm> terms;
  const int N = act.pairs();
  switch (act.scheme) {
    case Scheme::Qrep:
      for (int j = 0; j <= N; ++j) terms.push_back({&act.hq, j + 1, j});
      break;
    case Scheme::Prep:
      for (int j = 1; j <= N; ++j) terms.push_back({&act.hp, j, j});
      break;
    case Scheme::Alternating:
      for (int j = 1; j <= N - 1; j += 2) {
        terms.push_back({&act.hp, j, j});
        terms.push_back({&act.hq, j + 1, j});
      }
      break;
  }
  return terms;
}

}  // namespace

DiscreteAction build_discrete_action(Scheme scheme, const SymbolPolynomial& hq,
                                     const SymbolPolynomial& hp, Complex z_i,
                                     Complex zbar_f, TimeGrid grid) {
  if (scheme == Scheme::Alternating && grid.M % 2 != 0)
    throw NumericalError("discrete_invalid_scheme",
                         "alternating scheme requires even M");
  if (scheme == Scheme::Qrep && grid.M < 1)
    throw NumericalError("discrete_invalid_scheme", "Qrep requires M >= 1");
  return {scheme, grid, hq, hp, z_i, zbar_f};
}

namespace {

struct NodeView {
  const DiscreteAction& act;
  const DiscreteNodes& nodes;
  Complex z(int j) const { return j == 0 ? act.z_i : nodes.z(j - 1); }
  Complex zbar(int j) const {
    return j == act.pairs() + 1 ? act.zbar_f : nodes.zbar(j - 1);
  }
};

}  // namespace

Complex discrete_action_value(const DiscreteAction& act,
                              const DiscreteNodes& nodes) {
  const NodeView nv{act, nodes};
  const int N = act.pairs();
  Complex iS{0.0};
  for (int j = 1; j <= N + 1; ++j) iS += nv.zbar(j) * nv.z(j - 1);
  for (int j = 1; j <= N; ++j) iS -= nv.zbar(j) * nv.z(j);
  const Complex minus_i_delta = -kImag * act.grid.delta();
  for (const auto& t : slice_terms(act))
    iS += minus_i_delta * eval_symbol(*t.h, {nv.zbar(t.a), nv.z(t.b)});
  return iS;
}

Eigen::VectorXcd discrete_action_gradient(const DiscreteAction& act,
                                          const DiscreteNodes& nodes) {
  const NodeView nv{act, nodes};
  const int N = act.pairs();
  Eigen::VectorXcd g = Eigen::VectorXcd::Zero(2 * N);
  for (int j = 1; j <= N; ++j) {
    g(2 * j - 2) = nv.z(j - 1) - nv.z(j);      // d/dzbar_j
    g(2 * j - 1) = nv.zbar(j + 1) - nv.zbar(j);  // d/dz_j
  }
  const Complex minus_i_delta = -kImag * act.grid.delta();
  for (const auto& t : slice_terms(act)) {
    const PhasePoint pt{nv.zbar(t.a), nv.z(t.b)};
    if (t.a <= N)
      g(2 * t.a - 2) += minus_i_delta * eval_symbol_derivs(*t.h, pt, 1, 0);
    if (t.b >= 1)
      g(2 * t.b - 1) += minus_i_delta * eval_symbol_derivs(*t.h, pt, 0, 1);
  }
  return g;
}

DiscreteNodes initialize_nodes(const DiscreteAction& act,
                               const ClassicalTrajectory& traj) {
  const int N = act.pairs();
  const int stride = traj.grid.M / act.grid.M;
  DiscreteNodes nodes;
  nodes.z.resize(N);
  nodes.zbar.resize(N);
  for (int j = 1; j <= N; ++j) {
    nodes.z(j - 1) = traj.z[stride * j];
    if (act.scheme == Scheme::Qrep)
      nodes.zbar(j - 1) = traj.zbar[stride * j];
    else
      nodes.zbar(j - 1) = traj.zbar[stride * (j - 1)];
  }
  return nodes;
}

DiscreteNodes solve_discrete_stationary(const DiscreteAction& act,
                                        const DiscreteNodes& init, double tol,
                                        int max_iter) {
  const int N = act.pairs();
  DiscreteNodes nodes = init;
  if (N == 0) return nodes;
  const double scale =
      std::max({1.0, std::abs(act.z_i), std::abs(act.zbar_f)});
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXcd g = discrete_action_gradient(act, nodes);
    const double gnorm = g.cwiseAbs().maxCoeff();
    if (gnorm < tol * scale) return nodes;

    // Hessian of iS is minus the D-coefficient pattern.
    const SliceCoefficients co = slice_coefficients(act, nodes);
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(2 * N, 2 * N);
    for (int j = 1; j <= N; ++j) {
      H(2 * j - 2, 2 * j - 2) = -co.djbjb[j];
      H(2 * j - 1, 2 * j - 1) = -co.djj[j];
      H(2 * j - 2, 2 * j - 1) = -co.djbj[j];
      H(2 * j - 1, 2 * j - 2) = -co.djbj[j];
      if (j < N) {
        H(2 * j - 1, 2 * j) = -co.dcross[j];
        H(2 * j, 2 * j - 1) = -co.dcross[j];
      }
    }
    const Eigen::VectorXcd step = H.partialPivLu().solve(g);
    // Backtracking on the gradient norm.
    double lambda = 1.0;
    bool moved = false;
    for (int bt = 0; bt < 8; ++bt, lambda *= 0.5) {
      DiscreteNodes trial = nodes;
      for (int j = 0; j < N; ++j) {
        trial.zbar(j) -= lambda * step(2 * j);
        trial.z(j) -= lambda * step(2 * j + 1);
      }
      const double gtrial =
          discrete_action_gradient(act, trial).cwiseAbs().maxCoeff();
      if (gtrial < gnorm || gtrial < tol * scale) {
        nodes = trial;
        moved = true;
        break;
      }
    }
    if (!moved)
      throw NumericalError("discrete_stationary_no_convergence",
                           "Newton stalled at gradient norm " +
                               std::to_string(gnorm));
  }
  const double gfinal =
      discrete_action_gradient(act, nodes).cwiseAbs().maxCoeff();
  if (gfinal >= tol * scale)
    throw NumericalError("discrete_stationary_no_convergence",
                         "gradient norm " + std::to_string(gfinal) +
                             " after Newton iterations");
  return nodes;
}

SliceCoefficients slice_coefficients(const DiscreteAction& act,
                                     const DiscreteNodes& nodes) {
  const NodeView nv{act, nodes};
  const int N = act.pairs();
  SliceCoefficients co;
  co.scheme = act.scheme;
  co.N = N;
  co.delta = act.grid.delta();
  co.djbjb.assign(N + 1, Complex{0.0});
  co.djj.assign(N + 1, Complex{0.0});
  co.djbj.assign(N + 1, Complex{1.0});   // kinetic part of -d2(iS)/dzbar_j dz_j
  co.dcross.assign(N + 1, Complex{-1.0});  // kinetic part across slices
  const Complex i_delta = kImag * act.grid.delta();
  for (const auto& t : slice_terms(act)) {
    const PhasePoint pt{nv.zbar(t.a), nv.z(t.b)};
    if (t.a <= N) co.djbjb[t.a] += i_delta * eval_symbol_derivs(*t.h, pt, 2, 0);
    if (t.b >= 1) co.djj[t.b] += i_delta * eval_symbol_derivs(*t.h, pt, 0, 2);
    if (t.a == t.b)
      co.djbj[t.a] += i_delta * eval_symbol_derivs(*t.h, pt, 1, 1);
    if (t.a == t.b + 1 && t.b >= 1)
      co.dcross[t.b] += i_delta * eval_symbol_derivs(*t.h, pt, 1, 1);
  }
  return co;
}

TridiagonalMatrix fluctuation_matrix(const SliceCoefficients& co) {
  const int N = co.N;
  TridiagonalMatrix mat;
  mat.diag.resize(2 * N);
  mat.off.resize(std::max(0, 2 * N - 1));
  for (int j = 1; j <= N; ++j) {
    mat.diag(2 * j - 2) = co.djbjb[j];
    mat.diag(2 * j - 1) = co.djj[j];
    mat.off(2 * j - 2) = co.djbj[j];
    if (j < N) mat.off(2 * j - 1) = co.dcross[j];
  }
  return mat;
}

namespace {

ScaledComplex scaled_sub(const ScaledComplex& a, const ScaledComplex& b) {
  // a - b with exponent alignment.
  const long e = std::max(a.exp2, b.exp2);
  const Complex am =
      std::ldexp(a.mantissa.real(), static_cast<int>(a.exp2 - e)) +
      kImag * std::ldexp(a.mantissa.imag(), static_cast<int>(a.exp2 - e));
  const Complex bm =
      std::ldexp(b.mantissa.real(), static_cast<int>(b.exp2 - e)) +
      kImag * std::ldexp(b.mantissa.imag(), static_cast<int>(b.exp2 - e));
  ScaledComplex out;
  out.mantissa = am - bm;
  out.exp2 = e;
  out.normalize();
  return out;
}

}  // namespace

DetResult det_tridiagonal(const TridiagonalMatrix& mat) {
  const int n = static_cast<int>(mat.diag.size());
  const int N = n / 2;
  ScaledComplex dprev2{Complex{1.0}, 0};  // d_0
  ScaledComplex dprev1{Complex{1.0}, 0};
  DetResult out;
  out.k_red = Complex{1.0};
  ScaledComplex even_prev{Complex{1.0}, 0};  // d_{2(j-1)} for pair ratios
  for (int k = 1; k <= n; ++k) {
    ScaledComplex d = dprev1;
    d *= mat.diag(k - 1);
    if (k >= 2) {
      ScaledComplex t = dprev2;
      t *= mat.off(k - 2) * mat.off(k - 2);
      d = scaled_sub(d, t);
    }
    dprev2 = dprev1;
    dprev1 = d;
    if (k % 2 == 0) {
      // rho_j = -d_{2j} / d_{2j-2}; principal square roots keep the branch
      // continuous since each ratio is 1 + O(Delta).
      const Complex rho = -scaled_ratio(dprev1, even_prev);
      out.k_red /= std::sqrt(rho);
      even_prev = dprev1;
    }
  }
  out.signed_det = dprev1;
  if (N % 2 != 0) out.signed_det.mantissa *= -1.0;  // (-1)^N
  return out;
}

JacobiFieldsDiscrete discrete_jacobi(const SliceCoefficients& co,
                                     bool truncated) {
  const int N = co.N;
  JacobiFieldsDiscrete f;
  f.u.assign(N + 1, Complex{0.0});
  f.v.assign(N + 2, Complex{0.0});
  f.v[1] = Complex{1.0};
  if (truncated && co.scheme == Scheme::Alternating)
    throw NumericalError("discrete_invalid_scheme",
                         "truncated Jacobi update supports Prep and Qrep only");
  for (int j = 1; j <= N; ++j) {
    if (!truncated) {
      // D_{j-1,jbar} u_{j-1} + D_{j,jbar} u_j + D_{jbar,jbar} v_j = 0
      // D_{jj} u_j + D_{jbar,j} v_j + D_{j+1bar,j} v_{j+1} = 0
      const Complex prev = (j >= 2) ? co.dcross[j - 1] * f.u[j - 1]
                                    : Complex{0.0};
      f.u[j] = -(prev + co.djbjb[j] * f.v[j]) / co.djbj[j];
      f.v[j + 1] = -(co.djj[j] * f.u[j] + co.djbj[j] * f.v[j]) / co.dcross[j];
    } else {
      // O(Delta)-truncated update used in the continuum argument.
      const Complex idelta = kImag * co.delta;
      Complex A, B, Bb;
      if (co.scheme == Scheme::Prep) {
        A = (co.djbj[j] - 1.0) / idelta;
        B = co.djbjb[j] / idelta;
        Bb = co.djj[j] / idelta;
      } else {
        A = (co.dcross[j] + 1.0) / idelta;
        B = co.djbjb[j] / idelta;
        Bb = co.djj[j] / idelta;
      }
      const Complex up = f.u[j - 1], vp = f.v[j];
      f.u[j] = (1.0 - idelta * A) * up - idelta * B * vp;
      f.v[j + 1] = idelta * Bb * up + (1.0 + idelta * A) * vp;
    }
  }
  return f;
}

ScaledComplex gamma_sk(const SliceCoefficients& co) {
  const int N = co.N;
  ScaledComplex g{Complex{1.0}, 0};
  for (int j = 1; j <= N; ++j) g *= co.djbj[j];
  for (int j = 1; j <= N - 1; ++j) g *= co.dcross[j];
  g *= co.dcross[N];  // boundary coupling to zbar_f
  if (N % 2 != 0) g.mantissa *= -1.0;  // (-1)^N
  return g;
}

DiscreteFluctuationReport verify_identity(const DiscreteAction& act,
                                          const DiscreteNodes& nodes) {
  const SliceCoefficients co = slice_coefficients(act, nodes);
  const DetResult det = det_tridiagonal(fluctuation_matrix(co));
  const JacobiFieldsDiscrete jac = discrete_jacobi(co);
  ScaledComplex gamma = gamma_sk(co);
  const Complex vM1 = jac.v[co.N + 1];

  ScaledComplex rhs = gamma;
  rhs *= vM1;
  const Complex ratio = scaled_ratio(rhs, det.signed_det);
  const double residual = std::abs(ratio - 1.0);

  DiscreteFluctuationReport rep;
  rep.M = act.grid.M;
  rep.detF = det.signed_det.value();
  rep.gammaSK = gamma.value();
  rep.vM1 = vM1;
  rep.identityResidual = residual;
  rep.kRed = det.k_red;
  if (residual >= 1e-10) {
    // Diagnostic: walk the leading-minor pair ratios against the slice
    // recursion determinants and name the first slice where they diverge.
    int first_bad = -1;
    try {
      const SliceRecursionResult rec = slice_recursion(co);
      const TridiagonalMatrix mat = fluctuation_matrix(co);
      ScaledComplex d0{Complex{1.0}, 0}, d1{Complex{1.0}, 0};
      ScaledComplex even{Complex{1.0}, 0};
      Complex guu = co.djbj[1], gud = co.djbjb[1], gdu = co.djj[1];
      for (int k = 1, j = 0; k <= 2 * co.N && first_bad < 0; ++k) {
        ScaledComplex d = d1;
        d *= mat.diag(k - 1);
        if (k >= 2) {
          ScaledComplex t = d0;
          t *= mat.off(k - 2) * mat.off(k - 2);
          d = scaled_sub(d, t);
        }
        d0 = d1;
        d1 = d;
        if (k % 2 != 0) continue;
        ++j;
        const Complex rho = -scaled_ratio(d1, even);
        even = d1;
        const Complex detG = guu * guu - gud * gdu;
        if (std::abs(rho - detG) > 1e-6 * (1.0 + std::abs(detG)))
          first_bad = j;
        if (j < co.N) {
          const Complex cj = -co.dcross[j];
          gud = co.djbjb[j + 1] + cj * cj * gud / detG;
          guu = co.djbj[j + 1];
          gdu = co.djj[j + 1];
        }
      }
      (void)rec;
    } catch (const NumericalError&) {
    }
    throw NumericalError("discrete_identity_violation",
                         std::string("det/Jacobi identity residual ") +
                             std::to_string(residual) + " at M=" +
                             std::to_string(act.grid.M) + " scheme " +
                             scheme_name(act.scheme) +
                             (first_bad >= 0 ? ", first divergent minor pair " +
                                                   std::to_string(first_bad)
                                             : ""));
  }
  return rep;
}

SliceRecursionResult slice_recursion(const SliceCoefficients& co) {
  const int N = co.N;
  SliceRecursionResult out;
  out.Gud.resize(N);
  Complex Guu = co.djbj[1], Gud = co.djbjb[1], Gdu = co.djj[1],
          Gdd = co.djbj[1];
  for (int j = 1; j <= N; ++j) {
    out.consistencyMax = std::max(out.consistencyMax, std::abs(Guu - Gdd));
    const Complex detG = Guu * Gdd - Gud * Gdu;
    if (std::abs(detG) < 1e-12)
      throw NumericalError("near_caustic",
                           "slice recursion det G_j vanished at slice " +
                               std::to_string(j));
    out.Gud[j - 1] = Gud;
    out.kRed /= std::sqrt(detG);
    if (j == N) break;
    // Completing the square leaves +1/2 c_j^2 (G^-1)_ud etabar_{j+1}^2 with
    // c_j = -D_{j,j+1bar}; (G^-1)_ud = -G_ud/det G.
    const Complex cj = -co.dcross[j];
    const Complex carry = cj * cj * Gud / detG;
    Guu = co.djbj[j + 1];
    Gdd = co.djbj[j + 1];
    Gdu = co.djj[j + 1];
    Gud = co.djbjb[j + 1] + carry;
  }
  return out;
}

SliceCheckResult weyl_slice_saddle_check(const NormalOrderedOperator& op,
                                         Complex zbar2, Complex z1,
                                         double delta) {
  SliceCheckResult out;
  out.exact = exact_propagator_particle(op, zbar2, z1, delta);
  const SymbolPolynomial hq = q_symbol_of_operator(op);
  out.saddle = std::exp(zbar2 * z1 -
                        kImag * delta * eval_symbol(hq, {zbar2, z1}));
  out.abs_diff = std::abs(out.exact - out.saddle);
  return out;
}

DiscretePipeline discrete_pipeline(const NormalOrderedOperator& op,
                                   Scheme scheme, Complex z_i, Complex zbar_f,
                                   double T, int M) {
  const SymbolPolynomial hq = q_symbol_of_operator(op);
  const SymbolPolynomial hp = convert_symbol(hq, Rep::P);
  const SymbolPolynomial hw = convert_symbol(hq, Rep::W);

  DiscretePipeline pipe;
  pipe.action =
      build_discrete_action(scheme, hq, hp, z_i, zbar_f, TimeGrid{T, M});

  // Continuum initialization on a commensurate refinement of the grid,
  // under the symbol whose flow the scheme's stationary nodes follow.
  const SymbolPolynomial& init_sym =
      scheme == Scheme::Qrep ? hq : (scheme == Scheme::Prep ? hp : hw);
  const int stride = std::max(1, (200 + M - 1) / M);
  ParticleFlow flow(init_sym);
  pipe.continuum =
      solve_bvp_shooting(flow, z_i, zbar_f, TimeGrid{T, stride * M});

  DiscreteNodes init = initialize_nodes(pipe.action, pipe.continuum);
  pipe.nodes = solve_discrete_stationary(pipe.action, init);
  pipe.coeffs = slice_coefficients(pipe.action, pipe.nodes);
  return pipe;
}

Complex continuum_det_target(const HamiltonianFlow& flow,
                             const ClassicalTrajectory& traj, Scheme scheme) {
  const int M = traj.grid.M;
  std::vector<Complex> A(M + 1);
  for (int k = 0; k <= M; ++k)
    A[k] = flow.sk_integrand(traj.zbar[k], traj.z[k]);
  const Complex integral = simpson(A, traj.grid.delta());
  const double sign = (scheme == Scheme::Prep) ? 1.0 : -1.0;
  return std::exp(sign * kImag * integral) * traj.v.back();
}

}  // namespace csprop
