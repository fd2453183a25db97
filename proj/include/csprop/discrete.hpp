// Discrete path-integral machinery: discrete actions in the Q, P, and
// alternating P-Q schemes, stationary nodes, the 2N x 2N tridiagonal
// fluctuation matrix, the discrete Jacobi recursion, Gamma_SK, the exact
// determinant identity, and slice-by-slice Gaussian recursions.
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "csprop/dynamics.hpp"
#include "csprop/symbols.hpp"
#include "csprop/types.hpp"

namespace csprop {

enum class Scheme { Qrep, Prep, Alternating };

const char* scheme_name(Scheme s);

/// Discrete action of one time-slicing scheme. The interior integration
/// pairs are (z_j, zbar_j), j = 1..N with
///   Qrep:        N = M-1, H terms H^Q(zbar_{j+1}, z_j), j = 0..N
///   Prep:        N = M,   H terms H^P(zbar_j, z_j),     j = 1..N
///   Alternating: N = M,   H^P(zbar_j,z_j) + H^Q(zbar_{j+1},z_j), odd j
/// and fixed boundary data z_0 = z_i, zbar_{N+1} = zbar_f. The variables
/// z_M (Q) and zbar_0 are unrepresentable by construction.
struct DiscreteAction {
  Scheme scheme = Scheme::Prep;
  TimeGrid grid;
  SymbolPolynomial hq, hp;
  Complex z_i{0.0}, zbar_f{0.0};

  int pairs() const { return scheme == Scheme::Qrep ? grid.M - 1 : grid.M; }
};

DiscreteAction build_discrete_action(Scheme scheme, const SymbolPolynomial& hq,
                                     const SymbolPolynomial& hp, Complex z_i,
                                     Complex zbar_f, TimeGrid grid);

/// Interior nodes; index [j-1] holds (z_j, zbar_j).
struct DiscreteNodes {
  Eigen::VectorXcd z, zbar;
};

/// iS_disc at the given nodes.
Complex discrete_action_value(const DiscreteAction& action,
                              const DiscreteNodes& nodes);

/// Analytic gradient of iS_disc, interleaved (zbar_1, z_1, zbar_2, z_2, ...).
Eigen::VectorXcd discrete_action_gradient(const DiscreteAction& action,
                                          const DiscreteNodes& nodes);

/// Nodes sampled from a continuum trajectory solved on a commensurate grid.
DiscreteNodes initialize_nodes(const DiscreteAction& action,
                               const ClassicalTrajectory& traj);

/// Newton's method on grad iS_disc = 0 from the given start.
DiscreteNodes solve_discrete_stationary(const DiscreteAction& action,
                                        const DiscreteNodes& init,
                                        double tol = 1e-12, int max_iter = 60);

/// Nonzero second-derivative coefficients D_ab = -d^2(iS)/da db at the
/// stationary nodes. Arrays are 1-based over j = 1..N; dcross[j] couples
/// z_j with zbar_{j+1}, and dcross[N] couples to the fixed boundary zbar_f.
struct SliceCoefficients {
  Scheme scheme = Scheme::Prep;
  int N = 0;
  double delta = 0.0;
  std::vector<Complex> djbjb, djj, djbj, dcross;
};

SliceCoefficients slice_coefficients(const DiscreteAction& action,
                                     const DiscreteNodes& nodes);

/// Symmetric tridiagonal 2N x 2N fluctuation matrix in the interleaved
/// ordering (etabar_1, eta_1, ..., etabar_N, eta_N).
struct TridiagonalMatrix {
  Eigen::VectorXcd diag;  // 2N
  Eigen::VectorXcd off;   // 2N-1
};

TridiagonalMatrix fluctuation_matrix(const SliceCoefficients& coeffs);

struct DetResult {
  ScaledComplex signed_det;  // (-1)^N det F_disc
  Complex k_red;             // [(-1)^N det]^(-1/2), branch by pair ratios
};

/// Determinant by the three-term leading-minor recurrence with power-of-two
/// rescaling; K_red accumulates square roots of successive pair ratios so
/// the branch is continuous in the slice count.
DetResult det_tridiagonal(const TridiagonalMatrix& mat);

/// u_0..u_N and v_1..v_{N+1}; v[j] is stored at index j (slot 0 unused).
struct JacobiFieldsDiscrete {
  std::vector<Complex> u, v;
};

/// Propagates the discrete Jacobi pair by the exact 2x2 solve; the
/// O(Delta)-truncated update of the continuum argument is available behind
/// the flag (Prep and Qrep only).
JacobiFieldsDiscrete discrete_jacobi(const SliceCoefficients& coeffs,
                                     bool truncated = false);

/// Gamma_SK = (-1)^N D_{N,N+1bar} prod_{j<=N} D_jbar_j prod_{j<N} D_{j,j+1bar},
/// the exact finite-N product relating det F_disc to v_{N+1}. Including the
/// boundary coupling factor makes the Cramer identity exact for every scheme.
ScaledComplex gamma_sk(const SliceCoefficients& coeffs);

struct DiscreteFluctuationReport {
  int M = 0;
  Complex detF{0.0};     // (-1)^N det F_disc
  Complex gammaSK{0.0};
  Complex vM1{0.0};      // v_{N+1}
  double identityResidual = 0.0;
  Complex kRed{0.0};
};

/// Computes everything on the same stationary nodes and checks the exact
/// identity (-1)^N det F = Gamma_SK v_{N+1} to 1e-10 relative. Throws
/// NumericalError("discrete_identity_violation") with the first divergent
/// minor index if it fails.
DiscreteFluctuationReport verify_identity(const DiscreteAction& action,
                                          const DiscreteNodes& nodes);

struct SliceRecursionResult {
  std::vector<Complex> Gud;  // G_{j,ud}, j = 1..N at [j-1]
  Complex kRed{1.0};
  double consistencyMax = 0.0;  // max |G_uu - G_dd| over slices
};

/// Slice-by-slice Gaussian elimination: G_{j+1,ud} update with the scheme's
/// coupling, K_red = prod (det G_j)^(-1/2). For the alternating scheme the
/// even-slice determinants are exactly 1.
SliceRecursionResult slice_recursion(const SliceCoefficients& coeffs);

struct SliceCheckResult {
  Complex exact{0.0};   // <zbar2| e^{-iH Delta} |z1> from the exact oracle
  Complex saddle{0.0};  // exp(zbar2 z1 - i Delta H^Q(zbar2, z1))
  double abs_diff = 0.0;
};

/// One-time-slice comparison for the Weyl-kernel saddle-chain argument;
/// the difference is O(Delta^2).
SliceCheckResult weyl_slice_saddle_check(const NormalOrderedOperator& op,
                                         Complex zbar2, Complex z1,
                                         double delta);

/// Full pipeline on one operator: symbols, continuum initialization,
/// stationary solve, and coefficients.
struct DiscretePipeline {
  DiscreteAction action;
  DiscreteNodes nodes;
  SliceCoefficients coeffs;
  ClassicalTrajectory continuum;  // trajectory used for initialization
};

DiscretePipeline discrete_pipeline(const NormalOrderedOperator& op,
                                   Scheme scheme, Complex z_i, Complex zbar_f,
                                   double T, int M);

/// e^{+- i int A dt} v(T) on the continuum trajectory of the scheme's
/// symbol: the Delta -> 0 limit of (-1)^N det F_disc (+ for P, - for Q).
Complex continuum_det_target(const HamiltonianFlow& flow,
                             const ClassicalTrajectory& traj, Scheme scheme);

}  // namespace csprop
