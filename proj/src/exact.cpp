#include "csprop/exact.hpp"

#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

namespace csprop {

Eigen::MatrixXcd fock_matrix(const NormalOrderedOperator& op, int nmax) {
  const int d = nmax + 1;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(d, d);
  std::vector<double> lg(d + 1);
  for (int i = 0; i <= d; ++i) lg[i] = std::lgamma(i + 1.0);
  for (const auto& [key, c] : op.terms()) {
    // <m| adag^p a^q |n> = delta_{m, n-q+p} sqrt(m! n!) / (n-q)!
    const int p = key.m, q = key.n;
    for (int n = q; n <= nmax; ++n) {
      const int m = n - q + p;
      if (m > nmax) continue;
      out(m, n) += c * std::exp(0.5 * (lg[m] + lg[n]) - lg[n - q]);
    }
  }
  return out;
}

namespace {

Eigen::VectorXcd coherent_components(Complex z, int d) {
  // z^k / sqrt(k!), evaluated through logs so large k underflows cleanly.
  Eigen::VectorXcd v(d);
  v(0) = Complex{1.0};
  if (z == Complex{0.0}) {
    for (int k = 1; k < d; ++k) v(k) = Complex{0.0};
    return v;
  }
  const Complex logz = std::log(z);
  for (int k = 1; k < d; ++k)
    v(k) = std::exp(static_cast<double>(k) * logz -
                    0.5 * std::lgamma(k + 1.0));
  return v;
}

Complex coherent_bilinear(const Eigen::MatrixXcd& U, Complex zbar_f,
                          Complex z_i) {
  // sum_{m,n} zbar_f^m z_i^n / sqrt(m! n!) U_{mn}
  const int d = static_cast<int>(U.rows());
  const Eigen::VectorXcd left = coherent_components(zbar_f, d);
  const Eigen::VectorXcd right = coherent_components(z_i, d);
  return left.transpose() * (U * right);
}

Eigen::MatrixXcd evolution(const Eigen::MatrixXcd& H, double T,
                           bool hermitian) {
  if (hermitian) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    Eigen::VectorXcd phases =
        (-kImag * T * es.eigenvalues().cast<Complex>()).array().exp();
    return es.eigenvectors() * phases.asDiagonal() *
           es.eigenvectors().adjoint();
  }
  Eigen::MatrixXcd A = -kImag * T * H;
  return A.exp();
}

}  // namespace

Complex exact_propagator_particle(const NormalOrderedOperator& op,
                                  Complex zbar_f, Complex z_i, double T,
                                  int nmax, double tol) {
  const bool herm = op.hermitian();
  Complex prev{0.0};
  bool have_prev = false;
  for (int cur = std::max(nmax, 8); cur <= (1 << 12); cur *= 2) {
    const Eigen::MatrixXcd U = evolution(fock_matrix(op, cur), T, herm);
    const Complex K = coherent_bilinear(U, zbar_f, z_i);
    if (have_prev && std::abs(K - prev) < tol * (1.0 + std::abs(K))) return K;
    prev = K;
    have_prev = true;
  }
  throw NumericalError("oracle_no_convergence",
                       "exact particle propagator: nmax cap reached");
}

Complex exact_propagator_spin(const SpinOperator& op, Complex zbar_f,
                              Complex z_i, double T) {
  const Eigen::MatrixXcd U = evolution(op.matrix, T, op.hermitian());
  const Eigen::VectorXcd ket = coherent_state_vector(z_i, op.j);
  const Eigen::VectorXcd bra = coherent_state_vector(zbar_f, op.j);
  return bra.transpose() * (U * ket);
}

}  // namespace csprop
