#include "csprop/spin.hpp"

#include <algorithm>
#include <cmath>

namespace csprop {

namespace {

double log_binom(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

TermMap map_add(const TermMap& a, const TermMap& b) {
  TermMap out = a;
  for (const auto& [key, c] : b) {
    out[key] += c;
    if (out[key] == Complex{0.0}) out.erase(key);
  }
  return out;
}

TermMap map_scale(TermMap a, Complex c) {
  if (c == Complex{0.0}) return {};
  for (auto& [key, v] : a) v *= c;
  return a;
}

TermMap map_mul(const TermMap& a, const TermMap& b) {
  TermMap out;
  for (const auto& [ka, ca] : a)
    for (const auto& [kb, cb] : b) out[{ka.m + kb.m, ka.n + kb.n}] += ca * cb;
  for (auto it = out.begin(); it != out.end();)
    it = (it->second == Complex{0.0}) ? out.erase(it) : std::next(it);
  return out;
}

/// Multiply by (1 + zbar z).
TermMap map_mul_one_plus_u(const TermMap& a) {
  TermMap out = a;
  for (const auto& [key, c] : a) out[{key.m + 1, key.n + 1}] += c;
  for (auto it = out.begin(); it != out.end();)
    it = (it->second == Complex{0.0}) ? out.erase(it) : std::next(it);
  return out;
}

TermMap map_shift(const TermMap& a, int dm, int dn) {
  TermMap out;
  for (const auto& [key, c] : a) out[{key.m + dm, key.n + dn}] = c;
  return out;
}

double map_max_abs(const TermMap& a) {
  double s = 0.0;
  for (const auto& [key, c] : a) s = std::max(s, std::abs(c));
  return s;
}

/// d/dz (n-index); pair with map_shift for the quotient-rule numerators.
TermMap map_dz(const TermMap& a) {
  TermMap out;
  for (const auto& [key, c] : a)
    if (key.n > 0) out[{key.m, key.n - 1}] += c * static_cast<double>(key.n);
  return out;
}

TermMap map_dzbar(const TermMap& a) {
  TermMap out;
  for (const auto& [key, c] : a)
    if (key.m > 0) out[{key.m - 1, key.n}] += c * static_cast<double>(key.m);
  return out;
}

}  // namespace

SpinMatrices spin_matrices(SpinQuantum j) {
  const int d = j.dim();
  const double jj = j.j();
  Eigen::MatrixXcd jz = Eigen::MatrixXcd::Zero(d, d);
  Eigen::MatrixXcd jp = Eigen::MatrixXcd::Zero(d, d);
  Eigen::MatrixXcd jm = Eigen::MatrixXcd::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    const double m = jj - k;
    jz(k, k) = m;
    if (k > 0) jp(k - 1, k) = std::sqrt(k * (2.0 * jj - k + 1.0));
    if (k < d - 1) jm(k + 1, k) = std::sqrt((2.0 * jj - k) * (k + 1.0));
  }
  SpinMatrices out;
  out.jz = {j, jz};
  out.jplus = {j, jp};
  out.jminus = {j, jm};
  out.jx = {j, 0.5 * (jp + jm)};
  out.jy = {j, -0.5 * kImag * (jp - jm)};
  return out;
}

SpinOperator spin_operator_from_monomials(
    SpinQuantum j,
    const std::vector<std::tuple<int, int, int, Complex>>& monomials) {
  const auto mats = spin_matrices(j);
  const int d = j.dim();
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(d, d);
  for (const auto& [p, q, r, c] : monomials) {
    Eigen::MatrixXcd term = Eigen::MatrixXcd::Identity(d, d);
    for (int i = 0; i < p; ++i) term = mats.jplus.matrix * term;
    Eigen::MatrixXcd zq = Eigen::MatrixXcd::Identity(d, d);
    for (int i = 0; i < q; ++i) zq = mats.jz.matrix * zq;
    Eigen::MatrixXcd mr = Eigen::MatrixXcd::Identity(d, d);
    for (int i = 0; i < r; ++i) mr = mats.jminus.matrix * mr;
    acc += c * (term * zq * mr);
  }
  return {j, acc};
}

Eigen::VectorXcd coherent_state_vector(Complex z, SpinQuantum j) {
  const int d = j.dim();
  Eigen::VectorXcd v(d);
  Complex zk{1.0};
  for (int k = 0; k < d; ++k) {
    v(k) = std::exp(0.5 * log_binom(j.two_j, k)) * zk;
    zk *= z;
  }
  return v;
}

SpinSymbol::SpinSymbol(SpinQuantum j, Rep rep, TermMap numerator,
                       int denom_power)
    : j_(j), rep_(rep), num_(std::move(numerator)), denom_power_(denom_power) {
  for (auto it = num_.begin(); it != num_.end();)
    it = (it->second == Complex{0.0}) ? num_.erase(it) : std::next(it);
}

Complex SpinSymbol::eval(Complex zbar, Complex z) const {
  Complex acc{0.0};
  for (const auto& [key, c] : num_)
    acc += c * std::pow(zbar, key.m) * std::pow(z, key.n);
  return acc / std::pow(1.0 + zbar * z, denom_power_);
}

Complex SpinSymbol::eval_on_sphere(double theta, double phi) const {
  const double s = std::sin(0.5 * theta), c = std::cos(0.5 * theta);
  const int two_l = 2 * denom_power_;
  std::vector<double> spow(two_l + 1, 1.0), cpow(two_l + 1, 1.0);
  for (int i = 1; i <= two_l; ++i) {
    spow[i] = spow[i - 1] * s;
    cpow[i] = cpow[i - 1] * c;
  }
  Complex acc{0.0};
  for (const auto& [key, cf] : num_) {
    const int ab = key.m + key.n;
    acc += cf * spow[ab] * cpow[two_l - ab] *
           std::exp(kImag * (static_cast<double>(key.n - key.m) * phi));
  }
  return acc;
}

SpinSymbol SpinSymbol::derivative_z() const {
  // d/dz [N/(1+u)^L] = [N_z (1+u) - L zbar N] / (1+u)^(L+1)
  TermMap top = map_add(map_mul_one_plus_u(map_dz(num_)),
                        map_scale(map_shift(num_, 1, 0),
                                  -static_cast<double>(denom_power_)));
  return SpinSymbol(j_, rep_, std::move(top), denom_power_ + 1);
}

SpinSymbol SpinSymbol::derivative_zbar() const {
  TermMap top = map_add(map_mul_one_plus_u(map_dzbar(num_)),
                        map_scale(map_shift(num_, 0, 1),
                                  -static_cast<double>(denom_power_)));
  return SpinSymbol(j_, rep_, std::move(top), denom_power_ + 1);
}

SpinSymbol SpinSymbol::operator+(const SpinSymbol& o) const {
  const int L = std::max(denom_power_, o.denom_power_);
  TermMap a = num_, b = o.num_;
  for (int i = denom_power_; i < L; ++i) a = map_mul_one_plus_u(a);
  for (int i = o.denom_power_; i < L; ++i) b = map_mul_one_plus_u(b);
  return SpinSymbol(j_, rep_, map_add(a, b), L);
}

SpinSymbol SpinSymbol::operator-(const SpinSymbol& o) const {
  return *this + o.scaled(-1.0);
}

SpinSymbol SpinSymbol::operator*(const SpinSymbol& o) const {
  return SpinSymbol(j_, rep_, map_mul(num_, o.num_),
                    denom_power_ + o.denom_power_);
}

SpinSymbol SpinSymbol::scaled(Complex c) const {
  return SpinSymbol(j_, rep_, map_scale(num_, c), denom_power_);
}

double SpinSymbol::max_abs_coeff() const { return map_max_abs(num_); }

SpinSymbol SpinSymbol::reduced() const {
  TermMap num = num_;
  int L = denom_power_;
  while (L > 0 && !num.empty()) {
    const double scale = map_max_abs(num);
    if (scale > 1e4) break;  // division dust would poison the quotient
    int amax = 0, bmax = 0;
    for (const auto& [key, c] : num) {
      amax = std::max(amax, key.m);
      bmax = std::max(bmax, key.n);
    }
    // Candidate quotient from Q_{ab} = N_{ab} - Q_{a-1,b-1}.
    TermMap q;
    auto nval = [&num](int a, int b) {
      auto it = num.find({a, b});
      return it == num.end() ? Complex{0.0} : it->second;
    };
    auto qval = [&q](int a, int b) {
      if (a < 0 || b < 0) return Complex{0.0};
      auto it = q.find({a, b});
      return it == q.end() ? Complex{0.0} : it->second;
    };
    for (int a = 0; a <= amax; ++a)
      for (int b = 0; b <= bmax; ++b) {
        Complex v = nval(a, b) - qval(a - 1, b - 1);
        if (v != Complex{0.0}) q[{a, b}] = v;
      }
    // Drop division dust before it can compound across iterations.
    const double qscale = map_max_abs(q);
    for (auto it = q.begin(); it != q.end();)
      it = (std::abs(it->second) < 1e-13 * qscale) ? q.erase(it)
                                                   : std::next(it);
    TermMap recon = map_mul_one_plus_u(q);
    double resid = 0.0;
    for (const auto& [key, c] : map_add(recon, map_scale(num, -1.0)))
      resid = std::max(resid, std::abs(c));
    if (resid > 1e-11 * std::max(1.0, scale)) break;
    num = std::move(q);
    --L;
  }
  if (num.empty()) L = 0;
  return SpinSymbol(j_, rep_, std::move(num), L);
}

SpinSymbol spin_q_symbol(const SpinOperator& op) {
  const int d = op.j.dim();
  std::vector<double> logc(d);
  for (int k = 0; k < d; ++k) logc[k] = 0.5 * log_binom(op.j.two_j, k);
  TermMap num;
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l) {
      const Complex c = op.matrix(k, l) * std::exp(logc[k] + logc[l]);
      if (c != Complex{0.0}) num[{k, l}] += c;
    }
  return SpinSymbol(op.j, Rep::Q, std::move(num), op.j.two_j).reduced();
}

SpinSymbol apply_Lsq(const SpinSymbol& sym) {
  // -(1+u)^2 d^2/dz dzbar: the two derivatives raise the denominator power
  // by 2, which the (1+u)^2 factor cancels again.
  SpinSymbol second = sym.derivative_z().derivative_zbar();
  return SpinSymbol(sym.j(), sym.rep(), map_scale(second.numerator(), -1.0),
                    second.denom_power() - 2)
      .reduced();
}

SphereQuadrature sphere_quadrature(int ntheta, int nphi) {
  SphereQuadrature quad;
  quad.nphi = nphi;
  quad.x.resize(ntheta);
  quad.wx.resize(ntheta);
  // Gauss-Legendre nodes by Newton iteration on P_n.
  for (int i = 0; i < ntheta; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (ntheta + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 0; k < ntheta; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k + 1.0) * x * p1 - k * p2) / (k + 1.0);
      }
      pp = ntheta * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    quad.x[i] = x;
    quad.wx[i] = 2.0 / ((1.0 - x * x) * pp * pp);
  }
  return quad;
}

namespace {

/// Normalized associated Legendre values Pbar_l^m(x) for fixed x, all
/// l <= lmax, m = 0..l, with int_{-1}^{1} Pbar^2 dx = 1 and the
/// Condon-Shortley sign. Layout: pbar[l][m].
std::vector<std::vector<double>> normalized_legendre(int lmax, double x) {
  std::vector<std::vector<double>> p(lmax + 1);
  for (int l = 0; l <= lmax; ++l) p[l].assign(l + 1, 0.0);
  const double sx = std::sqrt(std::max(0.0, 1.0 - x * x));
  p[0][0] = std::sqrt(0.5);
  for (int m = 1; m <= lmax; ++m)
    p[m][m] = -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * sx * p[m - 1][m - 1];
  for (int m = 0; m < lmax; ++m)
    p[m + 1][m] = std::sqrt(2.0 * m + 3.0) * x * p[m][m];
  for (int m = 0; m <= lmax; ++m)
    for (int l = m + 2; l <= lmax; ++l) {
      const double a =
          std::sqrt((4.0 * l * l - 1.0) / (l * l - m * m));
      const double b = std::sqrt(((l - 1.0) * (l - 1.0) - m * m) /
                                 (4.0 * (l - 1.0) * (l - 1.0) - 1.0));
      p[l][m] = a * (x * p[l - 1][m] - b * p[l - 2][m]);
    }
  return p;
}

}  // namespace

SpinSymbol spherical_harmonic_symbol(SpinQuantum j, int l, int m) {
  const int mm = std::abs(m);
  // S_mm = Pbar_m^m(cos t) e^{i m phi}: recurrence in symbol arithmetic with
  // sin(t) e^{i phi} = 2 z/(1+u) and cos(t) = (1-u)/(1+u).
  SpinSymbol s(j, Rep::W, {{{0, 0}, std::sqrt(0.5)}}, 0);
  const SpinSymbol sin_eip(j, Rep::W, {{{0, 1}, 2.0}}, 1);
  const SpinSymbol cosr(j, Rep::W, {{{0, 0}, 1.0}, {{1, 1}, -1.0}}, 1);
  for (int k = 1; k <= mm; ++k)
    s = (sin_eip * s).scaled(-std::sqrt((2.0 * k + 1.0) / (2.0 * k)));
  if (l > mm) {
    SpinSymbol prev = s;
    s = (cosr * s).scaled(std::sqrt(2.0 * mm + 3.0));
    for (int ll = mm + 2; ll <= l; ++ll) {
      const double a = std::sqrt((4.0 * ll * ll - 1.0) / (ll * ll - mm * mm));
      const double b = std::sqrt(((ll - 1.0) * (ll - 1.0) - mm * mm) /
                                 (4.0 * (ll - 1.0) * (ll - 1.0) - 1.0));
      SpinSymbol next = (cosr * s).scaled(a) + prev.scaled(-a * b);
      prev = s;
      s = next;
    }
  }
  s = s.scaled(1.0 / std::sqrt(2.0 * M_PI));
  if (m >= 0) return s.reduced();
  // Y_{l,-m} = (-1)^m conj(Y_{lm}) on the real sphere: swap indices and
  // conjugate coefficients.
  TermMap flipped;
  for (const auto& [key, c] : s.numerator())
    flipped[{key.n, key.m}] = std::conj(c);
  const double sign = (mm % 2 == 0) ? 1.0 : -1.0;
  return SpinSymbol(j, Rep::W, map_scale(flipped, sign), s.denom_power())
      .reduced();
}

std::vector<std::vector<Complex>> multipole_coefficients(
    const SpinSymbol& sym) {
  const int lmax = sym.denom_power();
  const int ntheta = lmax + 2;
  const int nphi = 2 * lmax + 2;
  const SphereQuadrature quad = sphere_quadrature(ntheta, nphi);

  std::vector<std::vector<Complex>> coeffs(lmax + 1);
  for (int l = 0; l <= lmax; ++l) coeffs[l].assign(2 * l + 1, Complex{0.0});

  for (int it = 0; it < ntheta; ++it) {
    const double theta = std::acos(quad.x[it]);
    // Azimuthal Fourier transform of the symbol values at this colatitude.
    std::vector<Complex> fm(2 * lmax + 1, Complex{0.0});
    for (int ip = 0; ip < nphi; ++ip) {
      const Complex h = sym.eval_on_sphere(theta, quad.phi(ip));
      for (int m = -lmax; m <= lmax; ++m)
        fm[m + lmax] += h * std::exp(-kImag * (static_cast<double>(m) *
                                               quad.phi(ip))) *
                        quad.wphi();
    }
    const auto pbar = normalized_legendre(lmax, quad.x[it]);
    for (int l = 0; l <= lmax; ++l)
      for (int m = -l; m <= l; ++m) {
        const int mm = std::abs(m);
        // conj(Y_lm) = (+-) Pbar e^{-im phi} / sqrt(2 pi)
        const double sign = (m >= 0 || mm % 2 == 0) ? 1.0 : -1.0;
        coeffs[l][m + l] += quad.wx[it] * sign * pbar[l][mm] * fm[m + lmax] /
                            std::sqrt(2.0 * M_PI);
      }
  }
  return coeffs;
}

std::vector<SpinSymbol> multipole_components(const SpinSymbol& sym) {
  const auto coeffs = multipole_coefficients(sym);
  double cmax = 0.0;
  for (const auto& row : coeffs)
    for (Complex c : row) cmax = std::max(cmax, std::abs(c));
  std::vector<SpinSymbol> out;
  for (int l = 0; l < static_cast<int>(coeffs.size()); ++l) {
    SpinSymbol acc(sym.j(), sym.rep(), {}, 0);
    for (int m = -l; m <= l; ++m) {
      const Complex c = coeffs[l][m + l];
      if (std::abs(c) <= 1e-13 * cmax) continue;
      acc = acc + spherical_harmonic_symbol(sym.j(), l, m).scaled(c);
    }
    out.push_back(acc.with_rep(sym.rep()));
  }
  return out;
}

SpinSymbol spin_convert(const SpinSymbol& sym, Rep target) {
  if (sym.rep() == target) return sym;
  const auto coeffs = multipole_coefficients(sym);
  const double jt = sym.j().jtilde();
  auto factor = [jt](Rep r, int l) {
    const double ll = static_cast<double>(l) * (l + 1.0);
    switch (r) {
      case Rep::Q: return 1.0 - ll / (4.0 * jt);
      case Rep::P: return 1.0 + ll / (4.0 * jt);
      case Rep::W: return 1.0;
    }
    return 1.0;
  };

  double cmax = 0.0;
  for (const auto& row : coeffs)
    for (Complex c : row) cmax = std::max(cmax, std::abs(c));
  if (cmax == 0.0) return sym.with_rep(target);

  SpinSymbol acc(sym.j(), target, {}, 0);
  for (int l = 0; l < static_cast<int>(coeffs.size()); ++l) {
    double lnorm = 0.0;
    for (Complex c : coeffs[l]) lnorm = std::max(lnorm, std::abs(c));
    if (lnorm <= 1e-13 * cmax) continue;
    const double fsrc = factor(sym.rep(), l);
    const double ftgt = factor(target, l);
    if (fsrc <= 0.0 || ftgt <= 0.0) {
      // Projection noise on high multipoles must not trigger a refusal.
      if (lnorm <= 1e-11 * cmax) continue;
      throw NumericalError(
          "spin_convert_invalid",
          "multipole rescale factor <= 0 at l=" + std::to_string(l) +
              "; j too small for the asymptotic symbol map");
    }
    for (int m = -l; m <= l; ++m) {
      const Complex c = coeffs[l][m + l];
      if (std::abs(c) <= 1e-14 * cmax) continue;
      acc = acc +
            spherical_harmonic_symbol(sym.j(), l, m).scaled(c * ftgt / fsrc);
    }
  }
  return acc.with_rep(target).reduced();
}

}  // namespace csprop
