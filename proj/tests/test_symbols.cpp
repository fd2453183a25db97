#include <doctest.h>

#include <random>

#include "csprop/exact.hpp"
#include "csprop/symbols.hpp"

using namespace csprop;

namespace {

/// Independent Q-symbol oracle: <zbar|op|z> e^{-zbar z} from the truncated
/// Fock matrix and explicit coherent components.
Complex q_symbol_fock_oracle(const NormalOrderedOperator& op,
                             const PhasePoint& pt, int nmax) {
  const Eigen::MatrixXcd H = fock_matrix(op, nmax);
  Complex acc{0.0};
  std::vector<double> lg(nmax + 1);
  for (int i = 0; i <= nmax; ++i) lg[i] = std::lgamma(i + 1.0);
  for (int m = 0; m <= nmax; ++m)
    for (int n = 0; n <= nmax; ++n) {
      if (H(m, n) == Complex{0.0}) continue;
      acc += H(m, n) * std::pow(pt.zbar, m) * std::pow(pt.z, n) *
             std::exp(-0.5 * (lg[m] + lg[n]));
    }
  return acc * std::exp(-pt.zbar * pt.z);
}

SymbolPolynomial random_symbol(std::mt19937& rng, int degree, Rep rep) {
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  std::uniform_int_distribution<int> pow_dist(0, degree);
  TermMap terms;
  for (int k = 0; k < 2 * degree + 3; ++k)
    terms[{pow_dist(rng), pow_dist(rng)}] += Complex{coeff(rng), coeff(rng)};
  return {terms, rep};
}

}  // namespace

TEST_CASE("q symbol is coefficient read-off") {
  NormalOrderedOperator op;  // (adag a)^2 = adag^2 a^2 + adag a
  op.add_term(2, 2, 1.0);
  op.add_term(1, 1, 1.0);
  const SymbolPolynomial q = q_symbol_of_operator(op);
  CHECK(q.coeff(2, 2) == Complex{1.0});
  CHECK(q.coeff(1, 1) == Complex{1.0});
  // Brute-force matrix elements in truncated Fock space.
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1.2, 1.2);
  for (int t = 0; t < 4; ++t) {
    const PhasePoint pt{{u(rng), u(rng)}, {u(rng), u(rng)}};
    const Complex direct = q_symbol_fock_oracle(op, pt, 40);
    CHECK(std::abs(direct - eval_symbol(q, pt)) < 1e-10);
  }
}

TEST_CASE("identity operator maps to the constant symbol") {
  const SymbolPolynomial q =
      q_symbol_of_operator(NormalOrderedOperator::identity());
  CHECK(q.terms().size() == 1);
  CHECK(q.coeff(0, 0) == Complex{1.0});
}

TEST_CASE("operator_from_p_symbol on zbar z gives adag a + 1") {
  const SymbolPolynomial p({{{1, 1}, 1.0}}, Rep::P);
  const NormalOrderedOperator op = operator_from_p_symbol(p);
  CHECK(op.coeff(1, 1) == Complex{1.0});
  CHECK(op.coeff(0, 0) == Complex{1.0});
  const SymbolPolynomial one({{{0, 0}, 1.0}}, Rep::P);
  CHECK(operator_from_p_symbol(one).coeff(0, 0) == Complex{1.0});
}

TEST_CASE("p-symbol round trip at coefficient level") {
  NormalOrderedOperator op;
  op.add_term(2, 2, 1.0);
  const NormalOrderedOperator back =
      operator_from_p_symbol(p_symbol_of_operator(op));
  CHECK(back.terms().size() == 1);
  CHECK(std::abs(back.coeff(2, 2) - Complex{1.0}) < 1e-14);
}

TEST_CASE("conversion leading terms match the kernel-calculus series") {
  const SymbolPolynomial q({{{1, 1}, 1.0}}, Rep::Q);  // zbar z as Q symbol
  const SymbolPolynomial w = convert_symbol(q, Rep::W);
  CHECK(std::abs(w.coeff(1, 1) - Complex{1.0}) < 1e-15);
  CHECK(std::abs(w.coeff(0, 0) - Complex{-0.5}) < 1e-15);

  const SymbolPolynomial p({{{1, 1}, 1.0}}, Rep::P);
  const SymbolPolynomial wp = convert_symbol(p, Rep::W);
  CHECK(std::abs(wp.coeff(0, 0) - Complex{0.5}) < 1e-15);
}

TEST_CASE("conversions are exact inverses and chain-consistent") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const SymbolPolynomial sym = random_symbol(rng, 8, Rep::P);
    // P->Q equals P->W->Q coefficient by coefficient.
    const SymbolPolynomial direct = convert_symbol(sym, Rep::Q);
    const SymbolPolynomial chained =
        convert_symbol(convert_symbol(sym, Rep::W), Rep::Q);
    for (const auto& [key, c] : direct.terms())
      CHECK(std::abs(c - chained.coeff(key.m, key.n)) < 1e-12);
    // Round trip back to P. Degree-8 cross-derivative factors amplify
    // round-off by ~1e4, so compare at coefficient scale.
    const SymbolPolynomial back = convert_symbol(direct, Rep::P);
    double scale = 0.0;
    for (const auto& [key, c] : direct.terms())
      scale = std::max(scale, std::abs(c));
    for (const auto& [key, c] : sym.terms())
      CHECK(std::abs(c - back.coeff(key.m, key.n)) < 1e-11 * scale);
    for (const auto& [key, c] : back.terms())
      CHECK(std::abs(c - sym.coeff(key.m, key.n)) < 1e-11 * scale);
  }
}

TEST_CASE("leading-order correction is -(hbar/2) cross derivative") {
  std::mt19937 rng(13);
  const double hbar = 1e-3;
  for (int trial = 0; trial < 6; ++trial) {
    SymbolPolynomial sym = random_symbol(rng, 5, Rep::Q);
    sym = SymbolPolynomial(sym.terms(), Rep::Q, hbar);
    const SymbolPolynomial w = convert_symbol(sym, Rep::W);
    const SymbolPolynomial lead = symbol_derivative(sym, 1, 1);
    // Residual beyond the first-order term is (hbar^2/8) D^2 sym exactly at
    // this degree, so bound it coefficient-wise with the D^2 polynomial.
    const SymbolPolynomial second = symbol_derivative(lead, 1, 1);
    for (const auto& [key, c] : w.terms()) {
      const Complex expected = sym.coeff(key.m, key.n) -
                               0.5 * hbar * lead.coeff(key.m, key.n);
      const double bound =
          hbar * hbar *
          (0.2 + 0.2 * std::abs(second.coeff(key.m, key.n)));
      CHECK(std::abs(c - expected) < bound);
    }
  }
}

TEST_CASE("eval and derivatives") {
  const SymbolPolynomial s({{{1, 1}, 1.0}}, Rep::Q);
  CHECK(eval_symbol(s, {{2.0, 0.0}, {0.0, 3.0}}) == Complex{0.0, 6.0});
  CHECK(eval_symbol_derivs(s, {{0.7, 0.1}, {0.2, 0.3}}, 1, 1) == Complex{1.0});
  const SymbolPolynomial s4({{{2, 2}, 1.0}}, Rep::Q);
  CHECK(eval_symbol_derivs(s4, {{1.0, 0.0}, {1.0, 0.0}}, 1, 1) ==
        Complex{4.0});
}

TEST_CASE("hermitian operators have real weyl symbols on the real slice") {
  NormalOrderedOperator op;
  op.add_term(2, 1, Complex{0.5, 0.25});
  op.add_term(1, 2, Complex{0.5, -0.25});
  op.add_term(2, 2, Complex{0.3, 0.0});
  op.add_term(0, 0, Complex{-1.2, 0.0});
  REQUIRE(op.hermitian());
  const SymbolPolynomial w = convert_symbol(q_symbol_of_operator(op), Rep::W);
  std::mt19937 rng(29);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int t = 0; t < 20; ++t) {
    const Complex z{u(rng), u(rng)};
    CHECK(std::abs(eval_symbol(w, {std::conj(z), z}).imag()) < 1e-12);
  }
}

TEST_CASE("weyl symbol of the squared number operator") {
  const NormalOrderedOperator n = NormalOrderedOperator::monomial(1, 1);
  const SymbolPolynomial wsq = weyl_symbol_of_square(n);
  // Exact: zbar^2 z^2 - zbar z. Two-term formula: (zbar z - 1/2)^2 - 1/4.
  CHECK(std::abs(wsq.coeff(2, 2) - Complex{1.0}) < 1e-14);
  CHECK(std::abs(wsq.coeff(1, 1) - Complex{-1.0}) < 1e-14);
  CHECK(std::abs(wsq.coeff(0, 0)) < 1e-14);

  const SymbolPolynomial one = weyl_symbol_of_square(
      NormalOrderedOperator::identity());
  CHECK(std::abs(one.coeff(0, 0) - Complex{1.0}) < 1e-14);
}

TEST_CASE("moyal two-term formula is exact for quadratic hamiltonians") {
  // H = a + adag (quadratic case includes linear): exact equality.
  NormalOrderedOperator h;
  h.add_term(0, 1, 1.0);
  h.add_term(1, 0, 1.0);
  const SymbolPolynomial exact = weyl_symbol_of_square(h);
  const SymbolPolynomial hw = convert_symbol(q_symbol_of_operator(h), Rep::W);
  // (H^W)^2 + (1/4)[H_zz H_zbzb - H_zzb^2]
  TermMap prod;
  for (const auto& [ka, ca] : hw.terms())
    for (const auto& [kb, cb] : hw.terms())
      prod[{ka.m + kb.m, ka.n + kb.n}] += ca * cb;
  SymbolPolynomial sq(prod, Rep::W);
  const Complex corr =
      0.25 * (eval_symbol(symbol_derivative(hw, 0, 2), {}) *
                  eval_symbol(symbol_derivative(hw, 2, 0), {}) -
              eval_symbol(symbol_derivative(hw, 1, 1), {}) *
                  eval_symbol(symbol_derivative(hw, 1, 1), {}));
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 5; ++t) {
    const PhasePoint pt{{u(rng), u(rng)}, {u(rng), u(rng)}};
    CHECK(std::abs(eval_symbol(exact, pt) -
                   (eval_symbol(sq, pt) + corr)) < 1e-12);
  }
}

TEST_CASE("moyal bookkeeping for quartics: residual scales as hbar^4") {
  NormalOrderedOperator h;
  h.add_term(2, 2, 0.3);
  h.add_term(1, 1, 1.0);
  const PhasePoint pt{{0.7, 0.2}, {0.4, -0.3}};
  auto residual = [&](double hbar) {
    const SymbolPolynomial exact = weyl_symbol_of_square(h, hbar);
    const SymbolPolynomial hw =
        convert_symbol(q_symbol_of_operator(h, hbar), Rep::W);
    TermMap prod;
    for (const auto& [ka, ca] : hw.terms())
      for (const auto& [kb, cb] : hw.terms())
        prod[{ka.m + kb.m, ka.n + kb.n}] += ca * cb;
    const Complex formula =
        eval_symbol(SymbolPolynomial(prod, Rep::W), pt) +
        0.25 * hbar * hbar *
            (eval_symbol(symbol_derivative(hw, 0, 2), pt) *
                 eval_symbol(symbol_derivative(hw, 2, 0), pt) -
             eval_symbol(symbol_derivative(hw, 1, 1), pt) *
                 eval_symbol(symbol_derivative(hw, 1, 1), pt));
    return std::abs(eval_symbol(exact, pt) - formula);
  };
  // The two-term formula misses only the hbar^4 star-product term: the
  // residual drops by ~16 per halving of hbar.
  const double r1 = residual(0.5), r2 = residual(0.25);
  CHECK(r1 > 0.0);
  CHECK(r1 / r2 > 12.0);
  CHECK(r1 / r2 < 20.0);
  CHECK(r1 < 0.125);  // below the hbar^3 bookkeeping scale
}
