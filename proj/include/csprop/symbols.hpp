// P, Q, and Weyl symbols of particle operators as bivariate polynomials in
// (zbar, z), with exact conversions between representations.
#pragma once

#include "csprop/operator_algebra.hpp"
#include "csprop/types.hpp"

namespace csprop {

/// Polynomial sum c_{mn} zbar^m z^n tagged with its representation.
/// The representation tag is immutable; conversions return new values.
class SymbolPolynomial {
 public:
  SymbolPolynomial() = default;
  SymbolPolynomial(TermMap terms, Rep rep, double hbar = 1.0)
      : terms_(std::move(terms)), rep_(rep), hbar_(hbar) {
    prune();
  }

  const TermMap& terms() const { return terms_; }
  Rep rep() const { return rep_; }
  double hbar() const { return hbar_; }
  Complex coeff(int m, int n) const {
    auto it = terms_.find({m, n});
    return it == terms_.end() ? Complex{0.0} : it->second;
  }
  int max_degree() const;

  SymbolPolynomial with_rep(Rep r) const { return {terms_, r, hbar_}; }

 private:
  void prune();
  TermMap terms_;
  Rep rep_ = Rep::Q;
  double hbar_ = 1.0;
};

/// Q symbol: a^dag^m a^n -> zbar^m z^n with the same coefficient.
SymbolPolynomial q_symbol_of_operator(const NormalOrderedOperator& op,
                                      double hbar = 1.0);

/// P symbol read off the anti-normal-ordered form of the operator.
SymbolPolynomial p_symbol_of_operator(const NormalOrderedOperator& op,
                                      double hbar = 1.0);

/// Operator whose anti-normal-ordered coefficients are the P-symbol terms.
NormalOrderedOperator operator_from_p_symbol(const SymbolPolynomial& sym);

/// Operator with the given Q symbol (coefficient read-off).
NormalOrderedOperator operator_from_q_symbol(const SymbolPolynomial& sym);

/// Applies exp(s * (hbar/2) * d^2/dzbar dz) for one conversion step; the
/// series terminates exactly on polynomials. s = +1 per step up the chain
/// P -> W -> Q and s = -1 down the chain.
SymbolPolynomial convert_symbol(const SymbolPolynomial& sym, Rep target);

/// Value of the polynomial at a (complexified) phase point.
Complex eval_symbol(const SymbolPolynomial& sym, const PhasePoint& pt);

/// Analytic partial derivative d^a/dzbar^a d^b/dz^b evaluated at pt.
Complex eval_symbol_derivs(const SymbolPolynomial& sym, const PhasePoint& pt,
                           int dzbar, int dz);

/// Derivative polynomial d^a/dzbar^a d^b/dz^b (same representation tag).
SymbolPolynomial symbol_derivative(const SymbolPolynomial& sym, int dzbar,
                                   int dz);

SymbolPolynomial symbol_sum(const SymbolPolynomial& a,
                            const SymbolPolynomial& b);
SymbolPolynomial symbol_scale(const SymbolPolynomial& a, Complex c);

/// Exact Weyl symbol of op^2 (operator product, then conversion), exposed so
/// tests can compare against the two-term Moyal-type formula
/// (H^W)^2 + (hbar^2/4) [H^W_zz H^W_zbzb - (H^W_zzb)^2].
SymbolPolynomial weyl_symbol_of_square(const NormalOrderedOperator& op,
                                       double hbar = 1.0);

}  // namespace csprop
