// Exact algebra of particle operators written as normal-ordered polynomials
// in the ladder operators: sum of c_{mn} a^dag^m a^n.
#pragma once

#include <map>
#include <utility>

#include "csprop/types.hpp"

namespace csprop {

/// Key (m, n) for a monomial a^dag^m a^n (or zbar^m z^n for symbols).
struct MonomialKey {
  int m = 0;
  int n = 0;
  friend auto operator<=>(const MonomialKey&, const MonomialKey&) = default;
};

using TermMap = std::map<MonomialKey, Complex>;

/// Operator stored in canonical normal order. Anti-normal and symmetric
/// orderings are derived forms, never stored.
class NormalOrderedOperator {
 public:
  NormalOrderedOperator() = default;
  explicit NormalOrderedOperator(TermMap terms) : terms_(std::move(terms)) {
    prune();
  }

  static NormalOrderedOperator identity() { return monomial(0, 0); }
  static NormalOrderedOperator monomial(int m, int n, Complex c = 1.0) {
    TermMap terms;
    terms[{m, n}] = c;
    return NormalOrderedOperator(std::move(terms));
  }

  const TermMap& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  Complex coeff(int m, int n) const {
    auto it = terms_.find({m, n});
    return it == terms_.end() ? Complex{0.0} : it->second;
  }
  int max_degree() const;

  /// c_{mn} = conj(c_{nm}) within tolerance. Checked on demand, not enforced.
  bool hermitian(double tol = 1e-12) const;

  NormalOrderedOperator& operator+=(const NormalOrderedOperator& o);
  NormalOrderedOperator& operator*=(Complex c);
  friend NormalOrderedOperator operator+(NormalOrderedOperator a,
                                         const NormalOrderedOperator& b) {
    a += b;
    return a;
  }
  friend NormalOrderedOperator operator*(Complex c, NormalOrderedOperator a) {
    a *= c;
    return a;
  }

  void add_term(int m, int n, Complex c);

 private:
  void prune();
  TermMap terms_;
};

/// Normal-ordered product, contracting with [a, a^dag] = hbar.
/// hbar = 1 is the physical algebra; other values support the
/// order-counting checks where hbar powers are tracked explicitly.
NormalOrderedOperator product(const NormalOrderedOperator& x,
                              const NormalOrderedOperator& y,
                              double hbar = 1.0);

/// Hermitian adjoint (c_{mn} -> conj(c_{nm})).
NormalOrderedOperator adjoint(const NormalOrderedOperator& op);

/// Coefficients of the anti-normal-ordered form sum c_{mn} a^n a^dag^m.
/// Inverse of the Wick contraction used by product().
TermMap anti_normal_coefficients(const NormalOrderedOperator& op,
                                 double hbar = 1.0);

/// Operator whose anti-normal-ordered coefficients are the given map.
NormalOrderedOperator from_anti_normal(const TermMap& coeffs,
                                       double hbar = 1.0);

}  // namespace csprop
