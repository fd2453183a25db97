#include "csprop/symbols.hpp"

#include <algorithm>
#include <cmath>

namespace csprop {

namespace {

/// One application of (d^2/dzbar dz) to a term map.
TermMap cross_derivative(const TermMap& in) {
  TermMap out;
  for (const auto& [key, c] : in) {
    if (key.m == 0 || key.n == 0) continue;
    out[{key.m - 1, key.n - 1}] +=
        c * static_cast<double>(key.m) * static_cast<double>(key.n);
  }
  return out;
}

/// exp(t * d^2/dzbar dz) on a polynomial; the series terminates.
TermMap gaussian_smooth(TermMap terms, double t) {
  TermMap result = terms;
  TermMap deriv = terms;
  double factor = 1.0;
  for (int k = 1;; ++k) {
    deriv = cross_derivative(deriv);
    if (deriv.empty()) break;
    factor *= t / k;
    for (const auto& [key, c] : deriv) result[key] += factor * c;
  }
  // Drop exact zeros produced by cancellation.
  for (auto it = result.begin(); it != result.end();) {
    if (it->second == Complex{0.0})
      it = result.erase(it);
    else
      ++it;
  }
  return result;
}

int rep_level(Rep r) {
  switch (r) {
    case Rep::P: return 0;
    case Rep::W: return 1;
    case Rep::Q: return 2;
  }
  return 1;
}

}  // namespace

int SymbolPolynomial::max_degree() const {
  int d = 0;
  for (const auto& [key, c] : terms_) d = std::max({d, key.m, key.n});
  return d;
}

void SymbolPolynomial::prune() {
  for (auto it = terms_.begin(); it != terms_.end();) {
    if (it->second == Complex{0.0})
      it = terms_.erase(it);
    else
      ++it;
  }
}

SymbolPolynomial q_symbol_of_operator(const NormalOrderedOperator& op,
                                      double hbar) {
  return {op.terms(), Rep::Q, hbar};
}

SymbolPolynomial p_symbol_of_operator(const NormalOrderedOperator& op,
                                      double hbar) {
  return {anti_normal_coefficients(op, hbar), Rep::P, hbar};
}

NormalOrderedOperator operator_from_p_symbol(const SymbolPolynomial& sym) {
  return from_anti_normal(sym.terms(), sym.hbar());
}

NormalOrderedOperator operator_from_q_symbol(const SymbolPolynomial& sym) {
  return NormalOrderedOperator(sym.terms());
}

SymbolPolynomial convert_symbol(const SymbolPolynomial& sym, Rep target) {
  const int steps = rep_level(target) - rep_level(sym.rep());
  if (steps == 0) return sym;
  // One half-width exponential per chain step, so a direct P->Q conversion
  // performs the identical float operations as P->W followed by W->Q.
  const double t = 0.5 * sym.hbar() * (steps > 0 ? 1.0 : -1.0);
  TermMap terms = sym.terms();
  for (int s = 0; s < std::abs(steps); ++s) terms = gaussian_smooth(terms, t);
  return {terms, target, sym.hbar()};
}

Complex eval_symbol(const SymbolPolynomial& sym, const PhasePoint& pt) {
  return eval_symbol_derivs(sym, pt, 0, 0);
}

Complex eval_symbol_derivs(const SymbolPolynomial& sym, const PhasePoint& pt,
                           int dzbar, int dz) {
  Complex acc{0.0};
  for (const auto& [key, c] : sym.terms()) {
    if (key.m < dzbar || key.n < dz) continue;
    double f = 1.0;
    for (int i = 0; i < dzbar; ++i) f *= key.m - i;
    for (int i = 0; i < dz; ++i) f *= key.n - i;
    acc += c * f * std::pow(pt.zbar, key.m - dzbar) *
           std::pow(pt.z, key.n - dz);
  }
  return acc;
}

SymbolPolynomial symbol_derivative(const SymbolPolynomial& sym, int dzbar,
                                   int dz) {
  TermMap out;
  for (const auto& [key, c] : sym.terms()) {
    if (key.m < dzbar || key.n < dz) continue;
    double f = 1.0;
    for (int i = 0; i < dzbar; ++i) f *= key.m - i;
    for (int i = 0; i < dz; ++i) f *= key.n - i;
    out[{key.m - dzbar, key.n - dz}] += c * f;
  }
  return {out, sym.rep(), sym.hbar()};
}

SymbolPolynomial symbol_sum(const SymbolPolynomial& a,
                            const SymbolPolynomial& b) {
  TermMap out = a.terms();
  for (const auto& [key, c] : b.terms()) out[key] += c;
  return {out, a.rep(), a.hbar()};
}

SymbolPolynomial symbol_scale(const SymbolPolynomial& a, Complex c) {
  TermMap out = a.terms();
  for (auto& [key, v] : out) v *= c;
  return {out, a.rep(), a.hbar()};
}

SymbolPolynomial weyl_symbol_of_square(const NormalOrderedOperator& op,
                                       double hbar) {
  NormalOrderedOperator sq = product(op, op, hbar);
  return convert_symbol(q_symbol_of_operator(sq, hbar), Rep::W);
}

}  // namespace csprop
