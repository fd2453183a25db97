#include "csprop/operator_algebra.hpp"

#include <algorithm>
#include <cmath>

namespace csprop {

namespace {

double binom(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

int NormalOrderedOperator::max_degree() const {
  int d = 0;
  for (const auto& [key, c] : terms_) d = std::max({d, key.m, key.n});
  return d;
}

bool NormalOrderedOperator::hermitian(double tol) const {
  double scale = 0.0;
  for (const auto& [key, c] : terms_) scale = std::max(scale, std::abs(c));
  if (scale == 0.0) return true;
  for (const auto& [key, c] : terms_) {
    if (std::abs(c - std::conj(coeff(key.n, key.m))) > tol * scale)
      return false;
  }
  return true;
}

NormalOrderedOperator& NormalOrderedOperator::operator+=(
    const NormalOrderedOperator& o) {
  for (const auto& [key, c] : o.terms_) add_term(key.m, key.n, c);
  return *this;
}

NormalOrderedOperator& NormalOrderedOperator::operator*=(Complex c) {
  if (c == Complex{0.0}) {
    terms_.clear();
    return *this;
  }
  for (auto& [key, v] : terms_) v *= c;
  return *this;
}

void NormalOrderedOperator::add_term(int m, int n, Complex c) {
  auto it = terms_.find({m, n});
  if (it == terms_.end()) {
    if (c != Complex{0.0}) terms_.emplace(MonomialKey{m, n}, c);
    return;
  }
  it->second += c;
  if (it->second == Complex{0.0}) terms_.erase(it);
}

void NormalOrderedOperator::prune() {
  for (auto it = terms_.begin(); it != terms_.end();) {
    if (it->second == Complex{0.0})
      it = terms_.erase(it);
    else
      ++it;
  }
}

NormalOrderedOperator product(const NormalOrderedOperator& x,
                              const NormalOrderedOperator& y, double hbar) {
  // a^n a^dag^m = sum_k hbar^k k! C(n,k) C(m,k) a^dag^(m-k) a^(n-k)
  NormalOrderedOperator out;
  for (const auto& [kx, cx] : x.terms()) {
    for (const auto& [ky, cy] : y.terms()) {
      const int n1 = kx.n, m2 = ky.m;
      double factor = 1.0;  // hbar^k k! C(n1,k) C(m2,k), built incrementally
      for (int k = 0; k <= std::min(n1, m2); ++k) {
        if (k > 0)
          factor *= hbar * static_cast<double>((n1 - k + 1)) *
                    static_cast<double>((m2 - k + 1)) / k;
        out.add_term(kx.m + m2 - k, ky.n + n1 - k, cx * cy * factor);
      }
    }
  }
  return out;
}

NormalOrderedOperator adjoint(const NormalOrderedOperator& op) {
  NormalOrderedOperator out;
  for (const auto& [key, c] : op.terms())
    out.add_term(key.n, key.m, std::conj(c));
  return out;
}

TermMap anti_normal_coefficients(const NormalOrderedOperator& op,
                                 double hbar) {
  // a^dag^m a^n = sum_k (-hbar)^k k! C(m,k) C(n,k) a^(n-k) a^dag^(m-k)
  TermMap out;
  auto add = [&out](int m, int n, Complex c) {
    auto it = out.find({m, n});
    if (it == out.end()) {
      if (c != Complex{0.0}) out.emplace(MonomialKey{m, n}, c);
    } else {
      it->second += c;
      if (it->second == Complex{0.0}) out.erase(it);
    }
  };
  for (const auto& [key, c] : op.terms()) {
    for (int k = 0; k <= std::min(key.m, key.n); ++k) {
      double f = 1.0;
      for (int i = 1; i <= k; ++i)
        f *= -hbar * (key.m - i + 1) * (key.n - i + 1) / i;
      add(key.m - k, key.n - k, c * f);
    }
  }
  return out;
}

NormalOrderedOperator from_anti_normal(const TermMap& coeffs, double hbar) {
  // a^n a^dag^m -> normal order by the forward Wick contraction.
  NormalOrderedOperator out;
  for (const auto& [key, c] : coeffs) {
    for (int k = 0; k <= std::min(key.m, key.n); ++k) {
      double f = std::tgamma(k + 1.0) * binom(key.n, k) * binom(key.m, k) *
                 std::pow(hbar, k);
      out.add_term(key.m - k, key.n - k, c * f);
    }
  }
  return out;
}

}  // namespace csprop
