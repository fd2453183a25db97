// Shared scalar types, representation tags, and error classes.
#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace csprop {

using Complex = std::complex<double>;

constexpr Complex kImag{0.0, 1.0};

/// Which c-number symbol of an operator a polynomial represents.
enum class Rep { P, Q, W };

inline const char* rep_name(Rep r) {
  switch (r) {
    case Rep::P: return "P";
    case Rep::Q: return "Q";
    case Rep::W: return "W";
  }
  return "?";
}

/// A phase-space point. zbar and z are independent complex numbers;
/// classical paths are complexified, so zbar need not be conj(z).
struct PhasePoint {
  Complex zbar{0.0, 0.0};
  Complex z{0.0, 0.0};
};

/// Error with a stable machine-readable tag, e.g. "bvp_no_convergence".
/// CLI failure rows carry the tag of the module that raised it.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(std::string tag, const std::string& what)
      : std::runtime_error(what), tag_(std::move(tag)) {}
  const std::string& tag() const { return tag_; }

 private:
  std::string tag_;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Complex number with a separate power-of-two exponent, for determinant
/// recursions whose magnitude over/underflows double (2M can reach 1e5).
struct ScaledComplex {
  Complex mantissa{1.0, 0.0};
  long exp2 = 0;

  void normalize() {
    double a = std::abs(mantissa);
    if (a == 0.0) { exp2 = 0; return; }
    int e = 0;
    std::frexp(a, &e);
    if (e > 60 || e < -60) {
      mantissa = std::ldexp(mantissa.real(), -e) +
                 kImag * std::ldexp(mantissa.imag(), -e);
      exp2 += e;
    }
  }
  ScaledComplex& operator*=(Complex c) {
    mantissa *= c;
    normalize();
    return *this;
  }
  ScaledComplex& operator*=(const ScaledComplex& o) {
    mantissa *= o.mantissa;
    exp2 += o.exp2;
    normalize();
    return *this;
  }
  /// Value as a plain complex; may over/underflow if exp2 is extreme.
  Complex value() const {
    return std::ldexp(mantissa.real(), static_cast<int>(exp2)) +
           kImag * std::ldexp(mantissa.imag(), static_cast<int>(exp2));
  }
};

inline ScaledComplex operator*(ScaledComplex a, const ScaledComplex& b) {
  a *= b;
  return a;
}

/// Ratio a/b as plain complex, computed through the scaled representation.
inline Complex scaled_ratio(const ScaledComplex& a, const ScaledComplex& b) {
  Complex r = a.mantissa / b.mantissa;
  return std::ldexp(r.real(), static_cast<int>(a.exp2 - b.exp2)) +
         kImag * std::ldexp(r.imag(), static_cast<int>(a.exp2 - b.exp2));
}

}  // namespace csprop
