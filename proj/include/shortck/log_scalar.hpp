#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

namespace shortck {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Complex scalar in log-polar form: log modulus plus phase. Survives the
// doubly exponential magnitudes these dynamical systems produce (a^(d^n)
// drops below double denormals near n = 35 for a = 0.5, d = 2).
//
// Multiplication and integer powers are exact in this representation.
// Addition goes through the ratio of the two operands, so it degrades
// gracefully: when the magnitudes are within double range of each other the
// sum is ordinary complex arithmetic, and when they are not, the smaller
// term is below representable relative precision anyway.
struct LogScalar {
  double lm = -std::numeric_limits<double>::infinity();  // log of modulus
  double ph = 0.0;                                       // phase in [0, 2*pi)

  static double wrap_phase(double x) {
    if (!std::isfinite(x)) return 0.0;
    double y = std::fmod(x, kTwoPi);
    if (y < 0.0) y += kTwoPi;
    if (y >= kTwoPi) y = 0.0;
    return y;
  }

  LogScalar() = default;
  LogScalar(double log_modulus, double phase) : lm(log_modulus), ph(wrap_phase(phase)) {}

  static LogScalar zero() { return LogScalar(); }

  static LogScalar one() { return LogScalar(0.0, 0.0); }

  // Positive real with the given log modulus.
  static LogScalar from_log(double log_modulus) { return LogScalar(log_modulus, 0.0); }

  static LogScalar from_real(double x) {
    if (x == 0.0) return zero();
    return LogScalar(std::log(std::fabs(x)), x < 0.0 ? kTwoPi / 2.0 : 0.0);
  }

  static LogScalar from_complex(std::complex<double> z) {
    if (z.real() == 0.0 && z.imag() == 0.0) return zero();
    return LogScalar(std::log(std::abs(z)), std::arg(z));
  }

  bool is_zero() const { return std::isinf(lm) && lm < 0.0; }

  // May round to 0 or overflow to inf outside double range; the log form
  // itself never loses the value.
  std::complex<double> to_complex() const {
    if (is_zero()) return {0.0, 0.0};
    double m = std::exp(lm);
    return {m * std::cos(ph), m * std::sin(ph)};
  }

  friend LogScalar operator*(const LogScalar& a, const LogScalar& b) {
    if (a.is_zero() || b.is_zero()) return zero();
    return LogScalar(a.lm + b.lm, a.ph + b.ph);
  }

  friend LogScalar operator/(const LogScalar& a, const LogScalar& b) {
    if (b.is_zero()) throw std::domain_error("LogScalar division by zero");
    if (a.is_zero()) return zero();
    return LogScalar(a.lm - b.lm, a.ph - b.ph);
  }

  LogScalar operator-() const {
    if (is_zero()) return zero();
    return LogScalar(lm, ph + kTwoPi / 2.0);
  }
};

inline LogScalar pow_int(const LogScalar& a, long long n) {
  if (n == 0) return LogScalar::one();
  if (a.is_zero()) {
    if (n < 0) throw std::domain_error("LogScalar zero to negative power");
    return LogScalar::zero();
  }
  return LogScalar(a.lm * static_cast<double>(n), a.ph * static_cast<double>(n));
}

inline LogScalar add(const LogScalar& a, const LogScalar& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  const LogScalar& big = (a.lm >= b.lm) ? a : b;
  const LogScalar& sml = (a.lm >= b.lm) ? b : a;
  double dl = sml.lm - big.lm;
  if (dl < -745.0) return big;  // smaller term below exp underflow
  std::complex<double> ratio = std::polar(std::exp(dl), sml.ph - big.ph);
  std::complex<double> s = 1.0 + ratio;
  if (s.real() == 0.0 && s.imag() == 0.0) return LogScalar::zero();
  return LogScalar(big.lm + std::log(std::abs(s)), big.ph + std::arg(s));
}

inline LogScalar operator+(const LogScalar& a, const LogScalar& b) { return add(a, b); }
inline LogScalar operator-(const LogScalar& a, const LogScalar& b) { return add(a, -b); }

inline double log_abs(const LogScalar& a) { return a.lm; }

inline std::complex<double> pow_int(std::complex<double> z, long long n) {
  if (n < 0) return 1.0 / pow_int(z, -n);
  std::complex<double> r = 1.0;
  std::complex<double> b = z;
  while (n > 0) {
    if (n & 1) r *= b;
    b *= b;
    n >>= 1;
  }
  return r;
}

// Bridges for code templated over the scalar representation.
template <class S>
S to_scalar(std::complex<double> z);

template <>
inline std::complex<double> to_scalar<std::complex<double>>(std::complex<double> z) {
  return z;
}

template <>
inline LogScalar to_scalar<LogScalar>(std::complex<double> z) {
  return LogScalar::from_complex(z);
}

inline double scalar_log_abs(std::complex<double> z) {
  double m = std::abs(z);
  return m == 0.0 ? -std::numeric_limits<double>::infinity() : std::log(m);
}

inline double scalar_log_abs(const LogScalar& z) { return z.lm; }

// |1 - b/a|, a relative-difference measure that works at any magnitude.
// Both zero counts as equal; exactly one zero is maximal disagreement.
inline double relative_gap(const LogScalar& a, const LogScalar& b) {
  if (a.is_zero() && b.is_zero()) return 0.0;
  if (a.is_zero() || b.is_zero()) return 1.0;
  LogScalar r = b / a;
  std::complex<double> rc = std::polar(std::exp(std::min(r.lm, 700.0)), r.ph);
  return std::abs(1.0 - rc);
}

}  // namespace shortck
