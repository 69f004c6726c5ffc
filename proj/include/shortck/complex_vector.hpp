#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <stdexcept>
#include <vector>

#include "shortck/log_scalar.hpp"

namespace shortck {

inline constexpr int kMaxDim = 8;

inline void check_dim(int k) {
  if (k < 2 || k > kMaxDim) throw std::invalid_argument("dimension k must lie in [2, 8]");
}

// Point of C^k, k in [2, 8]. Value type, fixed capacity.
template <class S>
struct VecT {
  int k = 2;
  std::array<S, kMaxDim> v{};

  VecT() = default;

  explicit VecT(int dim) : k(dim) { check_dim(dim); }

  VecT(std::initializer_list<S> init) {
    k = static_cast<int>(init.size());
    check_dim(k);
    int i = 0;
    for (const S& s : init) v[i++] = s;
  }

  S& operator[](int i) { return v[i]; }
  const S& operator[](int i) const { return v[i]; }
};

using Cvec = VecT<std::complex<double>>;
using LogVec = VecT<LogScalar>;

inline Cvec cvec(std::initializer_list<std::complex<double>> init) { return Cvec(init); }

inline bool all_finite(const Cvec& z) {
  for (int i = 0; i < z.k; ++i)
    if (!std::isfinite(z[i].real()) || !std::isfinite(z[i].imag())) return false;
  return true;
}

inline double sup_norm(const Cvec& z) {
  if (!all_finite(z)) throw std::domain_error("non-finite input");
  double m = 0.0;
  for (int i = 0; i < z.k; ++i) m = std::max(m, std::abs(z[i]));
  return m;
}

// log of the sup norm; -inf at the origin.
inline double log_sup_norm(const Cvec& z) {
  if (!all_finite(z)) throw std::domain_error("non-finite input");
  double m = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < z.k; ++i) {
    std::complex<double> c = z[i];
    if (c.real() != 0.0 || c.imag() != 0.0) m = std::max(m, std::log(std::abs(c)));
  }
  return m;
}

inline double log_sup_norm(const LogVec& z) {
  double m = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < z.k; ++i) m = std::max(m, z[i].lm);
  return m;
}

inline bool in_polydisc(const Cvec& z, double c) {
  for (int i = 0; i < z.k; ++i)
    if (!(std::abs(z[i]) < c)) return false;
  return true;
}

inline bool in_polydisc(const LogVec& z, double c) {
  if (!(c > 0.0)) return false;
  double lc = std::log(c);
  for (int i = 0; i < z.k; ++i)
    if (!(z[i].lm < lc)) return false;
  return true;
}

inline LogVec to_log(const Cvec& z) {
  LogVec w(z.k);
  for (int i = 0; i < z.k; ++i) w[i] = LogScalar::from_complex(z[i]);
  return w;
}

inline Cvec to_cvec(const LogVec& z) {
  Cvec w(z.k);
  for (int i = 0; i < z.k; ++i) w[i] = z[i].to_complex();
  return w;
}

inline Cvec operator+(const Cvec& a, const Cvec& b) {
  if (a.k != b.k) throw std::invalid_argument("dimension mismatch");
  Cvec r(a.k);
  for (int i = 0; i < a.k; ++i) r[i] = a[i] + b[i];
  return r;
}

inline Cvec operator-(const Cvec& a, const Cvec& b) {
  if (a.k != b.k) throw std::invalid_argument("dimension mismatch");
  Cvec r(a.k);
  for (int i = 0; i < a.k; ++i) r[i] = a[i] - b[i];
  return r;
}

inline Cvec operator*(std::complex<double> c, const Cvec& a) {
  Cvec r(a.k);
  for (int i = 0; i < a.k; ++i) r[i] = c * a[i];
  return r;
}

inline double sup_dist(const Cvec& a, const Cvec& b) { return sup_norm(a - b); }

}  // namespace shortck
