#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "shortck/complex_vector.hpp"

namespace shortck {

// Dense complex matrix up to 8x8, enough for derivatives of these maps.
struct Mat {
  int n = 2;
  std::array<std::complex<double>, kMaxDim * kMaxDim> a{};

  Mat() = default;
  explicit Mat(int dim) : n(dim) { check_dim(dim); }

  std::complex<double>& at(int i, int j) { return a[i * kMaxDim + j]; }
  const std::complex<double>& at(int i, int j) const { return a[i * kMaxDim + j]; }

  static Mat identity(int dim) {
    Mat m(dim);
    for (int i = 0; i < dim; ++i) m.at(i, i) = 1.0;
    return m;
  }

  double norm_inf() const {
    double best = 0.0;
    for (int i = 0; i < n; ++i) {
      double row = 0.0;
      for (int j = 0; j < n; ++j) row += std::abs(at(i, j));
      best = std::max(best, row);
    }
    return best;
  }
};

inline Mat operator*(const Mat& x, const Mat& y) {
  if (x.n != y.n) throw std::invalid_argument("matrix dimension mismatch");
  Mat r(x.n);
  for (int i = 0; i < x.n; ++i)
    for (int j = 0; j < x.n; ++j) {
      std::complex<double> s = 0.0;
      for (int l = 0; l < x.n; ++l) s += x.at(i, l) * y.at(l, j);
      r.at(i, j) = s;
    }
  return r;
}

inline Cvec operator*(const Mat& m, const Cvec& z) {
  if (m.n != z.k) throw std::invalid_argument("matrix dimension mismatch");
  Cvec r(z.k);
  for (int i = 0; i < m.n; ++i) {
    std::complex<double> s = 0.0;
    for (int j = 0; j < m.n; ++j) s += m.at(i, j) * z[j];
    r[i] = s;
  }
  return r;
}

// Gauss-Jordan with partial pivoting.
inline Mat inverse(const Mat& m) {
  int n = m.n;
  Mat a = m;
  Mat inv = Mat::identity(n);
  for (int col = 0; col < n; ++col) {
    int piv = col;
    double best = std::abs(a.at(col, col));
    for (int r = col + 1; r < n; ++r) {
      double v = std::abs(a.at(r, col));
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (!(best > 0.0) || !std::isfinite(best)) throw std::domain_error("singular matrix");
    if (piv != col)
      for (int j = 0; j < n; ++j) {
        std::swap(a.at(piv, j), a.at(col, j));
        std::swap(inv.at(piv, j), inv.at(col, j));
      }
    std::complex<double> d = a.at(col, col);
    for (int j = 0; j < n; ++j) {
      a.at(col, j) /= d;
      inv.at(col, j) /= d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      std::complex<double> f = a.at(r, col);
      if (f.real() == 0.0 && f.imag() == 0.0) continue;
      for (int j = 0; j < n; ++j) {
        a.at(r, j) -= f * a.at(col, j);
        inv.at(r, j) -= f * inv.at(col, j);
      }
    }
  }
  return inv;
}

inline double cond_inf(const Mat& m) { return m.norm_inf() * inverse(m).norm_inf(); }

}  // namespace shortck
