#pragma once

#include <complex>
#include <stdexcept>
#include <variant>

#include "shortck/complex_vector.hpp"
#include "shortck/log_scalar.hpp"
#include "shortck/matrix.hpp"

namespace shortck {

// One step of the triangular family on C^k:
//   z  |->  (eta z_k, z_2^d + eta z_1, ..., z_k^d + eta z_{k-1}).
// eta is stored in log-polar form because schedules drive it far below
// double range.
struct EtaStep {
  int k = 3;
  int d = 2;
  LogScalar eta;
};

// Shift-like map of type nu:
//   z  |->  (z_2, ..., z_k, delta (z_{k-nu+1}^d - z_1)).
struct ShiftLike {
  int k = 3;
  int nu = 2;
  int d = 2;
  std::complex<double> delta = 1.0;
};

// Quadratic pair on C^2.
struct HenonF {
  std::complex<double> alpha;
  std::complex<double> beta;
};

struct HenonG {
  std::complex<double> alpha;
  std::complex<double> beta;
  int kdeg = 2;
};

struct CoordinateSwap {
  int k = 2;
  int i = 1;  // 1-based axes
  int j = 2;
};

struct AffineTranslate {
  int k = 2;
  int axis = 1;  // 1-based
  std::complex<double> c = 0.0;
};

struct Scaling {
  int k = 2;
  std::complex<double> c = 1.0;
};

struct LinearMap {
  Mat m;
};

using MapSpec =
    std::variant<EtaStep, ShiftLike, HenonF, HenonG, CoordinateSwap, AffineTranslate, Scaling, LinearMap>;

inline EtaStep make_eta_step(int k, int d, LogScalar eta) {
  check_dim(k);
  if (d < 2) throw std::invalid_argument("degree d must be at least 2");
  if (eta.is_zero()) throw std::invalid_argument("eta must be nonzero");
  return EtaStep{k, d, eta};
}

inline EtaStep make_eta_step(int k, int d, std::complex<double> eta) {
  return make_eta_step(k, d, LogScalar::from_complex(eta));
}

inline ShiftLike make_shift_like(int k, int nu, int d, std::complex<double> delta) {
  check_dim(k);
  if (nu < 1 || nu > k - 1) throw std::invalid_argument("shift type nu must lie in [1, k-1]");
  if (d < 2) throw std::invalid_argument("degree d must be at least 2");
  if (delta == std::complex<double>(0.0)) throw std::invalid_argument("delta must be nonzero");
  return ShiftLike{k, nu, d, delta};
}

inline int map_dim(const MapSpec& m) {
  return std::visit(
      [](const auto& s) -> int {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, EtaStep>) return s.k;
        else if constexpr (std::is_same_v<T, ShiftLike>) return s.k;
        else if constexpr (std::is_same_v<T, HenonF>) return 2;
        else if constexpr (std::is_same_v<T, HenonG>) return 2;
        else if constexpr (std::is_same_v<T, CoordinateSwap>) return s.k;
        else if constexpr (std::is_same_v<T, AffineTranslate>) return s.k;
        else if constexpr (std::is_same_v<T, Scaling>) return s.k;
        else return s.m.n;
      },
      m);
}

// Highest power of any coordinate appearing in the map, used to predict
// overflow one step ahead.
inline int map_degree(const MapSpec& m) {
  return std::visit(
      [](const auto& s) -> int {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, EtaStep>) return s.d;
        else if constexpr (std::is_same_v<T, ShiftLike>) return s.d;
        else if constexpr (std::is_same_v<T, HenonF>) return 2;
        else if constexpr (std::is_same_v<T, HenonG>) return s.kdeg;
        else return 1;
      },
      m);
}

namespace detail {

template <class S>
S eta_as(const LogScalar& eta) {
  if constexpr (std::is_same_v<S, LogScalar>) return eta;
  else return eta.to_complex();
}

}  // namespace detail

// Forward application, templated over the scalar representation so deep
// orbits can run entirely in log-polar arithmetic.
template <class S>
VecT<S> apply_map(const MapSpec& m, const VecT<S>& z) {
  VecT<S> w = z;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, EtaStep>) {
          if (z.k != s.k) throw std::invalid_argument("dimension mismatch");
          S eta = detail::eta_as<S>(s.eta);
          w[0] = eta * z[s.k - 1];
          for (int i = 1; i < s.k; ++i) w[i] = pow_int(z[i], s.d) + eta * z[i - 1];
        } else if constexpr (std::is_same_v<T, ShiftLike>) {
          if (z.k != s.k) throw std::invalid_argument("dimension mismatch");
          S delta = to_scalar<S>(s.delta);
          for (int i = 0; i + 1 < s.k; ++i) w[i] = z[i + 1];
          w[s.k - 1] = delta * (pow_int(z[s.k - s.nu], s.d) + (-z[0]));
        } else if constexpr (std::is_same_v<T, HenonF>) {
          if (z.k != 2) throw std::invalid_argument("dimension mismatch");
          w[0] = to_scalar<S>(s.alpha) * z[0] + pow_int(z[1], 2);
          w[1] = to_scalar<S>(s.beta) * z[1];
        } else if constexpr (std::is_same_v<T, HenonG>) {
          if (z.k != 2) throw std::invalid_argument("dimension mismatch");
          w[0] = to_scalar<S>(s.beta) * z[0];
          w[1] = to_scalar<S>(s.alpha) * z[1] + pow_int(z[0], s.kdeg);
        } else if constexpr (std::is_same_v<T, CoordinateSwap>) {
          if (z.k != s.k) throw std::invalid_argument("dimension mismatch");
          std::swap(w[s.i - 1], w[s.j - 1]);
        } else if constexpr (std::is_same_v<T, AffineTranslate>) {
          if (z.k != s.k) throw std::invalid_argument("dimension mismatch");
          w[s.axis - 1] = z[s.axis - 1] + to_scalar<S>(s.c);
        } else if constexpr (std::is_same_v<T, Scaling>) {
          if (z.k != s.k) throw std::invalid_argument("dimension mismatch");
          for (int i = 0; i < s.k; ++i) w[i] = to_scalar<S>(s.c) * z[i];
        } else {  // LinearMap
          if (z.k != s.m.n) throw std::invalid_argument("dimension mismatch");
          for (int i = 0; i < s.m.n; ++i) {
            S acc = to_scalar<S>(s.m.at(i, 0)) * z[0];
            for (int j = 1; j < s.m.n; ++j) acc = acc + to_scalar<S>(s.m.at(i, j)) * z[j];
            w[i] = acc;
          }
        }
      },
      m);
  return w;
}

namespace detail {

inline std::complex<double> safe_div(std::complex<double> num, std::complex<double> den) {
  if (den.real() == 0.0 && den.imag() == 0.0)
    throw std::domain_error("inverse out of range: division by an underflowed coefficient");
  return num / den;
}

inline LogScalar safe_div(const LogScalar& num, const LogScalar& den) {
  if (den.is_zero())
    throw std::domain_error("inverse out of range: division by an underflowed coefficient");
  return num / den;
}

}  // namespace detail

// Exact inverse, back-substituting through the triangular structure.
// Templated like apply_map so that backward orbits can also run in log-polar
// arithmetic when they leave double range.
template <class S>
VecT<S> apply_inverse(const MapSpec& m, const VecT<S>& w) {
  VecT<S> z = w;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, EtaStep>) {
          if (w.k != s.k) throw std::invalid_argument("dimension mismatch");
          S eta = detail::eta_as<S>(s.eta);
          z[s.k - 1] = detail::safe_div(w[0], eta);
          for (int i = s.k - 1; i >= 1; --i)
            z[i - 1] = detail::safe_div(w[i] - pow_int(z[i], s.d), eta);
        } else if constexpr (std::is_same_v<T, ShiftLike>) {
          if (w.k != s.k) throw std::invalid_argument("dimension mismatch");
          S delta = to_scalar<S>(s.delta);
          for (int i = s.k - 1; i >= 1; --i) z[i] = w[i - 1];
          z[0] = pow_int(w[s.k - s.nu - 1], s.d) - detail::safe_div(w[s.k - 1], delta);
        } else if constexpr (std::is_same_v<T, HenonF>) {
          if (w.k != 2) throw std::invalid_argument("dimension mismatch");
          z[1] = detail::safe_div(w[1], to_scalar<S>(s.beta));
          z[0] = detail::safe_div(w[0] - pow_int(z[1], 2), to_scalar<S>(s.alpha));
        } else if constexpr (std::is_same_v<T, HenonG>) {
          if (w.k != 2) throw std::invalid_argument("dimension mismatch");
          z[0] = detail::safe_div(w[0], to_scalar<S>(s.beta));
          z[1] = detail::safe_div(w[1] - pow_int(z[0], s.kdeg), to_scalar<S>(s.alpha));
        } else if constexpr (std::is_same_v<T, CoordinateSwap>) {
          if (w.k != s.k) throw std::invalid_argument("dimension mismatch");
          std::swap(z[s.i - 1], z[s.j - 1]);
        } else if constexpr (std::is_same_v<T, AffineTranslate>) {
          if (w.k != s.k) throw std::invalid_argument("dimension mismatch");
          z[s.axis - 1] = w[s.axis - 1] - to_scalar<S>(s.c);
        } else if constexpr (std::is_same_v<T, Scaling>) {
          if (w.k != s.k) throw std::invalid_argument("dimension mismatch");
          for (int i = 0; i < s.k; ++i) z[i] = detail::safe_div(w[i], to_scalar<S>(s.c));
        } else {  // LinearMap
          if (w.k != s.m.n) throw std::invalid_argument("dimension mismatch");
          Mat inv = inverse(s.m);
          VecT<S> acc(w.k);
          for (int i = 0; i < inv.n; ++i) {
            S sum = to_scalar<S>(inv.at(i, 0)) * w[0];
            for (int jj = 1; jj < inv.n; ++jj) sum = sum + to_scalar<S>(inv.at(i, jj)) * w[jj];
            acc[i] = sum;
          }
          z = acc;
        }
      },
      m);
  return z;
}

// Derivative at an arbitrary point.
inline Mat jacobian_at(const MapSpec& m, const Cvec& z) {
  return std::visit(
      [&](const auto& s) -> Mat {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, EtaStep>) {
          Mat j(s.k);
          std::complex<double> eta = s.eta.to_complex();
          j.at(0, s.k - 1) = eta;
          for (int i = 1; i < s.k; ++i) {
            j.at(i, i) = static_cast<double>(s.d) * pow_int(z[i], s.d - 1);
            j.at(i, i - 1) = eta;
          }
          return j;
        } else if constexpr (std::is_same_v<T, ShiftLike>) {
          Mat j(s.k);
          for (int i = 0; i + 1 < s.k; ++i) j.at(i, i + 1) = 1.0;
          j.at(s.k - 1, s.k - s.nu) = s.delta * static_cast<double>(s.d) * pow_int(z[s.k - s.nu], s.d - 1);
          j.at(s.k - 1, 0) = -s.delta;
          return j;
        } else if constexpr (std::is_same_v<T, HenonF>) {
          Mat j(2);
          j.at(0, 0) = s.alpha;
          j.at(0, 1) = 2.0 * z[1];
          j.at(1, 1) = s.beta;
          return j;
        } else if constexpr (std::is_same_v<T, HenonG>) {
          Mat j(2);
          j.at(0, 0) = s.beta;
          j.at(1, 0) = static_cast<double>(s.kdeg) * pow_int(z[0], s.kdeg - 1);
          j.at(1, 1) = s.alpha;
          return j;
        } else if constexpr (std::is_same_v<T, CoordinateSwap>) {
          Mat j = Mat::identity(s.k);
          j.at(s.i - 1, s.i - 1) = 0.0;
          j.at(s.j - 1, s.j - 1) = 0.0;
          j.at(s.i - 1, s.j - 1) = 1.0;
          j.at(s.j - 1, s.i - 1) = 1.0;
          return j;
        } else if constexpr (std::is_same_v<T, AffineTranslate>) {
          return Mat::identity(s.k);
        } else if constexpr (std::is_same_v<T, Scaling>) {
          Mat j(s.k);
          for (int i = 0; i < s.k; ++i) j.at(i, i) = s.c;
          return j;
        } else {
          return s.m;
        }
      },
      m);
}

// Linear part at the origin (the z^d terms drop out).
inline Mat linear_part(const MapSpec& m) { return jacobian_at(m, Cvec(map_dim(m))); }

inline bool fixes_origin(const MapSpec& m) {
  if (const auto* t = std::get_if<AffineTranslate>(&m))
    return t->c == std::complex<double>(0.0);
  return true;
}

}  // namespace shortck
