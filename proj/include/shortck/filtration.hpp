#pragma once

#include <cstdint>
#include <stdexcept>

#include "shortck/complex_vector.hpp"

namespace shortck {

// Partition of C^k into the closed polydisc of radius R and the cones
// V_i = { sup norm attained at coordinate i and >= R }. Axes are numbered
// 1..k. The plus set marks which axes count as escaping.
struct FiltrationSpec {
  int k = 2;
  double R = 2.0;
  uint16_t plus_mask = 0;  // bit (i-1) set <=> axis i belongs to the plus set

  FiltrationSpec() = default;

  FiltrationSpec(int dim, double radius, uint16_t mask) : k(dim), R(radius), plus_mask(mask) {
    check_dim(dim);
    if (!(radius > 1.0)) throw std::invalid_argument("filtration radius must exceed 1");
    uint16_t all = static_cast<uint16_t>((1u << dim) - 1u);
    if (mask == 0 || (mask & ~all) != 0 || mask == all)
      throw std::invalid_argument("plus axes must be a nonempty proper subset of 1..k");
  }

  // Plus set {2, ..., k}: the layout of the triangular map family.
  static FiltrationSpec eta_default(int dim, double radius) {
    uint16_t mask = static_cast<uint16_t>(((1u << dim) - 1u) & ~1u);
    return FiltrationSpec(dim, radius, mask);
  }

  // Plus set {k-nu+1, ..., k}: the layout matching a type-nu shift map.
  static FiltrationSpec shift_type(int dim, int nu, double radius) {
    if (nu < 1 || nu > dim - 1) throw std::invalid_argument("shift type nu must lie in [1, k-1]");
    uint16_t mask = 0;
    for (int i = dim - nu + 1; i <= dim; ++i) mask |= static_cast<uint16_t>(1u << (i - 1));
    return FiltrationSpec(dim, radius, mask);
  }

  bool is_plus_axis(int axis) const { return (plus_mask >> (axis - 1)) & 1u; }
};

enum class Region { Interior, Plus, Minus };

struct RegionTag {
  Region region = Region::Interior;
  int dominant_axis = 0;  // 1-based; 0 for interior points
};

namespace detail {

// Shared classification over any scalar type that exposes log moduli.
inline RegionTag classify_from_logs(const double* logmod, int k, const FiltrationSpec& f,
                                    double logR) {
  double best = -std::numeric_limits<double>::infinity();
  int axis = 0;
  for (int i = 0; i < k; ++i) {
    if (logmod[i] >= best) {  // ties resolve to the largest index
      best = logmod[i];
      axis = i + 1;
    }
  }
  if (best < logR) return {Region::Interior, 0};
  return {f.is_plus_axis(axis) ? Region::Plus : Region::Minus, axis};
}

}  // namespace detail

inline RegionTag classify_filtration(const Cvec& z, const FiltrationSpec& f) {
  if (z.k != f.k) throw std::invalid_argument("dimension mismatch");
  if (!all_finite(z)) throw std::domain_error("non-finite input");
  double logs[kMaxDim];
  for (int i = 0; i < z.k; ++i) {
    double m = std::abs(z[i]);
    logs[i] = (m == 0.0) ? -std::numeric_limits<double>::infinity() : std::log(m);
  }
  return detail::classify_from_logs(logs, z.k, f, std::log(f.R));
}

inline RegionTag classify_filtration(const LogVec& z, const FiltrationSpec& f) {
  if (z.k != f.k) throw std::invalid_argument("dimension mismatch");
  double logs[kMaxDim];
  for (int i = 0; i < z.k; ++i) logs[i] = z[i].lm;
  return detail::classify_from_logs(logs, z.k, f, std::log(f.R));
}

}  // namespace shortck
