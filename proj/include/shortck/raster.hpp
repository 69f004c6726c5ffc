#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "shortck/basin.hpp"
#include "shortck/complex_vector.hpp"
#include "shortck/potentials.hpp"
#include "shortck/sequence.hpp"
#include "shortck/util.hpp"

namespace shortck {

// A complex 2-plane slice of C^k, sampled on a regular grid.  Pixel (row,
// col) maps to the parameter point
//   u = u_min + (u_max - u_min) * col / (width - 1)
//   v = v_min + (v_max - v_min) * row / (height - 1)
// (inclusive endpoints) and then to base + u * dir_u + v * dir_v.
struct GridSpec {
  Cvec base;
  Cvec dir_u;
  Cvec dir_v;
  int width = 0;
  int height = 0;
  double u_min = 0.0, u_max = 0.0;
  double v_min = 0.0, v_max = 0.0;

  GridSpec(Cvec base_in, Cvec du, Cvec dv, int w, int h, double u0, double u1, double v0, double v1)
      : base(base_in), dir_u(du), dir_v(dv), width(w), height(h), u_min(u0), u_max(u1), v_min(v0), v_max(v1) {
    if (dir_u.k != base.k || dir_v.k != base.k) throw std::invalid_argument("grid direction dimension mismatch");
    if (w < 2 || h < 2) throw std::invalid_argument("grid must be at least 2x2");
    if (!(u0 < u1) || !(v0 < v1)) throw std::invalid_argument("grid window must have positive extent");
  }

  Cvec point_at(int row, int col) const {
    double u = u_min + (u_max - u_min) * static_cast<double>(col) / static_cast<double>(width - 1);
    double v = v_min + (v_max - v_min) * static_cast<double>(row) / static_cast<double>(height - 1);
    return base + u * dir_u + v * dir_v;
  }
};

// Row-major raster of orbit classes over a grid slice, optionally with a
// per-pixel potential value on the decided-attracted set.
struct Raster {
  int width = 0;
  int height = 0;
  std::vector<OrbitClass> classes;                 // size width * height
  std::vector<std::optional<double>> psi;          // empty unless requested
  std::string sequence_description;

  const OrbitClass& at(int row, int col) const { return classes[static_cast<size_t>(row) * width + col]; }
};

// Classifies every pixel of the slice, optionally evaluating the limit
// potential where the classification converged.  Deterministic and
// independent of the thread count: the pixel index alone decides the work.
inline Raster render_slice(const MapSequence& s, const GridSpec& g, const ClassifyParams& p,
                           bool also_psi = false, int threads = 1) {
  Raster r;
  r.width = g.width;
  r.height = g.height;
  r.sequence_description = s.describe();
  size_t count = static_cast<size_t>(g.width) * static_cast<size_t>(g.height);
  r.classes.assign(count, OrbitClass{});
  if (also_psi) r.psi.assign(count, std::nullopt);

  parallel_for(count, threads, [&](size_t idx) {
    int row = static_cast<int>(idx) / g.width;
    int col = static_cast<int>(idx) % g.width;
    Cvec z = g.point_at(row, col);
    r.classes[idx] = classify_point(s, z, p);
    if (also_psi) {
      PotentialEstimate est = psi_limit(s, z, 1e-9, p.n_max);
      if (est.converged) r.psi[idx] = est.value;
    }
  });
  return r;
}

// Fraction of decided pixels (attracted or escaped) among all pixels.
inline double decided_fraction(const Raster& r) {
  size_t decided = 0;
  for (const OrbitClass& c : r.classes)
    if (c.kind != OrbitKind::Undecided) ++decided;
  return static_cast<double>(decided) / static_cast<double>(r.classes.size());
}

}  // namespace shortck
