#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "shortck/filtration.hpp"
#include "shortck/potentials.hpp"
#include "shortck/rng.hpp"
#include "shortck/sequence.hpp"

namespace shortck {

struct ClassifyParams {
  double R = 2.0;      // escape radius (must make the plus cones invariant)
  double c_in = 0.5;   // capture radius
  int n_max = 60;
  double margin = 1e-3;

  ClassifyParams() = default;
  ClassifyParams(double radius, double capture, int cap, double m = 1e-3)
      : R(radius), c_in(capture), n_max(cap), margin(m) {
    if (!(0.0 < capture && capture < 1.0 && 1.0 < radius))
      throw std::invalid_argument("need 0 < c_in < 1 < R");
    if (cap < 1) throw std::invalid_argument("n_max must be at least 1");
  }
};

// Escape radius large enough that the plus cones absorb every step of the
// schedule: the invariance inequality needs R > 1 + sup |eta_n|.
inline double default_escape_radius(const MapSequence& s) {
  double a_eff = std::exp(std::min(0.0, s.eta_at(0).lm));
  return std::max(2.0, 1.0 + a_eff + 0.1);
}

enum class OrbitKind { Attracted, Escaped, Undecided };

struct OrbitClass {
  OrbitKind kind = OrbitKind::Undecided;
  int step = -1;  // iterate index where the rule fired; -1 for undecided
  int axis = 0;   // dominant axis at escape, 1-based; 0 otherwise
};

// Forward classification: iterate until the orbit enters the capture
// polydisc (attracted) or a plus cone (escaped, forward-invariant), up to
// n_max steps. Runs in log-polar arithmetic throughout, so very deep
// contraction and doubly exponential escape are both safe.
inline OrbitClass classify_point(const MapSequence& s, const Cvec& z, const ClassifyParams& p,
                                 int start_step = 0) {
  FiltrationSpec f = s.default_filtration(p.R);
  LogVec state = to_log(z);
  for (int it = 0; it <= p.n_max; ++it) {
    if (in_polydisc(state, p.c_in)) return {OrbitKind::Attracted, it, 0};
    RegionTag tag = classify_filtration(state, f);
    if (tag.region == Region::Plus) return {OrbitKind::Escaped, it, tag.dominant_axis};
    if (it == p.n_max) break;
    s.apply_step(state, start_step + it);
  }
  return {OrbitKind::Undecided, -1, 0};
}

// F(n)(z) inside the polydisc of radius c? Evaluated in log form, so an
// orbit that leaves double range simply reports false.
inline bool omega_membership(const MapSequence& s, const Cvec& z, int n, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("polydisc radius must be positive");
  if (n < 0) throw std::invalid_argument("negative step index");
  LogVec state = to_log(z);
  for (int i = 0; i <= n; ++i) s.apply_step(state, i);
  return in_polydisc(state, c);
}

struct NestedUnionReport {
  int violations = 0;
  int members = 0;         // sample points found in the lower sub-level set
  long long attempts = 0;  // rejection-sampling draws
  int threshold_n = -1;    // smallest n with c^(d-1) + |eta_{n+1}| < 1
};

// Monte Carlo check that the sub-level sets are nested upward from n_lo:
// every sampled member of the stage-n set is a member of the stage-(n+1)
// set. The nesting is proved only for n large; threshold_n reports where the
// sufficient inequality starts holding so callers can judge their n_lo.
inline NestedUnionReport nested_union_check(const MapSequence& s, double c, int n_lo, int n_hi,
                                            int samples, uint64_t seed) {
  if (!(c > 0.0)) throw std::invalid_argument("polydisc radius must be positive");
  if (n_lo < 0 || n_hi < n_lo) throw std::invalid_argument("bad stage range");
  const EtaSchedule& e = detail::require_eta_schedule(s);
  NestedUnionReport rep;
  for (int n = 0; n < 200; ++n) {
    double base = std::pow(c, static_cast<double>(e.d - 1));
    double eta_next = std::exp(std::min(700.0, s.eta_at(n + 1).lm));
    if (base + eta_next < 1.0) {
      rep.threshold_n = n;
      break;
    }
  }
  double box = 2.0 * default_escape_radius(s);
  int k = s.dim();
  int per_stage = std::max(1, samples / std::max(1, n_hi - n_lo));
  const long long budget = 1000000;
  for (int n = n_lo; n < n_hi; ++n) {
    int found = 0;
    while (found < per_stage) {
      if (rep.attempts >= budget)
        throw std::runtime_error("sampler failure: no members found within the attempt budget");
      Rng r = Rng::for_sample(seed, static_cast<uint64_t>(rep.attempts) * 2ull + 1ull);
      ++rep.attempts;
      Cvec z(k);
      for (int i = 0; i < k; ++i) z[i] = r.disc(box);
      if (!omega_membership(s, z, n, c)) continue;
      ++found;
      ++rep.members;
      if (!omega_membership(s, z, n + 1, c)) ++rep.violations;
    }
  }
  return rep;
}

struct KobayashiWitness {
  int n0 = -1;
  bool verified = false;
  int samples = 0;
  int pullback_level = 0;  // shallowest time index the boundary check reached
};

// Realizes an analytic disc witness for a point of the basin: pushes the
// point and a tangent direction forward until the image disc
// p_n + Rscale * D * xi_n fits inside the capture polydisc, then pulls
// boundary samples of that disc back and checks that they classify
// attracted.
inline KobayashiWitness kobayashi_witness(const MapSequence& s, const Cvec& pt, const Cvec& tangent,
                                          double Rscale, const ClassifyParams& p) {
  if (pt.k != s.dim() || tangent.k != pt.k) throw std::invalid_argument("dimension mismatch");
  double tnorm = sup_norm(tangent);
  if (!(tnorm > 0.0)) throw std::invalid_argument("tangent must be nonzero");
  if (Rscale < 0.0) throw std::invalid_argument("Rscale must be nonnegative");
  if (classify_point(s, pt, p).kind != OrbitKind::Attracted)
    throw std::invalid_argument("witness base point is not attracted");

  Cvec orbit_pt = pt;
  Cvec xi = tangent;
  int n0 = -1;
  for (int n = 0; n <= p.n_max; ++n) {
    if (n > 0) {
      MapSpec step = s.map_at(n - 1);
      Cvec prev = orbit_pt;  // derivative is evaluated at the pre-step point
      orbit_pt = apply_map(step, orbit_pt);
      xi = jacobian_at(step, prev) * xi;
    }
    if (sup_norm(orbit_pt) + Rscale * sup_norm(xi) < p.c_in) {
      n0 = n;
      break;
    }
  }
  if (n0 < 0) throw std::runtime_error("witness depth exceeded");

  KobayashiWitness w;
  w.n0 = n0;
  w.samples = 16;
  w.pullback_level = 0;
  bool ok = true;
  // Inverse branches of the triangular steps expand doubly exponentially, so a
  // full pullback to time zero can reach magnitudes whose forward
  // re-contraction is beyond double cancellation. Stop at the deepest level
  // whose magnitude a forward classification can still resolve, and classify
  // under the time-shifted schedule; the stage basins are biholomorphic, so
  // attraction at level m is attraction at level zero.
  const double guard_log = std::log(1e8);
  for (int j = 0; j < w.samples; ++j) {
    double th = kTwoPi * static_cast<double>(j) / static_cast<double>(w.samples);
    Cvec boundary = orbit_pt + (std::polar(Rscale, th) * xi);
    LogVec back = to_log(boundary);
    int level = n0;
    while (level > 0) {
      LogVec deeper = back;
      s.apply_step_inverse(deeper, level - 1);
      if (log_sup_norm(deeper) > guard_log) break;
      back = deeper;
      --level;
    }
    w.pullback_level = std::max(w.pullback_level, level);
    if (classify_point(s, to_cvec(back), p, level).kind != OrbitKind::Attracted) ok = false;
  }
  w.verified = ok;
  return w;
}

}  // namespace shortck
