#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "shortck/complex_vector.hpp"
#include "shortck/maps.hpp"
#include "shortck/matrix.hpp"
#include "shortck/rng.hpp"
#include "shortck/sequence.hpp"
#include "shortck/util.hpp"

namespace shortck {

// ---------------------------------------------------------------------------
// Radial graph of the unit level set of z^2 + alpha w.
//
// Along the ray z = t xi with |xi| = 1 the equation |(t xi)^2 + alpha w| = 1
// reduces to a quadratic in t^2 whose positive root exists exactly when
// |alpha w| < 1:
//   t^2 = -c + sqrt(c^2 + 1 - |alpha w|^2),  c = Re(xi^2 conj(alpha w)).
// The root satisfies 1 - |alpha w| <= t^2 <= 1 + |alpha w| and dips below 1
// wherever c > 0, so the level set is close to the unit cylinder but not
// outside it everywhere.
// ---------------------------------------------------------------------------

inline double phi_alpha(std::complex<double> alpha_w, std::complex<double> xi) {
  double m = std::abs(alpha_w);
  if (m >= 1.0) throw std::domain_error("graph breaks down: need |alpha w| < 1");
  double xm = std::abs(xi);
  if (xm == 0.0) throw std::invalid_argument("direction xi must be nonzero");
  if (m == 0.0) return 1.0;
  std::complex<double> unit = xi / xm;
  double c = (unit * unit * std::conj(alpha_w)).real();
  return std::sqrt(-c + std::sqrt(c * c + 1.0 - m * m));
}

// Coefficient size keeping the level-set graph within eps of the cylinder
// over |w| <= R, verified after the fact on a phase/modulus grid.
inline double alpha0_for(double eps, double R) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (!(R > 0.0)) throw std::invalid_argument("R must be positive");
  double alpha0 = std::min(eps, 1.0) / (2.0 * R);
  double worst = 0.0;
  for (int a = 0; a < 16; ++a) {
    std::complex<double> xi = std::polar(1.0, kTwoPi * a / 16.0);
    for (int b = 0; b < 8; ++b) {
      std::complex<double> wp = std::polar(1.0, kTwoPi * b / 8.0);
      for (int rr = 1; rr <= 8; ++rr) {
        std::complex<double> w = (R * rr / 8.0) * wp;
        worst = std::max(worst, std::abs(phi_alpha(alpha0 * w, xi) - 1.0));
      }
    }
  }
  if (worst > 0.5 * eps)
    throw std::logic_error("alpha0 grid verification failed");
  return alpha0;
}

// ---------------------------------------------------------------------------
// Face grids. Face j of the polydisc model is the set where coordinate j is
// graphed radially: nodes combine a phase for z_j with a transverse point
// supplying every other coordinate. Slot j-1 of a transverse point is
// ignored; it is overwritten by the ray parameter.
// ---------------------------------------------------------------------------

struct FaceGrid {
  int j = 2;  // 1-based graphed coordinate
  int k = 3;
  double R = 5.0;
  int angular_samples = 16;
  std::vector<Cvec> transverse;

  FaceGrid(int face, int dim, double radius, int ang, std::vector<Cvec> tr)
      : j(face), k(dim), R(radius), angular_samples(ang), transverse(std::move(tr)) {
    check_dim(dim);
    if (face < 2 || face > dim) throw std::invalid_argument("face index must lie in [2, k]");
    if (!(radius > 1.0)) throw std::invalid_argument("face radius must exceed 1");
    if (ang < 16) throw std::invalid_argument("angular_samples must be at least 16");
    if (transverse.empty()) throw std::invalid_argument("transverse grid must be nonempty");
    for (const Cvec& p : transverse)
      if (p.k != dim) throw std::invalid_argument("dimension mismatch");
  }

  double phase(int a) const { return kTwoPi * a / angular_samples; }

  int nodes() const { return angular_samples * static_cast<int>(transverse.size()); }

  Cvec point(int a, int m, double t) const {
    Cvec z = transverse[static_cast<size_t>(m)];
    z[j - 1] = std::polar(t, phase(a));
    return z;
  }
};

// Deterministic transverse set: the disc factor z_1 sampled out to 0.9 R,
// the remaining coordinates on a small cross inside the unit cylinder.
inline FaceGrid make_face_grid(int j, int k, double R, int angular_samples = 16) {
  std::vector<std::complex<double>> first{{0.0, 0.0}};
  for (double r : {0.45 * R, 0.9 * R})
    for (int p = 0; p < 4; ++p) first.push_back(std::polar(r, kTwoPi * p / 4.0));
  std::vector<std::complex<double>> other{{0.0, 0.0}, {0.7, 0.0}, {0.0, 0.7}};
  std::vector<Cvec> tr;
  for (const auto& z1 : first) {
    Cvec base(k);
    base[0] = z1;
    int free_axis = -1;
    for (int i = 1; i < k; ++i)
      if (i != j - 1) {
        free_axis = i;
        break;
      }
    if (free_axis < 0) {
      tr.push_back(base);
      continue;
    }
    for (const auto& zo : other) {
      Cvec p = base;
      for (int i = 1; i < k; ++i)
        if (i != j - 1) p[i] = zo;
      tr.push_back(p);
    }
  }
  return FaceGrid(j, k, R, angular_samples, std::move(tr));
}

struct GraphFunction {
  FaceGrid face;
  std::vector<double> values;                // angular-major: index a * T + m
  std::vector<double> derivative_estimates;  // angular central differences; may be empty
  double continuity_modulus = 0.0;           // max step between angular neighbours

  double at(int a, int m) const {
    return values[static_cast<size_t>(a) * face.transverse.size() + static_cast<size_t>(m)];
  }
};

struct PullbackOptions {
  double target = 1.0;      // level of |pi_j(F(n)(z))| being graphed
  double t_max = 2.0;       // ray search range
  int scan_samples = 64;    // sign-scan resolution ahead of bisection
  int bisect_iters = 55;
  double residual_tol = 1e-10;
  bool derivatives = true;
};

namespace detail {

// log |pi_j (F(n) z)| evaluated in log-polar form, safe far outside the
// region where doubles could hold the composed image.
inline double log_face_modulus(const MapSequence& s, int n, int j, const Cvec& z) {
  LogVec state = to_log(z);
  for (int i = 0; i < n; ++i) s.apply_step(state, i);
  return state[j - 1].lm;
}

template <class Crossing>
inline double bisect_ray(const Crossing& g, double t_lo, double t_hi, int iters) {
  double lo = t_lo, hi = t_hi;
  for (int it = 0; it < iters; ++it) {
    double mid = 0.5 * (lo + hi);
    if (g(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// One radial solve: find the single crossing of g on (0, t_max], where g is
// increasing through zero at the graph radius. A missing or ambiguous
// crossing is a structural failure, reported with the offending node.
template <class Crossing>
inline double solve_ray(const Crossing& g, const PullbackOptions& opts, int face_j, int a, int m) {
  int crossings = 0;
  double lo = 0.0, hi = 0.0;
  double step = opts.t_max / opts.scan_samples;
  double prev_t = step;
  double prev_g = g(prev_t);
  for (int i = 2; i <= opts.scan_samples; ++i) {
    double t = step * i;
    double cur = g(t);
    if (prev_g < 0.0 && cur >= 0.0) {
      ++crossings;
      lo = prev_t;
      hi = t;
    }
    prev_t = t;
    prev_g = cur;
  }
  if (crossings != 1)
    throw std::runtime_error(strprintf(
        "not a graph over this face (face %d, phase %d, transverse %d, crossings %d)", face_j, a,
        m, crossings));
  return bisect_ray(g, lo, hi, opts.bisect_iters);
}

inline void finish_graph(GraphFunction& gf, const PullbackOptions& opts) {
  const FaceGrid& face = gf.face;
  int T = static_cast<int>(face.transverse.size());
  for (int a = 0; a < face.angular_samples; ++a) {
    int next = (a + 1) % face.angular_samples;
    for (int m = 0; m < T; ++m)
      gf.continuity_modulus =
          std::max(gf.continuity_modulus, std::abs(gf.at(next, m) - gf.at(a, m)));
  }
  if (opts.derivatives) {
    gf.derivative_estimates.resize(gf.values.size());
    double dtheta = kTwoPi / face.angular_samples;
    for (int a = 0; a < face.angular_samples; ++a) {
      int up = (a + 1) % face.angular_samples;
      int dn = (a + face.angular_samples - 1) % face.angular_samples;
      for (int m = 0; m < T; ++m)
        gf.derivative_estimates[static_cast<size_t>(a) * T + m] =
            (gf.at(up, m) - gf.at(dn, m)) / (2.0 * dtheta);
    }
  }
}

}  // namespace detail

// Radius of {|pi_j(F(n)(z))| = target} over every face node, found by sign
// scan plus bisection along each ray.
inline GraphFunction graph_pullback(const MapSequence& s, int n, const FaceGrid& face,
                                    PullbackOptions opts = {}) {
  if (n < 0) throw std::invalid_argument("negative stage index");
  if (!(opts.target > 0.0)) throw std::invalid_argument("target level must be positive");
  GraphFunction gf{face, {}, {}, 0.0};
  gf.values.reserve(static_cast<size_t>(face.nodes()));
  double log_target = std::log(opts.target);
  for (int a = 0; a < face.angular_samples; ++a)
    for (int m = 0; m < static_cast<int>(face.transverse.size()); ++m) {
      auto g = [&](double t) {
        return detail::log_face_modulus(s, n, face.j, face.point(a, m, t)) - log_target;
      };
      double t = detail::solve_ray(g, opts, face.j, a, m);
      if (std::abs(std::exp(g(t)) - 1.0) > opts.residual_tol)
        throw std::runtime_error("bisection residual exceeded tolerance");
      gf.values.push_back(t);
    }
  detail::finish_graph(gf, opts);
  return gf;
}

// Pull an already-computed graph back through one more map of the sequence:
// the crossing condition compares |pi_j(F_step(z(t)))| with the inner graph
// evaluated at the image's face coordinates (nearest grid node).
inline GraphFunction graph_refine(const MapSequence& s, int step, const FaceGrid& face,
                                  const GraphFunction& inner, PullbackOptions opts = {}) {
  if (step < 0) throw std::invalid_argument("negative step index");
  if (inner.face.j != face.j || inner.face.k != face.k)
    throw std::invalid_argument("face mismatch between inner graph and target grid");
  GraphFunction gf{face, {}, {}, 0.0};
  gf.values.reserve(static_cast<size_t>(face.nodes()));
  int T = static_cast<int>(inner.face.transverse.size());
  auto inner_radius = [&](const Cvec& w) {
    // Closest inner node in phase and transverse position.
    double theta = std::arg(w[face.j - 1]);
    if (theta < 0.0) theta += kTwoPi;
    int a = static_cast<int>(std::lround(theta / kTwoPi * inner.face.angular_samples)) %
            inner.face.angular_samples;
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int m = 0; m < T; ++m) {
      double d = 0.0;
      for (int i = 0; i < face.k; ++i) {
        if (i == face.j - 1) continue;
        d = std::max(d, std::abs(w[i] - inner.face.transverse[static_cast<size_t>(m)][i]));
      }
      if (d < best_d) {
        best_d = d;
        best = m;
      }
    }
    return inner.at(a, best);
  };
  for (int a = 0; a < face.angular_samples; ++a)
    for (int m = 0; m < static_cast<int>(face.transverse.size()); ++m) {
      auto g = [&](double t) {
        Cvec w = apply_map(s.map_at(step), face.point(a, m, t));
        double r = inner_radius(w);
        return std::log(std::abs(w[face.j - 1])) - std::log(r);
      };
      gf.values.push_back(detail::solve_ray(g, opts, face.j, a, m));
    }
  detail::finish_graph(gf, opts);
  return gf;
}

// Deviation of a solved graph node from the unit level set, measured on the
// pushed-forward modulus. Used when exporting graphs for inspection.
inline double face_level_residual(const MapSequence& s, int n, const FaceGrid& face, int a, int m,
                                  double t) {
  return std::abs(std::exp(detail::log_face_modulus(s, n, face.j, face.point(a, m, t))) - 1.0);
}

// ---------------------------------------------------------------------------
// Stagewise construction of the nested boundary graphs.
//
// Stage n appends one triangular map with coefficient alpha_n and records the
// face graphs of {|pi_j(F(n)(z))| = 1}. The coefficient starts at the square
// of its predecessor and is halved until the new graphs sit within
// eps / (k 2^(n+1)) of the previous stage and the sub-level parameter c_n
// found by scanning keeps the probe members of stage n-1 inside stage n.
// ---------------------------------------------------------------------------

struct StageRecord {
  int n = 0;
  LogScalar alpha_n;
  double c_n = 0.0;
  std::vector<GraphFunction> graphs;  // one per face j = 2..k
  double c0_closeness = 0.0;
  std::optional<double> c1_closeness;
};

namespace detail {

inline double graph_sup_distance(const GraphFunction& a, const GraphFunction& b) {
  double worst = 0.0;
  for (size_t i = 0; i < a.values.size(); ++i)
    worst = std::max(worst, std::abs(a.values[i] - b.values[i]));
  return worst;
}

inline double derivative_sup_distance(const GraphFunction& a, const GraphFunction& b) {
  double worst = 0.0;
  for (size_t i = 0; i < a.derivative_estimates.size(); ++i)
    worst = std::max(worst, std::abs(a.derivative_estimates[i] - b.derivative_estimates[i]));
  return worst;
}

}  // namespace detail

inline std::vector<StageRecord> stagewise_construct(int k, double R, double eps, int N) {
  check_dim(k);
  if (k < 2) throw std::invalid_argument("need k >= 2");
  if (!(R >= 5.0)) throw std::invalid_argument("R must be at least 5");
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0, 1)");
  if (N < 1 || N > 20) throw std::invalid_argument("N must lie in [1, 20]");

  std::vector<FaceGrid> faces;
  for (int j = 2; j <= k; ++j) faces.push_back(make_face_grid(j, k, R));

  // Cylinder baseline: every graph is identically 1.
  std::vector<GraphFunction> prev_graphs;
  for (const FaceGrid& f : faces) {
    GraphFunction gf{f, std::vector<double>(static_cast<size_t>(f.nodes()), 1.0), {}, 0.0};
    PullbackOptions o;
    detail::finish_graph(gf, o);
    prev_graphs.push_back(std::move(gf));
  }

  const std::vector<double> c_scan{0.90, 0.95, 0.99, 0.995, 0.999, 0.9995, 0.9999};
  double c_prev = c_scan.front();

  // Deterministic probe set for the sub-level scan; drawn inside the base
  // sub-level polydisc so stage-0 membership is nonvacuous.
  const int probes = 200;
  std::vector<Cvec> probe;
  for (int t = 0; t < probes; ++t) {
    Rng rng = Rng::for_sample(0x57a9e5ull, static_cast<uint64_t>(t));
    Cvec z(k);
    for (int i = 0; i < k; ++i) z[i] = rng.disc(0.85);
    probe.push_back(z);
  }

  CustomEtas etas;
  std::vector<StageRecord> out;
  LogScalar alpha = LogScalar::from_real(alpha0_for(eps, R));
  for (int n = 1; n <= N; ++n) {
    if (n > 1) alpha = out.back().alpha_n * out.back().alpha_n;
    double eps_n = eps / (k * std::pow(2.0, n + 1));
    bool accepted = false;
    StageRecord rec;
    for (int halvings = 0; halvings < 200 && !accepted; ++halvings) {
      if (!std::isfinite(alpha.lm))
        throw std::runtime_error(strprintf("alpha underflowed at stage %d", n));
      CustomEtas trial = etas;
      trial.etas.push_back(alpha);
      MapSequence seq(EtaSchedule{k, 2, trial}, std::max(60, N + 1));

      std::vector<GraphFunction> graphs;
      double closeness = 0.0;
      for (size_t f = 0; f < faces.size(); ++f) {
        graphs.push_back(graph_pullback(seq, n, faces[f]));
        closeness = std::max(closeness, detail::graph_sup_distance(graphs[f], prev_graphs[f]));
      }
      if (closeness > eps_n) {
        alpha = alpha * LogScalar::from_real(0.5);
        continue;
      }

      // Sub-level scan: keep stage-(n-1) probe members inside stage n.
      double needed = c_prev;
      for (const Cvec& z : probe) {
        LogVec state = to_log(z);
        for (int i = 0; i + 1 < n; ++i) seq.apply_step(state, i);
        if (log_sup_norm(state) >= std::log(c_prev)) continue;
        seq.apply_step(state, n - 1);
        needed = std::max(needed, std::exp(log_sup_norm(state)) + 1e-9);
      }
      double c_n = -1.0;
      for (double c : c_scan)
        if (c >= needed) {
          c_n = c;
          break;
        }
      if (c_n < 0.0) {
        alpha = alpha * LogScalar::from_real(0.5);
        continue;
      }

      rec.n = n;
      rec.alpha_n = alpha;
      rec.c_n = c_n;
      rec.c0_closeness = closeness;
      double c1 = 0.0;
      for (size_t f = 0; f < faces.size(); ++f)
        c1 = std::max(c1, detail::derivative_sup_distance(graphs[f], prev_graphs[f]));
      rec.c1_closeness = c1;
      rec.graphs = graphs;
      prev_graphs = std::move(graphs);
      c_prev = c_n;
      etas = trial;
      accepted = true;
    }
    if (!accepted)
      throw std::runtime_error(strprintf("stage %d failed to reach graph closeness", n));
    out.push_back(std::move(rec));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Defining-function diagnostics.
//
// Face i of the stage-n region carries rho_i(z) = |z_i| - r_i(face coords),
// with r_i recomputed by bisection at every evaluation, so derivatives can be
// taken by plain central differences. The checks collect gradient norms on
// each face, the minimal Levi eigenvalue restricted to the complex tangent,
// the curvature in the complex normal direction, and the minimal singular
// value of paired gradients at corner points.
// ---------------------------------------------------------------------------

struct DefiningFunctionReport {
  std::vector<double> gradient_norms;
  double levi_min_eigen = std::numeric_limits<double>::infinity();
  double levi_normal_max = -std::numeric_limits<double>::infinity();
  double wedge_gram_min = std::numeric_limits<double>::infinity();
  int skipped = 0;
};

struct DefiningCheckParams {
  double h = 1e-4;
  double on_surface_tol = 1e-6;
  std::vector<std::pair<int, int>> face_pairs;  // empty: all pairs j1 < j2
};

namespace detail {

// Smallest eigenvalue of a small real symmetric matrix by cyclic Jacobi.
inline double sym_min_eigen(std::vector<double>& mat, int n) {
  auto at = [&](int i, int j) -> double& { return mat[static_cast<size_t>(i) * n + j]; };
  for (int sweep = 0; sweep < 40; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += std::abs(at(p, q));
    if (off < 1e-14) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        double apq = at(p, q);
        if (std::abs(apq) < 1e-16) continue;
        double theta = 0.5 * std::atan2(2.0 * apq, at(q, q) - at(p, p));
        double c = std::cos(theta), s = std::sin(theta);
        for (int r = 0; r < n; ++r) {
          double arp = at(r, p), arq = at(r, q);
          at(r, p) = c * arp - s * arq;
          at(r, q) = s * arp + c * arq;
        }
        for (int r = 0; r < n; ++r) {
          double apr = at(p, r), aqr = at(q, r);
          at(p, r) = c * apr - s * aqr;
          at(q, r) = s * apr + c * aqr;
        }
      }
  }
  double mn = mat[0];
  for (int i = 1; i < n; ++i) mn = std::min(mn, at(i, i));
  return mn;
}

// Minimal eigenvalue of a Hermitian matrix through its real symmetric
// embedding [[Re, -Im], [Im, Re]].
inline double herm_min_eigen(const std::vector<std::complex<double>>& h, int n) {
  std::vector<double> m(static_cast<size_t>(4 * n * n), 0.0);
  auto at = [&](int i, int j) -> double& { return m[static_cast<size_t>(i) * 2 * n + j]; };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      std::complex<double> v = h[static_cast<size_t>(i) * n + j];
      at(i, j) = v.real();
      at(i + n, j + n) = v.real();
      at(i, j + n) = -v.imag();
      at(i + n, j) = v.imag();
    }
  return sym_min_eigen(m, 2 * n);
}

struct FaceEvaluator {
  const MapSequence* s;
  int n;
  int j;
  PullbackOptions opts;

  // rho(z) = |z_j| - (graph radius at the face coordinates of z).
  double rho(const Cvec& z) const {
    std::complex<double> zj = z[j - 1];
    double mod = std::abs(zj);
    std::complex<double> xi = (mod == 0.0) ? std::complex<double>(1.0, 0.0) : zj / mod;
    auto g = [&](double t) {
      Cvec p = z;
      p[j - 1] = t * xi;
      return log_face_modulus(*s, n, j, p);
    };
    double r = solve_ray(g, opts, j, -1, -1);
    return mod - r;
  }
};

}  // namespace detail

inline DefiningFunctionReport defining_function_checks(const MapSequence& s, int n, int k,
                                                       double R, int nodes_per_face,
                                                       uint64_t seed,
                                                       DefiningCheckParams p = {}) {
  check_dim(k);
  if (n < 0) throw std::invalid_argument("negative stage index");
  if (nodes_per_face < 1) throw std::invalid_argument("need at least one node per face");
  DefiningFunctionReport rep;
  double h = p.h;

  auto sample_base = [&](uint64_t idx) {
    Rng rng = Rng::for_sample(seed, idx);
    Cvec z(k);
    z[0] = rng.disc(0.5 * R);
    for (int i = 1; i < k; ++i) z[i] = std::polar(1.0, kTwoPi * rng.uniform());
    return z;
  };

  auto grad_and_levi = [&](const detail::FaceEvaluator& fe, const Cvec& z0,
                           std::vector<std::complex<double>>& grad,
                           std::vector<std::complex<double>>& hess) {
    auto eval = [&](const Cvec& z) { return fe.rho(z); };
    auto shift = [&](const Cvec& z, int axis, double dx, double dy) {
      Cvec w = z;
      w[axis] += std::complex<double>(dx, dy);
      return w;
    };
    double center = eval(z0);
    grad.assign(static_cast<size_t>(k), {0.0, 0.0});
    hess.assign(static_cast<size_t>(k * k), {0.0, 0.0});
    std::vector<double> fxp(static_cast<size_t>(k)), fxm(static_cast<size_t>(k)),
        fyp(static_cast<size_t>(k)), fym(static_cast<size_t>(k));
    for (int a = 0; a < k; ++a) {
      fxp[a] = eval(shift(z0, a, h, 0));
      fxm[a] = eval(shift(z0, a, -h, 0));
      fyp[a] = eval(shift(z0, a, 0, h));
      fym[a] = eval(shift(z0, a, 0, -h));
      double dx = (fxp[a] - fxm[a]) / (2.0 * h);
      double dy = (fyp[a] - fym[a]) / (2.0 * h);
      grad[static_cast<size_t>(a)] = 0.5 * std::complex<double>(dx, -dy);
    }
    auto mixed = [&](int u_axis, bool u_im, int v_axis, bool v_im) {
      auto mv = [&](double su, double sv) {
        Cvec w = shift(z0, u_axis, u_im ? 0 : su * h, u_im ? su * h : 0);
        w = shift(w, v_axis, v_im ? 0 : sv * h, v_im ? sv * h : 0);
        return eval(w);
      };
      return (mv(1, 1) - mv(1, -1) - mv(-1, 1) + mv(-1, -1)) / (4.0 * h * h);
    };
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) {
        double rxx, ryy, rxy, ryx;
        if (a == b) {
          rxx = (fxp[a] - 2.0 * center + fxm[a]) / (h * h);
          ryy = (fyp[a] - 2.0 * center + fym[a]) / (h * h);
          rxy = mixed(a, false, a, true);
          ryx = rxy;
        } else {
          rxx = mixed(a, false, b, false);
          ryy = mixed(a, true, b, true);
          rxy = mixed(a, false, b, true);
          ryx = mixed(a, true, b, false);
        }
        hess[static_cast<size_t>(a) * k + b] =
            0.25 * std::complex<double>(rxx + ryy, rxy - ryx);
      }
  };

  PullbackOptions fe_opts;
  std::vector<std::complex<double>> grad, hess;
  for (int j = 2; j <= k; ++j) {
    detail::FaceEvaluator fe{&s, n, j, fe_opts};
    for (int t = 0; t < nodes_per_face; ++t) {
      Cvec z = sample_base(static_cast<uint64_t>((j - 2) * nodes_per_face + t));
      // Land exactly on the surface by solving the node's own ray.
      Cvec on = z;
      on[j - 1] = z[j - 1] / std::abs(z[j - 1]);
      double r0 = -fe.rho(on) + 1.0;  // rho(on) = 1 - r  =>  r = 1 - rho(on)
      on[j - 1] *= r0;
      if (std::abs(fe.rho(on)) > p.on_surface_tol) {
        ++rep.skipped;
        continue;
      }
      grad_and_levi(fe, on, grad, hess);
      double gnorm = 0.0;
      for (const auto& g : grad) gnorm += std::norm(g);
      gnorm = std::sqrt(gnorm);
      rep.gradient_norms.push_back(gnorm);
      if (gnorm < 1e-12) continue;

      // Complex tangent basis: orthogonal complement of conj(grad).
      std::vector<std::complex<double>> u(static_cast<size_t>(k));
      for (int a = 0; a < k; ++a) u[static_cast<size_t>(a)] = std::conj(grad[static_cast<size_t>(a)]) / gnorm;
      std::vector<std::vector<std::complex<double>>> basis;
      for (int e = 0; e < k && static_cast<int>(basis.size()) < k - 1; ++e) {
        std::vector<std::complex<double>> v(static_cast<size_t>(k), {0.0, 0.0});
        v[static_cast<size_t>(e)] = 1.0;
        std::complex<double> proj = 0.0;
        for (int a = 0; a < k; ++a) proj += v[static_cast<size_t>(a)] * std::conj(u[static_cast<size_t>(a)]);
        for (int a = 0; a < k; ++a) v[static_cast<size_t>(a)] -= proj * u[static_cast<size_t>(a)];
        for (const auto& w : basis) {
          std::complex<double> pw = 0.0;
          for (int a = 0; a < k; ++a) pw += v[static_cast<size_t>(a)] * std::conj(w[static_cast<size_t>(a)]);
          for (int a = 0; a < k; ++a) v[static_cast<size_t>(a)] -= pw * w[static_cast<size_t>(a)];
        }
        double nv = 0.0;
        for (const auto& c : v) nv += std::norm(c);
        nv = std::sqrt(nv);
        if (nv < 1e-8) continue;
        for (auto& c : v) c /= nv;
        basis.push_back(std::move(v));
      }
      int tdim = static_cast<int>(basis.size());
      if (tdim > 0) {
        std::vector<std::complex<double>> t_mat(static_cast<size_t>(tdim * tdim));
        for (int ii = 0; ii < tdim; ++ii)
          for (int jj = 0; jj < tdim; ++jj) {
            std::complex<double> acc = 0.0;
            for (int a = 0; a < k; ++a)
              for (int b = 0; b < k; ++b)
                acc += std::conj(basis[static_cast<size_t>(ii)][static_cast<size_t>(a)]) *
                       hess[static_cast<size_t>(a) * k + b] *
                       basis[static_cast<size_t>(jj)][static_cast<size_t>(b)];
            t_mat[static_cast<size_t>(ii) * tdim + jj] = acc;
          }
        rep.levi_min_eigen = std::min(rep.levi_min_eigen, detail::herm_min_eigen(t_mat, tdim));
      }
      std::complex<double> normal_val = 0.0;
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b)
          normal_val += std::conj(u[static_cast<size_t>(a)]) * hess[static_cast<size_t>(a) * k + b] *
                        u[static_cast<size_t>(b)];
      rep.levi_normal_max = std::max(rep.levi_normal_max, normal_val.real());
    }
  }

  // Corner diagnostics: points on two faces at once, gradients paired.
  std::vector<std::pair<int, int>> pairs = p.face_pairs;
  if (pairs.empty())
    for (int j1 = 2; j1 <= k; ++j1)
      for (int j2 = j1 + 1; j2 <= k; ++j2) pairs.push_back({j1, j2});
  std::vector<std::complex<double>> g1, g2, hdump;
  for (const auto& [j1, j2] : pairs) {
    if (j1 < 2 || j1 > k || j2 < 2 || j2 > k)
      throw std::invalid_argument("face index must lie in [2, k]");
    detail::FaceEvaluator f1{&s, n, j1, fe_opts};
    detail::FaceEvaluator f2{&s, n, j2, fe_opts};
    for (int t = 0; t < std::max(1, nodes_per_face / 2); ++t) {
      Cvec z = sample_base(0x900dull + static_cast<uint64_t>(t));
      Cvec on = z;
      for (int it = 0; it < 30; ++it) {
        std::complex<double> xi1 = on[j1 - 1] / std::abs(on[j1 - 1]);
        on[j1 - 1] = xi1 * (std::abs(on[j1 - 1]) - f1.rho(on));
        if (j2 != j1) {
          std::complex<double> xi2 = on[j2 - 1] / std::abs(on[j2 - 1]);
          on[j2 - 1] = xi2 * (std::abs(on[j2 - 1]) - f2.rho(on));
        }
      }
      if (std::abs(f1.rho(on)) > p.on_surface_tol || std::abs(f2.rho(on)) > p.on_surface_tol) {
        ++rep.skipped;
        continue;
      }
      grad_and_levi(f1, on, g1, hdump);
      grad_and_levi(f2, on, g2, hdump);
      std::complex<double> a11 = 0.0, a12 = 0.0, a22 = 0.0;
      for (int a = 0; a < k; ++a) {
        a11 += g1[static_cast<size_t>(a)] * std::conj(g1[static_cast<size_t>(a)]);
        a12 += g1[static_cast<size_t>(a)] * std::conj(g2[static_cast<size_t>(a)]);
        a22 += g2[static_cast<size_t>(a)] * std::conj(g2[static_cast<size_t>(a)]);
      }
      double tr = a11.real() + a22.real();
      double det = a11.real() * a22.real() - std::norm(a12);
      double lam = 0.5 * (tr - std::sqrt(std::max(0.0, tr * tr - 4.0 * det)));
      rep.wedge_gram_min = std::min(rep.wedge_gram_min, std::sqrt(std::max(0.0, lam)));
    }
  }
  return rep;
}

}  // namespace shortck
