#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "shortck/basin.hpp"
#include "shortck/filtration.hpp"
#include "shortck/maps.hpp"
#include "shortck/potentials.hpp"
#include "shortck/rng.hpp"
#include "shortck/sequence.hpp"
#include "shortck/util.hpp"

namespace shortck {

// ---------------------------------------------------------------------------
// Bounded rewriting of quadratic-pair words.
//
// A word H_{p,q} (q applications of G followed by p of F) with q <= M but p
// arbitrarily large factors into consecutive words whose exponents all stay
// below M: an optional opening remainder F^R, then full blocks F^M, and the
// original q deferred to the final block. Exponent sums are preserved, so the
// diagonal derivative at the origin of the product equals that of the input.
// ---------------------------------------------------------------------------

struct RewriteTerm {
  int p = 0;
  int q = 0;
  friend bool operator==(const RewriteTerm& a, const RewriteTerm& b) {
    return a.p == b.p && a.q == b.q;
  }
};

inline std::vector<RewriteTerm> rewrite_bounded(int p, int q, int M) {
  if (p < 0 || q < 0) throw std::invalid_argument("exponents must be nonnegative");
  if (M < 1) throw std::invalid_argument("block size M must be at least 1");
  if (q > M) throw std::invalid_argument("hypothesis violated: q exceeds the block size M");
  if (p <= M) return {RewriteTerm{p, q}};
  int blocks = p / M;
  int rem = p % M;
  std::vector<RewriteTerm> out;
  if (rem > 0) out.push_back(RewriteTerm{rem, 0});
  for (int b = 0; b + 1 < blocks; ++b) out.push_back(RewriteTerm{M, 0});
  out.push_back(RewriteTerm{M, q});
  int ps = 0, qs = 0;
  for (const RewriteTerm& t : out) {
    ps += t.p;
    qs += t.q;
  }
  if (ps != p || qs != q) throw std::logic_error("rewrite lost exponents");
  return out;
}

// ---------------------------------------------------------------------------
// Eigenvalue region test for schedules of quadratic-pair words.
//
// Each word H_{p,q} has diagonal derivative (alpha^p beta^q, alpha^q beta^p)
// at the origin; a uniform xi in (0,1) with |lambda_2|^2 <= xi |lambda_1| for
// every word forces the composed sequence to contract fast enough that its
// basin is biholomorphic to C^2. The test rewrites each word into bounded
// blocks, derives the candidate xi = max(|alpha|, eta^(1/r)) with
// eta = |alpha|^r / |beta|, and checks the inequality per block in log space.
// The structural requirement per word is (2 + 3/(r-2)) p - q >= 0; a word
// violating it leaves xi absent with the failing index recorded.
// ---------------------------------------------------------------------------

struct CaseRecord {
  int sched_index = -1;  // word index in the input schedule
  int p = 0;
  int q = 0;
  int branch = 0;        // 1 when 2p - q >= 0, else 2 (uses the eta bound)
  double lhs_log = 0.0;  // 2 log|lambda_2| - log|lambda_1|
};

struct RegionTestResult {
  std::optional<double> xi;  // uniform bound in (0,1) when the test succeeds
  int worst_k = -1;          // index attaining the sup (or the failing index)
  bool autonomous_fast_path = false;
  std::string note;
  std::vector<CaseRecord> case_trace;
  std::vector<RewriteTerm> rewritten;
};

inline RegionTestResult region_test(std::vector<int> p_seq, std::vector<int> q_seq,
                                    std::complex<double> alpha, std::complex<double> beta,
                                    double r, int M, bool swap_conjugated = false) {
  if (p_seq.size() != q_seq.size())
    throw std::invalid_argument("p and q schedules differ in length");
  if (p_seq.empty()) throw std::invalid_argument("empty schedule");
  if (!(r > 2.0)) throw std::invalid_argument("exponent r must exceed 2");
  // Conjugating every word with the coordinate swap exchanges the roles of
  // the two generators, which on diagonal derivatives exchanges p and q.
  if (swap_conjugated) std::swap(p_seq, q_seq);
  double la = std::abs(alpha), lb = std::abs(beta);
  if (!(la > 0.0 && la < 1.0 && lb > 0.0 && lb <= la))
    throw std::invalid_argument("eigenvalue hypothesis violated: need 0 < |beta| <= |alpha| < 1");
  double log_a = std::log(la), log_b = std::log(lb);
  if (!(r * log_a < log_b))
    throw std::invalid_argument("eigenvalue hypothesis violated: need |alpha|^r < |beta|");
  for (size_t j = 0; j < p_seq.size(); ++j) {
    if (p_seq[j] < 0 || q_seq[j] < 0)
      throw std::invalid_argument("word exponents must be nonnegative");
    if (p_seq[j] == 0 && q_seq[j] == 0)
      throw std::invalid_argument("empty word in the schedule");
  }

  RegionTestResult res;
  bool all_q_zero = true;
  for (int q : q_seq) all_q_zero = all_q_zero && (q == 0);
  if (all_q_zero) {
    res.autonomous_fast_path = true;
    res.note = "autonomous: basin is all of C^2";
    return res;
  }

  // Structural inequality per word of the input schedule. Rewritten blocks
  // satisfy it automatically (their q is 0, or p = M >= q), so the input
  // words are the ones that can fail.
  double coeff = 2.0 + 3.0 / (r - 2.0);
  for (size_t j = 0; j < p_seq.size(); ++j) {
    if (coeff * p_seq[j] - q_seq[j] < 0.0) {
      res.worst_k = static_cast<int>(j);
      res.note = "structural inequality fails";
      return res;
    }
  }

  double log_eta = r * log_a - log_b;  // eta = |alpha|^r / |beta| < 1
  double log_xi = std::max(log_a, log_eta / r);
  double worst = -std::numeric_limits<double>::infinity();
  bool ok = true;
  for (size_t j = 0; j < p_seq.size(); ++j) {
    std::vector<RewriteTerm> terms = rewrite_bounded(p_seq[j], q_seq[j], M);
    for (const RewriteTerm& t : terms) {
      CaseRecord rec;
      rec.sched_index = static_cast<int>(j);
      rec.p = t.p;
      rec.q = t.q;
      rec.branch = (2 * t.p - t.q >= 0) ? 1 : 2;
      rec.lhs_log = (2.0 * t.q - t.p) * log_a + (2.0 * t.p - t.q) * log_b;
      res.case_trace.push_back(rec);
      res.rewritten.push_back(t);
      if (rec.lhs_log > worst) {
        worst = rec.lhs_log;
        res.worst_k = rec.sched_index;
      }
      if (rec.lhs_log > log_xi + 1e-12) ok = false;
    }
  }
  if (ok) res.xi = std::exp(log_xi);
  return res;
}

// ---------------------------------------------------------------------------
// Affine transition recursion for conjugating quadratic-pair words.
//
// Conjugating a mixed F/G word sequence to its normal form transports the
// second component of the conjugation through an affine map per step:
//   choice F:  X -> (beta / alpha^kdeg) X
//   choice G:  X -> X / alpha^(kdeg-1) + 1.
// Under |alpha|^kdeg < |beta| <= |alpha|^(kdeg-1) both forward maps expand,
// so the inverses contract and a backward composition from any anchor point
// produces a seed whose forward orbit stays in a computable ball.
// ---------------------------------------------------------------------------

struct AffineOrbitResult {
  std::complex<double> z0;
  double orbit_bound = 0.0;          // max |X_n| over the checked steps
  int steps_checked = 0;
  double recursion_residual = 0.0;   // max |A_{n+1}(X_n) - X_{n+1}| (shadow mode)
};

struct Z0Result {
  std::complex<double> z0;
  double error_bound = 0.0;  // product of contraction factors x ball diameter
};

namespace detail {

inline void validate_affine_pair(std::complex<double> alpha, std::complex<double> beta, int kdeg) {
  if (kdeg < 2) throw std::invalid_argument("kdeg must be at least 2");
  double la = std::abs(alpha), lb = std::abs(beta);
  if (la <= 0.0 || lb <= 0.0) throw std::invalid_argument("alpha and beta must be nonzero");
  double lo = std::pow(la, kdeg), hi = std::pow(la, kdeg - 1);
  if (!(lo < lb && lb <= hi))
    throw std::invalid_argument("hypothesis violated: need |alpha|^kdeg < |beta| <= |alpha|^(kdeg-1)");
}

inline void validate_choices(const std::string& choices) {
  if (choices.empty()) throw std::invalid_argument("empty choice word");
  for (char c : choices)
    if (c != 'F' && c != 'G') throw std::invalid_argument("choices must be a word over {F,G}");
}

}  // namespace detail

// Radius of the ball that the two inverse maps keep invariant once it holds
// the anchor: the G-inverse z -> alpha^(kdeg-1) (z - 1) needs
// r >= lambda_G / (1 - lambda_G), and the F-inverse only shrinks.
inline double prop12_analytic_bound(std::complex<double> alpha, std::complex<double> beta, int kdeg,
                                    std::complex<double> anchor) {
  detail::validate_affine_pair(alpha, beta, kdeg);
  double lam_g = std::pow(std::abs(alpha), kdeg - 1);
  return std::max(std::abs(anchor), lam_g / (1.0 - lam_g));
}

inline Z0Result prop12_find_z0(const std::string& choices, std::complex<double> alpha,
                               std::complex<double> beta, int kdeg, int depth,
                               std::complex<double> anchor) {
  detail::validate_affine_pair(alpha, beta, kdeg);
  detail::validate_choices(choices);
  if (depth < 1 || depth > static_cast<int>(choices.size()))
    throw std::invalid_argument("depth must lie in [1, length of choices]");
  std::complex<double> inv_f = pow_int(alpha, kdeg) / beta;           // contraction of F-inverse
  std::complex<double> g_scale = pow_int(alpha, kdeg - 1);            // contraction of G-inverse
  double lam_f = std::abs(inv_f), lam_g = std::abs(g_scale);
  std::complex<double> z = anchor;
  double factor = 1.0;
  for (int j = depth - 1; j >= 0; --j) {
    if (choices[static_cast<size_t>(j)] == 'F') {
      z = inv_f * z;
      factor *= lam_f;
    } else {
      z = g_scale * (z - 1.0);
      factor *= lam_g;
    }
  }
  double ball = prop12_analytic_bound(alpha, beta, kdeg, anchor);
  return Z0Result{z, factor * 2.0 * ball};
}

// Literal forward iteration of the recursion in log-polar arithmetic. Both
// forward maps expand, so floating-point deviations from a bounded orbit are
// amplified step by step; this evaluator is faithful to the recursion but
// only trustworthy over moderately many steps.
inline AffineOrbitResult prop12_recursion(const std::string& choices, std::complex<double> alpha,
                                          std::complex<double> beta, int kdeg,
                                          std::complex<double> z0, int N) {
  detail::validate_affine_pair(alpha, beta, kdeg);
  detail::validate_choices(choices);
  if (N < 0) throw std::invalid_argument("negative step count");
  if (N > static_cast<int>(choices.size()))
    throw std::invalid_argument("choice word shorter than the requested step count");
  LogScalar fwd_f = LogScalar::from_complex(beta) / pow_int(LogScalar::from_complex(alpha), kdeg);
  LogScalar inv_g = pow_int(LogScalar::from_complex(alpha), -(static_cast<long long>(kdeg) - 1));
  LogScalar x = LogScalar::from_complex(z0);
  double worst = x.lm;
  for (int n = 0; n < N; ++n) {
    if (choices[static_cast<size_t>(n)] == 'F')
      x = fwd_f * x;
    else
      x = inv_g * x + LogScalar::one();
    worst = std::max(worst, x.lm);
  }
  AffineOrbitResult res;
  res.z0 = z0;
  res.steps_checked = N;
  res.orbit_bound = std::isinf(worst) && worst < 0.0 ? 0.0 : std::exp(std::min(709.0, worst));
  if (worst > 709.0) res.orbit_bound = std::numeric_limits<double>::infinity();
  return res;
}

// Stable evaluation of the bounded orbit: every X_n is recomputed by the
// contracting backward composition of the next `buffer` inverse maps applied
// to the anchor, so errors damp instead of compounding. X_0 equals the
// depth-`buffer` backward seed, and the reported residual measures how well
// consecutive values satisfy the forward recursion.
inline AffineOrbitResult prop12_shadow_orbit(const std::string& choices, std::complex<double> alpha,
                                             std::complex<double> beta, int kdeg,
                                             std::complex<double> anchor, int buffer, int N) {
  detail::validate_affine_pair(alpha, beta, kdeg);
  detail::validate_choices(choices);
  if (buffer < 1) throw std::invalid_argument("buffer must be positive");
  if (N < 0) throw std::invalid_argument("negative step count");
  if (static_cast<long long>(N) + buffer > static_cast<long long>(choices.size()))
    throw std::invalid_argument("choice word shorter than the requested depth");
  std::complex<double> inv_f = pow_int(alpha, kdeg) / beta;
  std::complex<double> g_scale = pow_int(alpha, kdeg - 1);
  std::complex<double> fwd_f = beta / pow_int(alpha, kdeg);
  std::complex<double> inv_a = 1.0 / pow_int(alpha, kdeg - 1);
  auto shadow_at = [&](int n) {
    std::complex<double> z = anchor;
    for (int j = n + buffer - 1; j >= n; --j) {
      if (choices[static_cast<size_t>(j)] == 'F')
        z = inv_f * z;
      else
        z = g_scale * (z - 1.0);
    }
    return z;
  };
  AffineOrbitResult res;
  res.steps_checked = N;
  std::complex<double> prev = shadow_at(0);
  res.z0 = prev;
  res.orbit_bound = std::abs(prev);
  for (int n = 1; n <= N; ++n) {
    std::complex<double> cur = shadow_at(n);
    std::complex<double> pushed = (choices[static_cast<size_t>(n - 1)] == 'F')
                                      ? fwd_f * prev
                                      : inv_a * prev + 1.0;
    res.recursion_residual = std::max(res.recursion_residual, std::abs(pushed - cur));
    res.orbit_bound = std::max(res.orbit_bound, std::abs(cur));
    prev = cur;
  }
  return res;
}

// ---------------------------------------------------------------------------
// Coefficient growth check: a schedule obeying |eta_{n+1}| < M |eta_n|^d with
// M |eta_0| < 1 stays below the tower (M |eta_0|)^(d^n). Verified in log
// space so schedules far below double range are exact.
// ---------------------------------------------------------------------------

struct EtaGrowthReport {
  int violations = 0;
  std::vector<int> indices;
};

inline EtaGrowthReport eta_growth_check(double M, const EtaSchedule& sched, int n_hi) {
  if (!(M > 1.0)) throw std::invalid_argument("growth constant M must exceed 1");
  if (n_hi < 0) throw std::invalid_argument("negative depth");
  MapSequence s(sched, std::max(1, n_hi + 1));
  double log_m_eta0 = std::log(M) + s.eta_at(0).lm;
  if (!(log_m_eta0 < 0.0)) throw std::invalid_argument("need M |eta_0| < 1");
  EtaGrowthReport rep;
  for (int n = 0; n <= n_hi; ++n) {
    double lhs = s.eta_at(n).lm;
    double rhs = std::pow(static_cast<double>(sched.d), n) * log_m_eta0;
    if (!(lhs < rhs)) {
      ++rep.violations;
      rep.indices.push_back(n);
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Pairwise-disjoint translated basins.
//
// The base basin lives inside the closed polydisc of radius R together with
// the open cone where the first coordinate dominates. Swapping the dominant
// axis onto coordinate i (through the k-th slot) and translating the k-th
// coordinate by 3(i-1)R yields k-1 domains; the translation distances and
// the cone dichotomy force pairwise disjointness, which is checked here by
// Monte Carlo membership plus a replay of the interval arithmetic on every
// sampled member.
// ---------------------------------------------------------------------------

struct DisjointReport {
  int domains = 0;
  long long samples = 0;
  long long double_memberships = 0;
  long long undecided = 0;                // (sample, domain) classification pairs
  std::vector<long long> member_counts;
  long long case1 = 0;                    // members whose preimage sits in the polydisc
  long long case2 = 0;                    // members whose preimage is axis-1 dominant
  long long case_violations = 0;
};

// Candidate preimage of w in base coordinates for domain i (1-based,
// i in 1..k-1): undo the k-th-coordinate translation, swap axes i and k,
// then swap axes 1 and k. Domain 1 is the base basin itself.
inline Cvec disjoint_preimage(const Cvec& w, int i, double R) {
  int k = w.k;
  if (i < 1 || i > k - 1) throw std::invalid_argument("domain index out of range");
  Cvec u = w;
  u[k - 1] -= 3.0 * (i - 1) * R;
  std::swap(u[i - 1], u[k - 1]);
  std::swap(u[0], u[k - 1]);
  return u;
}

inline DisjointReport disjoint_shorts(const MapSequence& s, double R, long long samples,
                                      uint64_t seed) {
  int k = s.dim();
  if (k < 3) throw std::invalid_argument("disjoint construction needs k >= 3");
  if (!(R > 1.0)) throw std::invalid_argument("filtration radius must exceed 1");
  ClassifyParams params(R, 0.5, 200);
  FiltrationSpec base_f = s.default_filtration(R);

  // Base containment probe: attracted points must sit in the closed polydisc
  // or the axis-1 cone; a plus-cone member would break the construction.
  for (int t = 0; t < 400; ++t) {
    Rng rng = Rng::for_sample(seed ^ 0x5afe5afeULL, static_cast<uint64_t>(t));
    Cvec z(k);
    for (int i = 0; i < k; ++i) z[i] = rng.disc(1.2);
    if (classify_point(s, z, params).kind != OrbitKind::Attracted) continue;
    RegionTag tag = classify_filtration(z, base_f);
    if (tag.region == Region::Plus)
      throw std::runtime_error(strprintf(
          "base containment check failed at (%s, %s, ...)",
          fmt_double(z[0].real()).c_str(), fmt_double(z[1].real()).c_str()));
  }

  DisjointReport rep;
  rep.domains = k - 1;
  rep.samples = samples;
  rep.member_counts.assign(static_cast<size_t>(k - 1), 0);
  double box = 8.0 * R;
  for (long long t = 0; t < samples; ++t) {
    Rng rng = Rng::for_sample(seed, static_cast<uint64_t>(t));
    Cvec w(k);
    // Uniform draws over the box rarely hit any basin, which would leave the
    // overlap check vacuous; alternate them with basin-scale points pushed
    // forward into a random domain's coordinates (still inside the box).
    bool targeted = (t % 2 == 1);
    if (targeted) {
      int dom = 1 + static_cast<int>(rng.below(static_cast<uint64_t>(k - 1)));
      Cvec u(k);
      if (rng.below(2) == 0) {
        for (int i = 0; i < k; ++i) u[i] = rng.disc(2.0);
      } else {
        u[0] = R * (1.0 + rng.uniform()) * rng.unit_circle();
        for (int i = 1; i < k; ++i) u[i] = rng.disc(1.2);
      }
      std::swap(u[0], u[k - 1]);
      std::swap(u[dom - 1], u[k - 1]);
      u[k - 1] += 3.0 * (dom - 1) * R;
      if (sup_norm(u) < box)
        w = u;
      else
        targeted = false;
    }
    if (!targeted)
      for (int i = 0; i < k; ++i) w[i] = rng.disc(box);
    int memberships = 0;
    for (int dom = 1; dom <= k - 1; ++dom) {
      Cvec u = disjoint_preimage(w, dom, R);
      OrbitClass oc = classify_point(s, u, params);
      if (oc.kind == OrbitKind::Undecided) {
        ++rep.undecided;
        continue;
      }
      if (oc.kind != OrbitKind::Attracted) continue;
      ++memberships;
      ++rep.member_counts[static_cast<size_t>(dom - 1)];

      // Replay of the separation arithmetic in the original coordinates.
      RegionTag tag = classify_filtration(u, base_f);
      if (tag.region == Region::Interior) {
        ++rep.case1;
        // Preimage in the polydisc pins the translated coordinate near its
        // own center, hence at least 2R away from every other center.
        for (int other = 1; other <= k - 1; ++other) {
          if (other == dom) continue;
          double dist = std::abs(w[k - 1] - std::complex<double>(3.0 * (other - 1) * R));
          if (dist < 2.0 * R - 1e-9) ++rep.case_violations;
        }
      } else if (tag.region == Region::Minus && tag.dominant_axis == 1) {
        ++rep.case2;
        // Axis-1 dominance of the preimage says |w_dom| beats the radius and
        // every other relevant coordinate of w.
        double lead = std::abs(w[dom - 1]);
        bool ok = lead >= R - 1e-9;
        double shifted = std::abs(w[k - 1] - std::complex<double>(3.0 * (dom - 1) * R));
        ok = ok && lead >= shifted - 1e-9;
        for (int m = 1; m <= k; ++m) {
          if (m == dom || m == k) continue;
          ok = ok && lead >= std::abs(w[m - 1]) - 1e-9;
        }
        if (!ok) ++rep.case_violations;
      } else {
        throw std::runtime_error("base containment check failed on a sampled member");
      }
    }
    if (memberships >= 2) ++rep.double_memberships;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Variety-avoidance sets.
//
// Splitting z = (z', z'') with z' the first two coordinates, the tube
// A_eps = { ||z'|| < eps } and the cone B_eps = { ||z'|| < eps ||z''|| }
// absorb a codimension-two variety after a linear change of coordinates.
// Translating the second coordinate by 2R then pushes both sets into the
// escaping cones of the radius-R filtration, so the basin never meets the
// translated image.
// ---------------------------------------------------------------------------

struct VarietySets {
  int k = 3;
  double epsilon = 0.1;
  double R = 2.0;
  AffineTranslate shift;

  VarietySets(int dim, double eps, double radius) : k(dim), epsilon(eps), R(radius) {
    check_dim(dim);
    if (dim < 3) throw std::invalid_argument("variety sets need k >= 3");
    if (!(radius > 1.0)) throw std::invalid_argument("radius must exceed 1");
    if (!(eps > 0.0 && eps < 1.0 / radius))
      throw std::invalid_argument("epsilon must lie in (0, 1/R)");
    shift = AffineTranslate{dim, 2, std::complex<double>(2.0 * radius, 0.0)};
  }
};

inline double head_sup(const Cvec& z) { return std::max(std::abs(z[0]), std::abs(z[1])); }

inline double tail_sup(const Cvec& z) {
  double m = 0.0;
  for (int i = 2; i < z.k; ++i) m = std::max(m, std::abs(z[i]));
  return m;
}

inline bool in_A(const VarietySets& vs, const Cvec& z) {
  if (z.k != vs.k) throw std::invalid_argument("dimension mismatch");
  return head_sup(z) < vs.epsilon;
}

inline bool in_B(const VarietySets& vs, const Cvec& z) {
  if (z.k != vs.k) throw std::invalid_argument("dimension mismatch");
  return head_sup(z) < vs.epsilon * tail_sup(z);
}

// Membership in the translated image of A union B.
inline bool in_shifted_tube(const VarietySets& vs, const Cvec& w) {
  Cvec u = apply_inverse(MapSpec{vs.shift}, w);
  return in_A(vs, u) || in_B(vs, u);
}

// Draws alternately from the tube and the cone; cone draws scale the head
// coordinates below eps times the sampled tail sup.
inline Cvec default_variety_sample(const VarietySets& vs, Rng& rng, uint64_t index) {
  Cvec z(vs.k);
  for (int i = 2; i < vs.k; ++i) z[i] = rng.disc(4.0 * vs.R);
  bool tube = (index % 2 == 0);
  double head_cap = tube ? vs.epsilon : vs.epsilon * tail_sup(z);
  z[0] = rng.disc(0.999 * head_cap);
  z[1] = rng.disc(0.999 * head_cap);
  return z;
}

struct AvoidanceReport {
  int samples = 0;
  int violations = 0;
  int case1 = 0;  // samples inside the tube A
  int case2 = 0;  // samples only in the cone B
};

inline AvoidanceReport variety_avoidance_check(const VarietySets& vs,
                                               const std::function<Cvec(Rng&, uint64_t)>& sampler,
                                               const FiltrationSpec& f, int samples,
                                               uint64_t seed) {
  if (f.k != vs.k) throw std::invalid_argument("dimension mismatch");
  AvoidanceReport rep;
  rep.samples = samples;
  MapSpec shift = vs.shift;
  for (int t = 0; t < samples; ++t) {
    Rng rng = Rng::for_sample(seed, static_cast<uint64_t>(t));
    Cvec z = sampler(rng, static_cast<uint64_t>(t));
    if (in_A(vs, z))
      ++rep.case1;
    else if (in_B(vs, z))
      ++rep.case2;
    else
      throw std::invalid_argument("sampler produced a point outside the avoidance sets");
    Cvec w = apply_map(shift, z);
    RegionTag tag = classify_filtration(w, f);
    if (tag.region != Region::Plus) ++rep.violations;
  }
  return rep;
}

// Search for a linear change of coordinates taking the axis variety
// {z_1 = z_2 = 0} into A_eps union B_eps; the identity already works for the
// axis variety, so it is tried first, followed by random perturbations.
inline Mat find_variety_normalizer(const VarietySets& vs, int trials, int probe_samples,
                                   uint64_t seed) {
  auto admissible = [&](const Mat& L) {
    for (int t = 0; t < probe_samples; ++t) {
      Rng rng = Rng::for_sample(seed ^ 0xfeedULL, static_cast<uint64_t>(t));
      Cvec v(vs.k);
      for (int i = 2; i < vs.k; ++i) v[i] = rng.disc(5.0 * vs.R);
      Cvec image(vs.k);
      for (int i = 0; i < vs.k; ++i) {
        std::complex<double> acc = 0.0;
        for (int j = 0; j < vs.k; ++j) acc += L.at(i, j) * v[j];
        image[i] = acc;
      }
      if (!in_A(vs, image) && !in_B(vs, image)) return false;
    }
    return true;
  };
  Mat id = Mat::identity(vs.k);
  if (admissible(id)) return id;
  for (int c = 0; c < trials; ++c) {
    Rng rng = Rng::for_sample(seed, static_cast<uint64_t>(c));
    Mat L = Mat::identity(vs.k);
    for (int i = 0; i < 2; ++i)
      for (int j = 2; j < vs.k; ++j) L.at(i, j) = rng.disc(0.5 * vs.epsilon);
    if (admissible(L)) return L;
  }
  throw std::runtime_error("no linear normalizer found for the axis variety");
}

// ---------------------------------------------------------------------------
// Entire-basin-inside-sublevel inclusion.
//
// Scaling the autonomous basin of the constant-coefficient step by a lands
// it inside the sub-level set {psi < log a} of the shifted-tower potential;
// sampled attracted points must keep psi below log a up to tolerance.
// ---------------------------------------------------------------------------

struct InclusionReport {
  int members = 0;
  int violations = 0;
  int unconverged = 0;
  double worst_gap = -std::numeric_limits<double>::infinity();  // max psi - log a
};

inline InclusionReport fb_inside_short(double a, int k, int samples, uint64_t seed,
                                       double tol = 1e-6) {
  validate_tower_base(a);
  check_dim(k);
  MapSequence autonomous(Autonomous{EtaStep{k, 2, LogScalar::from_real(a)}}, 400);
  MapSequence tower(EtaSchedule{k, 2, ShiftedTower{a}}, 60);
  ClassifyParams params(std::max(2.0, 1.0 + a + 0.1), 0.5, 200);
  double log_a = std::log(a);
  InclusionReport rep;
  long long attempts = 0;
  const long long budget = 1000000;
  while (rep.members < samples) {
    if (attempts >= budget)
      throw std::runtime_error("sampler failure: no members found within the attempt budget");
    Rng rng = Rng::for_sample(seed, static_cast<uint64_t>(attempts));
    ++attempts;
    Cvec z(k);
    for (int i = 0; i < k; ++i) z[i] = rng.disc(1.5);
    if (classify_point(autonomous, z, params).kind != OrbitKind::Attracted) continue;
    ++rep.members;
    Cvec scaled(k);
    for (int i = 0; i < k; ++i) scaled[i] = a * z[i];
    PotentialEstimate est = psi_limit(tower, scaled, 1e-9, 60);
    if (!est.converged) {
      ++rep.unconverged;
      continue;
    }
    double gap = est.value - log_a;
    rep.worst_gap = std::max(rep.worst_gap, gap);
    if (gap >= tol) ++rep.violations;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Iterated-block growth of shift-like maps on the escaping cones.
//
// For a point of the plus cones at radius R, applying the map in blocks
// multiplies the norm like ||z||^(d^n) up to the factor (|delta|/2) per
// accumulated degree: in log space,
//   log ||S^(block n)(z)|| >= (sum_{i<n} d^i) log(|delta|/2) + d^n log ||z||.
// The block length realizing this is a parameter; the check reports which
// block it ran with so callers can record the working convention.
// ---------------------------------------------------------------------------

struct GrowthReport {
  int samples = 0;
  int violations = 0;
  int block = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
};

inline GrowthReport green_growth_check(const ShiftLike& sl, double R, int block, int n_hi,
                                       int samples, uint64_t seed) {
  if (!(R > 1.0)) throw std::invalid_argument("filtration radius must exceed 1");
  if (block < 1) throw std::invalid_argument("block must be positive");
  if (n_hi < 1) throw std::invalid_argument("need at least one level");
  FiltrationSpec f = FiltrationSpec::shift_type(sl.k, sl.nu, R);
  MapSpec step = sl;
  double log_half_delta = std::log(std::abs(sl.delta) / 2.0);
  GrowthReport rep;
  rep.samples = samples;
  rep.block = block;
  for (int t = 0; t < samples; ++t) {
    Rng rng = Rng::for_sample(seed, static_cast<uint64_t>(t));
    int axis = sl.k - sl.nu + 1 + static_cast<int>(rng.below(static_cast<uint64_t>(sl.nu)));
    double lead = R * (1.0 + 1.5 * rng.uniform());
    Cvec z(sl.k);
    for (int i = 0; i < sl.k; ++i) z[i] = rng.disc(0.95 * lead);
    z[axis - 1] = lead * rng.unit_circle();
    if (classify_filtration(z, f).region != Region::Plus)
      throw std::logic_error("cone sampler left the plus region");
    double log_z = log_sup_norm(z);
    LogVec state = to_log(z);
    double dn = 1.0;
    double geom = 0.0;  // sum_{i<n} d^i
    for (int n = 1; n <= n_hi; ++n) {
      for (int b = 0; b < block; ++b) state = apply_map(step, state);
      geom += dn;
      dn *= sl.d;
      double lhs = log_sup_norm(state);
      double rhs = geom * log_half_delta + dn * log_z;
      double margin = lhs - rhs;
      rep.worst_margin = std::min(rep.worst_margin, margin);
      if (margin < -1e-9) ++rep.violations;
    }
  }
  return rep;
}

}  // namespace shortck
