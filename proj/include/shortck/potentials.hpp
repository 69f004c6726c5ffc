#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>

#include "shortck/sequence.hpp"

namespace shortck {

// One potential evaluation: the d^(-n)-normalized log of the orbit scale,
// with convergence bookkeeping.
struct PotentialEstimate {
  double value = 0.0;
  int depth_used = 0;
  double cauchy_gap = 0.0;
  bool converged = false;
  double envelope_value = 0.0;
};

// Closed form of the geometric tail sum_{j >= n} d^{-(j+1)} log 2.
inline double envelope_tail(int d, int n) {
  return std::log(2.0) / (std::pow(static_cast<double>(d), n) * (d - 1.0));
}

namespace detail {

inline const EtaSchedule& require_eta_schedule(const MapSequence& s) {
  const auto* e = std::get_if<EtaSchedule>(&s.gen);
  if (e == nullptr) throw std::domain_error("potentials require an eta schedule");
  return *e;
}

}  // namespace detail

// Incremental evaluator for the scale function of the triangular family:
// after advancing to stage n it holds F(n)(z) in log-polar form, and the
// stage scale is max(sup norm of the iterate, |eta_n|). Entirely immune to
// overflow and underflow.
class PotentialTrack {
 public:
  PotentialTrack(const MapSequence& s, const Cvec& z) : seq_(&s), state_(to_log(z)) {
    detail::require_eta_schedule(s);
    if (z.k != s.dim()) throw std::invalid_argument("dimension mismatch");
  }

  void advance() {
    ++n_;
    seq_->apply_step(state_, n_);
  }

  int depth() const { return n_; }

  // log phi_n = log max(sup norm of F(n)(z), |eta_n|)
  double log_phi() const {
    if (n_ < 0) throw std::logic_error("advance before reading");
    return std::max(log_sup_norm(state_), seq_->eta_at(n_).lm);
  }

  double psi() const {
    return log_phi() / std::pow(static_cast<double>(degree()), n_);
  }

  double envelope() const { return psi() + envelope_tail(degree(), n_); }

  const LogVec& state() const { return state_; }

 private:
  int degree() const { return seq_->degree(); }

  const MapSequence* seq_;
  LogVec state_;
  int n_ = -1;
};

inline LogScalar phi_n(const MapSequence& s, const Cvec& z, int n) {
  PotentialTrack t(s, z);
  for (int i = 0; i <= n; ++i) t.advance();
  return LogScalar::from_log(t.log_phi());
}

inline double psi_n(const MapSequence& s, const Cvec& z, int n) {
  PotentialTrack t(s, z);
  for (int i = 0; i <= n; ++i) t.advance();
  return t.psi();
}

inline double psi_envelope(const MapSequence& s, const Cvec& z, int n) {
  PotentialTrack t(s, z);
  for (int i = 0; i <= n; ++i) t.advance();
  return t.envelope();
}

// Iterates psi_n until three consecutive Cauchy gaps drop below tol (a single
// small gap can be a d^(-n) plateau) or the depth cap is reached. The sign of
// the returned value decides basin membership.
inline PotentialEstimate psi_limit(const MapSequence& s, const Cvec& z, double tol, int n_max) {
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (n_max < 1) throw std::invalid_argument("n_max must be at least 1");
  PotentialTrack t(s, z);
  t.advance();
  double prev = t.psi();
  PotentialEstimate est;
  est.value = prev;
  est.depth_used = 0;
  est.envelope_value = t.envelope();
  int streak = 0;
  for (int n = 1; n <= n_max; ++n) {
    t.advance();
    double cur = t.psi();
    double gap = std::abs(cur - prev);
    streak = (gap < tol) ? streak + 1 : 0;
    est.value = cur;
    est.depth_used = n;
    est.cauchy_gap = gap;
    est.envelope_value = t.envelope();
    prev = cur;
    if (streak >= 3) {
      est.converged = true;
      break;
    }
  }
  return est;
}

struct GreenParams {
  int block = 1;       // map applications per normalization level
  int n_max = 30;      // levels
  double tolerance = 1e-9;

  GreenParams() = default;
  GreenParams(int blk, int levels, double tol) : block(blk), n_max(levels), tolerance(tol) {
    if (blk < 1) throw std::invalid_argument("block must be at least 1");
    if (levels < 1) throw std::invalid_argument("n_max must be at least 1");
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  }
};

// The escape-rate normalization uses nu forward steps per level, and k - nu
// inverse steps per level for the backward function.
inline GreenParams default_green_plus(const ShiftLike& s) { return GreenParams(s.nu, 30, 1e-9); }
inline GreenParams default_green_minus(const ShiftLike& s) {
  return GreenParams(s.k - s.nu, 30, 1e-9);
}

namespace detail {

template <class Step>
PotentialEstimate green_limit(const ShiftLike& s, const Cvec& z, const GreenParams& gp,
                              const Step& step_once) {
  LogVec state = to_log(z);
  double dn = 1.0;  // d^n
  PotentialEstimate est;
  est.value = std::max(0.0, log_sup_norm(state));
  est.depth_used = 0;
  est.envelope_value = est.value;
  double prev = est.value;
  int streak = 0;
  for (int n = 1; n <= gp.n_max; ++n) {
    for (int b = 0; b < gp.block; ++b) step_once(state);
    dn *= static_cast<double>(s.d);
    double cur = std::max(0.0, log_sup_norm(state)) / dn;
    double gap = std::abs(cur - prev);
    streak = (gap < gp.tolerance) ? streak + 1 : 0;
    est.value = cur;
    est.depth_used = n;
    est.cauchy_gap = gap;
    est.envelope_value = cur;
    prev = cur;
    if (streak >= 3) {
      est.converged = true;
      break;
    }
  }
  return est;
}

}  // namespace detail

inline PotentialEstimate green_plus(const ShiftLike& s, const Cvec& z, const GreenParams& gp) {
  MapSpec m = s;
  return detail::green_limit(s, z, gp, [&](LogVec& st) { st = apply_map(m, st); });
}

inline PotentialEstimate green_minus(const ShiftLike& s, const Cvec& z, const GreenParams& gp) {
  MapSpec m = s;
  return detail::green_limit(s, z, gp, [&](LogVec& st) { st = apply_inverse(m, st); });
}

// Lower bound constant from the escape region: delta-tilde rescales the
// sup norm so the growth estimate applies from level zero.
inline double delta_tilde(const ShiftLike& s) {
  double half = std::abs(s.delta) / 2.0;
  return std::min(1.0, std::pow(half, 1.0 / (s.d - 1.0)));
}

using PotentialFn = std::function<std::optional<double>(const Cvec&)>;

struct SubaverageReport {
  double margin = 0.0;       // circle average minus center value
  double center_value = 0.0;
  int samples = 0;
};

// Plurisubharmonicity predicts a nonnegative margin (up to tolerance) on
// every complex line: the circle average dominates the center value.
inline SubaverageReport subaverage_check(const PotentialFn& f, const Cvec& center,
                                         const Cvec& direction, double radius, int m) {
  if (m < 16) throw std::invalid_argument("need at least 16 circle samples");
  if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
  std::optional<double> c0 = f(center);
  if (!c0) throw std::runtime_error("insufficient convergence");
  double acc = 0.0;
  for (int j = 0; j < m; ++j) {
    double th = kTwoPi * static_cast<double>(j) / static_cast<double>(m);
    std::complex<double> rot = std::polar(radius, th);
    Cvec p = center + rot * direction;
    std::optional<double> v = f(p);
    if (!v) throw std::runtime_error("insufficient convergence");
    acc += *v;
  }
  SubaverageReport rep;
  rep.center_value = *c0;
  rep.samples = m;
  rep.margin = acc / static_cast<double>(m) - *c0;
  return rep;
}

}  // namespace shortck
