#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "shortck/filtration.hpp"
#include "shortck/maps.hpp"
#include "shortck/rng.hpp"
#include "shortck/util.hpp"

namespace shortck {

// eta_n = a^(d^n), the doubly exponential coefficient decay.
struct PowerTower {
  double a = 0.5;
};

// eta_n = a^(2^n + 1); arises from rescaling an autonomous quadratic map.
struct ShiftedTower {
  double a = 0.5;
};

struct CustomEtas {
  std::vector<LogScalar> etas;
};

struct EtaSchedule {
  int k = 3;
  int d = 2;
  std::variant<PowerTower, ShiftedTower, CustomEtas> rule = PowerTower{};
};

// Word in the quadratic pair F = (az1 + z2^2, bz2), G = (bz1, az2 + z1^kdeg);
// step n applies G q[n] times, then F p[n] times.
struct HQSchedule {
  std::complex<double> alpha;
  std::complex<double> beta;
  std::vector<int> p;
  std::vector<int> q;
  int kdeg = 2;
};

struct ExplicitList {
  std::vector<MapSpec> maps;
};

struct Autonomous {
  MapSpec map;
};

inline void validate_tower_base(double a) {
  if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("a must lie in (0,1)");
}

class MapSequence {
 public:
  std::variant<ExplicitList, EtaSchedule, HQSchedule, Autonomous> gen;
  int n_max = 60;

  MapSequence() = default;
  MapSequence(EtaSchedule s, int cap = 60) : gen(std::move(s)), n_max(cap) {
    const auto& e = std::get<EtaSchedule>(gen);
    check_dim(e.k);
    if (e.d < 2) throw std::invalid_argument("degree d must be at least 2");
    if (const auto* t = std::get_if<PowerTower>(&e.rule)) validate_tower_base(t->a);
    if (const auto* t = std::get_if<ShiftedTower>(&e.rule)) {
      validate_tower_base(t->a);
      if (e.d != 2) throw std::invalid_argument("the shifted tower schedule requires d = 2");
    }
    if (const auto* c = std::get_if<CustomEtas>(&e.rule))
      for (const LogScalar& eta : c->etas)
        if (eta.is_zero()) throw std::invalid_argument("eta must be nonzero");
  }
  MapSequence(ExplicitList s, int cap = 60) : gen(std::move(s)), n_max(cap) {}
  MapSequence(HQSchedule s, int cap = 60) : gen(std::move(s)), n_max(cap) {
    const auto& h = std::get<HQSchedule>(gen);
    if (h.p.size() != h.q.size()) throw std::invalid_argument("p and q schedules differ in length");
    if (h.alpha == std::complex<double>(0.0) || h.beta == std::complex<double>(0.0))
      throw std::invalid_argument("alpha and beta must be nonzero");
    if (h.kdeg < 1) throw std::invalid_argument("kdeg must be positive");
    for (size_t i = 0; i < h.p.size(); ++i)
      if (h.p[i] < 0 || h.q[i] < 0) throw std::invalid_argument("word exponents must be nonnegative");
  }
  MapSequence(Autonomous s, int cap = 60) : gen(std::move(s)), n_max(cap) {}

  int dim() const {
    if (const auto* e = std::get_if<EtaSchedule>(&gen)) return e->k;
    if (std::get_if<HQSchedule>(&gen)) return 2;
    if (const auto* a = std::get_if<Autonomous>(&gen)) return map_dim(a->map);
    const auto& l = std::get<ExplicitList>(gen);
    if (l.maps.empty()) throw std::invalid_argument("empty map list");
    return map_dim(l.maps.front());
  }

  int degree() const {
    if (const auto* e = std::get_if<EtaSchedule>(&gen)) return e->d;
    if (const auto* h = std::get_if<HQSchedule>(&gen)) return std::max(2, h->kdeg);
    if (const auto* a = std::get_if<Autonomous>(&gen)) return std::max(1, map_degree(a->map));
    int d = 1;
    for (const auto& m : std::get<ExplicitList>(gen).maps) d = std::max(d, map_degree(m));
    return d;
  }

  // Number of defined steps; schedules given by a rule have no intrinsic end.
  int length() const {
    if (const auto* l = std::get_if<ExplicitList>(&gen)) return static_cast<int>(l->maps.size());
    if (const auto* h = std::get_if<HQSchedule>(&gen)) return static_cast<int>(h->p.size());
    if (const auto* e = std::get_if<EtaSchedule>(&gen))
      if (const auto* c = std::get_if<CustomEtas>(&e->rule)) return static_cast<int>(c->etas.size());
    return INT32_MAX;
  }

  LogScalar eta_at(int n) const {
    const auto* e = std::get_if<EtaSchedule>(&gen);
    if (e == nullptr) throw std::domain_error("sequence has no eta schedule");
    if (n < 0) throw std::invalid_argument("negative step index");
    if (const auto* t = std::get_if<PowerTower>(&e->rule))
      return LogScalar::from_log(std::pow(static_cast<double>(e->d), n) * std::log(t->a));
    if (const auto* t = std::get_if<ShiftedTower>(&e->rule))
      return LogScalar::from_log((std::pow(2.0, n) + 1.0) * std::log(t->a));
    const auto& c = std::get<CustomEtas>(e->rule);
    if (n >= static_cast<int>(c.etas.size())) throw std::out_of_range("custom eta schedule exhausted");
    return c.etas[static_cast<size_t>(n)];
  }

  MapSpec map_at(int n) const {
    if (n < 0) throw std::invalid_argument("negative step index");
    if (const auto* e = std::get_if<EtaSchedule>(&gen)) return EtaStep{e->k, e->d, eta_at(n)};
    if (const auto* a = std::get_if<Autonomous>(&gen)) return a->map;
    if (const auto* l = std::get_if<ExplicitList>(&gen)) {
      if (n >= static_cast<int>(l->maps.size())) throw std::out_of_range("map list exhausted");
      return l->maps[static_cast<size_t>(n)];
    }
    throw std::domain_error("step is a composite word; use apply_step");
  }

  template <class S>
  void apply_step(VecT<S>& z, int n) const {
    if (const auto* h = std::get_if<HQSchedule>(&gen)) {
      if (n < 0 || n >= static_cast<int>(h->p.size())) throw std::out_of_range("schedule exhausted");
      MapSpec fg = HenonG{h->alpha, h->beta, h->kdeg};
      MapSpec ff = HenonF{h->alpha, h->beta};
      for (int r = 0; r < h->q[static_cast<size_t>(n)]; ++r) z = apply_map(fg, z);
      for (int r = 0; r < h->p[static_cast<size_t>(n)]; ++r) z = apply_map(ff, z);
      return;
    }
    z = apply_map(map_at(n), z);
  }

  template <class S>
  void apply_step_inverse(VecT<S>& z, int n) const {
    if (const auto* h = std::get_if<HQSchedule>(&gen)) {
      if (n < 0 || n >= static_cast<int>(h->p.size())) throw std::out_of_range("schedule exhausted");
      MapSpec fg = HenonG{h->alpha, h->beta, h->kdeg};
      MapSpec ff = HenonF{h->alpha, h->beta};
      for (int r = 0; r < h->p[static_cast<size_t>(n)]; ++r) z = apply_inverse(ff, z);
      for (int r = 0; r < h->q[static_cast<size_t>(n)]; ++r) z = apply_inverse(fg, z);
      return;
    }
    z = apply_inverse(map_at(n), z);
  }

  FiltrationSpec default_filtration(double R) const {
    if (const auto* e = std::get_if<EtaSchedule>(&gen)) return FiltrationSpec::eta_default(e->k, R);
    if (const auto* a = std::get_if<Autonomous>(&gen)) {
      if (const auto* s = std::get_if<ShiftLike>(&a->map))
        return FiltrationSpec::shift_type(s->k, s->nu, R);
      if (const auto* s = std::get_if<EtaStep>(&a->map))
        return FiltrationSpec::eta_default(s->k, R);
    }
    return FiltrationSpec::eta_default(dim(), R);
  }

  std::string describe() const {
    if (const auto* e = std::get_if<EtaSchedule>(&gen)) {
      if (const auto* t = std::get_if<PowerTower>(&e->rule))
        return strprintf("power_tower a=%s k=%d d=%d", fmt_double(t->a).c_str(), e->k, e->d);
      if (const auto* t = std::get_if<ShiftedTower>(&e->rule))
        return strprintf("shifted_tower a=%s k=%d", fmt_double(t->a).c_str(), e->k);
      return strprintf("custom_etas count=%d k=%d d=%d", length(), e->k, e->d);
    }
    if (const auto* h = std::get_if<HQSchedule>(&gen))
      return strprintf("hq terms=%zu kdeg=%d", h->p.size(), h->kdeg);
    if (std::get_if<Autonomous>(&gen)) return "autonomous";
    return strprintf("explicit count=%d", length());
  }
};

struct OrbitRecord {
  std::vector<Cvec> points;       // seed plus images while raw doubles can hold them
  std::optional<int> overflow_at; // first step index whose image left double range upward
  std::vector<double> log_norms;  // log sup norm at every step, valid past overflow
};

namespace detail {

// Hybrid stepper: raw complex arithmetic while magnitudes sit comfortably in
// double range, promoted once to log-polar when the next step could leave it.
struct HybridState {
  bool logmode = false;
  Cvec cz;
  LogVec lz;

  explicit HybridState(const Cvec& z) : cz(z), lz(z.k) {}

  double log_sup() const { return logmode ? log_sup_norm(lz) : log_sup_norm(cz); }

  void promote() {
    if (!logmode) {
      lz = to_log(cz);
      logmode = true;
    }
  }

  void maybe_promote(int degree) {
    if (logmode) return;
    double ls = log_sup();
    if (ls * std::max(1, degree) > 650.0 || ls < -230.0) promote();
  }

  void step(const MapSequence& s, int n) {
    maybe_promote(s.degree());
    if (logmode) {
      s.apply_step(lz, n);
      return;
    }
    Cvec saved = cz;
    s.apply_step(cz, n);
    if (!all_finite(cz)) {  // missed prediction; redo in log form
      cz = saved;
      promote();
      s.apply_step(lz, n);
    }
  }

  bool raw_representable() const { return !logmode || log_sup_norm(lz) <= 230.0; }

  Cvec as_cvec() const { return logmode ? to_cvec(lz) : cz; }
};

}  // namespace detail

inline OrbitRecord orbit(const MapSequence& s, const Cvec& z, int n) {
  if (z.k != s.dim()) throw std::invalid_argument("dimension mismatch");
  if (n < 0) throw std::invalid_argument("negative orbit depth");
  if (n > s.n_max) throw std::invalid_argument("orbit depth exceeds the sequence cap");
  OrbitRecord rec;
  detail::HybridState st(z);
  rec.points.push_back(z);
  rec.log_norms.push_back(st.log_sup());
  for (int i = 0; i <= n; ++i) {
    st.step(s, i);
    rec.log_norms.push_back(st.log_sup());
    if (!rec.overflow_at) {
      if (st.raw_representable())
        rec.points.push_back(st.as_cvec());
      else
        rec.overflow_at = i;
    }
  }
  return rec;
}

// Transition map between stages: applies steps m+1, ..., n in order, so that
// the full composition through stage n factors as this segment after the
// composition through stage m. Pass m = -1 for the full composition.
// Returns nothing when the value leaves double range.
inline std::optional<Cvec> compose_segment(const MapSequence& s, int m, int n, Cvec z) {
  if (m < -1 || n < m) throw std::invalid_argument("segment indices out of order");
  for (int i = m + 1; i <= n; ++i) {
    s.apply_step(z, i);
    if (!all_finite(z)) return std::nullopt;
    double ls = log_sup_norm(z);
    if (ls > 230.0) return std::nullopt;
  }
  return z;
}

// Diagonal of the derivative at the origin of the composition through step
// `upto`, in log-polar form. Only defined when every step fixes the origin
// with a diagonal linear part.
inline std::vector<LogScalar> jacobian_origin(const MapSequence& s, int upto) {
  int k = s.dim();
  std::vector<LogScalar> diag(static_cast<size_t>(k), LogScalar::one());
  for (int n = 0; n <= upto; ++n) {
    if (const auto* h = std::get_if<HQSchedule>(&s.gen)) {
      if (n >= static_cast<int>(h->p.size())) throw std::out_of_range("schedule exhausted");
      LogScalar la = LogScalar::from_complex(h->alpha);
      LogScalar lb = LogScalar::from_complex(h->beta);
      int p = h->p[static_cast<size_t>(n)];
      int q = h->q[static_cast<size_t>(n)];
      diag[0] = diag[0] * pow_int(la, p) * pow_int(lb, q);
      diag[1] = diag[1] * pow_int(la, q) * pow_int(lb, p);
      continue;
    }
    MapSpec m = s.map_at(n);
    if (!fixes_origin(m)) throw std::domain_error("map does not fix the origin");
    Mat lp = linear_part(m);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        if (i != j && lp.at(i, j) != std::complex<double>(0.0))
          throw std::domain_error("linear part at the origin is not diagonal");
    for (int i = 0; i < k; ++i) diag[static_cast<size_t>(i)] =
        diag[static_cast<size_t>(i)] * LogScalar::from_complex(lp.at(i, i));
  }
  return diag;
}

// Verifies the rescaling identity that generates the shifted tower schedule:
// the step with eta_n = a^(2^n + 1) equals s_{a^(2^(n+1))} o F_a o s_{a^(-2^n)}
// where s_c is the coordinate scaling and F_a the autonomous step. Both sides
// are evaluated as floating-point programs in log-polar arithmetic; the
// return value is the largest relative gap seen.
inline double scaling_conjugation_check(double a, int k, int n_hi, int samples, uint64_t seed) {
  validate_tower_base(a);
  check_dim(k);
  double worst = 0.0;
  for (int n = 0; n <= n_hi; ++n) {
    // 2^n * log(a) is an exact double product, so the three scalings below
    // share one exact term and the two evaluation paths round identically
    // up to a few ulps of the shared exponent.
    double e = std::pow(2.0, n) * std::log(a);
    LogScalar eta_n = LogScalar::from_log(e + std::log(a));
    LogScalar up = LogScalar::from_log(-e);
    LogScalar down = LogScalar::from_log(2.0 * e);
    LogScalar la = LogScalar::from_real(a);
    MapSpec direct = EtaStep{k, 2, eta_n};
    MapSpec auton = EtaStep{k, 2, la};
    for (int t = 0; t < samples; ++t) {
      Rng rng = Rng::for_sample(seed, static_cast<uint64_t>(n) * 100003ull + static_cast<uint64_t>(t));
      LogVec z(k);
      for (int i = 0; i < k; ++i) z[i] = LogScalar::from_complex(rng.disc(1.0));
      LogVec lhs = apply_map(direct, z);
      LogVec rhs = z;
      for (int i = 0; i < k; ++i) rhs[i] = up * rhs[i];
      rhs = apply_map(auton, rhs);
      for (int i = 0; i < k; ++i) rhs[i] = down * rhs[i];
      for (int i = 0; i < k; ++i) worst = std::max(worst, relative_gap(lhs[i], rhs[i]));
    }
  }
  return worst;
}

// General form: full k-by-k derivative at the origin of the composition, for
// families (like the triangular step) whose linear part is not diagonal.
// Raw complex entries, so exponents must stay within double range.
inline Mat jacobian_origin_matrix(const MapSequence& s, int upto) {
  int k = s.dim();
  Mat j = Mat::identity(k);
  for (int n = 0; n <= upto; ++n) {
    if (const auto* h = std::get_if<HQSchedule>(&s.gen)) {
      if (n >= static_cast<int>(h->p.size())) throw std::out_of_range("schedule exhausted");
      Mat step = Mat::identity(2);
      int p = h->p[static_cast<size_t>(n)];
      int q = h->q[static_cast<size_t>(n)];
      step.at(0, 0) = pow_int(h->alpha, p) * pow_int(h->beta, q);
      step.at(1, 1) = pow_int(h->alpha, q) * pow_int(h->beta, p);
      j = step * j;
      continue;
    }
    MapSpec m = s.map_at(n);
    if (!fixes_origin(m)) throw std::domain_error("map does not fix the origin");
    j = linear_part(m) * j;
  }
  return j;
}

struct FactorizationReport {
  double max_residual = 0.0;
  int samples = 0;
};

// Evaluates a claimed factorization of the triangular step into shift-like
// pieces and reports how far the composition lands from the actual step.
// This is a measurement, not an assertion: the factorization is not exact,
// and the residual documents by how much.
inline FactorizationReport shift_factorization_probe(const EtaStep& f, int samples, uint64_t seed) {
  if (f.k < 3) throw std::invalid_argument("probe needs k >= 3");
  std::complex<double> eta = f.eta.to_complex();
  auto inner = [&](const Cvec& z) {  // pieces 1 .. k-2
    Cvec w(z.k);
    for (int i = 0; i + 1 < z.k; ++i) w[i] = z[i + 1];
    w[z.k - 1] = eta * z[0] + pow_int(z[1], f.d);
    return w;
  };
  auto last = [&](const Cvec& z) {  // piece k-1 carries the eta^k twist
    Cvec w(z.k);
    w[0] = pow_int(eta, f.k) * z[1];
    for (int i = 1; i + 1 < z.k; ++i) w[i] = z[i + 1];
    w[z.k - 1] = eta * z[0] + pow_int(z[1], f.d);
    return w;
  };
  FactorizationReport rep;
  rep.samples = samples;
  MapSpec step = f;
  for (int t = 0; t < samples; ++t) {
    Rng rng = Rng::for_sample(seed, static_cast<uint64_t>(t));
    Cvec z(f.k);
    for (int i = 0; i < f.k; ++i) z[i] = rng.disc(1.0);
    Cvec composed = z;
    for (int i = 1; i <= f.k - 2; ++i) composed = inner(composed);
    composed = last(composed);
    Cvec truth = apply_map(step, z);
    rep.max_residual = std::max(rep.max_residual, sup_dist(composed, truth));
  }
  return rep;
}

}  // namespace shortck
