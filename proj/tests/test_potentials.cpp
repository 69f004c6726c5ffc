#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <optional>

#include "shortck/basin.hpp"
#include "shortck/potentials.hpp"
#include "shortck/rng.hpp"
#include "shortck/sequence.hpp"

using namespace shortck;

namespace {

MapSequence tower_seq(double a, int k = 3, int d = 2) {
  return MapSequence(EtaSchedule{k, d, PowerTower{a}});
}

Cvec random_point(Rng& r, int k, double radius) {
  Cvec z(k);
  for (int i = 0; i < k; ++i) z[i] = r.disc(radius);
  return z;
}

}  // namespace

TEST_CASE("envelope tail closed form") {
  CHECK(envelope_tail(2, 3) == Catch::Approx(0.0866433975699932).epsilon(1e-14));
  CHECK(envelope_tail(2, 0) == Catch::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(envelope_tail(3, 2) == Catch::Approx(std::log(2.0) / 18.0).epsilon(1e-14));
  // Geometric identity: tail(n) - tail(n+1) is the level-(n+1) term.
  for (int d = 2; d <= 4; ++d)
    for (int n = 0; n < 10; ++n)
      CHECK(envelope_tail(d, n) - envelope_tail(d, n + 1) ==
            Catch::Approx(std::log(2.0) / std::pow(double(d), n + 1)).epsilon(1e-12));
}

TEST_CASE("potential of the origin equals log a at every depth") {
  MapSequence s = tower_seq(0.5);
  Cvec zero = cvec({0.0, 0.0, 0.0});
  for (int n : {0, 1, 5, 20, 40}) {
    CHECK(psi_n(s, zero, n) == Catch::Approx(std::log(0.5)).margin(1e-15));
  }
  // Holds for other bases too; the eta floor is hit exactly.
  MapSequence s3 = tower_seq(0.3);
  CHECK(psi_n(s3, zero, 25) == Catch::Approx(std::log(0.3)).margin(1e-15));
}

TEST_CASE("potential along a finite backward orbit of the origin") {
  MapSequence s = tower_seq(0.5);
  Cvec z = cvec({0.0, 0.0, 0.0});
  for (int i = 5; i >= 0; --i) s.apply_step_inverse(z, i);
  double v = psi_n(s, z, 20);
  CHECK(v == Catch::Approx(std::log(0.5)).margin(1e-9));
}

TEST_CASE("potential floor: the eta term caps psi from below") {
  MapSequence s = tower_seq(0.5);
  Rng r(77);
  double floor = std::log(0.5);
  for (int t = 0; t < 50; ++t) {
    Cvec z = random_point(r, 3, 2.0);
    for (int n : {0, 3, 8, 15}) {
      CHECK(psi_n(s, z, n) >= floor - 1e-15);
    }
  }
}

TEST_CASE("psi converges to log a on attracted points") {
  MapSequence s = tower_seq(0.5);
  Cvec z = cvec({{0.1, 0.0}, {-0.05, 0.02}, {0.0, 0.2}});
  REQUIRE(classify_point(s, z, ClassifyParams{}).kind == OrbitKind::Attracted);
  CHECK(psi_n(s, z, 20) == Catch::Approx(std::log(0.5)).margin(1e-9));
  PotentialEstimate est = psi_limit(s, z, 1e-9, 80);
  CHECK(est.converged);
  CHECK(est.value == Catch::Approx(std::log(0.5)).margin(1e-9));
}

TEST_CASE("psi is positive on escaping points and tracks the escape depth") {
  MapSequence s = tower_seq(0.5);
  Cvec z = cvec({0.0, 0.0, 3.0});
  PotentialEstimate est = psi_limit(s, z, 1e-9, 80);
  CHECK(est.converged);
  CHECK(est.value > 0.0);
  // Deeper start dominated by |z_3|^(2^n): psi near d * log|z_3| at depth 0
  // escape; growing coordinates only.
  Cvec big = cvec({0.0, 0.0, 50.0});
  PotentialEstimate est2 = psi_limit(s, big, 1e-9, 80);
  CHECK(est2.converged);
  CHECK(est2.value > est.value);
}

TEST_CASE("envelope is monotone nonincreasing along depth") {
  for (double a : {0.5, 0.3}) {
    MapSequence s = tower_seq(a);
    Rng r(91);
    for (int t = 0; t < 40; ++t) {
      Cvec z = random_point(r, 3, 3.0);
      PotentialTrack track(s, z);
      track.advance();
      double prev = track.envelope();
      for (int n = 1; n <= 30; ++n) {
        track.advance();
        double cur = track.envelope();
        CHECK(cur <= prev + 1e-12);
        prev = cur;
      }
    }
  }
}

TEST_CASE("envelope dominates psi and the gap is the tail") {
  MapSequence s = tower_seq(0.5);
  Cvec z = cvec({{0.4, 0.1}, {0.2, 0.0}, {-0.3, 0.3}});
  for (int n : {0, 2, 7}) {
    double p = psi_n(s, z, n);
    double e = psi_envelope(s, z, n);
    CHECK(e - p == Catch::Approx(envelope_tail(2, n)).epsilon(1e-12));
    CHECK(e >= p);
  }
}

TEST_CASE("phi matches an explicit hand computation at depth zero") {
  MapSequence s = tower_seq(0.5);
  // F(0) with eta_0 = 0.5: z = (1, 2, 3) -> (0.5 * 3, 4 + 0.5 * 1, 9 + 0.5 * 2) = (1.5, 4.5, 10).
  Cvec z = cvec({1.0, 2.0, 3.0});
  LogScalar p0 = phi_n(s, z, 0);
  CHECK(std::exp(p0.lm) == Catch::Approx(10.0).epsilon(1e-12));
  CHECK(psi_n(s, z, 0) == Catch::Approx(std::log(10.0)).epsilon(1e-12));
}

TEST_CASE("psi_limit convergence bookkeeping") {
  MapSequence s = tower_seq(0.5);
  PotentialEstimate est = psi_limit(s, cvec({0.0, 0.0, 0.0}), 1e-9, 80);
  CHECK(est.converged);
  CHECK(est.depth_used >= 3);            // three consecutive small gaps required
  CHECK(est.cauchy_gap < 1e-9);
  CHECK(est.value == Catch::Approx(std::log(0.5)).margin(1e-12));
  CHECK(est.envelope_value >= est.value);

  CHECK_THROWS_AS(psi_limit(s, cvec({0.0, 0.0, 0.0}), -1.0, 80), std::invalid_argument);
  CHECK_THROWS_AS(psi_limit(s, cvec({0.0, 0.0, 0.0}), 1e-9, 0), std::invalid_argument);
}

TEST_CASE("potentials require an eta schedule") {
  MapSequence hq(HQSchedule{{0.5, 0.0}, {1.0 / 9.0, 0.0}, {1, 2}, {0, 1}, 1});
  CHECK_THROWS_AS(psi_n(hq, cvec({0.1, 0.1}), 3), std::domain_error);
}

TEST_CASE("boundary bisection drives psi of the escaped endpoint to zero") {
  MapSequence s = tower_seq(0.5);
  ClassifyParams p;
  Cvec inside = cvec({0.0, 0.0, 0.0});
  Cvec outside = cvec({0.0, 0.0, 3.0});
  REQUIRE(classify_point(s, inside, p).kind == OrbitKind::Attracted);
  REQUIRE(classify_point(s, outside, p).kind == OrbitKind::Escaped);

  double lo = 0.0, hi = 1.0;  // parameters along the segment, attracted at lo
  int undecided = 0;
  for (int it = 0; it < 48; ++it) {
    double mid = 0.5 * (lo + hi);
    Cvec z = inside + mid * (outside - inside);
    OrbitClass c = classify_point(s, z, p);
    if (c.kind == OrbitKind::Attracted) {
      lo = mid;
    } else if (c.kind == OrbitKind::Escaped) {
      hi = mid;
    } else {
      ++undecided;
      break;
    }
  }
  REQUIRE(undecided == 0);
  CHECK(hi - lo < 1e-13);

  Cvec escaped_side = inside + hi * (outside - inside);
  PotentialEstimate est = psi_limit(s, escaped_side, 1e-9, 80);
  CHECK(est.converged);
  CHECK(std::abs(est.value) < 1e-8);
  CHECK(est.value >= 0.0);
}

TEST_CASE("green function of a shift-like map vanishes at the origin") {
  ShiftLike sl = make_shift_like(3, 2, 2, {1.0, 0.0});
  PotentialEstimate plus = green_plus(sl, cvec({0.0, 0.0, 0.0}), default_green_plus(sl));
  CHECK(plus.converged);
  CHECK(plus.value == Catch::Approx(0.0).margin(1e-15));
  PotentialEstimate minus = green_minus(sl, cvec({0.0, 0.0, 0.0}), default_green_minus(sl));
  CHECK(minus.converged);
  CHECK(minus.value == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("green depth consistency on an escaping point") {
  ShiftLike sl = make_shift_like(3, 2, 2, {1.0, 0.0});
  Cvec z = cvec({0.0, 0.0, 10.0});
  PotentialEstimate d20 = green_plus(sl, z, GreenParams(sl.nu, 20, 1e-9));
  PotentialEstimate d30 = green_plus(sl, z, GreenParams(sl.nu, 30, 1e-9));
  CHECK(d20.value == Catch::Approx(d30.value).margin(1e-8));
  CHECK(d30.value > 0.0);
}

TEST_CASE("green growth bound on the forward cone") {
  // On the escape cone, the normalized rate dominates log(delta_tilde * sup norm).
  ShiftLike sl = make_shift_like(3, 2, 2, {1.0, 0.0});
  double dt = delta_tilde(sl);
  CHECK(dt == Catch::Approx(std::min(1.0, 0.5)).epsilon(1e-14));
  FiltrationSpec cone = FiltrationSpec::shift_type(sl.k, sl.nu, 4.0);
  Rng r(345);
  int tested = 0;
  for (int t = 0; t < 4000 && tested < 300; ++t) {
    Cvec z = random_point(r, 3, 12.0);
    if (classify_filtration(z, cone).region != Region::Plus) continue;
    ++tested;
    PotentialEstimate g = green_plus(sl, z, default_green_plus(sl));
    CHECK(g.value >= std::log(dt * sup_norm(z)) - 1e-9);
  }
  REQUIRE(tested == 300);
}

TEST_CASE("green minus depth consistency") {
  ShiftLike sl = make_shift_like(3, 2, 2, {1.0, 0.0});
  Cvec z = cvec({10.0, 0.0, 0.0});
  PotentialEstimate d20 = green_minus(sl, z, GreenParams(sl.k - sl.nu, 20, 1e-9));
  PotentialEstimate d30 = green_minus(sl, z, GreenParams(sl.k - sl.nu, 30, 1e-9));
  CHECK(d20.value == Catch::Approx(d30.value).margin(1e-8));
  CHECK(d30.value > 0.0);
}

TEST_CASE("subaverage check on a harmonic fixture has zero margin") {
  PotentialFn f = [](const Cvec& z) -> std::optional<double> {
    return 2.0 * z[0].real() + z[1].imag() - 3.0 * z[2].real() + 7.0;
  };
  Cvec center = cvec({{0.3, 0.1}, {-0.2, 0.4}, {0.0, -0.6}});
  Cvec dir = cvec({1.0, {0.5, -0.5}, 2.0});
  SubaverageReport rep = subaverage_check(f, center, dir, 0.25, 64);
  CHECK(rep.margin == Catch::Approx(0.0).margin(1e-12));
  CHECK(rep.samples == 64);
  CHECK(rep.center_value == Catch::Approx(2.0 * 0.3 + 0.4 + 7.0).epsilon(1e-14));
}

TEST_CASE("subaverage check on a strictly subharmonic fixture is positive") {
  PotentialFn f = [](const Cvec& z) -> std::optional<double> {
    return std::norm(z[0]) + std::norm(z[1]);  // |z1|^2 + |z2|^2
  };
  Cvec center = cvec({{0.1, 0.0}, {0.0, 0.0}, {0.0, 0.0}});
  Cvec dir = cvec({1.0, 0.0, 0.0});
  SubaverageReport rep = subaverage_check(f, center, dir, 0.5, 32);
  CHECK(rep.margin == Catch::Approx(0.25).margin(1e-12));  // average of r^2 on the circle
}

TEST_CASE("subaverage check input validation") {
  PotentialFn f = [](const Cvec&) -> std::optional<double> { return 0.0; };
  Cvec c = cvec({0.0, 0.0, 0.0});
  Cvec dir = cvec({1.0, 0.0, 0.0});
  CHECK_THROWS_AS(subaverage_check(f, c, dir, 0.1, 8), std::invalid_argument);
  CHECK_THROWS_AS(subaverage_check(f, c, dir, -0.1, 32), std::invalid_argument);
  PotentialFn bad = [](const Cvec&) -> std::optional<double> { return std::nullopt; };
  CHECK_THROWS_WITH(subaverage_check(bad, c, dir, 0.1, 32), "insufficient convergence");
}

TEST_CASE("psi is subaveraged at interior basin points") {
  MapSequence s = tower_seq(0.5);
  PotentialFn f = [&](const Cvec& z) -> std::optional<double> {
    PotentialEstimate est = psi_limit(s, z, 1e-9, 80);
    if (!est.converged) return std::nullopt;
    return est.value;
  };
  Cvec center = cvec({{0.05, 0.02}, {-0.1, 0.0}, {0.0, 0.08}});
  Cvec dir = cvec({{0.3, 0.4}, 1.0, {-0.2, 0.1}});
  SubaverageReport rep = subaverage_check(f, center, dir, 0.05, 32);
  CHECK(rep.margin >= -1e-6);
}
