#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <stdexcept>

#include "shortck/basin.hpp"
#include "shortck/raster.hpp"
#include "shortck/rng.hpp"
#include "shortck/sequence.hpp"

using namespace shortck;

namespace {

MapSequence tower_seq(double a, int k = 3, int d = 2) {
  return MapSequence(EtaSchedule{k, d, PowerTower{a}});
}

}  // namespace

TEST_CASE("classify params validation and defaults") {
  ClassifyParams p;
  CHECK(p.R == 2.0);
  CHECK(p.c_in == 0.5);
  CHECK(p.n_max == 60);
  CHECK(p.margin == 1e-3);
  CHECK_THROWS_AS(ClassifyParams(1.0, 0.5, 60, 1e-3), std::invalid_argument);   // R must exceed 1
  CHECK_THROWS_AS(ClassifyParams(2.0, 1.5, 60, 1e-3), std::invalid_argument);   // c_in below 1
  CHECK_THROWS_AS(ClassifyParams(2.0, 0.5, 0, 1e-3), std::invalid_argument);    // depth cap
}

TEST_CASE("default escape radius covers the step size") {
  CHECK(default_escape_radius(tower_seq(0.5)) == Catch::Approx(2.0).epsilon(1e-15));
  CHECK(default_escape_radius(tower_seq(0.95)) == Catch::Approx(2.05).epsilon(1e-12));
  MapSequence big(EtaSchedule{3, 2, CustomEtas{{LogScalar::from_real(3.0)}}});
  CHECK(default_escape_radius(big) == Catch::Approx(2.1).epsilon(1e-12));
}

TEST_CASE("classification of pinned seeds") {
  MapSequence s = tower_seq(0.5);
  ClassifyParams p;

  OrbitClass at_zero = classify_point(s, cvec({0.0, 0.0, 0.0}), p);
  CHECK(at_zero.kind == OrbitKind::Attracted);
  CHECK(at_zero.step == 0);

  OrbitClass esc = classify_point(s, cvec({0.0, 0.0, 3.0}), p);
  CHECK(esc.kind == OrbitKind::Escaped);
  CHECK(esc.step == 0);
  CHECK(esc.axis == 3);
}

TEST_CASE("a minus-region seed still escapes after a few steps") {
  // (3,0,0): axis 1 is not expanding for the triangular family, so the seed
  // is not escaped at step 0; the orbit reaches the plus cone at step 2.
  MapSequence s = tower_seq(0.5);
  ClassifyParams p;
  OrbitClass c = classify_point(s, cvec({3.0, 0.0, 0.0}), p);
  CHECK(c.kind == OrbitKind::Escaped);
  CHECK(c.step == 2);
  CHECK(c.axis == 2);
}

TEST_CASE("undecided when the depth cap is too small") {
  MapSequence s = tower_seq(0.5);
  ClassifyParams tiny(2.0, 0.5, 1, 1e-3);
  // Needs two steps to decide, cap allows one.
  OrbitClass c = classify_point(s, cvec({3.0, 0.0, 0.0}), tiny);
  CHECK(c.kind == OrbitKind::Undecided);
  CHECK(c.step == -1);
  CHECK(c.axis == 0);
}

TEST_CASE("capture and escape rules are absorbing along sampled orbits") {
  MapSequence s = tower_seq(0.5);
  ClassifyParams p;
  FiltrationSpec f = s.default_filtration(p.R);
  Rng r(4242);
  int attracted_seen = 0, escaped_seen = 0;
  for (int t = 0; t < 400; ++t) {
    Cvec z(3);
    for (int i = 0; i < 3; ++i) z[i] = r.disc(3.0);
    LogVec state = to_log(z);
    bool captured = false, escaped = false;
    for (int it = 0; it <= 25; ++it) {
      bool in_cap = in_polydisc(state, p.c_in);
      bool in_plus = classify_filtration(state, f).region == Region::Plus;
      if (captured) CHECK(in_cap);      // capture polydisc is forward invariant
      if (escaped) CHECK(in_plus);      // plus cone is forward invariant
      captured = captured || in_cap;
      escaped = escaped || in_plus;
      s.apply_step(state, it);
    }
    attracted_seen += captured ? 1 : 0;
    escaped_seen += escaped ? 1 : 0;
  }
  CHECK(attracted_seen > 0);
  CHECK(escaped_seen > 0);
}

TEST_CASE("omega membership evaluates the n-th composition") {
  MapSequence s = tower_seq(0.5);
  CHECK(omega_membership(s, cvec({0.0, 0.0, 0.0}), 0, 0.5));
  CHECK(omega_membership(s, cvec({0.0, 0.0, 0.0}), 7, 0.5));
  CHECK_FALSE(omega_membership(s, cvec({0.0, 0.0, 3.0}), 0, 0.5));
  CHECK_THROWS_AS(omega_membership(s, cvec({0.0, 0.0, 0.0}), -1, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(omega_membership(s, cvec({0.0, 0.0, 0.0}), 0, 0.0), std::invalid_argument);
}

TEST_CASE("nested union of basin stages has no violations") {
  MapSequence s = tower_seq(0.5);
  NestedUnionReport rep = nested_union_check(s, 0.5, 0, 4, 200, 2025);
  CHECK(rep.violations == 0);
  CHECK(rep.members == 200);
  CHECK(rep.threshold_n == 0);  // c^(d-1) + |eta_1| = 0.5 + 0.25 < 1 already at n = 0
  CHECK(rep.attempts >= rep.members);
}

TEST_CASE("nested union sampler reports failure on an empty target") {
  MapSequence s = tower_seq(0.5);
  CHECK_THROWS_WITH(nested_union_check(s, 1e-9, 0, 1, 10, 1),
                    "sampler failure: no members found within the attempt budget");
}

TEST_CASE("kobayashi witness at scale zero fires at the first capture step") {
  MapSequence s = tower_seq(0.5);
  ClassifyParams p;
  Cvec pt = cvec({{0.1, 0.0}, {0.05, 0.0}, {0.0, -0.1}});
  Cvec tangent = cvec({1.0, {0.0, 1.0}, 0.3});
  OrbitClass c = classify_point(s, pt, p);
  REQUIRE(c.kind == OrbitKind::Attracted);
  KobayashiWitness w = kobayashi_witness(s, pt, tangent, 0.0, p);
  CHECK(w.n0 == c.step);
  CHECK(w.verified);
  CHECK(w.samples == 16);
}

TEST_CASE("kobayashi witness depth is monotone in the disc radius") {
  MapSequence s = tower_seq(0.5);
  ClassifyParams p;
  Cvec pt = cvec({0.0, 0.0, 0.0});
  Cvec tangent = cvec({1.0, 1.0, 1.0});
  int prev = -1;
  for (double Rscale : {1.0, 2.0, 4.0, 8.0}) {
    KobayashiWitness w = kobayashi_witness(s, pt, tangent, Rscale, p);
    CHECK(w.verified);
    CHECK(w.n0 >= prev);
    prev = w.n0;
  }
  CHECK(prev >= 1);  // a unit disc around the origin does not fit in the capture polydisc
}

TEST_CASE("kobayashi witness validation") {
  MapSequence s = tower_seq(0.5);
  ClassifyParams p;
  Cvec pt = cvec({0.0, 0.0, 0.0});
  Cvec tangent = cvec({1.0, 0.0, 0.0});
  CHECK_THROWS_AS(kobayashi_witness(s, cvec({0.0, 0.0}), tangent, 1.0, p), std::invalid_argument);
  CHECK_THROWS_AS(kobayashi_witness(s, pt, cvec({0.0, 0.0, 0.0}), 1.0, p), std::invalid_argument);
  CHECK_THROWS_AS(kobayashi_witness(s, pt, tangent, -1.0, p), std::invalid_argument);
  CHECK_THROWS_WITH(kobayashi_witness(s, cvec({0.0, 0.0, 3.0}), tangent, 1.0, p),
                    "witness base point is not attracted");
  ClassifyParams shallow(2.0, 0.5, 1, 1e-3);
  CHECK_THROWS_WITH(kobayashi_witness(s, pt, tangent, 1e9, shallow), "witness depth exceeded");
}

TEST_CASE("grid spec maps pixels with inclusive endpoints") {
  Cvec base = cvec({0.0, 0.0, 0.0});
  Cvec du = cvec({0.0, 1.0, 0.0});
  Cvec dv = cvec({0.0, 0.0, 1.0});
  GridSpec g(base, du, dv, 5, 3, -1.5, 1.5, -2.0, 2.0);
  Cvec p00 = g.point_at(0, 0);
  CHECK(p00[1] == std::complex<double>(-1.5, 0.0));
  CHECK(p00[2] == std::complex<double>(-2.0, 0.0));
  Cvec pend = g.point_at(2, 4);
  CHECK(pend[1] == std::complex<double>(1.5, 0.0));
  CHECK(pend[2] == std::complex<double>(2.0, 0.0));
  Cvec pmid = g.point_at(1, 2);
  CHECK(pmid[1] == std::complex<double>(0.0, 0.0));
  CHECK(pmid[2] == std::complex<double>(0.0, 0.0));

  CHECK_THROWS_AS(GridSpec(base, du, dv, 1, 3, -1.0, 1.0, -1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(GridSpec(base, du, dv, 5, 3, 1.0, 1.0, -1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(GridSpec(base, du, cvec({0.0, 0.0}), 5, 3, -1.0, 1.0, -1.0, 1.0),
                  std::invalid_argument);
}

TEST_CASE("rendered slice is decided in the bulk and sign coherent") {
  MapSequence s = tower_seq(0.5);
  GridSpec g(cvec({0.0, 0.0, 0.0}), cvec({0.0, 1.0, 0.0}), cvec({0.0, 0.0, 1.0}),
             21, 17, -1.5, 1.5, -1.5, 1.5);
  ClassifyParams p;
  Raster r = render_slice(s, g, p, true, 1);
  REQUIRE(r.classes.size() == 21u * 17u);
  REQUIRE(r.psi.size() == r.classes.size());

  double frac = decided_fraction(r);
  CHECK(frac > 0.0);
  CHECK(frac <= 1.0);

  // Center pixel is the origin.
  const OrbitClass& center = r.at(8, 10);
  CHECK(center.kind == OrbitKind::Attracted);
  CHECK(center.step == 0);

  int coherent = 0, valued = 0;
  for (size_t i = 0; i < r.classes.size(); ++i) {
    if (!r.psi[i].has_value()) continue;
    double v = *r.psi[i];
    if (r.classes[i].kind == OrbitKind::Attracted) {
      ++valued;
      if (v < p.margin) ++coherent;
      // Attracted values live between the eta floor and zero; the floor is
      // attained only where the eta cascade dominates the contraction.
      CHECK(v >= std::log(0.5) - 1e-12);
      CHECK(v < 0.0);
    } else if (r.classes[i].kind == OrbitKind::Escaped) {
      ++valued;
      if (v > -p.margin) ++coherent;
    }
  }
  REQUIRE(valued > 0);
  CHECK(coherent == valued);
}

TEST_CASE("rendering is independent of the thread count") {
  MapSequence s = tower_seq(0.5);
  GridSpec g(cvec({0.0, 0.0, 0.0}), cvec({0.0, 1.0, 0.0}), cvec({0.0, 0.0, 1.0}),
             16, 12, -1.2, 1.2, -1.2, 1.2);
  ClassifyParams p;
  Raster one = render_slice(s, g, p, true, 1);
  Raster four = render_slice(s, g, p, true, 4);
  REQUIRE(one.classes.size() == four.classes.size());
  for (size_t i = 0; i < one.classes.size(); ++i) {
    CHECK(one.classes[i].kind == four.classes[i].kind);
    CHECK(one.classes[i].step == four.classes[i].step);
    CHECK(one.classes[i].axis == four.classes[i].axis);
    CHECK(one.psi[i].has_value() == four.psi[i].has_value());
    if (one.psi[i].has_value()) CHECK(*one.psi[i] == *four.psi[i]);
  }
}
