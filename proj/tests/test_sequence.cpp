#include <catch2/catch_amalgamated.hpp>

#include "shortck/filtration.hpp"
#include "shortck/rng.hpp"
#include "shortck/sequence.hpp"

using namespace shortck;
using std::complex;

namespace {

MapSequence power_tower(double a, int k, int d, int cap = 60) {
  return MapSequence(EtaSchedule{k, d, PowerTower{a}}, cap);
}

}  // namespace

TEST_CASE("eta schedules produce the right coefficients", "[sequence]") {
  MapSequence s = power_tower(0.5, 3, 2);
  CHECK(s.eta_at(0).to_complex().real() == Catch::Approx(0.5).epsilon(1e-15));
  CHECK(s.eta_at(1).to_complex().real() == Catch::Approx(0.25).epsilon(1e-14));
  CHECK(s.eta_at(2).to_complex().real() == Catch::Approx(0.0625).epsilon(1e-14));
  CHECK(s.eta_at(40).lm == Catch::Approx(std::pow(2.0, 40) * std::log(0.5)).epsilon(1e-15));

  MapSequence t(EtaSchedule{3, 2, ShiftedTower{0.5}});
  CHECK(t.eta_at(0).to_complex().real() == Catch::Approx(0.25).epsilon(1e-14));
  CHECK(t.eta_at(1).to_complex().real() == Catch::Approx(0.125).epsilon(1e-14));
  CHECK(t.eta_at(2).to_complex().real() == Catch::Approx(std::pow(0.5, 5)).epsilon(1e-14));

  MapSequence c(EtaSchedule{3, 2, CustomEtas{{LogScalar::from_real(0.1), LogScalar::from_real(0.2)}}});
  CHECK(c.length() == 2);
  CHECK_THROWS_AS(c.eta_at(2), std::out_of_range);
}

TEST_CASE("schedule validation", "[sequence]") {
  CHECK_THROWS_WITH((MapSequence(EtaSchedule{3, 2, PowerTower{1.5}})),
                    Catch::Matchers::ContainsSubstring("a must lie in (0,1)"));
  CHECK_THROWS_WITH((MapSequence(EtaSchedule{3, 2, PowerTower{0.0}})),
                    Catch::Matchers::ContainsSubstring("a must lie in (0,1)"));
  CHECK_THROWS_AS((MapSequence(EtaSchedule{3, 3, ShiftedTower{0.5}})), std::invalid_argument);
  CHECK_THROWS_AS((MapSequence(EtaSchedule{3, 1, PowerTower{0.5}})), std::invalid_argument);
  CHECK_THROWS_AS((MapSequence(HQSchedule{0.5, 1.0 / 9.0, {1, 2}, {1}, 2})), std::invalid_argument);
  CHECK_THROWS_AS((MapSequence(HQSchedule{0.0, 1.0 / 9.0, {1}, {1}, 2})), std::invalid_argument);
}

TEST_CASE("orbit of the origin stays put", "[sequence]") {
  MapSequence s = power_tower(0.5, 3, 2);
  OrbitRecord rec = orbit(s, Cvec(3), 12);
  REQUIRE(rec.points.size() == 14);
  REQUIRE(rec.log_norms.size() == 14);
  CHECK_FALSE(rec.overflow_at.has_value());
  for (const Cvec& p : rec.points)
    for (int i = 0; i < 3; ++i) CHECK(std::abs(p[i]) == 0.0);
}

TEST_CASE("small seeds contract monotonically", "[sequence]") {
  MapSequence s = power_tower(0.5, 3, 2);
  OrbitRecord rec = orbit(s, cvec({0.1, 0.1, 0.1}), 10);
  REQUIRE(rec.points.size() == 12);
  for (size_t i = 0; i + 1 < rec.log_norms.size(); ++i)
    CHECK(rec.log_norms[i + 1] < rec.log_norms[i]);
}

TEST_CASE("escaping orbits stay classified escaping and record overflow", "[sequence]") {
  MapSequence s = power_tower(0.5, 3, 2);
  FiltrationSpec f = s.default_filtration(2.0);
  LogVec z = to_log(cvec({0.0, 0.0, 3.0}));
  for (int n = 0; n < 25; ++n) {
    s.apply_step(z, n);
    RegionTag tag = classify_filtration(z, f);
    REQUIRE(tag.region == Region::Plus);
  }

  OrbitRecord rec = orbit(s, cvec({0.0, 0.0, 3.0}), 25);
  REQUIRE(rec.overflow_at.has_value());
  CHECK(rec.points.size() == static_cast<size_t>(*rec.overflow_at) + 1);
  REQUIRE(rec.log_norms.size() == 27);
  for (double ln : rec.log_norms) CHECK(std::isfinite(ln));
  // doubly exponential growth: log norms roughly double each step late on
  CHECK(rec.log_norms[26] > 1.9 * rec.log_norms[25]);
  CHECK(rec.log_norms[26] > 1e6);
}

TEST_CASE("deep contraction dives below double range without dying", "[sequence]") {
  MapSequence s = power_tower(0.5, 3, 2);
  OrbitRecord rec = orbit(s, cvec({0.1, 0.1, 0.1}), 40);
  REQUIRE(rec.log_norms.size() == 42);
  CHECK_FALSE(rec.overflow_at.has_value());
  CHECK(rec.log_norms.back() < -1e6);
  CHECK(std::isfinite(rec.log_norms.back()));
}

TEST_CASE("orbit depth beyond the cap is rejected", "[sequence]") {
  MapSequence s = power_tower(0.5, 3, 2, 20);
  CHECK_THROWS_AS(orbit(s, Cvec(3), 21), std::invalid_argument);
  CHECK_NOTHROW(orbit(s, Cvec(3), 20));
}

TEST_CASE("transition segments recompose the full orbit", "[sequence]") {
  MapSequence s = power_tower(0.5, 3, 2);
  Rng r(37);
  for (int t = 0; t < 50; ++t) {
    Cvec z(3);
    for (int i = 0; i < 3; ++i) z[i] = r.disc(0.5);
    for (auto [m, n] : {std::pair<int, int>{0, 1}, {2, 5}, {3, 3}, {1, 4}}) {
      auto fm = compose_segment(s, -1, m, z);
      auto fn = compose_segment(s, -1, n, z);
      REQUIRE(fm.has_value());
      REQUIRE(fn.has_value());
      auto seg = compose_segment(s, m, n, *fm);
      REQUIRE(seg.has_value());
      REQUIRE(sup_dist(*seg, *fn) / std::max(sup_norm(*fn), 1e-12) < 1e-9);
    }
  }
}

TEST_CASE("segment with equal endpoints is the identity", "[sequence]") {
  MapSequence s = power_tower(0.5, 3, 2);
  Cvec z = cvec({0.3, {0.1, 0.2}, -0.4});
  auto w = compose_segment(s, 4, 4, z);
  REQUIRE(w.has_value());
  CHECK(sup_dist(*w, z) == 0.0);
}

TEST_CASE("segment evaluation reports overflow instead of crashing", "[sequence]") {
  MapSequence s = power_tower(0.5, 3, 2);
  auto w = compose_segment(s, -1, 12, cvec({0.0, 0.0, 4.0}));
  CHECK_FALSE(w.has_value());
}

TEST_CASE("origin derivative of composed words", "[sequence]") {
  MapSequence hq(HQSchedule{0.5, 1.0 / 9.0, {1}, {1}, 2});
  auto diag = jacobian_origin(hq, 0);
  REQUIRE(diag.size() == 2);
  CHECK(std::abs(diag[0].to_complex() - complex<double>(1.0 / 18.0, 0.0)) < 1e-15);
  CHECK(std::abs(diag[1].to_complex() - complex<double>(1.0 / 18.0, 0.0)) < 1e-15);

  MapSequence hf(Autonomous{HenonF{0.5, 1.0 / 9.0}});
  auto d3 = jacobian_origin(hf, 2);
  CHECK(std::abs(d3[0].to_complex() - complex<double>(0.125, 0.0)) < 1e-14);
  CHECK(std::abs(d3[1].to_complex() - complex<double>(std::pow(9.0, -3.0), 0.0)) < 1e-14);

  MapSequence tri = power_tower(0.5, 3, 2);
  CHECK_THROWS_AS(jacobian_origin(tri, 0), std::domain_error);
  Mat j = jacobian_origin_matrix(tri, 0);
  CHECK(std::abs(j.at(0, 2) - complex<double>(0.5, 0.0)) < 1e-15);
  CHECK(std::abs(j.at(1, 0) - complex<double>(0.5, 0.0)) < 1e-15);
  CHECK(std::abs(j.at(0, 0)) < 1e-15);

  MapSequence shifted(Autonomous{AffineTranslate{2, 1, 1.0}});
  CHECK_THROWS_AS(jacobian_origin(shifted, 0), std::domain_error);
}

TEST_CASE("rescaling conjugation identity holds to near machine precision", "[sequence]") {
  for (double a : {0.3, 0.5, 0.9}) {
    double worst = scaling_conjugation_check(a, 3, 10, 40, 2024);
    INFO("a = " << a << " worst = " << worst);
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("rescaling conjugation hand value at stage zero", "[sequence]") {
  // direct evaluation with eta_0 = a^2 at (1,1,1) for a = 1/2
  MapSequence t(EtaSchedule{3, 2, ShiftedTower{0.5}});
  LogVec z = to_log(cvec({1.0, 1.0, 1.0}));
  t.apply_step(z, 0);
  Cvec w = to_cvec(z);
  CHECK(std::abs(w[0] - complex<double>(0.25, 0.0)) < 1e-13);
  CHECK(std::abs(w[1] - complex<double>(1.25, 0.0)) < 1e-13);
  CHECK(std::abs(w[2] - complex<double>(1.25, 0.0)) < 1e-13);
}

TEST_CASE("word schedules expand into their factors", "[sequence]") {
  MapSequence hq(HQSchedule{0.5, 1.0 / 9.0, {2, 0}, {1, 3}, 2});
  Cvec z = cvec({0.4, {0.0, 0.3}});
  Cvec expect = z;
  MapSpec fg = HenonG{0.5, 1.0 / 9.0, 2};
  MapSpec ff = HenonF{0.5, 1.0 / 9.0};
  expect = apply_map(fg, expect);
  expect = apply_map(ff, expect);
  expect = apply_map(ff, expect);
  Cvec got = z;
  hq.apply_step(got, 0);
  CHECK(sup_dist(got, expect) < 1e-14);
  expect = apply_map(fg, apply_map(fg, apply_map(fg, expect)));
  hq.apply_step(got, 1);
  CHECK(sup_dist(got, expect) < 1e-14);
  CHECK(hq.length() == 2);

  Cvec back = got;
  hq.apply_step_inverse(back, 1);
  hq.apply_step_inverse(back, 0);
  CHECK(sup_dist(back, z) < 1e-12);
}

TEST_CASE("stepping past an explicit list ends with an error", "[sequence]") {
  MapSequence s(ExplicitList{{MapSpec(Scaling{2, 2.0})}});
  Cvec z = cvec({1.0, 1.0});
  CHECK_NOTHROW(s.apply_step(z, 0));
  CHECK_THROWS_AS(s.apply_step(z, 1), std::out_of_range);
  CHECK(s.length() == 1);
  CHECK(s.dim() == 2);
}

TEST_CASE("plus cones absorb the triangular steps", "[sequence]") {
  const double a = 0.5;
  MapSequence s = power_tower(a, 3, 2);
  FiltrationSpec f = FiltrationSpec::eta_default(3, 1.6);  // R > 1 + a required
  Rng base(41);
  int violations = 0;
  for (int t = 0; t < 10000; ++t) {
    Rng r = Rng::for_sample(41, static_cast<uint64_t>(t));
    int axis = 2 + static_cast<int>(r.below(2));  // dominant axis 2 or 3
    double big = f.R + 3.0 * r.uniform();
    Cvec z(3);
    for (int i = 0; i < 3; ++i) z[i] = std::polar(big * 0.999 * r.uniform(), kTwoPi * r.uniform());
    z[axis - 1] = std::polar(big, kTwoPi * r.uniform());
    REQUIRE(classify_filtration(z, f).region == Region::Plus);
    int n = static_cast<int>(r.below(5));
    Cvec w = z;
    s.apply_step(w, n);
    if (classify_filtration(w, f).region != Region::Plus) ++violations;
  }
  CHECK(violations == 0);
  (void)base;
}

TEST_CASE("claimed shift factorization is measured, not assumed", "[sequence]") {
  EtaStep f = make_eta_step(3, 2, complex<double>(0.1, 0.0));
  FactorizationReport r1 = shift_factorization_probe(f, 100, 99);
  FactorizationReport r2 = shift_factorization_probe(f, 100, 99);
  CHECK(r1.samples == 100);
  CHECK(std::isfinite(r1.max_residual));
  CHECK(r1.max_residual == r2.max_residual);
  CHECK(r1.max_residual >= 0.0);
}

TEST_CASE("sequence descriptions are stable strings", "[sequence]") {
  CHECK(power_tower(0.5, 3, 2).describe().find("power_tower") == 0);
  MapSequence hq(HQSchedule{0.5, 1.0 / 9.0, {1}, {1}, 2});
  CHECK(hq.describe().find("hq") == 0);
}
