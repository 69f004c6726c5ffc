#include <catch2/catch_amalgamated.hpp>

#include "shortck/complex_vector.hpp"
#include "shortck/filtration.hpp"
#include "shortck/matrix.hpp"
#include "shortck/rng.hpp"

using namespace shortck;
using std::complex;

TEST_CASE("sup norm basics", "[geometry]") {
  CHECK(sup_norm(cvec({0.0, 0.0, 0.0})) == 0.0);
  CHECK(sup_norm(cvec({{3.0, 4.0}, 0.0, 0.0})) == Catch::Approx(5.0).epsilon(1e-15));
  CHECK(sup_norm(cvec({0.3, 4.1, 9.2})) == Catch::Approx(9.2).epsilon(1e-15));
  Cvec bad = cvec({1.0, 0.0});
  bad[1] = complex<double>(std::numeric_limits<double>::infinity(), 0.0);
  CHECK_THROWS_WITH(sup_norm(bad), Catch::Matchers::ContainsSubstring("non-finite input"));
}

TEST_CASE("sup norm is a norm", "[geometry]") {
  Rng r(11);
  for (int t = 0; t < 300; ++t) {
    Cvec a(3), b(3);
    for (int i = 0; i < 3; ++i) {
      a[i] = r.disc(2.0);
      b[i] = r.disc(2.0);
    }
    complex<double> c = r.disc(3.0);
    CHECK(sup_norm(c * a) == Catch::Approx(std::abs(c) * sup_norm(a)).margin(1e-12));
    CHECK(sup_norm(a + b) <= sup_norm(a) + sup_norm(b) + 1e-12);
  }
}

TEST_CASE("dimension guard", "[geometry]") {
  CHECK_THROWS_AS(Cvec(1), std::invalid_argument);
  CHECK_THROWS_AS(Cvec(9), std::invalid_argument);
  CHECK_NOTHROW(Cvec(2));
  CHECK_NOTHROW(Cvec(8));
}

TEST_CASE("polydisc membership is strict", "[geometry]") {
  CHECK(in_polydisc(cvec({0.0, 0.0}), 1.0));
  CHECK_FALSE(in_polydisc(cvec({1.0, 0.0}), 1.0));
  CHECK(in_polydisc(cvec({0.5, {0.0, 0.9}}), 1.0));
  LogVec l = to_log(cvec({0.5, {0.0, 0.9}}));
  CHECK(in_polydisc(l, 1.0));
  CHECK_FALSE(in_polydisc(to_log(cvec({1.0, 0.0})), 1.0));
}

TEST_CASE("filtration classification on pinned points", "[filtration]") {
  FiltrationSpec f = FiltrationSpec::eta_default(3, 2.0);
  RegionTag t1 = classify_filtration(cvec({0.0, 0.0, 3.0}), f);
  CHECK(t1.region == Region::Plus);
  CHECK(t1.dominant_axis == 3);
  RegionTag t2 = classify_filtration(cvec({1.0, 1.0, 1.0}), f);
  CHECK(t2.region == Region::Interior);
  CHECK(t2.dominant_axis == 0);
  RegionTag t3 = classify_filtration(cvec({3.0, 0.0, 0.0}), f);
  CHECK(t3.region == Region::Minus);
  CHECK(t3.dominant_axis == 1);
}

TEST_CASE("ties resolve to the largest axis and R itself is outside", "[filtration]") {
  FiltrationSpec f = FiltrationSpec::eta_default(3, 1.5);
  RegionTag t = classify_filtration(cvec({2.0, 0.0, {0.0, 2.0}}), f);
  CHECK(t.region == Region::Plus);
  CHECK(t.dominant_axis == 3);
  RegionTag t2 = classify_filtration(cvec({2.0, 2.0, 0.5}), f);
  CHECK(t2.region == Region::Plus);
  CHECK(t2.dominant_axis == 2);
  RegionTag border = classify_filtration(cvec({0.0, 1.5, 0.0}), f);
  CHECK(border.region == Region::Plus);
  CHECK(border.dominant_axis == 2);
}

TEST_CASE("filtration spec validation", "[filtration]") {
  CHECK_THROWS_AS(FiltrationSpec(3, 0.9, 0b110), std::invalid_argument);
  CHECK_THROWS_AS(FiltrationSpec(3, 2.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(FiltrationSpec(3, 2.0, 0b111), std::invalid_argument);
  CHECK_THROWS_AS(FiltrationSpec(3, 2.0, 0b1000), std::invalid_argument);
  FiltrationSpec d = FiltrationSpec::eta_default(4, 2.0);
  CHECK_FALSE(d.is_plus_axis(1));
  CHECK(d.is_plus_axis(2));
  CHECK(d.is_plus_axis(4));
  FiltrationSpec s = FiltrationSpec::shift_type(3, 2, 2.0);
  CHECK_FALSE(s.is_plus_axis(1));
  CHECK(s.is_plus_axis(2));
  CHECK(s.is_plus_axis(3));
  FiltrationSpec s1 = FiltrationSpec::shift_type(4, 1, 2.0);
  CHECK(s1.plus_mask == 0b1000);
  CHECK_THROWS_AS(FiltrationSpec::shift_type(3, 3, 2.0), std::invalid_argument);
}

TEST_CASE("classification partitions space and ignores a global phase", "[filtration]") {
  FiltrationSpec f = FiltrationSpec::eta_default(3, 1.6);
  Rng r(13);
  for (int t = 0; t < 10000; ++t) {
    Cvec z(3);
    for (int i = 0; i < 3; ++i) z[i] = r.disc(3.0);
    RegionTag tag = classify_filtration(z, f);
    double s = sup_norm(z);
    if (s < f.R) {
      REQUIRE(tag.region == Region::Interior);
      REQUIRE(tag.dominant_axis == 0);
    } else {
      REQUIRE(tag.region != Region::Interior);
      REQUIRE(tag.dominant_axis >= 1);
      REQUIRE(tag.dominant_axis <= 3);
      REQUIRE(std::abs(z[tag.dominant_axis - 1]) == Catch::Approx(s).epsilon(1e-15));
      REQUIRE((tag.region == Region::Plus) == f.is_plus_axis(tag.dominant_axis));
    }
    complex<double> u = r.unit_circle();
    RegionTag rotated = classify_filtration(u * z, f);
    CHECK(rotated.region == tag.region);
  }
}

TEST_CASE("log-space classification agrees with the complex path", "[filtration]") {
  FiltrationSpec f = FiltrationSpec::eta_default(4, 2.0);
  Rng r(17);
  for (int t = 0; t < 2000; ++t) {
    Cvec z(4);
    for (int i = 0; i < 4; ++i) z[i] = r.disc(4.0);
    RegionTag a = classify_filtration(z, f);
    RegionTag b = classify_filtration(to_log(z), f);
    CHECK(a.region == b.region);
    CHECK(a.dominant_axis == b.dominant_axis);
  }
}

TEST_CASE("vector helpers", "[geometry]") {
  Cvec a = cvec({1.0, 2.0});
  Cvec b = cvec({{0.0, 1.0}, 3.0});
  CHECK(sup_dist(a, b) == Catch::Approx(std::abs(complex<double>(1.0, -1.0))).epsilon(1e-15));
  LogVec l = to_log(a);
  Cvec back = to_cvec(l);
  CHECK(sup_dist(a, back) < 1e-14);
  CHECK(log_sup_norm(a) == Catch::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(log_sup_norm(Cvec(2)) == -std::numeric_limits<double>::infinity());
  CHECK(log_sup_norm(to_log(b)) == Catch::Approx(std::log(3.0)).epsilon(1e-15));
}

TEST_CASE("matrix inverse and conditioning", "[matrix]") {
  Rng r(19);
  for (int t = 0; t < 50; ++t) {
    Mat m(3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m.at(i, j) = (i == j ? 1.0 : 0.0) + 0.3 * r.disc(1.0);
    Mat inv = inverse(m);
    Mat prod = m * inv;
    Mat eye = Mat::identity(3);
    double err = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) err = std::max(err, std::abs(prod.at(i, j) - eye.at(i, j)));
    CHECK(err < 1e-12);
    CHECK(cond_inf(m) >= 1.0);
  }
  Mat sing(2);
  sing.at(0, 0) = 1.0;
  sing.at(0, 1) = 2.0;  // second row zero
  CHECK_THROWS_WITH(inverse(sing), Catch::Matchers::ContainsSubstring("singular"));
}

TEST_CASE("matrix vector product", "[matrix]") {
  Mat m(2);
  m.at(0, 0) = 2.0;
  m.at(0, 1) = complex<double>(0.0, 1.0);
  m.at(1, 0) = 1.0;
  m.at(1, 1) = -1.0;
  Cvec z = cvec({1.0, {1.0, 1.0}});
  Cvec w = m * z;
  CHECK(std::abs(w[0] - complex<double>(1.0, 1.0)) < 1e-15);
  CHECK(std::abs(w[1] - complex<double>(0.0, -1.0)) < 1e-15);
}
