#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <cstdlib>
#include <vector>

#include "shortck/rng.hpp"
#include "shortck/util.hpp"

using namespace shortck;

TEST_CASE("strprintf formats and survives long output", "[util]") {
  CHECK(strprintf("%d-%s", 7, "x") == "7-x");
  std::string long_arg(2000, 'q');
  std::string out = strprintf("[%s]", long_arg.c_str());
  CHECK(out.size() == 2002);
  CHECK(out.front() == '[');
  CHECK(out.back() == ']');
}

TEST_CASE("fmt_double round-trips doubles exactly", "[util]") {
  for (double x : {0.1, -3.725290298461914e-09, 1e300, 0.0, 12345.678901234567}) {
    std::string s = fmt_double(x);
    CHECK(std::strtod(s.c_str(), nullptr) == x);
  }
}

TEST_CASE("fnv1a64 matches the reference vectors", "[util]") {
  CHECK(fnv1a64(std::string{}) == 0xcbf29ce484222325ull);
  CHECK(fnv1a64(std::string{"a"}) == 0xaf63dc4c8601ec8cull);
}

TEST_CASE("parallel_for matches serial evaluation for any worker count", "[util]") {
  const size_t n = 1000;
  std::vector<long> serial(n), par(n);
  for (size_t i = 0; i < n; ++i) serial[i] = static_cast<long>(i * i);
  for (int threads : {1, 2, 4, 16}) {
    std::fill(par.begin(), par.end(), -1);
    parallel_for(n, threads, [&](size_t i) { par[i] = static_cast<long>(i * i); });
    CHECK(par == serial);
  }
}

TEST_CASE("parallel_for propagates exceptions", "[util]") {
  CHECK_THROWS_AS(parallel_for(100, 4,
                               [](size_t i) {
                                 if (i == 57) throw std::runtime_error("boom");
                               }),
                  std::runtime_error);
}

TEST_CASE("per-sample rng streams are deterministic", "[rng]") {
  Rng a = Rng::for_sample(42, 7);
  Rng b = Rng::for_sample(42, 7);
  for (int i = 0; i < 16; ++i) CHECK(a.next() == b.next());
  Rng c = Rng::for_sample(42, 8);
  Rng d = Rng::for_sample(43, 7);
  Rng e = Rng::for_sample(42, 7);
  CHECK(c.next() != e.next());
  Rng f = Rng::for_sample(42, 7);
  CHECK(d.next() != f.next());
}

TEST_CASE("rng draws stay in range and look uniform", "[rng]") {
  Rng r(123);
  double sum = 0.0;
  for (int i = 0; i < 10000; ++i) {
    double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / 10000.0 - 0.5) < 0.02);
  for (int i = 0; i < 1000; ++i) {
    CHECK(std::abs(r.disc(2.0)) < 2.0);
    double m = std::abs(r.unit_circle());
    CHECK(m == Catch::Approx(1.0).margin(1e-12));
    CHECK(r.below(10) < 10);
    double v = r.uniform(-3.0, -1.0);
    CHECK(v >= -3.0);
    CHECK(v < -1.0);
  }
}
