#include "subdeconv/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace subdeconv;

TEST_SUITE("rng") {
  TEST_CASE("same seed, same stream") {
    Rng a(RngSeed{42});
    Rng b(RngSeed{42});
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
  }

  TEST_CASE("mt19937_64 engine matches its standard value") {
    // 10000th output of default-seeded mt19937_64 is fixed by the standard;
    // checked here on the bare engine our streams are built on.
    std::mt19937_64 e;
    e.discard(9999);
    CHECK(e() == 9981545732273789042ull);
  }

  TEST_CASE("split streams differ from each other and from the parent") {
    const RngSeed parent{7};
    std::set<std::uint64_t> firsts;
    firsts.insert(Rng(parent).next());
    for (std::uint64_t s = 0; s < 50; ++s) firsts.insert(Rng(split(parent, s)).next());
    CHECK(firsts.size() == 51);
    CHECK(split(parent, 3).value == split(parent, 3).value);
    CHECK(split(RngSeed{8}, 2).value != split(RngSeed{7}, 3).value);
  }

  TEST_CASE("uniform and normal moments") {
    Rng rng(RngSeed{1});
    const int n = 200000;
    double su = 0, su2 = 0, sn = 0, sn2 = 0;
    for (int i = 0; i < n; ++i) {
      const double u = rng.uniform();
      CHECK(u >= 0.0);
      CHECK(u < 1.0);
      su += u;
      su2 += u * u;
      const double z = rng.normal();
      sn += z;
      sn2 += z * z;
    }
    CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
    CHECK(su2 / n - (su / n) * (su / n) == doctest::Approx(1.0 / 12).epsilon(0.02));
    CHECK(std::abs(sn / n) < 4.0 / std::sqrt(n));
    CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.02));
  }

  TEST_CASE("below stays in range and hits every value") {
    Rng rng(RngSeed{3});
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 1000; ++i) {
      const auto v = rng.below(7);
      CHECK(v < 7);
      seen.insert(v);
    }
    CHECK(seen.size() == 7);
  }
}
