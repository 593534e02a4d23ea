#include <doctest.h>

#include "nmps/rng.hpp"

using namespace nmps;

TEST_CASE("rng streams are deterministic and independent") {
  Rng a(42, Stream::EnvReset);
  Rng b(42, Stream::EnvReset);
  Rng c(42, Stream::TaskSample);
  bool same_stream_equal = true;
  bool cross_stream_equal = true;
  for (int i = 0; i < 100; ++i) {
    const uint64_t x = a.next_u64();
    same_stream_equal &= (x == b.next_u64());
    cross_stream_equal &= (x == c.next_u64());
  }
  CHECK(same_stream_equal);
  CHECK_FALSE(cross_stream_equal);
}

TEST_CASE("uniform01 stays in [0,1)") {
  Rng rng(7);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
  }
}

TEST_CASE("uniform_int covers the range without bias artifacts") {
  Rng rng(11);
  std::vector<long> counts(7, 0);
  for (int i = 0; i < 70000; ++i) counts[rng.uniform_int(7)] += 1;
  for (long c : counts) {
    CHECK(c > 9000);
    CHECK(c < 11000);
  }
  CHECK_THROWS_AS(rng.uniform_int(0), std::invalid_argument);
}

TEST_CASE("normal has roughly standard moments") {
  Rng rng(13);
  double sum = 0.0, sq = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.03);
}

TEST_CASE("categorical respects weights") {
  Rng rng(17);
  std::vector<double> w = {1.0, 3.0};
  long ones = 0;
  for (int i = 0; i < 40000; ++i)
    if (rng.categorical(w) == 1) ++ones;
  CHECK(std::abs(ones / 40000.0 - 0.75) < 0.02);
  CHECK_THROWS_AS(rng.categorical({0.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(rng.categorical({-1.0, 2.0}), std::invalid_argument);
}
