#include <doctest.h>

#include "invopt/rng.hpp"

using namespace invopt;

TEST_CASE("rng is a pure function of key and counter") {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  CHECK(Rng::word(123, 57) == Rng::word(123, 57));
  CHECK(Rng::word(123, 57) != Rng::word(124, 57));
}

TEST_CASE("substreams are disjoint and reproducible") {
  Rng master(7);
  Rng t1 = master.substream("train");
  Rng t2 = master.substream("test");
  CHECK(t1.key() != t2.key());
  CHECK(Rng(7).substream("train").next_u64() == Rng(7).substream("train").next_u64());
}

TEST_CASE("uniform draws stay in range and fill row major") {
  Rng rng(99);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.uniform(-2.0, 3.0);
    CHECK(v >= -2.0);
    CHECK(v < 3.0);
  }
  Rng a(5), b(5);
  auto m = a.uniform_matrix(2, 3, 0, 1);
  CHECK(m(0, 0) == b.uniform(0, 1));
  CHECK(m(0, 1) == b.uniform(0, 1));
}

TEST_CASE("mean of uniforms concentrates") {
  Rng rng(2024);
  double acc = 0;
  const int N = 20000;
  for (int i = 0; i < N; ++i) acc += rng.next_double();
  CHECK(std::abs(acc / N - 0.5) < 0.01);
}
