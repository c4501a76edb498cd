#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "nspgds/rng.hpp"

using namespace nspgds;

TEST_CASE("identical (seed, stream) replays an identical sequence") {
  RngStream a(42, Var::Theta, 17, 3);
  RngStream b(42, Var::Theta, 17, 3);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different keys give different sequences") {
  RngStream base(42, Var::Theta, 17, 3);
  RngStream other_idx(42, Var::Theta, 18, 3);
  RngStream other_sweep(42, Var::Theta, 17, 4);
  RngStream other_tag(42, Var::Delta, 17, 3);
  const uint64_t x = base.next_u64();
  CHECK(x != other_idx.next_u64());
  CHECK(x != other_sweep.next_u64());
  CHECK(x != other_tag.next_u64());
}

TEST_CASE("stream ids do not collide over a realistic key grid") {
  std::set<uint64_t> ids;
  for (uint32_t tag = 1; tag <= 20; ++tag)
    for (uint64_t idx = 0; idx < 200; ++idx)
      for (uint64_t sweep = 0; sweep < 5; ++sweep)
        ids.insert(RngStream::derive_stream_id(static_cast<Var>(tag), idx, sweep));
  CHECK(ids.size() == 20u * 200u * 5u);
}

TEST_CASE("distinct streams pass a correlation smoke test") {
  const int n = 20000;
  std::vector<std::vector<double>> u;
  for (int s = 0; s < 4; ++s) {
    RngStream rng(7, Var::Test, s, 0);
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = rng.next_double();
    u.push_back(std::move(x));
  }
  for (int a = 0; a < 4; ++a) {
    double mean = 0;
    for (double v : u[a]) mean += v;
    mean /= n;
    CHECK(std::abs(mean - 0.5) < 0.02);
    for (int b = a + 1; b < 4; ++b) {
      double cov = 0;
      for (int i = 0; i < n; ++i) cov += (u[a][i] - 0.5) * (u[b][i] - 0.5);
      cov /= n;
      const double corr = cov / (1.0 / 12.0);
      CHECK(std::abs(corr) < 0.05);
    }
  }
}

TEST_CASE("uniforms stay inside the open unit interval") {
  RngStream rng(1, Var::Test, 0, 0);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.next_double();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}
