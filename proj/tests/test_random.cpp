#include <cmath>
#include <cstdlib>
#include <set>

#include <gtest/gtest.h>

#include "geomprob/batch.hpp"
#include "geomprob/random.hpp"

using namespace geomprob;

TEST(Mixer, InjectiveOverManySubstreams) {
  std::set<std::uint64_t> keys;
  for (std::uint64_t i = 0; i < 200000; ++i) keys.insert(mix(42, i));
  EXPECT_EQ(keys.size(), 200000u);
}

TEST(Mixer, FrozenConstants) {
  // SplitMix64 reference output for state 0 after one increment.
  EXPECT_EQ(avalanche(kGolden), 0xE220A8397B1DCDAFULL);
}

TEST(SampleStream, DrawIsPureFunctionOfCounter) {
  SampleStream a(Seed{7});
  for (int i = 0; i < 10; ++i) a.next_u64();
  SampleStream b(Seed{7}.value, 10);
  EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(SampleStream, UniformMoments) {
  SampleStream s(Seed{3});
  double sum = 0.0, sum2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sum2 += u * u;
  }
  EXPECT_NEAR(sum / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
  EXPECT_NEAR(sum2 / n, 1.0 / 3.0, 0.005);
}

TEST(SampleStream, NormalPairMoments) {
  SampleStream s(Seed{11});
  double m = 0.0, v = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    double a, b;
    s.normal_pair(a, b);
    m += a + b;
    v += a * a + b * b;
  }
  EXPECT_NEAR(m / (2 * n), 0.0, 4.0 / std::sqrt(2.0 * n));
  EXPECT_NEAR(v / (2 * n), 1.0, 0.02);
}

TEST(Batches, IdenticalAcrossWorkerCounts) {
  auto run = [] {
    const BatchSums s = run_tuples(10000, Seed{5}, 1, [](SampleStream& st, std::span<double> out) {
      out[0] = st.uniform();
    });
    return output_estimate(s, 0, Seed{5});
  };
  ::setenv("GEOMPROB_THREADS", "1", 1);
  const MomentEstimate serial = run();
  ::setenv("GEOMPROB_THREADS", "4", 1);
  const MomentEstimate parallel = run();
  ::unsetenv("GEOMPROB_THREADS");
  EXPECT_EQ(serial.mean, parallel.mean);
  EXPECT_EQ(serial.std_error, parallel.std_error);
}

TEST(Batches, StderrHalvesWhenNQuadruples) {
  auto se = [](std::uint64_t n) {
    const BatchSums s = run_tuples(n, Seed{9}, 1, [](SampleStream& st, std::span<double> out) {
      out[0] = st.uniform();
    });
    return output_estimate(s, 0, Seed{9}).std_error;
  };
  const double ratio = se(100000) / se(400000);
  EXPECT_NEAR(ratio, 2.0, 0.6);
}

TEST(Batches, JackknifeOfLinearFunctionMatchesBatchMeans) {
  const BatchSums s = run_tuples(50000, Seed{2}, 1, [](SampleStream& st, std::span<double> out) {
    out[0] = st.uniform();
  });
  const MomentEstimate lin = output_estimate(s, 0, Seed{2});
  const MomentEstimate jk = jackknife_estimate(s, [](std::span<const double> m) { return m[0]; }, Seed{2});
  EXPECT_DOUBLE_EQ(lin.mean, jk.mean);
  // equal batch sizes make the two standard errors coincide
  EXPECT_NEAR(jk.std_error / lin.std_error, 1.0, 0.05);
}
