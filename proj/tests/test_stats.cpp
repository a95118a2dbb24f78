#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "fvlab/replicas.hpp"
#include "fvlab/rng.hpp"
#include "fvlab/stats.hpp"

using namespace fvlab;

TEST(Stats, MeanAccumulatorMatchesTwoPass) {
  Engine rng = make_stream(1, 0, 0);
  std::vector<double> xs;
  stats::MeanAccumulator a, b;
  for (int i = 0; i < 1000; ++i) {
    xs.push_back(1e6 + uniform01(rng));
    (i % 2 ? a : b).add(xs.back());
  }
  a.merge(b);
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  EXPECT_NEAR(a.mean(), mean, 1e-9);
  EXPECT_NEAR(a.variance(), ss / (xs.size() - 1), 1e-6);
  EXPECT_EQ(a.count(), 1000u);
}

TEST(Stats, ChiSquareKnownValues) {
  // (60-50)^2/50 * 2 = 4 on one degree of freedom.
  const std::vector<long long> obs = {60, 40};
  const std::vector<double> p = {0.5, 0.5};
  const auto r = stats::chi_square_gof(obs, p);
  EXPECT_NEAR(r.statistic, 4.0, 1e-12);
  EXPECT_EQ(r.dof, 1.0);
  EXPECT_NEAR(r.p_value, std::erfc(std::sqrt(2.0)), 1e-12);
  const std::vector<long long> a = {10, 20, 0}, b = {20, 40, 0};
  const auto h = stats::chi_square_homogeneity(a, b);
  EXPECT_NEAR(h.statistic, 0.0, 1e-12);
  EXPECT_EQ(h.dof, 1.0);
}

TEST(Stats, KolmogorovSmirnov) {
  std::vector<double> a = {1, 2, 3, 4, 5}, b = {1, 2, 3, 4, 5};
  EXPECT_EQ(stats::ks_two_sample(a, b).statistic, 0.0);
  std::vector<double> c = {10, 11, 12, 13, 14};
  EXPECT_EQ(stats::ks_two_sample(a, c).statistic, 1.0);
}

TEST(Stats, ZScoreEdgeCases) {
  EXPECT_EQ(stats::z_score(1.0, 0.0, 1.0, 0.0), 0.0);
  EXPECT_TRUE(std::isinf(stats::z_score(1.0, 0.0, 2.0, 0.0)));
  EXPECT_NEAR(stats::z_score(1.0, 3.0, 0.0, 4.0), 0.2, 1e-15);
}

TEST(Replicas, ResultsIndependentOfWorkerCount) {
  auto job = [](long r) {
    Engine rng = make_stream(5, static_cast<std::uint64_t>(r), 1);
    return uniform01(rng);
  };
  const auto one = run_replicas<double>(37, 1, job);
  const auto three = run_replicas<double>(37, 3, job);
  EXPECT_EQ(one, three);
  EXPECT_THROW(run_replicas<double>(5, 2, [](long r) -> double {
                 if (r == 3) throw std::runtime_error("boom");
                 return 0.0;
               }),
               std::runtime_error);
}

TEST(Rng, StreamsDifferAcrossReplicaAndSalt) {
  Engine a = make_stream(1, 0, 0), b = make_stream(1, 1, 0), c = make_stream(1, 0, 1), d = make_stream(1, 0, 0);
  const auto x = a();
  EXPECT_NE(x, b());
  EXPECT_NE(x, c());
  EXPECT_EQ(x, d());
  Engine e = make_stream(2, 0, 0);
  for (int i = 0; i < 1000; ++i) {
    const auto k = uniform_index(e, 7);
    ASSERT_LT(k, 7u);
    const double u = uniform_open0(e);
    ASSERT_GT(u, 0.0);
    ASSERT_LE(u, 1.0);
  }
}
