#include <gtest/gtest.h>

#include <algorithm>
#include <map>

#include "fvlab/coalescent.hpp"
#include "fvlab/event_log.hpp"
#include "fvlab/lookdown.hpp"
#include "fvlab/stats.hpp"
#include "lookdown_oracle.hpp"
#include "test_support.hpp"

using namespace fvlab;
using fvtest::ancestors_backward;
using fvtest::apply_event;
using fvtest::event_levels;

namespace {

EventLog random_log(fvtest::Gen& gen, int n, int events) {
  EventLog log(n, 10.0);
  double t = 0.0;
  for (int i = 0; i < events; ++i) {
    t += gen.uniform(1e-3, 0.2);
    if (gen.coin()) {
      const int a = gen.integer(1, n - 1);
      const int b = gen.integer(a + 1, n);
      const std::vector<int> lv = {a, b};
      log.add(t, EventLog::Kind::pair, lv);
    } else {
      const auto lv = gen.levels(n);
      log.add(t, EventLog::Kind::multi, lv);
    }
  }
  return log;
}

}  // namespace

TEST(ShiftRule, SourceLevelMatchesVerbalRule) {
  fvtest::Gen gen(1);
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = gen.integer(2, 25);
    const auto lv = gen.levels(n);
    std::vector<int> ids(n + 1);
    for (int k = 0; k <= n; ++k) ids[k] = k;
    const auto after = apply_event(ids, lv);
    for (int k = 1; k <= n; ++k) ASSERT_EQ(source_level(lv, k), after[k]);
  }
}

TEST(EventLog, SerializeRoundTrip) {
  fvtest::Gen gen(2);
  for (int trial = 0; trial < 50; ++trial) {
    auto log = random_log(gen, gen.integer(2, 30), gen.integer(0, 40));
    log.seed = 12345678901234ULL;
    log.lambda_spec = "kingman:1+beta:1.5";
    log.levy_spec = "brownian:sigma=1";
    const auto back = EventLog::parse(log.serialize());
    EXPECT_TRUE(back == log);
    EXPECT_EQ(back.serialize(), log.serialize());
  }
  EXPECT_THROW(EventLog::parse("garbage"), std::invalid_argument);
}

TEST(EventLog, ValidatesEvents) {
  EventLog log(5, 1.0);
  const std::vector<int> ok = {1, 3}, unsorted = {3, 1}, high = {2, 6}, triple = {1, 2, 3};
  log.add(0.5, EventLog::Kind::pair, ok);
  EXPECT_THROW(log.add(0.4, EventLog::Kind::pair, ok), std::invalid_argument);
  EXPECT_THROW(log.add(0.6, EventLog::Kind::pair, unsorted), std::invalid_argument);
  EXPECT_THROW(log.add(0.6, EventLog::Kind::pair, high), std::out_of_range);
  EXPECT_THROW(log.add(0.6, EventLog::Kind::pair, triple), std::invalid_argument);
  EXPECT_THROW(log.add(1.5, EventLog::Kind::multi, triple), std::invalid_argument);
  log.add(0.7, EventLog::Kind::multi, triple);
  EXPECT_EQ(log.upper_bound(0.5), 1u);
  EXPECT_EQ(log.upper_bound(0.69), 1u);
  EXPECT_EQ(log.upper_bound(2.0), 2u);
}

TEST(LookdownDriver, Rates) {
  const auto m = parse_lambda("kingman:0.5+beta:1.2+atoms:1@0.3");
  const LookdownDriver d(m, 20);
  EXPECT_DOUBLE_EQ(d.pair_rate(), 0.5 * 190);
  EXPECT_NEAR(d.multi_rate(), total_event_rate(m.without_kingman(), 20), 1e-9 * d.multi_rate());
}

TEST(LookdownDriver, KingmanPairsAreUniform) {
  const LookdownDriver d(LambdaMeasure::kingman(), 4);
  Engine rng = make_stream(3, 0, 0);
  std::map<std::pair<int, int>, long long> counts;
  std::vector<int> lv;
  for (int i = 0; i < 60000; ++i) {
    ASSERT_EQ(d.sample_event(rng, lv), EventLog::Kind::pair);
    ++counts[{lv[0], lv[1]}];
  }
  std::vector<long long> obs;
  for (const auto& [k, c] : counts) obs.push_back(c);
  ASSERT_EQ(obs.size(), 6u);
  EXPECT_GT(stats::chi_square_gof(obs, std::vector<double>(6, 1.0 / 6)).p_value, 1e-3);
}

TEST(Lookdown, PositionsFollowTheEventLog) {
  fvtest::Gen gen(4);
  for (int trial = 0; trial < 40; ++trial) {
    const auto m = gen.lambda();
    const int n = gen.integer(2, 30);
    const double t = gen.uniform(0.05, 1.0) / m.total_mass();
    const auto traj = simulate_lookdown(n, m, LevySpec::none(2), InitialLaw::normal(1.0, 2),
                                        {0.5 * t, t}, gen.rng());
    const auto& log = traj.events();
    for (double when : {0.5 * t, t}) {
      std::vector<Point> x(n + 1);
      for (int k = 1; k <= n; ++k) x[k] = traj.initial_positions().col(k - 1);
      for (std::size_t e = 0; e < log.upper_bound(when); ++e) x = apply_event(x, event_levels(log[e]));
      for (int k = 1; k <= n; ++k) ASSERT_EQ(traj.positions_at(when).col(k - 1), x[k]) << trial;
    }
  }
}

TEST(Lookdown, EventCountIsPoisson) {
  const auto m = parse_lambda("kingman:1+atoms:2@0.5");
  const int n = 8;
  const LookdownDriver d(m, n);
  const double t = 0.7;
  stats::MeanAccumulator acc;
  for (int r = 0; r < 4000; ++r) {
    Engine rng = make_stream(7, r, 0);
    acc.add(static_cast<double>(simulate_lookdown(d, LevySpec::none(), InitialLaw::point(Point::Zero(1)), {t}, rng)
                                    .event_count()));
  }
  EXPECT_LT(std::abs(acc.mean() - d.total_rate() * t), 4 * acc.stderr_of_mean());
  EXPECT_NEAR(acc.variance(), d.total_rate() * t, 0.1 * d.total_rate() * t);
}

TEST(Lookdown, LevelsAreExchangeable) {
  const auto m = parse_lambda("kingman:1+beta:1.5");
  const int n = 10;
  const LookdownDriver d(m, n);
  std::vector<stats::MeanAccumulator> sq(n);
  for (int r = 0; r < 4000; ++r) {
    Engine rng = make_stream(8, r, 0);
    const auto traj = simulate_lookdown(d, LevySpec::brownian(1.0), InitialLaw::point(Point::Zero(1)), {0.4}, rng);
    for (int k = 0; k < n; ++k) sq[k].add(traj.positions_at(0.4)(0, k) * traj.positions_at(0.4)(0, k));
  }
  for (int k = 0; k < n; ++k) EXPECT_LT(std::abs(sq[k].mean() - 0.4), 4 * sq[k].stderr_of_mean()) << k;
}

TEST(Lookdown, EventCapAndOptions) {
  Engine rng = make_stream(9, 0, 0);
  LookdownOptions opts;
  opts.event_cap = 10;
  EXPECT_THROW(simulate_lookdown(100, LambdaMeasure::kingman(), LevySpec::none(), InitialLaw::point(Point::Zero(1)),
                                 {1.0}, rng, opts),
               std::runtime_error);
  opts = {};
  opts.record_events = false;
  const auto traj = simulate_lookdown(10, LambdaMeasure::kingman(), LevySpec::none(),
                                      InitialLaw::point(Point::Zero(1)), {1.0}, rng, opts);
  EXPECT_FALSE(traj.events_recorded());
  EXPECT_GT(traj.event_count(), 0u);
  EXPECT_THROW(ancestral_partition(traj, 1.0, 0.5), std::logic_error);
  EXPECT_THROW(traj.positions_at(0.5), std::out_of_range);
  EXPECT_THROW(simulate_lookdown(10, LambdaMeasure::kingman(), LevySpec::none(2),
                                 InitialLaw::point(Point::Zero(1)), {1.0}, rng),
               std::invalid_argument);
}

TEST(AncestralPartition, MatchesBackwardWalkAndLabelsBlocks) {
  fvtest::Gen gen(10);
  for (int trial = 0; trial < 300; ++trial) {
    const auto m = gen.lambda();
    const int n = gen.integer(2, 25);
    const double horizon = gen.uniform(0.1, 2.0) / m.total_mass();
    const auto traj = simulate_lookdown(n, m, LevySpec::none(), InitialLaw::point(Point::Zero(1)), {horizon},
                                        gen.rng());
    const double t = gen.uniform(0.0, horizon);
    const double s = gen.uniform(0.0, t);
    const auto ap = ancestral_partition(traj.events(), t, s);
    ASSERT_EQ(ap.ancestor_level, ancestors_backward(traj.events(), t, s));
    for (std::size_t i = 0; i < ap.blocks.block_count(); ++i) {
      for (int j : ap.blocks.block(i)) ASSERT_EQ(ap.ancestor_level[j - 1], static_cast<int>(i) + 1);
    }
  }
}

TEST(AncestralPartition, LawMatchesCoalescent) {
  const auto m = parse_lambda("kingman:1+atoms:1@0.6");
  const int n = 4;
  const double t = 1.0, s = 0.4;
  std::map<std::string, long long> a, b;
  const LookdownDriver d(m, n);
  const MergerRateTable table(m, n);
  for (int r = 0; r < 30000; ++r) {
    Engine rng = make_stream(11, r, 0);
    const auto traj = simulate_lookdown(d, LevySpec::none(), InitialLaw::point(Point::Zero(1)), {t}, rng);
    ++a[ancestral_partition(traj, t, s).blocks.to_string()];
    ++b[simulate_coalescent(table, n, s, rng).partition_at(s).to_string()];
  }
  std::vector<long long> ca, cb;
  for (const auto& [k, v] : a) {
    ca.push_back(v);
    cb.push_back(b[k]);
  }
  for (const auto& [k, v] : b) {
    if (!a.count(k)) {
      ca.push_back(0);
      cb.push_back(v);
    }
  }
  EXPECT_GT(stats::chi_square_homogeneity(ca, cb).p_value, 1e-3);
}

TEST(ClusterMeasure, BlocksSumToEmpiricalMeasure) {
  Engine rng = make_stream(12, 0, 0);
  const auto traj = simulate_lookdown(50, parse_lambda("kingman:1+beta:1.5"), LevySpec::brownian(1.0),
                                      InitialLaw::normal(1.0, 1), {0.3}, rng);
  const auto z = empirical_measure(traj, 0.3);
  EXPECT_EQ(z.total_mass(), 1.0);
  const auto phi = phi::indicator_ball(Point::Zero(1), 0.8);
  const auto ap = ancestral_partition(traj, 0.3, 0.2);
  double sum = 0.0;
  for (std::size_t i = 1; i <= ap.blocks.block_count(); ++i) sum += cluster_measure(traj, ap, i, phi);
  EXPECT_NEAR(sum, z.integrate(phi), 1e-12);
  EXPECT_THROW(cluster_measure(traj, ap, 0, phi), std::out_of_range);
}
