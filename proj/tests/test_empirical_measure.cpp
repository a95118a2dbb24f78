#include <gtest/gtest.h>

#include "fvlab/empirical_measure.hpp"
#include "fvlab/rng.hpp"

using namespace fvlab;

namespace {
Point p1(double x) { return Point::Constant(1, x); }
}  // namespace

TEST(EmpiricalMeasure, UniformHasExactUnitMass) {
  std::vector<Point> pts;
  for (int i = 0; i < 37; ++i) pts.push_back(p1(i * 0.1));
  const auto m = EmpiricalMeasure::uniform(pts);
  EXPECT_EQ(m.total_mass(), 1.0);
  EXPECT_EQ(m.integrate(phi::constant(1.0)), 1.0);
  EXPECT_NEAR(m.mass_in(BallQuery{p1(0.0), 0.25}), 3.0 / 37, 1e-15);
  EXPECT_TRUE(m.charges(BallQuery{p1(3.6), 0.01}));
  EXPECT_FALSE(m.charges(BallQuery{p1(3.65), 0.01}));
  EXPECT_NEAR(m.mass_in(Enlargement{{p1(0.0), p1(1.0)}, 0.15}), 5.0 / 37, 1e-15);
}

TEST(EmpiricalMeasure, CompactionMergesDuplicates) {
  EmpiricalMeasure m(1);
  m.add(0.25, p1(2.0));
  m.add(0.5, p1(-1.0));
  m.add(0.25, p1(2.0));
  const auto c = m.compacted();
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c.atoms()[0].point(0), -1.0);
  EXPECT_EQ(c.atoms()[1].weight, 0.5);
  EXPECT_EQ(c.total_mass(), 1.0);
}

TEST(InitialLaw, ParseAndSample) {
  const auto pt = parse_initial_law("point:1,2", 2);
  Engine rng = make_stream(1, 0, 0);
  EXPECT_EQ(pt.sample(rng), (Point(2) << 1, 2).finished());
  const auto at = parse_initial_law("atoms:0;1;5", 1);
  EXPECT_EQ(at.as_measure().size(), 3u);
  int fives = 0;
  for (int i = 0; i < 3000; ++i) fives += at.sample(rng)(0) == 5.0;
  EXPECT_NEAR(fives / 3000.0, 1.0 / 3, 0.04);
  const auto nm = parse_initial_law("normal:2", 3);
  EXPECT_EQ(nm.dimension(), 3);
  EXPECT_EQ(nm.as_measure().size(), 0u);
  EXPECT_THROW(parse_initial_law("point:1,2", 1), std::invalid_argument);
  EXPECT_THROW(parse_initial_law("normal:-1", 1), std::invalid_argument);
  EXPECT_THROW(parse_initial_law("cauchy:1", 1), std::invalid_argument);
  EXPECT_EQ(format_point(parse_point("1.5,-2")), "1.5,-2");
}
