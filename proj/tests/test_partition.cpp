#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "fvlab/partition.hpp"
#include "test_support.hpp"

using namespace fvlab;

TEST(Partition, FromBlocksNormalizes) {
  const auto p = Partition::from_blocks(5, {{4, 2}, {5}, {3, 1}});
  EXPECT_EQ(p.to_string(), "{{1,3},{2,4},{5}}");
  EXPECT_EQ(p.block_of(4), 1u);
  EXPECT_THROW(Partition::from_blocks(3, {{1, 2}, {2, 3}}), std::invalid_argument);
  EXPECT_THROW(Partition::from_blocks(3, {{1, 2}}), std::invalid_argument);
  EXPECT_THROW(Partition::from_blocks(3, {{1, 2}, {}, {3}}), std::invalid_argument);
}

TEST(Partition, RandomMergesKeepACover) {
  fvtest::Gen gen(1);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = gen.integer(2, 40);
    Partition p = Partition::singletons(n);
    while (p.block_count() > 1) {
      const Partition before = p;
      const int b = static_cast<int>(p.block_count());
      const int k = gen.integer(2, b);
      std::vector<std::size_t> pos(b);
      std::iota(pos.begin(), pos.end(), 0);
      std::shuffle(pos.begin(), pos.end(), gen.rng());
      pos.resize(k);
      std::sort(pos.begin(), pos.end());
      p.merge(pos);
      ASSERT_EQ(p.block_count(), before.block_count() - k + 1);
      ASSERT_TRUE(p.coarsens(before));
      ASSERT_FALSE(before.coarsens(p));
      std::vector<int> seen;
      for (const auto& blk : p.blocks()) {
        ASSERT_TRUE(std::is_sorted(blk.begin(), blk.end()));
        seen.insert(seen.end(), blk.begin(), blk.end());
      }
      std::sort(seen.begin(), seen.end());
      for (int i = 0; i < n; ++i) ASSERT_EQ(seen[i], i + 1);
      for (std::size_t i = 1; i < p.block_count(); ++i) ASSERT_LT(p.block(i - 1).front(), p.block(i).front());
      const int m = gen.integer(1, n);
      const auto r = p.restricted(m);
      EXPECT_EQ(r.n(), m);
      EXPECT_TRUE(p.restricted(n) == p);
    }
  }
}

TEST(Partition, MergeRejectsBadPositions) {
  Partition p = Partition::singletons(4);
  const std::vector<std::size_t> one = {1};
  const std::vector<std::size_t> dup = {1, 1};
  const std::vector<std::size_t> out = {1, 7};
  EXPECT_THROW(p.merge(one), std::invalid_argument);
  EXPECT_THROW(p.merge(dup), std::invalid_argument);
  EXPECT_THROW(p.merge(out), std::invalid_argument);
}

TEST(CoalescentPath, PartitionReplay) {
  CoalescentPath path(5, 2.0);
  path.append({0.5, {1, 3}});
  path.append({1.0, {0, 2}});
  EXPECT_EQ(path.partition_at(0.4).to_string(), "{{1},{2},{3},{4},{5}}");
  EXPECT_EQ(path.partition_at(0.5).to_string(), "{{1},{2,4},{3},{5}}");
  EXPECT_EQ(path.partition_at(1.5).to_string(), "{{1,3},{2,4},{5}}");
  EXPECT_EQ(path.block_sizes_at(1.5), (std::vector<int>{2, 2, 1}));
  EXPECT_THROW(path.append({0.9, {0, 1}}), std::invalid_argument);
}
