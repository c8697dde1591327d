#include <dplqr/rng.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

using namespace dplqr;

TEST(Rng, SameSeedSameStream)
{
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto u = a();
    EXPECT_EQ(u, b());
    differs |= u != c();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, Uniform01MeanAndRange)
{
  Rng rng(1);
  double s = 0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    s += u;
  }
  EXPECT_GE(s / 1e5, 0.49);
  EXPECT_LE(s / 1e5, 0.51);
}

TEST(Rng, StdNormalMoments)
{
  Rng rng(2);
  Vector v(100000);
  for (auto& e : v)
    e = rng.std_normal();
  EXPECT_LE(std::abs(mean(v)), 0.02);
  EXPECT_GE(sample_variance(v), 0.97);
  EXPECT_LE(sample_variance(v), 1.03);
}

TEST(Rng, ShuffledIndicesIsPermutation)
{
  Rng rng(5);
  EXPECT_EQ(shuffled_indices(rng, 1), (std::vector<std::size_t>{0}));
  Rng r1(9), r2(9);
  EXPECT_EQ(shuffled_indices(r1, 3), shuffled_indices(r2, 3));
  auto p = shuffled_indices(rng, 1000);
  std::sort(p.begin(), p.end());
  for (std::size_t i = 0; i < p.size(); ++i)
    EXPECT_EQ(p[i], i);
}

TEST(Rng, BelowStaysInRange)
{
  Rng rng(6);
  for (int i = 0; i < 10000; ++i)
    ASSERT_LT(rng.below(7), 7u);
}

TEST(Rng, ChildStreamsDoNotOverlap)
{
  const std::uint64_t master = 2024;
  std::set<std::uint64_t> seen;
  std::size_t total = 0;
  for (std::uint64_t r = 0; r < 20; ++r) {
    Rng child(derive_seed(master, r));
    for (int i = 0; i < 1000; ++i) {
      seen.insert(child());
      ++total;
    }
  }
  EXPECT_EQ(seen.size(), total);
  EXPECT_NE(derive_seed(master, 0), derive_seed(master + 1, 0));
}
