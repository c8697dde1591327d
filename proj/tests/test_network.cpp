#include "oracles.hpp"

#include <dplqr/network.hpp>

#include <gtest/gtest.h>

using namespace dplqr;

namespace {

NetworkParams make(std::vector<std::size_t> widths, std::vector<Matrix> layers)
{
  NetworkParams p{std::move(widths), std::move(layers)};
  validate(p);
  return p;
}

NetworkParams random_net(Rng& rng, std::size_t max_depth = 4)
{
  const std::size_t depth = 1 + rng.below(max_depth);
  std::vector<std::size_t> w{1 + rng.below(4)};
  for (std::size_t k = 1; k < depth; ++k)
    w.push_back(1 + rng.below(8));
  w.push_back(1);
  auto p = init_params(w, rng);
  for (auto& m : p.layers)
    for (auto& e : m.entries())
      e = rng.uniform(-1.0, 1.0);
  return p;
}

} // namespace

TEST(Relu, Values)
{
  EXPECT_EQ(relu(-1), 0.0);
  EXPECT_EQ(relu(2), 2.0);
  EXPECT_EQ(relu(0), 0.0);
}

TEST(Forward, HandExamples)
{
  const auto zero = make({2, 3, 1}, {Matrix(3, 3), Matrix(1, 4)});
  EXPECT_EQ(forward(zero, Vector{1, 2}), 0.0);

  const auto affine = make({2, 1}, {Matrix(1, 3, {2, -1, 0.5})});
  EXPECT_DOUBLE_EQ(forward(affine, Vector{1, 1}), 1.5);

  const auto relu_net = make({1, 2, 1}, {Matrix(2, 2, {1, 0, -1, 0}), Matrix(1, 3, {1, 1, 1})});
  EXPECT_DOUBLE_EQ(forward(relu_net, Vector{3}), 4.0);
}

TEST(Forward, DimensionMismatchThrows)
{
  const auto affine = make({2, 1}, {Matrix(1, 3, {2, -1, 0.5})});
  EXPECT_THROW(forward(affine, Vector{1}), DimensionError);
  EXPECT_THROW(make({2, 1}, {Matrix(1, 2)}), DimensionError);
}

TEST(Forward, BatchMatchesSingleExactly)
{
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const auto p = random_net(rng);
    Matrix z(5, p.input_dim());
    for (auto& e : z.entries())
      e = rng.uniform(-2, 2);
    const auto b = forward_batch(p, z);
    ASSERT_EQ(b.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) {
      EXPECT_EQ(b[i], forward(p, z.row(i)));
      EXPECT_NEAR(b[i], oracle::naive_forward(p, Vector(z.row(i).begin(), z.row(i).end())),
                  1e-12);
    }
  }
  const auto p = random_net(rng);
  EXPECT_TRUE(forward_batch(p, Matrix(0, p.input_dim())).empty());
}

TEST(Forward, PositiveHomogeneityWithoutBias)
{
  Rng rng(8);
  auto p = init_params(std::vector<std::size_t>{3, 6, 1}, rng);
  const Vector z{0.3, -1.2, 0.8};
  const double base = forward(p, z);
  const double c = 2.5;
  for (auto& m : p.layers)
    for (auto& e : m.entries())
      e *= c;
  EXPECT_NEAR(forward(p, z), c * c * base, 1e-12 * (1 + std::abs(base)));
}

TEST(Backward, AffineGradientIsUpstreamTimesInput)
{
  const auto affine = make({2, 1}, {Matrix(1, 3, {2, -1, 0.5})});
  const auto g = backward(affine, Vector{3, -4}, 2.0);
  EXPECT_DOUBLE_EQ(g.layers[0](0, 0), 6.0);
  EXPECT_DOUBLE_EQ(g.layers[0](0, 1), -8.0);
  EXPECT_DOUBLE_EQ(g.layers[0](0, 2), 2.0);
}

TEST(Backward, ZeroUpstreamGivesZeroGrads)
{
  Rng rng(4);
  const auto p = random_net(rng);
  const auto g = backward(p, Vector(p.input_dim(), 0.5), 0.0);
  for (const auto& m : g.layers)
    for (double e : m.entries())
      EXPECT_EQ(e, 0.0);
}

TEST(Backward, MatchesCentralDifferences)
{
  Rng rng(17);
  int checked = 0;
  while (checked < 100) {
    auto p = random_net(rng);
    Vector z(p.input_dim());
    for (auto& e : z)
      e = rng.uniform(-2, 2);
    if (oracle::min_abs_preactivation(p, z) < 1e-3)
      continue;
    const double upstream = rng.uniform(0.5, 2.0);
    const auto g = backward(p, z, upstream);
    const double h = 1e-5;
    for (std::size_t k = 0; k < p.layers.size(); ++k) {
      for (std::size_t e = 0; e < p.layers[k].size(); ++e) {
        auto plus = p;
        auto minus = p;
        plus.layers[k].entries()[e] += h;
        minus.layers[k].entries()[e] -= h;
        const double fd = upstream * (oracle::naive_forward(plus, z) -
                                      oracle::naive_forward(minus, z)) / (2 * h);
        const double an = g.layers[k].entries()[e];
        const double rel = std::abs(fd - an) / std::max(1.0, std::abs(fd) + std::abs(an));
        ASSERT_LT(rel, 1e-5) << "layer " << k << " entry " << e;
      }
    }
    ++checked;
  }
}

TEST(InitParams, GlorotBoundsZeroBiasDeterministic)
{
  const std::vector<std::size_t> w{10, 16, 16, 1};
  Rng a(1), b(1);
  const auto p = init_params(w, a);
  EXPECT_EQ(p, init_params(w, b));
  for (std::size_t k = 0; k < p.layers.size(); ++k) {
    const double bound = std::sqrt(6.0 / static_cast<double>(w[k] + w[k + 1]));
    const auto& m = p.layers[k];
    for (std::size_t i = 0; i < m.rows(); ++i) {
      for (std::size_t j = 0; j + 1 < m.cols(); ++j)
        EXPECT_LE(std::abs(m(i, j)), bound);
      EXPECT_EQ(m(i, m.cols() - 1), 0.0);
    }
  }
  EXPECT_THROW(init_params(std::vector<std::size_t>{3, 2}, a), ConfigError);
}
