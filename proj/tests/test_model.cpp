#include "oracles.hpp"

#include <dplqr/dgp.hpp>
#include <dplqr/experiment.hpp>
#include <dplqr/model.hpp>

#include <gtest/gtest.h>

using namespace dplqr;

namespace {

//! y = slope * x + t3 noise with a single linear covariate and no z.
Dataset median_line(std::size_t n, double slope, std::uint64_t seed)
{
  Rng rng(seed);
  Dataset d{Vector(n), Matrix(n, 1), Matrix(n, 0)};
  for (std::size_t i = 0; i < n; ++i) {
    d.x(i, 0) = rng.uniform(0, 2);
    d.y[i] = slope * d.x(i, 0) + 0.5 * sim::draw_t3(rng);
  }
  return d;
}

PlqrFit constant_network_fit(Vector theta, std::size_t q, double out)
{
  PlqrFit f;
  f.theta = std::move(theta);
  f.network.widths = {q, 1};
  f.network.layers = {Matrix(1, q + 1)};
  f.network.layers[0](0, q) = out;
  return f;
}

Vector column0(const Matrix& m)
{
  return m.column(0);
}

} // namespace

TEST(Fit, LqrSlopeAgreesWithBruteForce)
{
  const auto d = median_line(200, 1.0, 1);
  Rng rng(2);
  const auto f = fit(d, 0.5, TrainConfig{}, rng, Mode::lqr);
  EXPECT_EQ(f.config.depth, 1u);
  const auto oracle_fit = oracle::brute_force_lqr(column0(d.x), d.y, 0.5, 0.0, 2.0, 400);
  EXPECT_GE(f.theta[0], 0.7);
  EXPECT_LE(f.theta[0], 1.3);
  EXPECT_GE(oracle_fit.theta, 0.7);
  EXPECT_LE(oracle_fit.theta, 1.3);
  EXPECT_NEAR(f.theta[0], oracle_fit.theta, 0.15);
}

TEST(Fit, LqrReachesBruteForceMinimumOnSmallSample)
{
  for (std::uint64_t seed : {3u, 4u, 5u}) {
    const auto d = median_line(50, 1.0, seed);
    TrainConfig c;
    c.validation_fraction = 0.0;
    c.minibatch = 50;
    c.epochs = 3000;
    c.early_stop_patience = 3000;
    c.learning_rate = 0.01;
    Rng rng(seed);
    const auto f = fit(d, 0.5, c, rng, Mode::lqr);
    const double loss = mean_check_loss(residuals(f, d), 0.5);
    const auto best = oracle::brute_force_lqr(column0(d.x), d.y, 0.5, -1.0, 3.0, 2000);
    EXPECT_LE(loss, 1.02 * best.loss) << "seed " << seed;
  }
}

TEST(Fit, ConstantResponse)
{
  const std::size_t n = 200;
  Rng gen(6);
  Dataset d{Vector(n, 3.25), Matrix(n, 1), Matrix(n, 2)};
  for (auto& e : d.x.entries())
    e = gen.uniform(0, 2);
  for (auto& e : d.z.entries())
    e = gen.uniform(0, 2);
  TrainConfig c;
  c.epochs = 50;
  Rng rng(1);
  const auto f = fit(d, 0.5, c, rng);
  for (double yhat : predict(f, d))
    EXPECT_NEAR(yhat, 3.25, 0.1);
  EXPECT_LT(mean_check_loss(residuals(f, d), 0.5), 0.05);
}

TEST(Fit, RejectsBadInput)
{
  Dataset none{Vector(10), Matrix(10, 0), Matrix(10, 0)};
  Rng rng(1);
  EXPECT_THROW(fit(none, 0.5, TrainConfig{}, rng), DimensionError);
  auto d = median_line(100, 1, 1);
  d.y[3] = std::nan("");
  EXPECT_THROW(fit(d, 0.5, TrainConfig{}, rng), DataError);
  EXPECT_THROW(fit(median_line(100, 1, 1), 1.5, TrainConfig{}, rng), ConfigError);
}

TEST(Predict, HandExamples)
{
  const auto f = constant_network_fit({1, -1}, 0, 5.0);
  EXPECT_DOUBLE_EQ(predict(f, Vector{2, 3}, Vector{}), 4.0);

  const auto g = constant_network_fit({}, 2, 1.5);
  EXPECT_DOUBLE_EQ(predict(g, Vector{}, Vector{7, 8}), 1.5);

  const auto zero = constant_network_fit({0, 0}, 3, 0.0);
  EXPECT_EQ(predict(zero, Vector{4, 5}, Vector{1, 2, 3}), 0.0);
  EXPECT_THROW(predict(zero, Vector{4}, Vector{1, 2, 3}), DimensionError);
}

TEST(Residuals, PerfectFitAndOffset)
{
  const auto f = constant_network_fit({2}, 0, 1.0);
  Dataset d{Vector{3, 5, 7}, Matrix(3, 1, {1, 2, 3}), Matrix(3, 0)};
  EXPECT_EQ(residuals(f, d), (Vector{0, 0, 0}));
  for (auto& y : d.y)
    y += 0.5;
  EXPECT_EQ(residuals(f, d), (Vector{0.5, 0.5, 0.5}));
}

TEST(Modes, ConfigAndRouting)
{
  TrainConfig base;
  base.depth = 3;
  EXPECT_EQ(make_mode_config(Mode::dplqr, base), base);
  EXPECT_EQ(make_mode_config(Mode::lqr, base).depth, 1u);
  EXPECT_EQ(parse_mode("dnqr"), Mode::dnqr);
  EXPECT_THROW(parse_mode("ols"), ConfigError);

  sim::DgpSpec spec;
  spec.n = 200;
  Rng gen(1);
  const auto d = sim::generate(spec, gen);
  TrainConfig c;
  c.epochs = 2;
  Rng rng(1);
  const auto f = fit(d, 0.5, c, rng, Mode::dnqr);
  EXPECT_EQ(f.network.input_dim(), 12u);
  EXPECT_TRUE(f.theta.empty());
  EXPECT_EQ(predict(f, d).size(), d.n());
}

TEST(Fit, CalibrationAtOuterLevels)
{
  sim::DgpSpec spec;
  spec.n = 1000;
  Rng gen(11);
  const auto d = sim::generate(spec, gen);
  const auto col = sim::tuning_column(1, 500);
  for (double tau : {0.2, 0.8}) {
    Rng rng(12);
    const auto f = fit(d, tau, col.config, rng);
    const auto r = residuals(f, d);
    const double below =
      static_cast<double>(std::count_if(r.begin(), r.end(), [](double e) { return e < 0; })) /
      static_cast<double>(r.size());
    EXPECT_NEAR(below, tau, 0.05) << "tau " << tau;
  }
}

TEST(Fit, ShiftEquivariance)
{
  sim::DgpSpec spec;
  spec.n = 1000;
  Rng gen(21);
  auto d = sim::generate(spec, gen);
  const auto col = sim::tuning_column(1, 500);
  Rng r1(5);
  const auto base = predict(fit(d, 0.5, col.config, r1), d);
  const double c = 3.0;
  for (auto& y : d.y)
    y += c;
  Rng r2(5);
  const auto shifted = predict(fit(d, 0.5, col.config, r2), d);
  double worst = 0;
  for (std::size_t i = 0; i < base.size(); ++i)
    worst = std::max(worst, std::abs(shifted[i] - base[i] - c));
  EXPECT_LT(worst, 0.05);
}

TEST(Fit, PolishedBiasMinimizesLossAlongTheIntercept)
{
  sim::DgpSpec spec;
  spec.n = 300;
  Rng gen(31);
  const auto d = sim::generate(spec, gen);
  TrainConfig c;
  c.epochs = 30;
  c.validation_fraction = 0.0;
  for (double tau : {0.2, 0.5, 0.9}) {
    Rng rng(32);
    auto f = fit(d, tau, c, rng);
    const double base = mean_check_loss(residuals(f, d), tau);
    auto& w = f.network.layers.back();
    const std::size_t b = w.cols() - 1;
    for (double h : {-1e-3, 1e-3, -0.1, 0.1}) {
      w(0, b) += h;
      EXPECT_GE(mean_check_loss(residuals(f, d), tau), base - 1e-12) << tau << ' ' << h;
      w(0, b) -= h;
    }
    const auto r = residuals(f, d);
    const auto below = std::count_if(r.begin(), r.end(), [](double e) { return e < -1e-12; });
    EXPECT_NEAR(static_cast<double>(below) / 300.0, tau, 1.0 / 300.0 + 1e-12);
  }
}
