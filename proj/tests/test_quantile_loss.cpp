#include "oracles.hpp"

#include <dplqr/model.hpp>
#include <dplqr/quantile_loss.hpp>

#include <gtest/gtest.h>

using namespace dplqr;

TEST(QuantileLevel, RejectsBoundary)
{
  EXPECT_THROW(QuantileLevel(0.0), ConfigError);
  EXPECT_THROW(QuantileLevel(1.0), ConfigError);
  EXPECT_NO_THROW(QuantileLevel(0.3));
}

TEST(CheckLoss, Examples)
{
  EXPECT_EQ(check_loss(0, 0.3), 0.0);
  EXPECT_DOUBLE_EQ(check_loss(1, 0.5), 0.5);
  EXPECT_DOUBLE_EQ(check_loss(-1, 0.2), 0.8);
  EXPECT_DOUBLE_EQ(mean_check_loss(Vector{1, -1}, 0.5), 0.5);
  EXPECT_EQ(mean_check_loss(Vector{0, 0, 0}, 0.7), 0.0);
  EXPECT_DOUBLE_EQ(mean_check_loss(Vector{2, -4}, 0.5), 1.5);
  EXPECT_THROW(mean_check_loss(Vector{}, 0.5), DataError);
}

TEST(CheckLoss, Subgradient)
{
  EXPECT_DOUBLE_EQ(loss_subgrad_wrt_pred(2, 0.5), -0.5);
  EXPECT_DOUBLE_EQ(loss_subgrad_wrt_pred(-2, 0.5), 0.5);
  EXPECT_DOUBLE_EQ(loss_subgrad_wrt_pred(0, 0.2), -0.2);
  // derivative w.r.t. the prediction yhat, residual = y - yhat
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const double tau = rng.uniform(0.01, 0.99);
    double r = rng.uniform(-3, 3);
    if (std::abs(r) < 1e-3)
      r = 0.5;
    const double h = 1e-6;
    const double fd = (check_loss(r - h, tau) - check_loss(r + h, tau)) / (2 * h);
    EXPECT_NEAR(loss_subgrad_wrt_pred(r, tau), fd, 1e-8);
  }
}

TEST(CheckLoss, NonNegativeAndReflection)
{
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double tau = rng.uniform(0.01, 0.99);
    const double t = rng.uniform(-5, 5);
    EXPECT_GT(check_loss(t, tau), 0.0);
    EXPECT_NEAR(check_loss(t, tau), check_loss(-t, 1 - tau), 1e-14);
  }
}

TEST(CheckLoss, ConstantPredictorArgminIsOrderStatistic)
{
  Rng rng(4);
  for (double tau : {0.1, 0.25, 0.5, 0.8}) {
    for (int trial = 0; trial < 20; ++trial) {
      Vector y(1 + rng.below(30));
      for (auto& e : y)
        e = rng.std_normal();
      // the mean check loss is piecewise linear with kinks at the data, so
      // its minimum over the reals is attained at a data point
      double best = y[0];
      double best_loss = HUGE_VAL;
      for (double c : y) {
        Vector r(y.size());
        for (std::size_t i = 0; i < y.size(); ++i)
          r[i] = y[i] - c;
        const double l = mean_check_loss(r, tau);
        if (l < best_loss - 1e-15) {
          best_loss = l;
          best = c;
        }
      }
      const double q = oracle::order_statistic_quantile(y, tau);
      Vector rq(y.size());
      for (std::size_t i = 0; i < y.size(); ++i)
        rq[i] = y[i] - q;
      EXPECT_NEAR(mean_check_loss(rq, tau), best_loss, 1e-12) << best;
    }
  }
}
