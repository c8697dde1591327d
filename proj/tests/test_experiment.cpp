#include <dplqr/experiment.hpp>

#include <gtest/gtest.h>

#include <sstream>

using namespace dplqr;
using namespace dplqr::sim;

namespace {

ExperimentConfig small_config(std::size_t q)
{
  ExperimentConfig c;
  c.spec.case_id = 1;
  c.spec.n = 200;
  c.replicates = q;
  c.grid = GridKind::fixed;
  c.master_seed = 77;
  return c;
}

} // namespace

TEST(TuningColumns, MatchTable)
{
  const auto a = tuning_column(1, 500);
  EXPECT_EQ(a.config.depth, 2u);
  EXPECT_EQ(a.config.width, 16u);
  EXPECT_EQ(a.config.minibatch, 64u);
  EXPECT_EQ(a.learning_rates, (std::vector<double>{0.01, 0.02}));
  const auto b = tuning_column(5, 2000);
  EXPECT_EQ(b.config.depth, 3u);
  EXPECT_EQ(b.config.width, 20u);
  EXPECT_EQ(b.learning_rates, (std::vector<double>{0.009, 0.02}));
  const auto c = tuning_column(6, 500);
  EXPECT_EQ(c.config.epochs, 600u);
  EXPECT_EQ(c.config.minibatch, 128u);
  EXPECT_EQ(c.config.early_stop_patience, 100u);

  EXPECT_EQ(simulation_grid(1, 500, GridKind::fixed, Mode::dplqr).size(), 1u);
  EXPECT_EQ(simulation_grid(1, 500, GridKind::table9, Mode::dplqr).size(), 2u);
  EXPECT_EQ(simulation_grid(1, 500, GridKind::full, Mode::dplqr).size(), 16u);
  EXPECT_EQ(simulation_grid(1, 500, GridKind::full, Mode::lqr).size(), 2u);
  EXPECT_EQ(parse_grid("table9"), GridKind::table9);
  EXPECT_THROW(parse_grid("huge"), ConfigError);
}

TEST(Experiment, SingleReplicateReportEqualsReplicate)
{
  const auto rep = run_experiment(small_config(1));
  ASSERT_EQ(rep.replicates.size(), 1u);
  ASSERT_EQ(rep.methods.size(), 2u);
  for (std::size_t m = 0; m < 2; ++m) {
    const auto& o = rep.replicates[0].methods[m];
    ASSERT_TRUE(o.ok) << o.error;
    const auto& s = rep.methods[m];
    EXPECT_EQ(s.succeeded, 1u);
    EXPECT_EQ(s.mean_theta, o.theta_hat);
    EXPECT_EQ(s.mean_rmse_m, o.rmse_m);
    EXPECT_EQ(s.mean_mspe, o.mspe);
    for (std::size_t k = 0; k < 2; ++k) {
      EXPECT_DOUBLE_EQ(s.bias[k], o.theta_hat[k] - rep.theta_tau[k]);
      EXPECT_EQ(s.sd[k], 0.0);
      EXPECT_EQ(s.coverage[k], o.covered[k] ? 1.0 : 0.0);
    }
  }
}

TEST(Experiment, FinalFitOverridesReachSelectedConfig)
{
  auto c = small_config(1);
  const auto plain = run_experiment(c);
  EXPECT_EQ(plain.replicates[0].methods[1].selected.validation_fraction, 0.2);
  EXPECT_FALSE(plain.replicates[0].methods[1].selected.restore_best);
  c.final_validation_fraction = 0.0;
  c.final_restore_best = true;
  const auto over = run_experiment(c);
  for (const auto& o : over.replicates[0].methods) {
    ASSERT_TRUE(o.ok) << o.error;
    EXPECT_EQ(o.selected.validation_fraction, 0.0);
    EXPECT_TRUE(o.selected.restore_best);
  }
}

TEST(Experiment, DeterministicAndWorkerIndependent)
{
  auto c = small_config(3);
  const auto a = run_experiment(c);
  c.workers = 2;
  const auto b = run_experiment(c);
  std::ostringstream sa, sb, ra, rb;
  write_summary_csv(sa, a);
  write_summary_csv(sb, b);
  write_replicates_csv(ra, a);
  write_replicates_csv(rb, b);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_EQ(ra.str(), rb.str());
  for (const auto& s : a.methods) {
    for (double v : s.coverage) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    for (double v : s.sd)
      EXPECT_GE(v, 0.0);
  }
}

TEST(Experiment, SummaryCsvSchema)
{
  const auto rep = run_experiment(small_config(1));
  std::ostringstream os;
  write_summary_csv(os, rep);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "method,metric,value");
  std::size_t rows = 0;
  while (std::getline(is, line)) {
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 2) << line;
    ++rows;
  }
  EXPECT_GT(rows, 0u);
}

TEST(Experiment, InvalidConfigRejected)
{
  auto c = small_config(0);
  EXPECT_THROW(run_experiment(c), ConfigError);
  c = small_config(1);
  c.spec.case_id = 9;
  EXPECT_THROW(run_experiment(c), ConfigError);
}
