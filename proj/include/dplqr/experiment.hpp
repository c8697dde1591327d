#pragma once

#include "dgp.hpp"
#include "format.hpp"
#include "inference.hpp"
#include "model.hpp"
#include "parallel.hpp"
#include "tuning.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace dplqr::sim {

//! Which candidate set each replicate tunes over.
//! full:   depth {2,3} x width {10,16,20,32} x the column's learning rates
//! table9: the column's depth and width x its learning rates
//! fixed:  the column's configuration with its first learning rate, no tuning
enum class GridKind
{
  full,
  table9,
  fixed
};

inline GridKind parse_grid(std::string_view s)
{
  if (s == "full")
    return GridKind::full;
  if (s == "table9")
    return GridKind::table9;
  if (s == "fixed")
    return GridKind::fixed;
  throw ConfigError("unknown grid '" + std::string(s) + "' (expected full, table9 or fixed)");
}

inline std::string to_string(GridKind g)
{
  switch (g) {
    case GridKind::full:
      return "full";
    case GridKind::table9:
      return "table9";
    case GridKind::fixed:
      return "fixed";
  }
  return "?";
}

struct TuningColumn
{
  TrainConfig config; //!< learning_rate holds the first candidate
  std::vector<double> learning_rates;
};

//! Hyperparameters used for the simulation designs, by design family
//! (linear 1&4, additive 2&5, deep 3&6) and sample size (500 or 2000;
//! other sizes use the nearer column).
inline TuningColumn tuning_column(int case_id, std::size_t n)
{
  const bool large = n >= 1000;
  TuningColumn col;
  auto& c = col.config;
  switch (base_case(case_id)) {
    case 1:
      c.depth = large ? 3 : 2;
      c.width = large ? 32 : 16;
      c.epochs = 500;
      c.minibatch = 64;
      c.early_stop_patience = 50;
      col.learning_rates = {0.01, 0.02};
      break;
    case 2:
      c.depth = 3;
      c.width = large ? 20 : 10;
      c.epochs = 500;
      c.minibatch = 64;
      c.early_stop_patience = 50;
      col.learning_rates = large ? std::vector<double>{0.009, 0.02}
                                 : std::vector<double>{0.009, 0.01};
      break;
    case 3:
      c.depth = large ? 3 : 2;
      c.width = large ? 32 : 20;
      c.epochs = 600;
      c.minibatch = 128;
      c.early_stop_patience = 100;
      col.learning_rates = {0.01, 0.02};
      break;
    default:
      throw ConfigError("tuning_column: bad case");
  }
  c.learning_rate = col.learning_rates.front();
  return col;
}

inline std::vector<TrainConfig> simulation_grid(int case_id, std::size_t n, GridKind kind,
                                                Mode mode)
{
  const auto col = tuning_column(case_id, n);
  switch (kind) {
    case GridKind::fixed:
      return {make_mode_config(mode, col.config)};
    case GridKind::table9: {
      const std::size_t d[] = {col.config.depth};
      const std::size_t w[] = {col.config.width};
      return make_grid(col.config, d, w, col.learning_rates, mode);
    }
    case GridKind::full: {
      const std::size_t d[] = {2, 3};
      const std::size_t w[] = {10, 16, 20, 32};
      return make_grid(col.config, d, w, col.learning_rates, mode);
    }
  }
  return {};
}

struct ExperimentConfig
{
  DgpSpec spec;
  std::size_t replicates = 160;
  std::vector<Mode> methods{Mode::lqr, Mode::dplqr};
  std::uint64_t master_seed = 0;
  GridKind grid = GridKind::full;
  double ci_level = 0.95;
  std::size_t workers = 1;
  //! Shift mhat by the mean discrepancy before computing rmse_m.
  bool align_level = false;
  //! Overrides applied to the selected configuration before the final fit;
  //! unset keeps the selected value.
  std::optional<double> final_validation_fraction;
  std::optional<bool> final_restore_best;
};

//! One method on one replicate. theta/interval entries are empty for dnqr.
struct MethodOutcome
{
  bool ok = false;
  std::string error;
  TrainConfig selected;
  Vector theta_hat;
  std::vector<Interval> intervals;
  std::vector<bool> covered;
  double rmse_m = std::numeric_limits<double>::quiet_NaN();
  double mspe = std::numeric_limits<double>::quiet_NaN();
};

struct ReplicateResult
{
  std::size_t index = 0;
  std::vector<MethodOutcome> methods; //!< parallel to ExperimentConfig::methods
};

struct MethodSummary
{
  Mode mode = Mode::dplqr;
  std::size_t succeeded = 0;
  std::size_t failed = 0;
  Vector mean_theta;
  Vector bias;
  Vector sd;
  Vector coverage;
  double mean_rmse_m = std::numeric_limits<double>::quiet_NaN();
  double mean_mspe = std::numeric_limits<double>::quiet_NaN();
};

struct ExperimentReport
{
  ExperimentConfig config;
  Vector theta_tau;
  std::vector<ReplicateResult> replicates;
  std::vector<MethodSummary> methods;
  std::vector<std::string> warnings;
};

inline MethodOutcome run_method(const ExperimentConfig& cfg, Mode mode, const Dataset& train,
                                const Dataset& test, const Vector& theta_true, Rng& rng)
{
  MethodOutcome out;
  const QuantileLevel tau(cfg.spec.tau);
  const auto grid = simulation_grid(cfg.spec.case_id, cfg.spec.n, cfg.grid, mode);
  out.selected = grid.size() > 1 ? tune(grid, train, tau, mode, rng).best : grid.front();
  if (cfg.final_validation_fraction)
    out.selected.validation_fraction = *cfg.final_validation_fraction;
  if (cfg.final_restore_best)
    out.selected.restore_best = *cfg.final_restore_best;

  const PlqrFit f = fit(train, tau, out.selected, rng, mode);
  out.selected = f.config;

  if (mode != Mode::dnqr) {
    out.theta_hat = f.theta;
    const auto cov = covariance(f, train, f.config, rng, cfg.ci_level);
    out.intervals = cov.intervals;
    for (std::size_t k = 0; k < f.theta.size(); ++k)
      out.covered.push_back(cov.intervals[k].contains(theta_true[k]));

    Vector m_hat = predict_m(f, test.z);
    Vector m_true(test.n());
    for (std::size_t i = 0; i < test.n(); ++i)
      m_true[i] = m_tau(cfg.spec, test.z.row(i));
    if (cfg.align_level) {
      double shift = 0.0;
      for (std::size_t i = 0; i < m_hat.size(); ++i)
        shift += m_true[i] - m_hat[i];
      shift /= static_cast<double>(m_hat.size());
      for (auto& v : m_hat)
        v += shift;
    }
    out.rmse_m = rmse_m(m_hat, m_true);
  }
  out.mspe = mspe(predict(f, test), test.y);
  if (!std::isfinite(out.mspe) || (mode != Mode::dnqr && !std::isfinite(out.rmse_m)))
    throw NumericalError("non-finite evaluation metric");
  out.ok = true;
  return out;
}

//! One replicate: generate, split 80/20 into train/test, then tune, fit,
//! build intervals and score every method. Each method draws from its own
//! child stream, so adding or removing methods does not change the others.
inline ReplicateResult run_replicate(const ExperimentConfig& cfg, std::size_t r,
                                     const Vector& theta_true)
{
  ReplicateResult res;
  res.index = r;
  const std::uint64_t seed = derive_seed(cfg.master_seed, r);
  Rng data_rng(derive_seed(seed, 0));
  DgpSpec spec = cfg.spec;
  const Dataset all = generate(spec, data_rng);
  const auto perm = shuffled_indices(data_rng, all.n());
  const std::size_t n_test = all.n() / 5;
  const std::size_t n_train = all.n() - n_test;
  const std::vector<std::size_t> tr(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  const std::vector<std::size_t> te(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
  const Dataset train = all.subset(tr);
  const Dataset test = all.subset(te);

  for (Mode mode : cfg.methods) {
    Rng rng(derive_seed(seed, 1 + static_cast<std::uint64_t>(mode)));
    try {
      res.methods.push_back(run_method(cfg, mode, train, test, theta_true, rng));
    } catch (const Error& e) {
      MethodOutcome failed;
      failed.error = e.category() + ": " + e.what();
      res.methods.push_back(std::move(failed));
    }
  }
  return res;
}

inline MethodSummary summarize(Mode mode, std::size_t slot,
                               const std::vector<ReplicateResult>& reps,
                               const Vector& theta_true)
{
  MethodSummary s;
  s.mode = mode;
  std::vector<const MethodOutcome*> ok;
  for (const auto& r : reps) {
    if (r.methods[slot].ok)
      ok.push_back(&r.methods[slot]);
    else
      ++s.failed;
  }
  s.succeeded = ok.size();
  if (ok.empty())
    return s;

  const std::size_t p = ok.front()->theta_hat.size();
  s.mean_theta.assign(p, 0.0);
  s.sd.assign(p, 0.0);
  s.coverage.assign(p, 0.0);
  for (const auto* o : ok)
    for (std::size_t k = 0; k < p; ++k) {
      s.mean_theta[k] += o->theta_hat[k];
      s.coverage[k] += o->covered[k] ? 1.0 : 0.0;
    }
  const double q = static_cast<double>(ok.size());
  for (std::size_t k = 0; k < p; ++k) {
    s.mean_theta[k] /= q;
    s.coverage[k] /= q;
    s.bias.push_back(s.mean_theta[k] - theta_true[k]);
    if (ok.size() > 1) {
      double ss = 0.0;
      for (const auto* o : ok)
        ss += (o->theta_hat[k] - s.mean_theta[k]) * (o->theta_hat[k] - s.mean_theta[k]);
      s.sd[k] = std::sqrt(ss / (q - 1.0));
    }
  }
  double rm = 0.0;
  double ms = 0.0;
  for (const auto* o : ok) {
    rm += o->rmse_m;
    ms += o->mspe;
  }
  s.mean_rmse_m = rm / q;
  s.mean_mspe = ms / q;
  return s;
}

//! Runs `replicates` independent replicates (concurrently up to `workers`)
//! and aggregates per method. Results are reduced in replicate order, so the
//! report depends only on the configuration and master seed. A method that
//! fails on more than 10% of replicates aborts the experiment.
inline ExperimentReport run_experiment(const ExperimentConfig& cfg)
{
  cfg.spec.validate();
  if (cfg.replicates == 0)
    throw ConfigError("replicates must be at least 1");
  if (cfg.methods.empty())
    throw ConfigError("no methods selected");
  if (!(cfg.ci_level > 0.0 && cfg.ci_level < 1.0))
    throw ConfigError("ci_level must lie in (0,1)");

  ExperimentReport report;
  report.config = cfg;
  report.theta_tau = theta_tau(cfg.spec);
  report.replicates.resize(cfg.replicates);
  parallel_for(cfg.replicates, cfg.workers, [&](std::size_t r) {
    report.replicates[r] = run_replicate(cfg, r, report.theta_tau);
  });

  for (std::size_t slot = 0; slot < cfg.methods.size(); ++slot) {
    for (const auto& r : report.replicates) {
      const auto& o = r.methods[slot];
      if (!o.ok) {
        report.warnings.push_back("replicate " + std::to_string(r.index) + ", method " +
                                  to_string(cfg.methods[slot]) + " dropped: " + o.error);
      }
    }
    auto s = summarize(cfg.methods[slot], slot, report.replicates, report.theta_tau);
    if (s.failed * 10 > cfg.replicates) {
      throw NumericalError("method " + to_string(s.mode) + " failed on " +
                           std::to_string(s.failed) + " of " +
                           std::to_string(cfg.replicates) + " replicates");
    }
    report.methods.push_back(std::move(s));
  }
  return report;
}

// ---------------------------------------------------------------------------
// report emission

//! CSV with header method,metric,value; one row per method and metric.
inline void write_summary_csv(std::ostream& os, const ExperimentReport& rep)
{
  os << "method,metric,value\n";
  for (const auto& s : rep.methods) {
    const std::string m = to_string(s.mode);
    os << m << ",replicates_ok," << s.succeeded << '\n';
    os << m << ",replicates_failed," << s.failed << '\n';
    for (std::size_t k = 0; k < s.bias.size(); ++k) {
      const std::string t = "theta" + std::to_string(k + 1);
      os << m << ",mean_" << t << ',' << format_number(s.mean_theta[k]) << '\n';
      os << m << ",bias_" << t << ',' << format_number(s.bias[k]) << '\n';
      os << m << ",sd_" << t << ',' << format_number(s.sd[k]) << '\n';
      os << m << ",coverage_" << t << ',' << format_number(s.coverage[k]) << '\n';
    }
    os << m << ",rmse_m," << format_number(s.mean_rmse_m) << '\n';
    os << m << ",mspe," << format_number(s.mean_mspe) << '\n';
  }
}

//! Per-replicate rows for every method.
inline void write_replicates_csv(std::ostream& os, const ExperimentReport& rep)
{
  os << "replicate,method,status,theta1,theta2,lower1,upper1,lower2,upper2,"
        "covered1,covered2,rmse_m,mspe,depth,width,learning_rate,error\n";
  const auto nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& r : rep.replicates) {
    for (std::size_t slot = 0; slot < r.methods.size(); ++slot) {
      const auto& o = r.methods[slot];
      auto th = [&](std::size_t k) {
        return k < o.theta_hat.size() ? format_number(o.theta_hat[k]) : format_number(nan);
      };
      auto lo = [&](std::size_t k) {
        return k < o.intervals.size() ? format_number(o.intervals[k].lower) : format_number(nan);
      };
      auto hi = [&](std::size_t k) {
        return k < o.intervals.size() ? format_number(o.intervals[k].upper) : format_number(nan);
      };
      auto cv = [&](std::size_t k) {
        return k < o.covered.size() ? std::string(o.covered[k] ? "1" : "0") : std::string();
      };
      std::string err = o.error;
      for (auto& c : err)
        if (c == ',' || c == '\n')
          c = ';';
      os << r.index << ',' << to_string(rep.config.methods[slot]) << ','
         << (o.ok ? "ok" : "failed") << ',' << th(0) << ',' << th(1) << ',' << lo(0) << ','
         << hi(0) << ',' << lo(1) << ',' << hi(1) << ',' << cv(0) << ',' << cv(1) << ','
         << format_number(o.rmse_m) << ',' << format_number(o.mspe) << ','
         << o.selected.depth << ',' << o.selected.width << ','
         << format_number(o.selected.learning_rate) << ',' << err << '\n';
    }
  }
}

//! Fixed-width table: bias (SD), coverage, RMSE(m) and MSPE per method.
inline void write_table(std::ostream& os, const ExperimentReport& rep)
{
  const auto& c = rep.config;
  char line[256];
  std::snprintf(line, sizeof line, "Case %d, n = %zu, tau = %.2f, Q = %zu, grid = %s\n",
                c.spec.case_id, c.spec.n, c.spec.tau, c.replicates, to_string(c.grid).c_str());
  os << line;
  std::snprintf(line, sizeof line, "%-8s %-20s %-20s %-10s %-10s %-10s %-10s\n", "method",
                "theta1 bias (sd)", "theta2 bias (sd)", "cover1", "cover2", "RMSE(m)",
                "MSPE");
  os << line;
  for (const auto& s : rep.methods) {
    auto cell = [&](std::size_t k) {
      if (k >= s.bias.size())
        return std::string("-");
      char b[64];
      std::snprintf(b, sizeof b, "%.4f (%.4f)", s.bias[k], s.sd[k]);
      return std::string(b);
    };
    auto num = [](const Vector& v, std::size_t k) {
      if (k >= v.size())
        return std::string("-");
      char b[32];
      std::snprintf(b, sizeof b, "%.4f", v[k]);
      return std::string(b);
    };
    auto scalar = [](double v) {
      if (std::isnan(v))
        return std::string("-");
      char b[32];
      std::snprintf(b, sizeof b, "%.4f", v);
      return std::string(b);
    };
    std::snprintf(line, sizeof line, "%-8s %-20s %-20s %-10s %-10s %-10s %-10s\n",
                  to_string(s.mode).c_str(), cell(0).c_str(), cell(1).c_str(),
                  num(s.coverage, 0).c_str(), num(s.coverage, 1).c_str(),
                  scalar(s.mean_rmse_m).c_str(), scalar(s.mean_mspe).c_str());
    os << line;
  }
}

} // namespace dplqr::sim
