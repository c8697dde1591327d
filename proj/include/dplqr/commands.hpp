#pragma once

#include "experiment.hpp"
#include "inference.hpp"
#include "io.hpp"
#include "model.hpp"
#include "tuning.hpp"

#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace dplqr::cli {

using io::json;

//! Resolved settings of one CLI invocation. Loaded from an optional JSON
//! config file, then overridden by command-line flags.
struct RunConfig
{
  std::string command;
  double tau = 0.5;
  Mode mode = Mode::dplqr;
  TrainConfig train;
  std::uint64_t seed = 0;
  double ci_level = 0.95;
  std::size_t workers = 1;

  // fit / predict / tune
  std::string data_path;
  io::ColumnRoles roles;
  bool scale = true;
  bool tune = false;
  std::vector<std::size_t> grid_depths{2, 3};
  std::vector<std::size_t> grid_widths{10, 16, 20, 32};
  std::vector<double> grid_learning_rates; //!< empty: the training learning rate
  std::string model_path;
  std::string out_path;
  std::string report_path;

  // simulate
  int case_id = 1;
  std::size_t n = 500;
  std::size_t replicates = 160;
  std::vector<Mode> methods{Mode::lqr, Mode::dplqr};
  sim::GridKind grid = sim::GridKind::full;
  std::string out_dir;
  bool align_level = false;
  bool literal_x1_doubling = false;
};

inline std::vector<std::string> split_list(const std::string& s)
{
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(s);
  while (std::getline(ss, item, ','))
    if (!item.empty())
      out.push_back(item);
  return out;
}

inline json to_json(const RunConfig& c)
{
  json methods = json::array();
  for (Mode m : c.methods)
    methods.push_back(to_string(m));
  return json{{"command", c.command},
              {"tau", c.tau},
              {"mode", to_string(c.mode)},
              {"train", io::to_json(c.train)},
              {"seed", c.seed},
              {"ci_level", c.ci_level},
              {"data", c.data_path},
              {"y", c.roles.y},
              {"x", c.roles.x},
              {"z", c.roles.z},
              {"scale", c.scale},
              {"tune", c.tune},
              {"grid_depths", c.grid_depths},
              {"grid_widths", c.grid_widths},
              {"grid_learning_rates", c.grid_learning_rates},
              {"case", c.case_id},
              {"n", c.n},
              {"replicates", c.replicates},
              {"methods", methods},
              {"grid", sim::to_string(c.grid)},
              {"align_level", c.align_level},
              {"literal_x1_doubling", c.literal_x1_doubling}};
}

//! Applies the keys present in a JSON config object.
inline void apply_json(RunConfig& c, const json& j)
{
  try {
    if (j.contains("tau"))
      c.tau = j.at("tau").get<double>();
    if (j.contains("mode"))
      c.mode = parse_mode(j.at("mode").get<std::string>());
    if (j.contains("train"))
      c.train = io::train_config_from_json(j.at("train"), c.train);
    if (j.contains("seed"))
      c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("ci_level"))
      c.ci_level = j.at("ci_level").get<double>();
    if (j.contains("workers"))
      c.workers = j.at("workers").get<std::size_t>();
    if (j.contains("data"))
      c.data_path = j.at("data").get<std::string>();
    if (j.contains("y"))
      c.roles.y = j.at("y").get<std::string>();
    if (j.contains("x"))
      c.roles.x = j.at("x").get<std::vector<std::string>>();
    if (j.contains("z"))
      c.roles.z = j.at("z").get<std::vector<std::string>>();
    if (j.contains("scale"))
      c.scale = j.at("scale").get<bool>();
    if (j.contains("tune"))
      c.tune = j.at("tune").get<bool>();
    if (j.contains("grid_depths"))
      c.grid_depths = j.at("grid_depths").get<std::vector<std::size_t>>();
    if (j.contains("grid_widths"))
      c.grid_widths = j.at("grid_widths").get<std::vector<std::size_t>>();
    if (j.contains("grid_learning_rates"))
      c.grid_learning_rates = j.at("grid_learning_rates").get<std::vector<double>>();
    if (j.contains("case"))
      c.case_id = j.at("case").get<int>();
    if (j.contains("n"))
      c.n = j.at("n").get<std::size_t>();
    if (j.contains("replicates"))
      c.replicates = j.at("replicates").get<std::size_t>();
    if (j.contains("methods")) {
      c.methods.clear();
      for (const auto& m : j.at("methods"))
        c.methods.push_back(parse_mode(m.get<std::string>()));
    }
    if (j.contains("grid"))
      c.grid = sim::parse_grid(j.at("grid").get<std::string>());
    if (j.contains("align_level"))
      c.align_level = j.at("align_level").get<bool>();
    if (j.contains("literal_x1_doubling"))
      c.literal_x1_doubling = j.at("literal_x1_doubling").get<bool>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config file: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// fit

struct FitOutcome
{
  io::ModelFile model;
  std::optional<CovarianceEstimate> covariance;
  std::optional<TuneResult> tuning;
  json report;
};

inline std::vector<TrainConfig> fit_grid(const RunConfig& c)
{
  std::vector<double> lrs = c.grid_learning_rates;
  if (lrs.empty())
    lrs.push_back(c.train.learning_rate);
  return make_grid(c.train, c.grid_depths, c.grid_widths, lrs, c.mode);
}

//! Optional tuning, then fit, covariance and intervals. Writes the model
//! file and the report when the corresponding paths are set.
inline FitOutcome cmd_fit(const RunConfig& c)
{
  const QuantileLevel tau(c.tau);
  if (!(c.ci_level > 0.0 && c.ci_level < 1.0))
    throw ConfigError("ci_level must lie in (0,1)");
  Dataset data = io::load_csv(c.data_path, c.roles);
  data.validate();

  FitOutcome out;
  out.model.roles = c.roles;
  if (c.scale && data.q() > 0) {
    out.model.scaling = io::Scaling::fit(data.z);
    out.model.scaling->apply(data.z);
  }

  Rng rng(c.seed);
  TrainConfig chosen = c.train;
  chosen.seed = c.seed;
  if (c.tune) {
    auto grid = fit_grid(c);
    for (auto& g : grid)
      g.seed = c.seed;
    out.tuning = tune(grid, data, tau, c.mode, rng, c.workers);
    chosen = out.tuning->best;
  }
  out.model.fit = fit(data, tau, chosen, rng, c.mode);

  json report;
  report["config"] = to_json(c);
  report["resolved_train"] = io::to_json(out.model.fit.config);
  report["mode"] = to_string(c.mode);
  report["tau"] = c.tau;
  report["n"] = data.n();
  report["p"] = data.p();
  report["q"] = data.q();
  report["theta"] = out.model.fit.theta;
  report["history"] = io::to_json(out.model.fit.history);
  report["train_mean_check_loss"] = mean_check_loss(residuals(out.model.fit, data), tau);
  if (out.tuning) {
    json cands = json::array();
    const auto grid = fit_grid(c);
    for (std::size_t k = 0; k < grid.size(); ++k)
      cands.push_back(json{{"config", io::to_json(grid[k])}, {"score", out.tuning->scores[k]}});
    report["tuning"] = json{{"best_index", out.tuning->best_index}, {"candidates", cands}};
  }
  if (c.mode != Mode::dnqr && data.p() > 0) {
    if (data.n() >= 10) {
      out.covariance = covariance(out.model.fit, data, out.model.fit.config, rng, c.ci_level,
                                  c.workers);
      report["covariance"] = io::to_json(*out.covariance);
    } else {
      report["covariance"] = nullptr;
    }
  }
  out.report = report;

  if (!c.model_path.empty())
    io::write_json_file(c.model_path, io::to_json(out.model));
  if (!c.report_path.empty())
    io::write_json_file(c.report_path, report);
  return out;
}

// ---------------------------------------------------------------------------
// predict

//! Predictions for every row of `data_path` using the stored column roles
//! and scaling. Writes a one-column CSV ("prediction") when `out_path` is set.
inline Vector cmd_predict(const std::string& model_path, const std::string& data_path,
                          const std::string& out_path)
{
  const auto model = io::model_from_json(io::read_json_file(model_path));
  Dataset data = io::load_csv(data_path, model.roles, false, true);
  if (model.scaling)
    model.scaling->apply(data.z);
  const Vector pred = data.n() == 0 ? Vector{} : predict(model.fit, data);
  if (!out_path.empty()) {
    std::string text = "prediction\n";
    for (double v : pred)
      text += format_number(v) + "\n";
    io::write_text_file(out_path, text);
  }
  return pred;
}

// ---------------------------------------------------------------------------
// tune

inline TuneResult cmd_tune(const RunConfig& c)
{
  const QuantileLevel tau(c.tau);
  Dataset data = io::load_csv(c.data_path, c.roles);
  data.validate();
  if (c.scale && data.q() > 0)
    io::Scaling::fit(data.z).apply(data.z);
  Rng rng(c.seed);
  const auto grid = fit_grid(c);
  auto result = tune(grid, data, tau, c.mode, rng, c.workers);
  if (!c.out_path.empty()) {
    json cands = json::array();
    for (std::size_t k = 0; k < grid.size(); ++k)
      cands.push_back(json{{"config", io::to_json(grid[k])}, {"score", result.scores[k]}});
    io::write_json_file(c.out_path, json{{"config", to_json(c)},
                                         {"best_index", result.best_index},
                                         {"best", io::to_json(result.best)},
                                         {"candidates", cands}});
  }
  return result;
}

// ---------------------------------------------------------------------------
// simulate

inline sim::ExperimentConfig experiment_config(const RunConfig& c)
{
  sim::ExperimentConfig e;
  e.spec.case_id = c.case_id;
  e.spec.n = c.n;
  e.spec.tau = c.tau;
  e.spec.literal_x1_doubling = c.literal_x1_doubling;
  e.replicates = c.replicates;
  e.methods = c.methods;
  e.master_seed = c.seed;
  e.grid = c.grid;
  e.ci_level = c.ci_level;
  e.workers = c.workers;
  e.align_level = c.align_level;
  return e;
}

inline json to_json(const sim::ExperimentReport& rep)
{
  json methods = json::array();
  for (const auto& s : rep.methods) {
    methods.push_back(json{{"method", to_string(s.mode)},
                           {"replicates_ok", s.succeeded},
                           {"replicates_failed", s.failed},
                           {"mean_theta", s.mean_theta},
                           {"bias", s.bias},
                           {"sd", s.sd},
                           {"coverage", s.coverage},
                           {"rmse_m", s.mean_rmse_m},
                           {"mspe", s.mean_mspe}});
  }
  return json{{"theta_tau", rep.theta_tau}, {"methods", methods}, {"warnings", rep.warnings}};
}

//! Runs the experiment and writes summary.csv, replicates.csv, table.txt and
//! report.json into `out_dir` (created if missing).
inline sim::ExperimentReport cmd_simulate(const RunConfig& c)
{
  const auto report = sim::run_experiment(experiment_config(c));
  if (!c.out_dir.empty()) {
    std::filesystem::create_directories(c.out_dir);
    const std::filesystem::path dir(c.out_dir);
    std::ostringstream summary, reps, table;
    sim::write_summary_csv(summary, report);
    sim::write_replicates_csv(reps, report);
    sim::write_table(table, report);
    io::write_text_file((dir / "summary.csv").string(), summary.str());
    io::write_text_file((dir / "replicates.csv").string(), reps.str());
    io::write_text_file((dir / "table.txt").string(), table.str());
    json j = to_json(report);
    j["config"] = to_json(c);
    io::write_json_file((dir / "report.json").string(), j);
  }
  return report;
}

} // namespace dplqr::cli
