// dplqr command-line interface: fit, predict, tune, simulate.
//
// Exit status is 0 on success. On failure a single line
//   error: <category>: <message>
// is written to stderr and the process exits with status 1 (2 for usage
// errors reported by the argument parser).

#include <dplqr/commands.hpp>

#include <CLI11.hpp>

#include <iostream>

namespace {

using dplqr::cli::RunConfig;

struct Flags
{
  std::string config_path;
  std::optional<double> tau;
  std::optional<std::string> mode;
  std::optional<std::uint64_t> seed;
  std::optional<double> ci_level;
  std::optional<std::size_t> workers;
  std::optional<std::size_t> depth, width, epochs, minibatch, patience;
  std::optional<double> learning_rate, validation_fraction;

  std::optional<std::string> data, y, x, z;
  bool no_scale = false;
  bool tune = false;
  std::optional<std::string> grid_depths, grid_widths, grid_lrs;
  std::string model, out, report;

  std::optional<int> case_id;
  std::optional<std::size_t> n, replicates;
  std::optional<std::string> methods, grid;
  std::string out_dir;
  bool align_level = false;
  bool literal_x1 = false;
};

void add_common(CLI::App* app, Flags& f)
{
  app->add_option("--config", f.config_path, "JSON config file; flags override its fields");
  app->add_option("--tau", f.tau, "quantile level in (0,1) [0.5]");
  app->add_option("--seed", f.seed, "master seed (decimal) [0]");
  app->add_option("--workers", f.workers, "worker threads [hardware concurrency]");
}

void add_training(CLI::App* app, Flags& f)
{
  app->add_option("--mode", f.mode, "dplqr | lqr | dnqr [dplqr]");
  app->add_option("--depth", f.depth, "weight layers (2 = one hidden layer)");
  app->add_option("--width", f.width, "hidden width");
  app->add_option("--epochs", f.epochs, "maximum epochs");
  app->add_option("--minibatch", f.minibatch, "minibatch size");
  app->add_option("--patience", f.patience, "early-stopping patience in epochs");
  app->add_option("--lr", f.learning_rate, "Adam learning rate");
  app->add_option("--validation-fraction", f.validation_fraction,
                  "rows held out for early stopping [0.2]");
  app->add_option("--ci-level", f.ci_level, "confidence level [0.95]");
}

void add_data(CLI::App* app, Flags& f)
{
  app->add_option("--data", f.data, "input CSV (header row, comma separated)");
  app->add_option("--y", f.y, "response column");
  app->add_option("--x", f.x, "comma-separated linear covariate columns");
  app->add_option("--z", f.z, "comma-separated network covariate columns");
  app->add_flag("--no-scale", f.no_scale, "do not min-max scale the z columns");
  app->add_option("--grid-depths", f.grid_depths, "tuning depths [2,3]");
  app->add_option("--grid-widths", f.grid_widths, "tuning widths [10,16,20,32]");
  app->add_option("--grid-lrs", f.grid_lrs, "tuning learning rates [--lr]");
}

template<class T>
std::vector<T> parse_numbers(const std::string& s)
{
  std::vector<T> out;
  for (const auto& item : dplqr::cli::split_list(s)) {
    try {
      if constexpr (std::is_floating_point_v<T>)
        out.push_back(static_cast<T>(std::stod(item)));
      else
        out.push_back(static_cast<T>(std::stoull(item)));
    } catch (const std::exception&) {
      throw dplqr::ConfigError("not a number: '" + item + "'");
    }
  }
  return out;
}

RunConfig resolve(const std::string& command, const Flags& f)
{
  RunConfig c;
  c.command = command;
  c.workers = dplqr::default_workers();
  if (!f.config_path.empty())
    dplqr::cli::apply_json(c, dplqr::io::read_json_file(f.config_path));

  if (f.tau)
    c.tau = *f.tau;
  if (f.mode)
    c.mode = dplqr::parse_mode(*f.mode);
  if (f.seed)
    c.seed = *f.seed;
  if (f.ci_level)
    c.ci_level = *f.ci_level;
  if (f.workers)
    c.workers = *f.workers;
  if (f.depth)
    c.train.depth = *f.depth;
  if (f.width)
    c.train.width = *f.width;
  if (f.epochs)
    c.train.epochs = *f.epochs;
  if (f.minibatch)
    c.train.minibatch = *f.minibatch;
  if (f.patience)
    c.train.early_stop_patience = *f.patience;
  if (f.learning_rate)
    c.train.learning_rate = *f.learning_rate;
  if (f.validation_fraction)
    c.train.validation_fraction = *f.validation_fraction;

  if (f.data)
    c.data_path = *f.data;
  if (f.y)
    c.roles.y = *f.y;
  if (f.x)
    c.roles.x = dplqr::cli::split_list(*f.x);
  if (f.z)
    c.roles.z = dplqr::cli::split_list(*f.z);
  if (f.no_scale)
    c.scale = false;
  if (f.tune)
    c.tune = true;
  if (f.grid_depths)
    c.grid_depths = parse_numbers<std::size_t>(*f.grid_depths);
  if (f.grid_widths)
    c.grid_widths = parse_numbers<std::size_t>(*f.grid_widths);
  if (f.grid_lrs)
    c.grid_learning_rates = parse_numbers<double>(*f.grid_lrs);
  c.model_path = f.model;
  c.out_path = f.out;
  c.report_path = f.report;

  if (f.case_id)
    c.case_id = *f.case_id;
  if (f.n)
    c.n = *f.n;
  if (f.replicates)
    c.replicates = *f.replicates;
  if (f.methods) {
    c.methods.clear();
    for (const auto& m : dplqr::cli::split_list(*f.methods))
      c.methods.push_back(dplqr::parse_mode(m));
  }
  if (f.grid)
    c.grid = dplqr::sim::parse_grid(*f.grid);
  c.out_dir = f.out_dir;
  if (f.align_level)
    c.align_level = true;
  if (f.literal_x1)
    c.literal_x1_doubling = true;
  return c;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Deep partially linear quantile regression"};
  app.require_subcommand(1);
  Flags f;

  auto* fit = app.add_subcommand("fit", "tune (optional), fit, and estimate intervals");
  add_common(fit, f);
  add_training(fit, f);
  add_data(fit, f);
  fit->add_flag("--tune", f.tune, "select depth/width/learning rate on a 20% hold-out");
  fit->add_option("--out", f.model, "model file (JSON)")->required();
  fit->add_option("--report", f.report, "fit report (JSON)");

  auto* predict = app.add_subcommand("predict", "predict from a saved model");
  std::string model_path, data_path, out_path;
  predict->add_option("--model", model_path, "model file")->required();
  predict->add_option("--data", data_path, "input CSV")->required();
  predict->add_option("--out", out_path, "predictions CSV")->required();

  auto* tune = app.add_subcommand("tune", "hold-out grid search only");
  add_common(tune, f);
  add_training(tune, f);
  add_data(tune, f);
  tune->add_option("--out", f.out, "tuning result (JSON)");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo study on a simulation design");
  add_common(simulate, f);
  simulate->add_option("--case", f.case_id, "design 1..6");
  simulate->add_option("--n", f.n, "sample size per replicate");
  simulate->add_option("--replicates", f.replicates, "number of replicates [160]");
  simulate->add_option("--methods", f.methods, "comma-separated lqr,dplqr,dnqr [lqr,dplqr]");
  simulate->add_option("--grid", f.grid, "full | table9 | fixed [full]");
  simulate->add_option("--ci-level", f.ci_level, "confidence level [0.95]");
  simulate->add_option("--out-dir", f.out_dir, "output directory")->required();
  simulate->add_flag("--align-level", f.align_level, "level-align mhat before RMSE");
  simulate->add_flag("--literal-x1-doubling", f.literal_x1,
                     "read x1+x1 in the scale functions as 2*x1");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*fit) {
      const auto c = resolve("fit", f);
      const auto out = dplqr::cli::cmd_fit(c);
      std::cout << "theta:";
      for (double t : out.model.fit.theta)
        std::cout << ' ' << dplqr::format_number(t);
      std::cout << '\n';
      if (out.covariance) {
        for (std::size_t k = 0; k < out.covariance->intervals.size(); ++k) {
          const auto& iv = out.covariance->intervals[k];
          std::cout << "ci[" << k << "]: " << dplqr::format_number(iv.lower) << ' '
                    << dplqr::format_number(iv.upper) << '\n';
        }
      }
    } else if (*predict) {
      const auto pred = dplqr::cli::cmd_predict(model_path, data_path, out_path);
      std::cout << pred.size() << " predictions written\n";
    } else if (*tune) {
      const auto c = resolve("tune", f);
      const auto r = dplqr::cli::cmd_tune(c);
      std::cout << "best: depth=" << r.best.depth << " width=" << r.best.width
                << " lr=" << dplqr::format_number(r.best.learning_rate) << '\n';
    } else if (*simulate) {
      const auto c = resolve("simulate", f);
      const auto rep = dplqr::cli::cmd_simulate(c);
      for (const auto& w : rep.warnings)
        std::cerr << "warning: " << w << '\n';
      dplqr::sim::write_table(std::cout, rep);
    }
  } catch (const dplqr::Error& e) {
    std::cerr << "error: " << e.category() << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
