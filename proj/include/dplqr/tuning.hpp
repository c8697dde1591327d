#pragma once

#include "model.hpp"
#include "parallel.hpp"

#include <limits>
#include <string>
#include <vector>

namespace dplqr {

struct TuneResult
{
  TrainConfig best;
  std::size_t best_index = 0;
  std::vector<double> scores; //!< hold-out mean check loss per candidate; NaN if it failed
};

//! Hold-out grid search. A shuffled 20% of `data` is set aside; every
//! candidate is fitted on the remaining 80% and scored by mean check loss on
//! the hold-out. The first minimum in grid order wins. Candidates that fail
//! numerically are skipped. Each candidate draws from its own child stream,
//! so the outcome does not depend on `workers`.
inline TuneResult tune(const std::vector<TrainConfig>& grid, const Dataset& data,
                       QuantileLevel tau, Mode mode, Rng& rng, std::size_t workers = 1)
{
  if (grid.empty())
    throw ConfigError("tune: empty grid");
  data.validate();

  const auto perm = shuffled_indices(rng, data.n());
  const std::size_t n_hold = std::max<std::size_t>(1, data.n() / 5);
  if (n_hold >= data.n())
    throw DataError("tune: too few rows for a hold-out split");
  const std::size_t n_fit = data.n() - n_hold;
  const std::vector<std::size_t> fit_idx(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_fit));
  const std::vector<std::size_t> hold_idx(perm.begin() + static_cast<std::ptrdiff_t>(n_fit), perm.end());
  const Dataset fit_part = data.subset(fit_idx);
  const Dataset hold_part = data.subset(hold_idx);
  const std::uint64_t base = rng();

  TuneResult result;
  result.scores.assign(grid.size(), std::numeric_limits<double>::quiet_NaN());
  parallel_for(grid.size(), workers, [&](std::size_t c) {
    Rng child(derive_seed(base, c));
    try {
      const auto f = fit(fit_part, tau, grid[c], child, mode);
      const double s = mean_check_loss(residuals(f, hold_part), tau);
      if (std::isfinite(s))
        result.scores[c] = s;
    } catch (const NumericalError&) {
    }
  });

  double best = std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t c = 0; c < grid.size(); ++c) {
    if (!std::isnan(result.scores[c]) && result.scores[c] < best) {
      best = result.scores[c];
      result.best_index = c;
      any = true;
    }
  }
  if (!any)
    throw NumericalError("tune: every candidate failed");
  result.best = grid[result.best_index];
  return result;
}

//! Cartesian grid over depths x widths x learning rates, other fields from
//! `base`. Entries that coincide after make_mode_config are dropped.
inline std::vector<TrainConfig> make_grid(const TrainConfig& base,
                                          std::span<const std::size_t> depths,
                                          std::span<const std::size_t> widths,
                                          std::span<const double> learning_rates,
                                          Mode mode = Mode::dplqr)
{
  std::vector<TrainConfig> grid;
  for (std::size_t d : depths)
    for (std::size_t w : widths)
      for (double lr : learning_rates) {
        TrainConfig c = base;
        c.depth = d;
        c.width = w;
        c.learning_rate = lr;
        c = make_mode_config(mode, c);
        if (mode == Mode::lqr)
          c.width = base.width;
        if (std::find(grid.begin(), grid.end(), c) == grid.end())
          grid.push_back(c);
      }
  return grid;
}

} // namespace dplqr
