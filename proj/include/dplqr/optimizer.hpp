#pragma once

#include "error.hpp"
#include "rng.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dplqr {

//! Training hyperparameters. `depth` counts weight layers (depth 2 is one
//! hidden layer of `width` units). `early_stop_patience` is in epochs.
struct TrainConfig
{
  std::size_t depth = 2;
  std::size_t width = 16;
  std::size_t epochs = 500;
  std::size_t minibatch = 64;
  std::size_t early_stop_patience = 50;
  double learning_rate = 0.01;
  std::uint64_t seed = 0;
  //! Share of the rows given to a fit that is held out for early stopping.
  //! 0 disables the hold-out; the training loss is monitored instead.
  double validation_fraction = 0.2;
  //! Start the output-layer bias at the training response's tau-quantile
  //! (mean for squared loss) instead of 0.
  bool init_output_bias = true;
  //! On early stop, return the best-epoch weights rather than the last ones.
  bool restore_best = false;
  //! After the last epoch, move the output bias to the exact minimizer of
  //! the training loss with every other weight held fixed.
  bool polish_output_bias = true;

  void validate() const
  {
    if (depth == 0)
      throw ConfigError("depth must be positive");
    if (depth > 1 && width == 0)
      throw ConfigError("width must be positive");
    if (minibatch == 0)
      throw ConfigError("minibatch must be positive");
    if (early_stop_patience == 0)
      throw ConfigError("early_stop_patience must be positive");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
      throw ConfigError("learning_rate must be positive");
    if (!(validation_fraction >= 0.0 && validation_fraction < 1.0))
      throw ConfigError("validation_fraction must lie in [0,1)");
  }

  bool operator==(const TrainConfig&) const = default;
};

struct TrainHistory
{
  std::vector<double> train_loss; //!< loss on the training rows after each epoch
  std::vector<double> val_loss;   //!< loss on the hold-out rows after each epoch
  std::size_t stopped_epoch = 0;  //!< number of epochs actually run
  std::size_t best_epoch = 0;     //!< 1-based epoch whose weights were kept; 0 = initial
};

// ---------------------------------------------------------------------------
// Adam

//! First/second moment estimates for a list of parameter blocks.
struct AdamState
{
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
  std::uint64_t step_count = 0;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;

  AdamState() = default;
  explicit AdamState(std::span<const std::size_t> block_sizes)
  {
    for (std::size_t n : block_sizes) {
      first_moment.emplace_back(n, 0.0);
      second_moment.emplace_back(n, 0.0);
    }
  }

  bool operator==(const AdamState&) const = default;
};

using ParamBlocks = std::vector<std::span<double>>;
using GradBlocks = std::vector<std::span<const double>>;

//! One Adam update applied to every block:
//!   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2,
//!   p <- p - lr * mhat / (sqrt(vhat) + eps)
//! with bias-corrected mhat, vhat. Throws on a non-finite gradient before
//! touching any state.
inline void adam_step(AdamState& state, const ParamBlocks& params,
                      const GradBlocks& grads, double lr)
{
  if (params.size() != grads.size() || params.size() != state.first_moment.size())
    throw DimensionError("adam_step: block count mismatch");
  for (std::size_t b = 0; b < params.size(); ++b) {
    if (params[b].size() != grads[b].size() ||
        params[b].size() != state.first_moment[b].size())
      throw DimensionError("adam_step: block " + std::to_string(b) + " size mismatch");
    for (double g : grads[b])
      if (!std::isfinite(g))
        throw NumericalError("adam_step: non-finite gradient in block " +
                             std::to_string(b));
  }

  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  const double b1 = state.beta1;
  const double b2 = state.beta2;
  const double eps = state.epsilon;

  for (std::size_t b = 0; b < params.size(); ++b) {
    double* p = params[b].data();
    const double* g = grads[b].data();
    double* m = state.first_moment[b].data();
    double* v = state.second_moment[b].data();
    for (std::size_t i = 0; i < params[b].size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

// ---------------------------------------------------------------------------
// minibatches

//! One shuffled pass over 0..n-1 cut into consecutive slices of
//! `minibatch` indices; the last slice holds the remainder.
inline std::vector<std::vector<std::size_t>>
epoch_batches(std::size_t n, std::size_t minibatch, Rng& rng)
{
  if (n == 0 || minibatch == 0 || minibatch > n) {
    throw ConfigError("epoch_batches: need 1 <= minibatch <= n (minibatch=" +
                      std::to_string(minibatch) + ", n=" + std::to_string(n) + ")");
  }
  const auto perm = shuffled_indices(rng, n);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < n; start += minibatch) {
    const std::size_t stop = std::min(n, start + minibatch);
    batches.emplace_back(perm.begin() + static_cast<std::ptrdiff_t>(start),
                         perm.begin() + static_cast<std::ptrdiff_t>(stop));
  }
  return batches;
}

// ---------------------------------------------------------------------------
// early stopping

enum class StopDecision
{
  proceed,
  stop
};

//! Tracks the best monitored loss and a snapshot of whatever state produced
//! it. Only a strict decrease counts as improvement; NaN never does. Training
//! stops once `patience` consecutive epochs fail to improve.
template<class Snapshot>
class EarlyStopping
{
public:
  explicit EarlyStopping(std::size_t patience)
    : patience_(patience)
  {
    if (patience == 0)
      throw ConfigError("early stopping patience must be at least 1");
  }

  StopDecision update(double loss, const Snapshot& current)
  {
    ++epoch_;
    if (!std::isnan(loss) && loss < best_loss_) {
      best_loss_ = loss;
      best_epoch_ = epoch_;
      best_ = current;
      since_best_ = 0;
    } else {
      ++since_best_;
    }
    return since_best_ >= patience_ ? StopDecision::stop : StopDecision::proceed;
  }

  std::size_t epoch() const noexcept { return epoch_; }
  std::size_t best_epoch() const noexcept { return best_epoch_; }
  double best_loss() const noexcept { return best_loss_; }
  const std::optional<Snapshot>& best() const noexcept { return best_; }

private:
  std::size_t patience_;
  std::size_t epoch_ = 0;
  std::size_t best_epoch_ = 0;
  std::size_t since_best_ = 0;
  double best_loss_ = std::numeric_limits<double>::infinity();
  std::optional<Snapshot> best_;
};

} // namespace dplqr
