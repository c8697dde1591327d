#pragma once

#include "densemath.hpp"
#include "network.hpp"
#include "optimizer.hpp"
#include "quantile_loss.hpp"
#include "rng.hpp"

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

namespace dplqr {

//! Response y (n), linear covariates x (n x p) and network covariates z (n x q).
struct Dataset
{
  Vector y;
  Matrix x;
  Matrix z;

  std::size_t n() const noexcept { return y.size(); }
  std::size_t p() const noexcept { return x.cols(); }
  std::size_t q() const noexcept { return z.cols(); }

  void validate() const
  {
    if (x.rows() != y.size() || z.rows() != y.size())
      throw DimensionError("dataset: row counts of y, x and z differ");
    if (p() == 0 && q() == 0)
      throw DimensionError("dataset: no covariates (p = q = 0)");
    auto finite = [](std::span<const double> v) {
      for (double e : v)
        if (!std::isfinite(e))
          return false;
      return true;
    };
    if (!finite(y) || !finite(x.entries()) || !finite(z.entries()))
      throw DataError("dataset contains non-finite values");
  }

  Dataset subset(std::span<const std::size_t> idx) const
  {
    return Dataset{select(y, idx), x.select_rows(idx), z.select_rows(idx)};
  }
};

//! dplqr: theta'x + network(z). lqr: the network is a single affine layer,
//! so the whole model is linear. dnqr: no linear block; x is fed to the
//! network together with z.
enum class Mode
{
  dplqr,
  lqr,
  dnqr
};

inline std::string to_string(Mode m)
{
  switch (m) {
    case Mode::dplqr:
      return "dplqr";
    case Mode::lqr:
      return "lqr";
    case Mode::dnqr:
      return "dnqr";
  }
  return "?";
}

inline Mode parse_mode(std::string_view s)
{
  if (s == "dplqr")
    return Mode::dplqr;
  if (s == "lqr")
    return Mode::lqr;
  if (s == "dnqr")
    return Mode::dnqr;
  throw ConfigError("unknown mode '" + std::string(s) + "' (expected dplqr, lqr or dnqr)");
}

inline TrainConfig make_mode_config(Mode mode, TrainConfig base)
{
  if (mode == Mode::lqr)
    base.depth = 1;
  return base;
}

//! For dnqr the linear covariates become the leading network inputs.
inline Dataset route_for_mode(const Dataset& data, Mode mode)
{
  if (mode != Mode::dnqr)
    return data;
  Dataset out;
  out.y = data.y;
  out.x = Matrix(data.n(), 0);
  out.z = Matrix(data.n(), data.p() + data.q());
  for (std::size_t i = 0; i < data.n(); ++i) {
    auto dst = out.z.row(i);
    std::copy(data.x.row(i).begin(), data.x.row(i).end(), dst.begin());
    std::copy(data.z.row(i).begin(), data.z.row(i).end(), dst.begin() + data.p());
  }
  return out;
}

struct PlqrFit
{
  Vector theta;
  NetworkParams network;
  double tau = 0.5;
  TrainHistory history;
  Mode mode = Mode::dplqr;
  TrainConfig config; //!< resolved configuration the fit was trained with
};

enum class LossKind
{
  check,  //!< mean check loss at level tau
  squared //!< mean squared error
};

struct TrainResult
{
  Vector theta;
  NetworkParams network;
  TrainHistory history;
};

namespace detail {

struct Snapshot
{
  Vector theta;
  NetworkParams network;
};

class LossEvaluator
{
public:
  LossEvaluator(const Matrix& x, const Matrix& z, const Vector& y, LossKind kind,
                double tau)
    : x_(x)
    , z_(z)
    , y_(y)
    , kind_(kind)
    , tau_(tau)
  {}

  double residual(const Vector& theta, const NetworkParams& net, Workspace& ws,
                  std::size_t i) const
  {
    return y_[i] - dot(x_.row(i), theta) - ws.forward(net, z_.row(i));
  }

  double loss(double r) const
  {
    return kind_ == LossKind::check ? check_loss(r, QuantileLevel(tau_)) : r * r;
  }

  double dloss_dpred(double r) const
  {
    return kind_ == LossKind::check ? loss_subgrad_wrt_pred(r, QuantileLevel(tau_))
                                    : -2.0 * r;
  }

  double mean_loss(const Vector& theta, const NetworkParams& net, Workspace& ws,
                   std::span<const std::size_t> idx) const
  {
    double s = 0.0;
    for (std::size_t i : idx)
      s += loss(residual(theta, net, ws, i));
    return s / static_cast<double>(idx.size());
  }

private:
  const Matrix& x_;
  const Matrix& z_;
  const Vector& y_;
  LossKind kind_;
  double tau_;
};

} // namespace detail

//! Joint minibatch Adam on the mean loss of y - x'theta - m(z), updating
//! theta and every network layer in the same step. theta starts at 0, the
//! network at Glorot-uniform. A shuffled `validation_fraction` of the rows
//! is held out for early stopping.
inline TrainResult train(const Matrix& x, const Matrix& z, const Vector& y,
                         LossKind kind, double tau, const TrainConfig& config, Rng& rng)
{
  config.validate();
  const std::size_t n = y.size();
  if (x.rows() != n || z.rows() != n)
    throw DimensionError("train: row counts of y, x and z differ");
  if (n == 0)
    throw DataError("train: no rows");
  if (config.minibatch > n) {
    throw ConfigError("minibatch " + std::to_string(config.minibatch) +
                      " exceeds the number of rows " + std::to_string(n));
  }
  if (kind == LossKind::check)
    (void)QuantileLevel(tau);

  const auto perm = shuffled_indices(rng, n);
  std::size_t n_val = 0;
  if (config.validation_fraction > 0.0 && n >= 2) {
    n_val = static_cast<std::size_t>(std::floor(config.validation_fraction *
                                                static_cast<double>(n)));
    n_val = std::clamp<std::size_t>(n_val, 1, n - 1);
  }
  const std::size_t n_train = n - n_val;
  std::vector<std::size_t> train_idx(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> val_idx(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
  const std::size_t minibatch = std::min(config.minibatch, n_train);

  const auto widths = uniform_widths(z.cols(), config.depth, config.width);
  detail::Snapshot current{Vector(x.cols(), 0.0), init_params(widths, rng)};
  if (config.init_output_bias) {
    // start the output at the level of the training response
    const Vector y_train = select(y, train_idx);
    current.network.layers.back()(0, current.network.layers.back().cols() - 1) =
      kind == LossKind::check ? quantile(y_train, tau) : mean(y_train);
  }

  auto grads = NetworkGrads::zeros_like(current.network);
  Vector theta_grad(x.cols(), 0.0);

  std::vector<std::size_t> block_sizes{current.theta.size()};
  for (const auto& w : current.network.layers)
    block_sizes.push_back(w.size());
  AdamState adam(block_sizes);

  ParamBlocks params{std::span<double>(current.theta)};
  GradBlocks gblocks{std::span<const double>(theta_grad)};
  for (std::size_t k = 0; k < current.network.layers.size(); ++k) {
    params.emplace_back(current.network.layers[k].entries());
    gblocks.emplace_back(grads.layers[k].entries());
  }

  detail::LossEvaluator eval(x, z, y, kind, tau);
  Workspace ws(current.network);
  EarlyStopping<detail::Snapshot> monitor(config.early_stop_patience);
  TrainHistory history;
  const std::size_t p = x.cols();

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    for (const auto& batch : epoch_batches(n_train, minibatch, rng)) {
      grads.set_zero();
      std::fill(theta_grad.begin(), theta_grad.end(), 0.0);
      const double scale = 1.0 / static_cast<double>(batch.size());
      for (std::size_t b : batch) {
        const std::size_t i = train_idx[b];
        const double r = eval.residual(current.theta, current.network, ws, i);
        const double g = eval.dloss_dpred(r) * scale;
        const auto xi = x.row(i);
        for (std::size_t k = 0; k < p; ++k)
          theta_grad[k] += g * xi[k];
        ws.backward(current.network, g, grads);
      }
      adam_step(adam, params, gblocks, config.learning_rate);
    }

    const double tr = eval.mean_loss(current.theta, current.network, ws, train_idx);
    if (!std::isfinite(tr)) {
      throw NumericalError("non-finite training loss at epoch " + std::to_string(epoch));
    }
    const double va =
      n_val > 0 ? eval.mean_loss(current.theta, current.network, ws, val_idx) : tr;
    history.train_loss.push_back(tr);
    history.val_loss.push_back(va);
    history.stopped_epoch = epoch;
    if (monitor.update(va, current) == StopDecision::stop)
      break;
  }

  history.best_epoch = monitor.best_epoch();
  if (config.restore_best && monitor.best())
    current = *monitor.best();
  if (config.polish_output_bias && config.epochs > 0) {
    // the loss is piecewise linear (check) or quadratic (squared) in the
    // output bias, so its exact minimizer is an order statistic or the mean
    // of the training residuals
    Vector r(train_idx.size());
    for (std::size_t j = 0; j < r.size(); ++j)
      r[j] = eval.residual(current.theta, current.network, ws, train_idx[j]);
    double shift = 0.0;
    if (kind == LossKind::check) {
      auto k = static_cast<std::size_t>(std::ceil(tau * static_cast<double>(r.size())));
      k = std::clamp<std::size_t>(k, 1, r.size()) - 1;
      std::nth_element(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(k), r.end());
      shift = r[k];
    } else {
      shift = mean(r);
    }
    auto& out = current.network.layers.back();
    out(0, out.cols() - 1) += shift;
  }
  return TrainResult{std::move(current.theta), std::move(current.network),
                     std::move(history)};
}

//! Fits the partially linear quantile model at level tau.
inline PlqrFit fit(const Dataset& data, QuantileLevel tau, const TrainConfig& config,
                   Rng& rng, Mode mode = Mode::dplqr)
{
  data.validate();
  const Dataset routed = route_for_mode(data, mode);
  const TrainConfig resolved = make_mode_config(mode, config);
  auto result = train(routed.x, routed.z, routed.y, LossKind::check, tau, resolved, rng);
  return PlqrFit{std::move(result.theta), std::move(result.network), tau.value(),
                 std::move(result.history), mode, resolved};
}

//! x'theta + m(z); for dnqr the network sees (x, z).
inline double predict(const PlqrFit& fit, std::span<const double> x,
                      std::span<const double> z)
{
  if (fit.mode == Mode::dnqr) {
    if (x.size() + z.size() != fit.network.input_dim())
      throw DimensionError("predict: covariate count does not match the network");
    Vector u(x.begin(), x.end());
    u.insert(u.end(), z.begin(), z.end());
    return forward(fit.network, u);
  }
  if (x.size() != fit.theta.size()) {
    throw DimensionError("predict: x has " + std::to_string(x.size()) +
                         " entries, expected " + std::to_string(fit.theta.size()));
  }
  return dot(x, fit.theta) + forward(fit.network, z);
}

inline Vector predict(const PlqrFit& fit, const Dataset& data)
{
  if (data.x.rows() != data.n() || data.z.rows() != data.n())
    throw DimensionError("predict: row counts of y, x and z differ");
  const Dataset routed = route_for_mode(data, fit.mode);
  if (routed.p() != fit.theta.size() || routed.q() != fit.network.input_dim())
    throw DimensionError("predict: dataset shape does not match the fit");
  Vector out(data.n());
  Workspace ws(fit.network);
  for (std::size_t i = 0; i < data.n(); ++i)
    out[i] = dot(routed.x.row(i), fit.theta) + ws.forward(fit.network, routed.z.row(i));
  return out;
}

//! Network component m(z) alone (dplqr and lqr).
inline Vector predict_m(const PlqrFit& fit, const Matrix& z)
{
  if (fit.mode == Mode::dnqr)
    throw ConfigError("predict_m: dnqr fits have no separate function component");
  return forward_batch(fit.network, z);
}

inline Vector residuals(const PlqrFit& fit, const Dataset& data)
{
  Vector r = predict(fit, data);
  for (std::size_t i = 0; i < r.size(); ++i)
    r[i] = data.y[i] - r[i];
  return r;
}

} // namespace dplqr
