#pragma once

#include "densemath.hpp"
#include "rng.hpp"

#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace dplqr {

//! Weights of a fully connected ReLU network m: R^{q_0} -> R.
//!
//! Layer k maps q_{k-1} inputs to q_k outputs and is stored as a
//! q_k x (q_{k-1} + 1) matrix whose last column is the bias, so that a
//! layer acts on the input with a constant 1 appended. Hidden layers apply
//! max(t, 0); the output layer is affine. A single layer (depth 1) is a
//! plain affine map of the input.
struct NetworkParams
{
  std::vector<std::size_t> widths; //!< (q_0, ..., q_L), q_L == 1
  std::vector<Matrix> layers;      //!< L matrices

  std::size_t depth() const noexcept { return layers.size(); }
  std::size_t input_dim() const noexcept { return widths.empty() ? 0 : widths.front(); }

  std::size_t parameter_count() const noexcept
  {
    std::size_t n = 0;
    for (const auto& w : layers)
      n += w.size();
    return n;
  }

  bool operator==(const NetworkParams&) const = default;
};

//! Gradient with the same layer shapes as the parameters it belongs to.
struct NetworkGrads
{
  std::vector<Matrix> layers;

  static NetworkGrads zeros_like(const NetworkParams& p)
  {
    NetworkGrads g;
    g.layers.reserve(p.layers.size());
    for (const auto& w : p.layers)
      g.layers.emplace_back(w.rows(), w.cols());
    return g;
  }

  void set_zero()
  {
    for (auto& w : layers)
      std::fill(w.entries().begin(), w.entries().end(), 0.0);
  }
};

inline double relu(double t) noexcept { return t > 0.0 ? t : 0.0; }

inline void validate_widths(std::span<const std::size_t> widths)
{
  if (widths.size() < 2)
    throw ConfigError("network needs at least one layer (two widths)");
  if (widths.back() != 1)
    throw ConfigError("network output width must be 1");
  for (std::size_t k = 1; k < widths.size(); ++k)
    if (widths[k] == 0)
      throw ConfigError("network layer " + std::to_string(k) + " has zero width");
}

//! Checks that the layer shapes chain correctly; throws DimensionError.
inline void validate(const NetworkParams& p)
{
  validate_widths(p.widths);
  if (p.layers.size() + 1 != p.widths.size())
    throw DimensionError("network: layer count does not match widths");
  for (std::size_t k = 0; k < p.layers.size(); ++k) {
    if (p.layers[k].rows() != p.widths[k + 1] ||
        p.layers[k].cols() != p.widths[k] + 1) {
      throw DimensionError("network: layer " + std::to_string(k + 1) +
                           " has wrong shape");
    }
  }
}

//! Widths for an input of size q, `depth` layers and uniform hidden width.
inline std::vector<std::size_t> uniform_widths(std::size_t q, std::size_t depth,
                                               std::size_t width)
{
  if (depth == 0)
    throw ConfigError("depth must be at least 1");
  std::vector<std::size_t> w;
  w.push_back(q);
  for (std::size_t k = 1; k < depth; ++k)
    w.push_back(width);
  w.push_back(1);
  return w;
}

//! Glorot-uniform weights, U(-a, a) with a = sqrt(6 / (fan_in + fan_out)),
//! and zero biases.
inline NetworkParams init_params(std::span<const std::size_t> widths, Rng& rng)
{
  validate_widths(widths);
  NetworkParams p;
  p.widths.assign(widths.begin(), widths.end());
  for (std::size_t k = 1; k < widths.size(); ++k) {
    const std::size_t fan_in = widths[k - 1];
    const std::size_t fan_out = widths[k];
    const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Matrix w(fan_out, fan_in + 1);
    for (std::size_t i = 0; i < fan_out; ++i)
      for (std::size_t j = 0; j < fan_in; ++j)
        w(i, j) = rng.uniform(-a, a);
    p.layers.push_back(std::move(w));
  }
  return p;
}

//! Activation buffers reused across forward/backward passes.
class Workspace
{
public:
  explicit Workspace(const NetworkParams& p)
  {
    acts_.resize(p.widths.size());
    for (std::size_t k = 0; k < p.widths.size(); ++k)
      acts_[k].resize(p.widths[k]);
    pre_.resize(p.layers.size());
    for (std::size_t k = 0; k < p.layers.size(); ++k)
      pre_[k].resize(p.widths[k + 1]);
    delta_.resize(p.widths.size());
    for (std::size_t k = 0; k < p.widths.size(); ++k)
      delta_[k].resize(p.widths[k]);
  }

  //! Forward pass keeping the intermediate values for `backward`.
  double forward(const NetworkParams& p, std::span<const double> z)
  {
    if (z.size() != p.input_dim()) {
      throw DimensionError("network input has " + std::to_string(z.size()) +
                           " entries, expected " + std::to_string(p.input_dim()));
    }
    std::copy(z.begin(), z.end(), acts_[0].begin());
    const std::size_t depth = p.layers.size();
    for (std::size_t k = 0; k < depth; ++k) {
      const Matrix& w = p.layers[k];
      const std::size_t in = w.cols() - 1;
      const double* a = acts_[k].data();
      for (std::size_t i = 0; i < w.rows(); ++i) {
        const double* row = w.row(i).data();
        double s = 0.0;
        for (std::size_t j = 0; j < in; ++j)
          s += row[j] * a[j];
        s += row[in];
        pre_[k][i] = s;
      }
      if (k + 1 < depth) {
        for (std::size_t i = 0; i < w.rows(); ++i)
          acts_[k + 1][i] = relu(pre_[k][i]);
      }
    }
    return pre_[depth - 1][0];
  }

  //! Adds d(upstream * m(z)) / dW_k to `grads` for the input of the most
  //! recent `forward` call. ReLU derivative at 0 is taken as 0.
  void backward(const NetworkParams& p, double upstream, NetworkGrads& grads)
  {
    const std::size_t depth = p.layers.size();
    delta_[depth][0] = upstream;
    for (std::size_t k = depth; k-- > 0;) {
      const Matrix& w = p.layers[k];
      Matrix& g = grads.layers[k];
      const std::size_t in = w.cols() - 1;
      const double* a = acts_[k].data();
      const double* dl = delta_[k + 1].data();
      for (std::size_t i = 0; i < w.rows(); ++i) {
        const double di = dl[i];
        if (di == 0.0)
          continue;
        double* grow = g.row(i).data();
        for (std::size_t j = 0; j < in; ++j)
          grow[j] += di * a[j];
        grow[in] += di;
      }
      if (k == 0)
        break;
      double* dprev = delta_[k].data();
      std::fill_n(dprev, in, 0.0);
      for (std::size_t i = 0; i < w.rows(); ++i) {
        const double di = dl[i];
        if (di == 0.0)
          continue;
        const double* row = w.row(i).data();
        for (std::size_t j = 0; j < in; ++j)
          dprev[j] += row[j] * di;
      }
      const double* pre = pre_[k - 1].data();
      for (std::size_t j = 0; j < in; ++j)
        if (!(pre[j] > 0.0))
          dprev[j] = 0.0;
    }
  }

private:
  std::vector<Vector> acts_;
  std::vector<Vector> pre_;
  std::vector<Vector> delta_;
};

inline double forward(const NetworkParams& p, std::span<const double> z)
{
  Workspace ws(p);
  return ws.forward(p, z);
}

inline Vector forward_batch(const NetworkParams& p, const Matrix& z)
{
  if (z.rows() > 0 && z.cols() != p.input_dim()) {
    throw DimensionError("forward_batch: inputs have " + std::to_string(z.cols()) +
                         " columns, expected " + std::to_string(p.input_dim()));
  }
  Vector out(z.rows());
  Workspace ws(p);
  for (std::size_t i = 0; i < z.rows(); ++i)
    out[i] = ws.forward(p, z.row(i));
  return out;
}

//! Gradient of upstream * m(z) with respect to every layer.
inline NetworkGrads backward(const NetworkParams& p, std::span<const double> z,
                             double upstream)
{
  Workspace ws(p);
  ws.forward(p, z);
  auto g = NetworkGrads::zeros_like(p);
  ws.backward(p, upstream, g);
  return g;
}

} // namespace dplqr
