#pragma once

#include "densemath.hpp"
#include "model.hpp"
#include "parallel.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace dplqr {

// ---------------------------------------------------------------------------
// density of the residuals at zero

//! Silverman's rule of thumb 0.9 * min(sd, IQR/1.34) * n^(-1/5); the IQR
//! term is ignored when it is zero.
inline double silverman_bandwidth(std::span<const double> v)
{
  const double sd = sample_sd(v);
  const double iqr = sample_iqr(v);
  double scale = sd;
  if (iqr > 0.0)
    scale = std::min(sd, iqr / 1.34);
  if (!(scale > 0.0))
    throw NumericalError("bandwidth: sample has zero spread");
  return 0.9 * scale * std::pow(static_cast<double>(v.size()), -0.2);
}

//! Gaussian kernel density estimate at `point`.
inline double gaussian_kde(std::span<const double> sample, double point, double bandwidth)
{
  double s = 0.0;
  for (double e : sample)
    s += normal_pdf((point - e) / bandwidth);
  return s / (static_cast<double>(sample.size()) * bandwidth);
}

inline double kde_at_zero(std::span<const double> residuals)
{
  if (residuals.size() < 10)
    throw DataError("kde_at_zero: need at least 10 residuals");
  const double f = gaussian_kde(residuals, 0.0, silverman_bandwidth(residuals));
  if (!(f > 0.0))
    throw NumericalError("kde_at_zero: density estimate at 0 underflowed");
  return f;
}

// ---------------------------------------------------------------------------
// projections and covariance

//! Least-squares network fit of one linear covariate on z.
struct Projection
{
  NetworkParams network;
  TrainHistory history;

  double operator()(std::span<const double> z) const { return forward(network, z); }
};

inline Projection fit_projection(const Dataset& data, std::size_t k,
                                 const TrainConfig& config, Rng& rng)
{
  if (k >= data.p())
    throw DimensionError("fit_projection: coefficient index out of range");
  data.validate();
  const Matrix none(data.n(), 0);
  auto r = train(none, data.z, data.x.column(k), LossKind::squared, 0.5, config, rng);
  return Projection{std::move(r.network), std::move(r.history)};
}

struct Interval
{
  double lower;
  double upper;

  bool contains(double v) const noexcept { return lower <= v && v <= upper; }
};

struct CovarianceEstimate
{
  double f0_hat = 0.0;
  Matrix omega_hat;
  Matrix sigma_hat;
  double level = 0.95;
  std::vector<Interval> intervals;
  std::size_t n = 0;
};

//! theta_k +/- z_{(1+level)/2} * sqrt(sigma_kk / n)
inline std::vector<Interval> confidence_intervals(std::span<const double> theta_hat,
                                                  const Matrix& sigma_hat, std::size_t n,
                                                  double level)
{
  if (!(level > 0.0 && level < 1.0))
    throw ConfigError("confidence level must lie in (0,1)");
  if (sigma_hat.rows() != theta_hat.size() || sigma_hat.cols() != theta_hat.size())
    throw DimensionError("confidence_intervals: covariance shape mismatch");
  if (n == 0)
    throw DataError("confidence_intervals: n must be positive");
  const double z = normal_quantile(0.5 * (1.0 + level));
  std::vector<Interval> out;
  for (std::size_t k = 0; k < theta_hat.size(); ++k) {
    const double v = sigma_hat(k, k);
    if (v < 0.0 || !std::isfinite(v))
      throw NumericalError("confidence_intervals: invalid variance for coefficient " +
                           std::to_string(k));
    const double half = z * std::sqrt(v / static_cast<double>(n));
    out.push_back({theta_hat[k] - half, theta_hat[k] + half});
  }
  return out;
}

//! Homoscedastic asymptotic covariance of sqrt(n)(theta_hat - theta):
//!   V_i = X_i - phi(Z_i),  Omega = sample covariance of V (n - 1),
//!   Sigma = tau (1 - tau) Omega^{-1} / f(0)^2,
//! with phi_k a least-squares network regression of X_k on Z using the
//! architecture of `config` and f(0) a kernel density estimate of the
//! residuals at zero.
inline CovarianceEstimate covariance(const PlqrFit& fit, const Dataset& data,
                                     const TrainConfig& config, Rng& rng,
                                     double level = 0.95, std::size_t workers = 1)
{
  const std::size_t p = data.p();
  if (fit.mode == Mode::dnqr || p == 0)
    throw ConfigError("covariance: the fit has no linear coefficients");
  if (fit.theta.size() != p)
    throw DimensionError("covariance: fit and data disagree on p");
  data.validate();
  const std::size_t n = data.n();

  CovarianceEstimate est;
  est.level = level;
  est.n = n;
  est.f0_hat = kde_at_zero(residuals(fit, data));

  // projections, one child stream per coordinate
  const std::uint64_t base = rng();
  std::vector<Vector> phi(p);
  parallel_for(p, workers, [&](std::size_t k) {
    Rng child(derive_seed(base, k));
    const auto proj = fit_projection(data, k, config, child);
    phi[k] = forward_batch(proj.network, data.z);
  });

  Matrix v(n, p);
  Vector vbar(p, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < p; ++k) {
      v(i, k) = data.x(i, k) - phi[k][i];
      vbar[k] += v(i, k);
    }
  for (auto& b : vbar)
    b /= static_cast<double>(n);

  est.omega_hat = Matrix(p, p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = 0; b <= a; ++b)
        est.omega_hat(a, b) += (v(i, a) - vbar[a]) * (v(i, b) - vbar[b]);
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = 0; b <= a; ++b) {
      est.omega_hat(a, b) /= static_cast<double>(n - 1);
      est.omega_hat(b, a) = est.omega_hat(a, b);
    }

  Matrix inv;
  try {
    inv = sym_inverse(est.omega_hat);
  } catch (const SingularMatrixError& e) {
    throw NumericalError("covariance: Omega is singular; linear coefficient " +
                         std::to_string(e.pivot) +
                         " is (nearly) a function of z or of the other coefficients");
  }

  const double tau = fit.tau;
  const double scale = tau * (1.0 - tau) / (est.f0_hat * est.f0_hat);
  est.sigma_hat = Matrix(p, p);
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = 0; b < p; ++b)
      est.sigma_hat(a, b) = scale * inv(a, b);

  est.intervals = confidence_intervals(fit.theta, est.sigma_hat, n, level);
  return est;
}

} // namespace dplqr
