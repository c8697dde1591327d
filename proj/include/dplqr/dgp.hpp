#pragma once

#include "densemath.hpp"
#include "model.hpp"
#include "rng.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <utility>

namespace dplqr::sim {

// Six simulation designs on 12 copula covariates: z = first 10 coordinates,
// x1 = 1{u_11 > 1}, x2 = u_12, errors Student t with 3 degrees of freedom.
// Cases 1-3 are homoscedastic with linear / additive / deep m; cases 4-6
// reuse those m and scale the error by sigma1(x, z).

inline constexpr std::size_t kCovariates = 12;
inline constexpr std::size_t kZDim = 10;
inline constexpr std::size_t kXDim = 2;

struct DgpSpec
{
  int case_id = 1;
  std::size_t n = 500;
  double tau = 0.5;
  Vector theta{1.0, -1.0};
  double rho = 0.5;
  //! Read "x1 + x1" in sigma1 literally as 2*x1 instead of x1 + x2.
  bool literal_x1_doubling = false;

  void validate() const
  {
    if (case_id < 1 || case_id > 6)
      throw ConfigError("simulation case must be 1..6, got " + std::to_string(case_id));
    if (n < 50)
      throw ConfigError("simulation sample size must be at least 50");
    (void)QuantileLevel(tau);
    if (theta.size() != kXDim)
      throw ConfigError("simulation theta must have 2 entries");
  }
};

// ---------------------------------------------------------------------------
// samplers

//! n draws of a dim-variate Gaussian copula with equicorrelation rho,
//! mapped to uniform [0,2] marginals: 2 * Phi(L w), w ~ N(0, I).
inline Matrix sample_copula(std::size_t n, std::size_t dim, double rho, Rng& rng)
{
  if (dim == 0)
    throw ConfigError("sample_copula: dim must be positive");
  const double lower = dim > 1 ? -1.0 / static_cast<double>(dim - 1) : -1.0;
  if (!(rho > lower && rho < 1.0))
    throw ConfigError("sample_copula: rho outside the positive definite range");

  Matrix r(dim, dim, rho);
  for (std::size_t i = 0; i < dim; ++i)
    r(i, i) = 1.0;
  // Cholesky of the equicorrelation matrix
  Matrix chol(dim, dim);
  for (std::size_t j = 0; j < dim; ++j) {
    double d = r(j, j);
    for (std::size_t k = 0; k < j; ++k)
      d -= chol(j, k) * chol(j, k);
    chol(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < dim; ++i) {
      double s = r(i, j);
      for (std::size_t k = 0; k < j; ++k)
        s -= chol(i, k) * chol(j, k);
      chol(i, j) = s / chol(j, j);
    }
  }

  Matrix out(n, dim);
  Vector w(dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& e : w)
      e = rng.std_normal();
    for (std::size_t a = 0; a < dim; ++a) {
      double s = 0.0;
      for (std::size_t k = 0; k <= a; ++k)
        s += chol(a, k) * w[k];
      out(i, a) = 2.0 * normal_cdf(s);
    }
  }
  return out;
}

//! Student t_3 via N / sqrt(chi2_3 / 3).
inline double draw_t3(Rng& rng)
{
  const double num = rng.std_normal();
  double chi2 = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double g = rng.std_normal();
    chi2 += g * g;
  }
  return num / std::sqrt(chi2 / 3.0);
}

inline Vector sample_t3(std::size_t n, Rng& rng)
{
  Vector out(n);
  for (auto& e : out)
    e = draw_t3(rng);
  return out;
}

inline double t3_cdf(double t)
{
  const double u = t / std::numbers::sqrt3;
  return 0.5 + (u / (1.0 + u * u) + std::atan(u)) / std::numbers::pi;
}

//! Quantile of t_3 by bisection on the closed-form CDF.
inline double t3_quantile(double tau)
{
  (void)QuantileLevel(tau);
  if (tau == 0.5)
    return 0.0;
  double lo = -1.0;
  double hi = 1.0;
  while (t3_cdf(lo) > tau)
    lo *= 2.0;
  while (t3_cdf(hi) < tau)
    hi *= 2.0;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (t3_cdf(mid) < tau)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// design functions

inline void check_z(std::span<const double> z)
{
  if (z.size() != kZDim)
    throw DimensionError("design function expects 10 z coordinates");
}

//! m(z) of the linear (1), additive (2) and deep (3) designs.
inline double m_case(int case_id, std::span<const double> z)
{
  check_z(z);
  const double pi = std::numbers::pi;
  switch (case_id) {
    case 1: {
      double s = 0.0;
      for (double v : z)
        s += v;
      return 0.95 * s;
    }
    case 2: {
      const double s = z[0] * z[0] * z[0] - 3.0 * z[1] * z[1] +
                       2.0 * std::sin(6.0 * pi * z[2]) + std::log(z[3] + 0.5) +
                       std::sqrt(z[4] + 2.0) + std::exp(z[5] / 2.0) +
                       0.5 * (z[6] - 1.0 + std::abs(z[6] - 1.0)) + 1.0 / (z[7] + 2.0) +
                       2.0 * std::exp(-z[8] / 2.0) + std::cos(pi * z[9]);
      return 1.1 * s;
    }
    case 3: {
      double centred = 0.0;
      for (double v : z)
        centred += v - 1.0;
      const double s = z[0] * z[1] + z[1] * (1.0 - std::cos(pi * z[2] * z[3])) +
                       2.0 * std::sin(z[4]) / (std::abs(z[4] - z[5]) + 2.0) +
                       std::pow(z[5] + z[6] * z[7] - 1.0, 2) +
                       std::sqrt(z[8] * z[8] + z[9] * z[9] + 2.0) +
                       std::exp(centred / 5.0);
      return 0.51 * s;
    }
    default:
      throw ConfigError("m_case: case must be 1, 2 or 3");
  }
}

//! Index of the m used by a case (4 -> 1, 5 -> 2, 6 -> 3).
inline int base_case(int case_id) { return case_id > 3 ? case_id - 3 : case_id; }

//! Split sigma1(x, z) = theta_star' x + m_star(z) of the heteroscedastic designs.
struct ScaleParts
{
  Vector theta_star;
  double m_star;
};

inline ScaleParts sigma1_parts(int case_id, std::span<const double> z,
                               bool literal_x1_doubling = false)
{
  check_z(z);
  double denom = 0.0;
  double m_star = 0.0;
  switch (case_id) {
    case 4:
      denom = 5.0;
      for (double v : z)
        m_star += v;
      m_star /= 5.0;
      break;
    case 5:
      denom = 3.6;
      for (double v : z)
        m_star += std::abs(v - 0.2);
      m_star /= 3.6;
      break;
    case 6: {
      denom = 3.0;
      double centred = 0.0;
      for (double v : z)
        centred += v - 1.0;
      m_star = 3.0 * normal_cdf(centred / 5.0);
      break;
    }
    default:
      throw ConfigError("sigma1: case must be 4, 5 or 6");
  }
  Vector theta_star = literal_x1_doubling ? Vector{2.0 / denom, 0.0}
                                          : Vector{1.0 / denom, 1.0 / denom};
  return ScaleParts{std::move(theta_star), m_star};
}

inline double sigma1_case(int case_id, std::span<const double> x, std::span<const double> z,
                          bool literal_x1_doubling = false)
{
  if (x.size() != kXDim)
    throw DimensionError("sigma1 expects 2 x coordinates");
  const auto parts = sigma1_parts(case_id, z, literal_x1_doubling);
  return dot(parts.theta_star, x) + parts.m_star;
}

//! theta_tau: theta for cases 1-3, theta + t_tau * theta_star for 4-6.
inline Vector theta_tau(const DgpSpec& spec)
{
  spec.validate();
  Vector out = spec.theta;
  if (spec.case_id > 3) {
    const double t = t3_quantile(spec.tau);
    const Vector z1(kZDim, 1.0);
    const auto parts = sigma1_parts(spec.case_id, z1, spec.literal_x1_doubling);
    for (std::size_t k = 0; k < out.size(); ++k)
      out[k] += t * parts.theta_star[k];
  }
  return out;
}

//! m_tau(z): m(z) + t_tau for cases 1-3, m(z) + t_tau * m_star(z) for 4-6.
inline double m_tau(const DgpSpec& spec, std::span<const double> z)
{
  const double t = t3_quantile(spec.tau);
  const double m = m_case(base_case(spec.case_id), z);
  if (spec.case_id <= 3)
    return m + t;
  return m + t * sigma1_parts(spec.case_id, z, spec.literal_x1_doubling).m_star;
}

//! Conditional tau-quantile of y given (x, z).
inline double true_quantile(const DgpSpec& spec, std::span<const double> x,
                            std::span<const double> z)
{
  if (x.size() != kXDim)
    throw DimensionError("true_quantile expects 2 x coordinates");
  return dot(x, theta_tau(spec)) + m_tau(spec, z);
}

// ---------------------------------------------------------------------------
// data generation

//! Splits 12 copula columns into x (n x 2) and z (n x 10).
inline std::pair<Matrix, Matrix> make_covariates(const Matrix& draws)
{
  if (draws.cols() != kCovariates)
    throw DimensionError("make_covariates: expected 12 columns");
  Matrix x(draws.rows(), kXDim);
  Matrix z(draws.rows(), kZDim);
  for (std::size_t i = 0; i < draws.rows(); ++i) {
    for (std::size_t k = 0; k < kZDim; ++k)
      z(i, k) = draws(i, k);
    x(i, 0) = draws(i, 10) > 1.0 ? 1.0 : 0.0;
    x(i, 1) = draws(i, 11);
  }
  return {std::move(x), std::move(z)};
}

//! Builds y = x'theta + m(z) + sigma1(x, z) * eps from given covariates and errors.
inline Dataset assemble(const DgpSpec& spec, const Matrix& draws, std::span<const double> eps)
{
  spec.validate();
  if (eps.size() != draws.rows())
    throw DimensionError("assemble: error vector length mismatch");
  auto [x, z] = make_covariates(draws);
  Vector y(draws.rows());
  const int mc = base_case(spec.case_id);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double scale =
      spec.case_id > 3 ? sigma1_case(spec.case_id, x.row(i), z.row(i), spec.literal_x1_doubling)
                       : 1.0;
    y[i] = dot(x.row(i), spec.theta) + m_case(mc, z.row(i)) + scale * eps[i];
  }
  return Dataset{std::move(y), std::move(x), std::move(z)};
}

inline Dataset generate(const DgpSpec& spec, Rng& rng)
{
  spec.validate();
  const Matrix draws = sample_copula(spec.n, kCovariates, spec.rho, rng);
  const Vector eps = sample_t3(spec.n, rng);
  return assemble(spec, draws, eps);
}

// ---------------------------------------------------------------------------
// metrics

//! Relative squared error sum (mhat - m)^2 / sum m^2.
inline double rmse_m(std::span<const double> m_hat, std::span<const double> m_true)
{
  if (m_hat.size() != m_true.size())
    throw DimensionError("rmse_m: length mismatch");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < m_hat.size(); ++i) {
    num += (m_hat[i] - m_true[i]) * (m_hat[i] - m_true[i]);
    den += m_true[i] * m_true[i];
  }
  if (!(den > 0.0))
    throw DataError("rmse_m: true function is identically zero");
  return num / den;
}

inline double mspe(std::span<const double> y_hat, std::span<const double> y)
{
  if (y_hat.size() != y.size())
    throw DimensionError("mspe: length mismatch");
  if (y.empty())
    throw DataError("mspe: empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i)
    s += (y_hat[i] - y[i]) * (y_hat[i] - y[i]);
  return s / static_cast<double>(y.size());
}

} // namespace dplqr::sim
