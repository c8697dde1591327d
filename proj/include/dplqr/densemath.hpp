#pragma once

#include "error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace dplqr {

using Vector = std::vector<double>;

//! Dense row-major matrix. Only the handful of operations the estimator
//! needs are provided; this is not a general linear algebra library.
class Matrix
{
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double value = 0.0)
    : rows_(rows)
    , cols_(cols)
    , data_(rows * cols, value)
  {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows)
    , cols_(cols)
    , data_(std::move(entries))
  {
    if (data_.size() != rows * cols) {
      throw DimensionError("matrix entries: expected " +
                           std::to_string(rows * cols) + ", got " +
                           std::to_string(data_.size()));
    }
  }

  static Matrix identity(std::size_t n)
  {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
      m(i, i) = 1.0;
    return m;
  }

  static Matrix diagonal(std::span<const double> d)
  {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i)
      m(i, i) = d[i];
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return rows_ == 0; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const
  {
    return data_[i * cols_ + j];
  }

  std::span<double> row(std::size_t i)
  {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<const double> row(std::size_t i) const
  {
    return {data_.data() + i * cols_, cols_};
  }

  std::vector<double>& entries() noexcept { return data_; }
  const std::vector<double>& entries() const noexcept { return data_; }

  Vector column(std::size_t j) const
  {
    Vector c(rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      c[i] = (*this)(i, j);
    return c;
  }

  //! Rows selected by `idx`, in that order.
  Matrix select_rows(std::span<const std::size_t> idx) const
  {
    Matrix out(idx.size(), cols_);
    for (std::size_t r = 0; r < idx.size(); ++r)
      std::copy_n(data_.begin() + idx[r] * cols_, cols_, out.data_.begin() + r * cols_);
    return out;
  }

  bool operator==(const Matrix&) const = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline Vector select(std::span<const double> v, std::span<const std::size_t> idx)
{
  Vector out(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r)
    out[r] = v[idx[r]];
  return out;
}

inline double dot(std::span<const double> a, std::span<const double> b)
{
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += a[i] * b[i];
  return s;
}

//! Row-wise product, each row accumulated left to right.
inline Vector matvec(const Matrix& m, std::span<const double> v)
{
  if (m.cols() != v.size()) {
    throw DimensionError("matvec: matrix has " + std::to_string(m.cols()) +
                         " columns, vector has " + std::to_string(v.size()));
  }
  Vector out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    out[i] = dot(m.row(i), v);
  return out;
}

inline Matrix matmul(const Matrix& a, const Matrix& b)
{
  if (a.cols() != b.rows())
    throw DimensionError("matmul: inner dimensions differ");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j)
        out(i, j) += aik * b(k, j);
    }
  return out;
}

//! Inverse of a small symmetric positive definite matrix via Cholesky.
//! Throws SingularMatrixError naming the first non-positive pivot.
inline Matrix sym_inverse(const Matrix& m)
{
  const std::size_t n = m.rows();
  if (m.cols() != n)
    throw DimensionError("sym_inverse: matrix is not square");

  // lower factor L with m = L L^T
  Matrix chol(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = m(j, j);
    for (std::size_t k = 0; k < j; ++k)
      d -= chol(j, k) * chol(j, k);
    // pivots lost to cancellation count as zero
    if (!(d > 1e-12 * std::abs(m(j, j))) || !std::isfinite(d)) {
      throw SingularMatrixError(j, "sym_inverse: non-positive pivot at index " +
                                     std::to_string(j));
    }
    chol(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k)
        s -= chol(i, k) * chol(j, k);
      chol(i, j) = s / chol(j, j);
    }
  }

  // L^{-1} by forward substitution, then m^{-1} = L^{-T} L^{-1}
  Matrix linv(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t i = c; i < n; ++i) {
      double s = (i == c) ? 1.0 : 0.0;
      for (std::size_t k = c; k < i; ++k)
        s -= chol(i, k) * linv(k, c);
      linv(i, c) = s / chol(i, i);
    }
  }
  Matrix inv(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double s = 0.0;
      for (std::size_t k = i; k < n; ++k)
        s += linv(k, i) * linv(k, j);
      inv(i, j) = s;
      inv(j, i) = s;
    }
  return inv;
}

// ---------------------------------------------------------------------------
// sample statistics

inline double mean(std::span<const double> v)
{
  if (v.empty())
    throw DataError("mean of empty sample");
  double s = 0.0;
  for (double x : v)
    s += x;
  return s / static_cast<double>(v.size());
}

inline double sample_variance(std::span<const double> v)
{
  if (v.size() < 2)
    throw DataError("sample variance needs at least 2 values");
  const double mu = mean(v);
  double s = 0.0;
  for (double x : v)
    s += (x - mu) * (x - mu);
  return s / static_cast<double>(v.size() - 1);
}

inline double sample_sd(std::span<const double> v)
{
  return std::sqrt(sample_variance(v));
}

//! Linear-interpolation quantile of a sorted sample (R type 7):
//! h = (n-1)p, interpolate between order statistics floor(h) and floor(h)+1.
inline double quantile_sorted(std::span<const double> sorted, double p)
{
  if (sorted.empty())
    throw DataError("quantile of empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline double quantile(std::span<const double> v, double p)
{
  Vector s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  return quantile_sorted(s, p);
}

inline double sample_iqr(std::span<const double> v)
{
  if (v.size() < 2)
    throw DataError("IQR needs at least 2 values");
  Vector s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  return quantile_sorted(s, 0.75) - quantile_sorted(s, 0.25);
}

// ---------------------------------------------------------------------------
// standard normal distribution

inline double normal_pdf(double x)
{
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

inline double normal_cdf(double x)
{
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

//! Inverse standard normal CDF. Acklam's rational approximation
//! (relative error < 1.2e-9) followed by one Halley step against erfc,
//! which brings the result to near machine precision.
inline double normal_quantile(double p)
{
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0)
      return -HUGE_VAL;
    if (p == 1.0)
      return HUGE_VAL;
    throw DataError("normal_quantile: probability outside [0,1]");
  }
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

} // namespace dplqr
