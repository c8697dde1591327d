#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the code path it is used to check.

#include <dplqr/densemath.hpp>
#include <dplqr/network.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace oracle {

//! Student t3 density.
inline double t3_density(double t)
{
  const double c = 2.0 / (std::numbers::pi * std::sqrt(3.0));
  return c / std::pow(1.0 + t * t / 3.0, 2.0);
}

//! P(T <= x) by composite Simpson integration of the density from 0.
inline double t3_cdf_by_quadrature(double x, int panels = 20000)
{
  const double h = x / panels;
  double s = t3_density(0.0) + t3_density(x);
  for (int i = 1; i < panels; ++i)
    s += (i % 2 ? 4.0 : 2.0) * t3_density(i * h);
  return 0.5 + s * h / 3.0;
}

//! Root of t3_cdf_by_quadrature(x) = p by secant iteration.
inline double t3_quantile_by_quadrature(double p)
{
  double a = 0.5;
  double b = 1.5;
  double fa = t3_cdf_by_quadrature(a) - p;
  double fb = t3_cdf_by_quadrature(b) - p;
  for (int it = 0; it < 60 && std::abs(fb) > 1e-14; ++it) {
    const double c = b - fb * (b - a) / (fb - fa);
    a = b;
    fa = fb;
    b = c;
    fb = t3_cdf_by_quadrature(b) - p;
  }
  return b;
}

inline double pinball(double t, double tau) { return t >= 0 ? tau * t : (tau - 1.0) * t; }

//! Empirical tau-quantile as an order statistic: the ceil(n*tau)-th smallest.
inline double order_statistic_quantile(std::vector<double> v, double tau)
{
  std::sort(v.begin(), v.end());
  auto k = static_cast<std::size_t>(std::ceil(tau * static_cast<double>(v.size())));
  k = std::clamp<std::size_t>(k, 1, v.size());
  return v[k - 1];
}

//! Minimum over a fine theta grid of the mean pinball loss of
//! y - theta*x - b, with b optimal (a quantile of y - theta*x) for each theta.
struct LinearArgmin
{
  double theta;
  double intercept;
  double loss;
};

inline double mean_pinball(const std::vector<double>& r, double tau)
{
  double s = 0;
  for (double e : r)
    s += pinball(e, tau);
  return s / static_cast<double>(r.size());
}

inline LinearArgmin brute_force_lqr(const std::vector<double>& x, const std::vector<double>& y,
                                    double tau, double lo, double hi, int steps)
{
  LinearArgmin best{0, 0, HUGE_VAL};
  for (int s = 0; s <= steps; ++s) {
    const double th = lo + (hi - lo) * s / steps;
    std::vector<double> r(y.size());
    for (std::size_t i = 0; i < y.size(); ++i)
      r[i] = y[i] - th * x[i];
    // intercept: try every data point shift (the optimum sits at one)
    std::vector<double> cand = r;
    std::sort(cand.begin(), cand.end());
    for (double b : cand) {
      std::vector<double> rr(r.size());
      for (std::size_t i = 0; i < r.size(); ++i)
        rr[i] = r[i] - b;
      const double l = mean_pinball(rr, tau);
      if (l < best.loss)
        best = {th, b, l};
    }
  }
  return best;
}

//! Naive forward pass written directly from the layer recursion.
inline double naive_forward(const dplqr::NetworkParams& p, const std::vector<double>& z)
{
  std::vector<double> a = z;
  for (std::size_t k = 0; k < p.layers.size(); ++k) {
    const auto& w = p.layers[k];
    std::vector<double> out(w.rows());
    for (std::size_t i = 0; i < w.rows(); ++i) {
      double s = w(i, w.cols() - 1);
      for (std::size_t j = 0; j + 1 < w.cols(); ++j)
        s += w(i, j) * a[j];
      out[i] = (k + 1 < p.layers.size()) ? std::max(s, 0.0) : s;
    }
    a = out;
  }
  return a[0];
}

//! Smallest |pre-activation| over all hidden units for input z.
inline double min_abs_preactivation(const dplqr::NetworkParams& p, const std::vector<double>& z)
{
  double m = HUGE_VAL;
  std::vector<double> a = z;
  for (std::size_t k = 0; k + 1 < p.layers.size(); ++k) {
    const auto& w = p.layers[k];
    std::vector<double> out(w.rows());
    for (std::size_t i = 0; i < w.rows(); ++i) {
      double s = w(i, w.cols() - 1);
      for (std::size_t j = 0; j + 1 < w.cols(); ++j)
        s += w(i, j) * a[j];
      m = std::min(m, std::abs(s));
      out[i] = std::max(s, 0.0);
    }
    a = out;
  }
  return m;
}

} // namespace oracle
