#pragma once

#include "error.hpp"

#include <span>
#include <string>

namespace dplqr {

//! A probability level strictly inside (0, 1).
class QuantileLevel
{
public:
  QuantileLevel(double tau)
    : tau_(tau)
  {
    if (!(tau > 0.0 && tau < 1.0))
      throw ConfigError("quantile level must lie in (0,1), got " + std::to_string(tau));
  }
  double value() const noexcept { return tau_; }
  operator double() const noexcept { return tau_; }

private:
  double tau_;
};

//! Check (pinball) loss t * (tau - 1{t < 0}).
inline double check_loss(double t, QuantileLevel tau) noexcept
{
  return t * (tau.value() - (t < 0.0 ? 1.0 : 0.0));
}

//! Derivative of check_loss(y - yhat) with respect to yhat, i.e.
//! -(tau - 1{residual < 0}). At residual == 0 the indicator is 0, giving -tau.
inline double loss_subgrad_wrt_pred(double residual, QuantileLevel tau) noexcept
{
  return -(tau.value() - (residual < 0.0 ? 1.0 : 0.0));
}

inline double mean_check_loss(std::span<const double> residuals, QuantileLevel tau)
{
  if (residuals.empty())
    throw DataError("mean_check_loss: empty residual vector");
  double s = 0.0;
  for (double r : residuals)
    s += check_loss(r, tau);
  return s / static_cast<double>(residuals.size());
}

} // namespace dplqr
