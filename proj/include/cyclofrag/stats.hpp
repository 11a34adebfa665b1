#pragma once

#include <span>

namespace cyclofrag::stats {

// Standard normal CDF.
double norm_cdf(double x);

// Standard normal quantile function for p in (0,1), Wichura's AS 241
// (PPND16, ~1e-15 absolute accuracy). Out-of-range p throws.
double norm_ppf(double p);

// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
// Series expansion for x < a+1, continued fraction otherwise; converged
// to ~1e-12 relative.
double lower_gamma_regularized(double a, double x);

// Linear-interpolation quantile on an ascending sample (the common
// "type 7" plotting rule: position h = (n-1)p on the 0-based sample).
double quantile_type7(std::span<const double> sorted, double p);

}  // namespace cyclofrag::stats
