#ifndef DIMED_NORMAL_HPP
#define DIMED_NORMAL_HPP

namespace dimed {

// Standard normal density.
double normal_pdf(double x);

// Standard normal cumulative distribution function.
double normal_cdf(double x);

// Inverse of the standard normal CDF (Wichura's AS 241, double precision).
// Throws InvalidInput unless 0 < p < 1.
double normal_quantile(double p);

}  // namespace dimed

#endif  // DIMED_NORMAL_HPP
