#pragma once

#include <cstddef>
#include <vector>

namespace polychain::stats {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double max_residual = 0.0;
};

/// Ordinary least squares y = intercept + slope·x.
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

struct MeanError {
  double mean = 0.0;
  double std_error = 0.0;
  double std_dev = 0.0;
  std::size_t n = 0;
};

/// Sample mean with standard error (n-1 denominator).
MeanError mean_error(const std::vector<double>& xs);

/// Mean with error from `batches` contiguous batch means (single long series).
MeanError batch_means(const std::vector<double>& xs, std::size_t batches = 32);

/// Empirical quantile with linear interpolation (type 7).
double quantile(std::vector<double> xs, double q);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Wilson score interval for k successes in n trials at normal quantile z.
Interval wilson(std::size_t k, std::size_t n, double z = 1.959963984540054);

}  // namespace polychain::stats
