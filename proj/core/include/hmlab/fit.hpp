#pragma once

#include <span>

namespace hmlab {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
  bool conclusive = false;  // r2 >= 0.9 and >= 3 points
};

// Least squares y = slope x + intercept.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);
// Fit of log y against log x; non-positive entries are skipped.
LinearFit fit_loglog(std::span<const double> x, std::span<const double> y);

}  // namespace hmlab
