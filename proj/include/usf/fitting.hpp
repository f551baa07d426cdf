#pragma once

#include <cstddef>
#include <vector>

namespace usf {

struct FitResult {
  double rate = 0.0;       // positive for decaying series
  double intercept = 0.0;  // value of the fit at t = 0
  double r2 = 1.0;
  bool low_r2_warning = false;  // set when r2 < 0.8
};

/// Least squares of log(y) against t over the trailing `window_fraction` of
/// the samples. All y values in the window must be positive.
FitResult fit_exponential(const std::vector<double>& t, const std::vector<double>& y,
                          double window_fraction = 0.5);

}  // namespace usf
