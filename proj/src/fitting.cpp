#include "usf/fitting.hpp"

#include <cmath>
#include <stdexcept>

namespace usf {

FitResult fit_exponential(const std::vector<double>& t, const std::vector<double>& y,
                          double window_fraction) {
  if (t.size() != y.size()) throw std::invalid_argument("fit_exponential: size mismatch");
  if (!(window_fraction > 0.0 && window_fraction <= 1.0))
    throw std::invalid_argument("fit_exponential: window fraction must be in (0, 1]");
  const std::size_t n = t.size();
  const std::size_t m = std::max<std::size_t>(2, static_cast<std::size_t>(std::lround(window_fraction * n)));
  if (m > n) throw std::invalid_argument("fit_exponential: need at least two samples");
  const std::size_t i0 = n - m;

  double st = 0, sl = 0, stt = 0, stl = 0;
  for (std::size_t i = i0; i < n; ++i) {
    if (!(y[i] > 0.0))
      throw std::invalid_argument("fit_exponential: nonpositive value in fit window");
    const double l = std::log(y[i]);
    st += t[i];
    sl += l;
    stt += t[i] * t[i];
    stl += t[i] * l;
  }
  const double nw = static_cast<double>(m);
  const double denom = nw * stt - st * st;
  if (denom == 0.0) throw std::invalid_argument("fit_exponential: degenerate time grid");
  const double slope = (nw * stl - st * sl) / denom;
  const double icept = (sl - slope * st) / nw;

  double ss_res = 0, ss_tot = 0;
  const double mean_l = sl / nw;
  for (std::size_t i = i0; i < n; ++i) {
    const double l = std::log(y[i]);
    const double fit = icept + slope * t[i];
    ss_res += (l - fit) * (l - fit);
    ss_tot += (l - mean_l) * (l - mean_l);
  }

  FitResult out;
  out.rate = -slope;
  out.intercept = std::exp(icept);
  // a numerically constant series is a perfect fit, not a degenerate one
  const double tot_floor = 1e-18 * nw * (1.0 + mean_l * mean_l);
  out.r2 = ss_tot > tot_floor ? 1.0 - ss_res / ss_tot : 1.0;
  out.low_r2_warning = out.r2 < 0.8;
  return out;
}

}  // namespace usf
