#include "usf/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace usf {

GaussRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double pi = 3.14159265358979323846;
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      // Legendre recurrence for P_n(x) and P_n'(x).
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

namespace {

double apply_rule(const GaussRule& r, const std::function<double(double)>& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double hw = 0.5 * (b - a);
  double s = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * f(mid + hw * r.nodes[i]);
  return hw * s;
}

double integrate_rec(const std::function<double(double)>& f, double a, double b, double tol,
                     const GaussRule& lo, const GaussRule& hi, int depth) {
  const double coarse = apply_rule(lo, f, a, b);
  const double fine = apply_rule(hi, f, a, b);
  const double err = std::abs(fine - coarse);
  if (err <= tol || depth > 48) return fine;
  const double mid = 0.5 * (a + b);
  return integrate_rec(f, a, mid, 0.5 * tol, lo, hi, depth + 1) +
         integrate_rec(f, mid, b, 0.5 * tol, lo, hi, depth + 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol) {
  static const GaussRule lo = gauss_legendre(7);
  static const GaussRule hi = gauss_legendre(15);
  if (a == b) return 0.0;
  return integrate_rec(f, a, b, abs_tol, lo, hi, 0);
}

}  // namespace usf
