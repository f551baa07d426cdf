#pragma once

#include <functional>
#include <utility>
#include <vector>

namespace usf {

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre recurrence (no tabulated constants).
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussRule gauss_legendre(int n);

/// Adaptive integration of f on [a, b] to absolute tolerance abs_tol.
/// Embedded GL7/GL15 pair with interval bisection; integrands here are smooth
/// apart from isolated kinks, which bisection isolates.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-12);

}  // namespace usf
