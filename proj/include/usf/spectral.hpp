#pragma once

#include <array>
#include <complex>
#include <vector>

#include "usf/linalg.hpp"

namespace usf {

/// Shear rate alpha, kernel constant b0, and the energy growth exponent beta,
/// where beta is the positive root of 2*beta*(2*b0+2*beta)^2 = 4*b0*alpha^2/3.
struct ShearParams {
  double alpha = 0.0;
  double b0 = 0.0;
  double beta = 0.0;
};

double beta_cubic_residual(double beta, double alpha, double b0);

/// Unique root in [0, alpha^2/(6 b0)]; Newton with bisection fallback.
/// Returns 0 for alpha = 0. Throws on non-convergence or b0 <= 0.
double solve_beta(double alpha, double b0);

ShearParams make_shear_params(double alpha, double b0);

/// A_alpha = 2*beta*I + [[0, 2a, 0], [0, 2b0, a], [-2b0/3, 0, 2b0]],
/// acting on U = (energy, d12, d22) of the zero-frequency perturbation.
Mat3 build_matrix(const ShearParams& params);

/// Spectrum of a general real 3x3 matrix via its characteristic cubic
/// (numeric coefficients, one bisected real root, deflated quadratic).
/// Serves as the generic cross-check for the analytic eigensystem.
std::array<std::complex<double>, 3> spectrum_from_matrix(const Mat3& a);

/// lambda1 = 0 with kernel vector q1; lambda2/3 = 2b0+3beta +- i*sqrt(4 b0 beta + 3 beta^2).
struct EigenSystem {
  ShearParams params;
  std::array<std::complex<double>, 3> lambda;  // {0, lambda2, conj(lambda2)}
  CMat3 Q;      // eigenvectors as columns
  CMat3 Q_inv;
  double spectral_gap = 0.0;  // Re(lambda2)

  Vec3 kernel_vector() const;  // real q1
  double condition() const;    // ||Q|| ||Q^-1|| (Frobenius)
};

/// Analytic eigensystem, verified against spectrum_from_matrix to 1e-10 and
/// against reassembly Q diag Q^-1 = A. Throws if verification fails.
EigenSystem eigensystem(const Mat3& a, const ShearParams& params);

/// S(t) = exp(-t A) from the eigendecomposition. t >= 0.
Mat3 semigroup(const EigenSystem& eig, double t);

/// Rank-1 projector S(inf) = Q diag(1,0,0) Q^-1 onto the kernel of A.
Mat3 limit_semigroup(const EigenSystem& eig);

/// Sampled source series R(t_k) for the Duhamel integral. The first component
/// is identically zero (the energy row has no collision source).
struct SourceSeries {
  std::vector<double> t;
  std::vector<Vec3> R;

  void validate(double b0) const;  // monotone grid, R1 == 0, step <= 0.05/b0
};

/// U(t) = S(t) U0 + int_0^t S(t-s) R(s) ds, trapezoid on the sampled grid.
/// t must lie within the sampled range.
Vec3 predict_U(const EigenSystem& eig, const Vec3& U0, const SourceSeries& source, double t);

/// U(inf) = S(inf) [U0 + int_0^inf R], with the tail beyond the last sample
/// integrated from an exponential fit to ||R|| on the trailing 20% of samples.
/// Throws if the fitted tail does not decay. Optionally reports the fitted rate.
Vec3 predict_U_infinity(const EigenSystem& eig, const Vec3& U0, const SourceSeries& source,
                        double* fitted_tail_rate = nullptr);

}  // namespace usf
