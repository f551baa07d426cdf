#pragma once

#include <cstddef>
#include <vector>

#include "usf/kernel.hpp"
#include "usf/linalg.hpp"
#include "usf/rng.hpp"

namespace usf {

/// Mass, momentum, and raw second moments <f, v_i v_j> of a (possibly signed)
/// velocity distribution.
struct DistributionMoments {
  double mass = 0.0;
  Vec3 momentum{0.0, 0.0, 0.0};
  Mat3 second = mat3_zero();

  double energy() const { return second[0][0] + second[1][1] + second[2][2]; }
};

/// Weighted Gaussian component; covariance must be symmetric positive definite.
struct GaussianTestDistribution {
  double mass = 1.0;
  Vec3 mean{0.0, 0.0, 0.0};
  Mat3 cov = mat3_identity();

  DistributionMoments moments() const;
  Mat3 cholesky() const;  // throws on non-SPD covariance
};

struct GaussianMixture {
  std::vector<GaussianTestDistribution> components;

  double total_mass() const;
  DistributionMoments moments() const;
};

/// Closed-form quadratic collision transfer
/// T_ij(v, v*) = -b0 [ (v-v*)_i (v-v*)_j - delta_ij |v-v*|^2 / 3 ].
double t_ij_closed(const Vec3& v, const Vec3& v_star, int i, int j, double b0);

/// The same quantity from its defining spherical integral
/// (1/2) int B0(cos theta) [W(v') + W(v*') - W(v) - W(v*)] domega,
/// by product quadrature (>= 64 nodes per direction). Oracle for t_ij_closed.
double t_ij_quadrature(const Vec3& v, const Vec3& v_star, int i, int j, const KernelSpec& kernel);

/// <Q(f, f), v_i v_j> as an exact bilinear form in the moments of f:
///   off-diagonal: -2 b0 [ <f,v_i v_j><f,1> - <f,v_i><f,v_j> ]
///   diagonal:     -2 b0 [ <f,v_i v_i - |v|^2/3><f,1> - <f,v_i>^2 + (1/3) sum_j <f,v_j>^2 ]
/// The momentum terms carry the sign forced by the T_ij contraction; shifted
/// Maxwellians then evaluate to zero as collisional equilibria require.
double q_moment(const DistributionMoments& f, int i, int j, double b0);

/// <Q_sym(f, G), v_i v_j> for a profile G with zero momentum (rejected
/// otherwise): -2 b0 [ <f,v_i v_j><G,1> + <f,1><G,v_i v_j> ] off-diagonal and
/// the trace-free analogue on the diagonal.
double qsym_moment_G(const DistributionMoments& f, const DistributionMoments& g, int i, int j,
                     double b0);

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_pairs = 0;
};

/// Monte Carlo oracle for <Q(f, f), v_i v_j> = int int f f* T_ij dv dv*:
/// mass^2 times the mean of T_ij over i.i.d. pairs drawn from f/mass, with
/// antithetic reflection about each component mean and a jackknife standard
/// error over batches.
McEstimate mc_collision_moment_oracle(const GaussianMixture& f, const KernelSpec& kernel, int i,
                                      int j, std::size_t n_pairs, RngStream& rng);

/// Relaxation rate implied by q_moment on a pure d12 perturbation of the
/// Maxwellian; equals 2 b0 identically (semantic guard for the closure).
double relaxation_rate_check(const KernelSpec& kernel, double eps = 1e-3);

}  // namespace usf
