#pragma once

#include <utility>
#include <vector>

#include "usf/linalg.hpp"
#include "usf/rng.hpp"

namespace usf {

enum class KernelFamily {
  GradCutoff,      // B0(z) = c |z|
  Constant,        // B0(z) = c
  EvenPolynomial,  // B0(z) = sum_m c_m z^{2m}, all c_m >= 0
};

/// Angular collision kernel B0(z), z = cos(theta). All supported families are
/// nonnegative on [-1, 1] and bounded, so the Grad cutoff holds.
struct KernelSpec {
  KernelFamily family = KernelFamily::GradCutoff;
  std::vector<double> coeffs{1.0};

  double angular(double z) const;
  double max_angular() const;  // sup of B0 on [-1, 1]
  bool is_zero() const;
  void validate() const;  // throws std::invalid_argument on bad coefficients
};

/// Derived kernel constants. sigma_T is the total angular mass
/// integral of B0 over the sphere; nu0 equals sigma_T because the reference
/// Maxwellian has unit mass; b0 is the second-moment relaxation constant.
struct CollisionConstants {
  double sigma_T = 0.0;
  double nu0 = 0.0;
  double b0 = 0.0;

  bool degenerate() const { return sigma_T <= 0.0; }
};

/// Closed-form constants (every supported family admits them).
CollisionConstants derive_constants(const KernelSpec& kernel);

/// Same constants via adaptive quadrature; kept as an independent route for
/// verification against the closed forms.
CollisionConstants derive_constants_quadrature(const KernelSpec& kernel);

/// Scattering direction omega on S^2 with density B0(uhat.omega)/sigma_T.
/// uhat must be unit length; degenerate kernels are rejected.
Vec3 sample_omega(const KernelSpec& kernel, const Vec3& uhat, RngStream& rng);

/// Elastic two-body collision map. Defined for all inputs;
/// identity when omega is orthogonal to the relative velocity.
std::pair<Vec3, Vec3> post_collision(const Vec3& v, const Vec3& v_star, const Vec3& omega);

}  // namespace usf
