#pragma once

#include <cstddef>
#include <vector>

#include "usf/kernel.hpp"
#include "usf/linalg.hpp"
#include "usf/rng.hpp"
#include "usf/spectral.hpp"

namespace usf {

enum class ProfileOrder { Maxwellian = 0, FirstOrder = 1 };

/// Shear-deformed velocity profile G(v) = mu(v) (1 - alpha/(2 b0) v1 v2) at
/// first order, or the plain Maxwellian at order zero.
struct ProfileSpec {
  double alpha = 0.0;
  ProfileOrder order = ProfileOrder::Maxwellian;
  CollisionConstants constants;
  double truncation_radius = 8.0;

  void validate() const;
};

/// Standard Maxwellian (2 pi)^{-3/2} exp(-|v|^2/2).
double maxwellian_density(const Vec3& v);

/// Profile density; the first-order correction can go negative far out in
/// velocity, the sampler works with the positive part.
double profile_density(const ProfileSpec& spec, const Vec3& v);

/// Exact steady second moments of the profile: energy 3, d12 = -3 beta/alpha,
/// d22 = 6 beta (b0 + beta)/alpha^2; the alpha -> 0 limit (3, 0, 1) is used
/// at alpha = 0. This vector spans the kernel of the moment matrix.
struct SteadyMoments {
  double energy = 3.0;
  double d12 = 0.0;
  double d22 = 1.0;

  Vec3 as_vec() const { return {energy, d12, d22}; }
};

SteadyMoments steady_moments(const ShearParams& params);

/// i.i.d. samples from the normalized positive part of the profile density,
/// rejection from the truncated Maxwellian. Throws when alpha is too large
/// for the first-order sampler to stay efficient.
std::vector<Vec3> sample_profile(const ProfileSpec& spec, std::size_t n, RngStream& rng);

}  // namespace usf
