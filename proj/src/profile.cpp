#include "usf/profile.hpp"

#include <cmath>
#include <stdexcept>

namespace usf {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void ProfileSpec::validate() const {
  if (alpha < 0.0) throw std::invalid_argument("ProfileSpec: alpha must be nonnegative");
  if (truncation_radius <= 0.0) throw std::invalid_argument("ProfileSpec: bad truncation radius");
  if (order == ProfileOrder::FirstOrder && constants.degenerate())
    throw std::invalid_argument("ProfileSpec: first order needs non-degenerate kernel constants");
}

double maxwellian_density(const Vec3& v) {
  return std::pow(2.0 * kPi, -1.5) * std::exp(-0.5 * norm2(v));
}

double profile_density(const ProfileSpec& spec, const Vec3& v) {
  spec.validate();
  const double mu = maxwellian_density(v);
  if (spec.order == ProfileOrder::Maxwellian || spec.alpha == 0.0) return mu;
  const double c = spec.alpha / (2.0 * spec.constants.b0);
  return mu * (1.0 - c * v[0] * v[1]);
}

SteadyMoments steady_moments(const ShearParams& params) {
  if (params.alpha < 0.0) throw std::invalid_argument("steady_moments: alpha must be nonnegative");
  SteadyMoments m;
  if (params.alpha == 0.0) return m;  // Maxwellian limit by continuity
  const double a = params.alpha, b0 = params.b0, beta = params.beta;
  m.energy = 3.0;
  m.d12 = -3.0 * beta / a;
  m.d22 = 6.0 * beta * (b0 + beta) / (a * a);
  return m;
}

std::vector<Vec3> sample_profile(const ProfileSpec& spec, std::size_t n, RngStream& rng) {
  spec.validate();
  const double r = spec.truncation_radius;
  const double r2 = r * r;

  std::vector<Vec3> out;
  out.reserve(n);

  auto draw_truncated_gaussian = [&]() {
    for (;;) {
      const Vec3 v = rng.normal3();
      if (norm2(v) <= r2) return v;  // discarded mass < 1e-12 at r = 8
    }
  };

  if (spec.order == ProfileOrder::Maxwellian || spec.alpha == 0.0) {
    for (std::size_t i = 0; i < n; ++i) out.push_back(draw_truncated_gaussian());
    return out;
  }

  const double c = spec.alpha / (2.0 * spec.constants.b0);
  // sup of (1 - c v1 v2) on |v| <= r is 1 + c r^2 / 2
  const double envelope = 1.0 + 0.5 * c * r2;
  if (1.0 / envelope < 0.25)
    throw std::invalid_argument(
        "sample_profile: alpha too large for first-order sampling (acceptance below 1/4)");

  for (std::size_t i = 0; i < n; ++i) {
    for (;;) {
      const Vec3 v = draw_truncated_gaussian();
      const double w = 1.0 - c * v[0] * v[1];
      if (w > 0.0 && rng.uniform() * envelope <= w) {
        out.push_back(v);
        break;
      }
    }
  }
  return out;
}

}  // namespace usf
