#include "usf/kernel.hpp"

#include <cmath>
#include <stdexcept>

#include "usf/quadrature.hpp"

namespace usf {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double KernelSpec::angular(double z) const {
  switch (family) {
    case KernelFamily::GradCutoff:
      return coeffs.empty() ? 0.0 : coeffs[0] * std::abs(z);
    case KernelFamily::Constant:
      return coeffs.empty() ? 0.0 : coeffs[0];
    case KernelFamily::EvenPolynomial: {
      // coeffs[m] multiplies z^{2m}
      double z2 = z * z, p = 1.0, s = 0.0;
      for (double c : coeffs) {
        s += c * p;
        p *= z2;
      }
      return s;
    }
  }
  return 0.0;
}

double KernelSpec::max_angular() const {
  switch (family) {
    case KernelFamily::GradCutoff:
    case KernelFamily::Constant:
      return coeffs.empty() ? 0.0 : coeffs[0];
    case KernelFamily::EvenPolynomial: {
      // all coefficients nonnegative, so the sup is at |z| = 1
      double s = 0.0;
      for (double c : coeffs) s += c;
      return s;
    }
  }
  return 0.0;
}

bool KernelSpec::is_zero() const {
  for (double c : coeffs)
    if (c != 0.0) return false;
  return true;
}

void KernelSpec::validate() const {
  if (coeffs.empty()) throw std::invalid_argument("KernelSpec: no coefficients");
  for (double c : coeffs) {
    if (!(c >= 0.0)) throw std::invalid_argument("KernelSpec: coefficients must be nonnegative");
  }
  if ((family == KernelFamily::GradCutoff || family == KernelFamily::Constant) && coeffs.size() != 1)
    throw std::invalid_argument("KernelSpec: this family takes exactly one amplitude");
}

CollisionConstants derive_constants(const KernelSpec& kernel) {
  kernel.validate();
  CollisionConstants out;
  switch (kernel.family) {
    case KernelFamily::GradCutoff: {
      const double c = kernel.coeffs[0];
      out.sigma_T = 2.0 * kPi * c;       // 2*pi*c * int_{-1}^{1} |z| dz = 2*pi*c
      out.b0 = 0.5 * kPi * c;            // 3*pi*c * 2 * (1/4 - 1/6) = pi*c/2
      break;
    }
    case KernelFamily::Constant: {
      const double c = kernel.coeffs[0];
      out.sigma_T = 4.0 * kPi * c;
      out.b0 = 4.0 * kPi * c / 5.0;      // 3*pi*c * 4/15
      break;
    }
    case KernelFamily::EvenPolynomial: {
      double st = 0.0, b = 0.0;
      for (std::size_t m = 0; m < kernel.coeffs.size(); ++m) {
        const double c = kernel.coeffs[m];
        st += c * 2.0 / (2.0 * m + 1.0);
        b += c * (2.0 / (2.0 * m + 3.0) - 2.0 / (2.0 * m + 5.0));
      }
      out.sigma_T = 2.0 * kPi * st;
      out.b0 = 3.0 * kPi * b;
      break;
    }
  }
  out.nu0 = out.sigma_T;
  return out;
}

CollisionConstants derive_constants_quadrature(const KernelSpec& kernel) {
  kernel.validate();
  auto b0fn = [&](double z) { return kernel.angular(z); };
  auto b0mom = [&](double z) { return kernel.angular(z) * z * z * (1.0 - z * z); };
  // split at 0: GradCutoff has a kink there
  const double tol = 1e-13;
  CollisionConstants out;
  out.sigma_T = 2.0 * kPi * (integrate(b0fn, -1.0, 0.0, tol) + integrate(b0fn, 0.0, 1.0, tol));
  out.b0 = 3.0 * kPi * (integrate(b0mom, -1.0, 0.0, tol) + integrate(b0mom, 0.0, 1.0, tol));
  out.nu0 = out.sigma_T;
  return out;
}

namespace {

// Orthonormal frame completing uhat; uses the least-aligned coordinate axis.
void make_frame(const Vec3& u, Vec3& e1, Vec3& e2) {
  int a = 0;
  if (std::abs(u[1]) < std::abs(u[a])) a = 1;
  if (std::abs(u[2]) < std::abs(u[a])) a = 2;
  Vec3 t{0.0, 0.0, 0.0};
  t[a] = 1.0;
  e1 = cross(u, t);
  const double n = norm(e1);
  e1 = (1.0 / n) * e1;
  e2 = cross(u, e1);
}

double sample_cosine(const KernelSpec& kernel, RngStream& rng) {
  switch (kernel.family) {
    case KernelFamily::GradCutoff: {
      // density |z| on [-1,1]: exact inverse CDF in |z|, symmetric sign
      const double z = std::sqrt(rng.uniform());
      return rng.uniform() < 0.5 ? -z : z;
    }
    case KernelFamily::Constant:
      return 2.0 * rng.uniform() - 1.0;
    case KernelFamily::EvenPolynomial: {
      const double m = kernel.max_angular();
      for (;;) {
        const double z = 2.0 * rng.uniform() - 1.0;
        if (rng.uniform() * m <= kernel.angular(z)) return z;
      }
    }
  }
  return 0.0;
}

}  // namespace

Vec3 sample_omega(const KernelSpec& kernel, const Vec3& uhat, RngStream& rng) {
  if (kernel.is_zero()) throw std::invalid_argument("sample_omega: degenerate (zero) kernel");
  if (std::abs(norm(uhat) - 1.0) > 1e-9)
    throw std::invalid_argument("sample_omega: direction must be unit length");
  const double z = sample_cosine(kernel, rng);
  const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
  const double phi = 2.0 * kPi * rng.uniform();
  Vec3 e1, e2;
  make_frame(uhat, e1, e2);
  return z * uhat + (s * std::cos(phi)) * e1 + (s * std::sin(phi)) * e2;
}

std::pair<Vec3, Vec3> post_collision(const Vec3& v, const Vec3& v_star, const Vec3& omega) {
  const double h = dot(v_star - v, omega);
  return {v + h * omega, v_star - h * omega};
}

}  // namespace usf
