#include "usf/closure.hpp"

#include <cmath>
#include <stdexcept>

#include "usf/quadrature.hpp"

namespace usf {

namespace {
constexpr double kPi = 3.14159265358979323846;

void check_index(int i, int j) {
  if (i < 0 || i > 2 || j < 0 || j > 2)
    throw std::invalid_argument("moment index must be in {0, 1, 2}");
}
}  // namespace

DistributionMoments GaussianTestDistribution::moments() const {
  DistributionMoments m;
  m.mass = mass;
  m.momentum = mass * mean;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m.second[i][j] = mass * (cov[i][j] + mean[i] * mean[j]);
  return m;
}

Mat3 GaussianTestDistribution::cholesky() const {
  Mat3 l = mat3_zero();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = cov[i][j];
      for (int k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
      if (i == j) {
        if (!(s > 0.0))
          throw std::invalid_argument("GaussianTestDistribution: covariance not positive definite");
        l[i][i] = std::sqrt(s);
      } else {
        l[i][j] = s / l[j][j];
      }
    }
  }
  return l;
}

double GaussianMixture::total_mass() const {
  double m = 0.0;
  for (const auto& c : components) m += c.mass;
  return m;
}

DistributionMoments GaussianMixture::moments() const {
  DistributionMoments m;
  for (const auto& c : components) {
    const DistributionMoments cm = c.moments();
    m.mass += cm.mass;
    m.momentum += cm.momentum;
    m.second = mat_add(m.second, cm.second);
  }
  return m;
}

double t_ij_closed(const Vec3& v, const Vec3& v_star, int i, int j, double b0) {
  check_index(i, j);
  const Vec3 g = v - v_star;
  const double kron = (i == j) ? 1.0 : 0.0;
  return -b0 * (g[i] * g[j] - kron / 3.0 * norm2(g));
}

double t_ij_quadrature(const Vec3& v, const Vec3& v_star, int i, int j, const KernelSpec& kernel) {
  check_index(i, j);
  if (kernel.is_zero()) throw std::invalid_argument("t_ij_quadrature: degenerate kernel");
  const Vec3 g = v_star - v;
  const double gmag = norm(g);
  if (gmag == 0.0) return 0.0;  // collision map is the identity
  const Vec3 u = (1.0 / gmag) * g;

  // frame perpendicular to u
  int a = 0;
  if (std::abs(u[1]) < std::abs(u[a])) a = 1;
  if (std::abs(u[2]) < std::abs(u[a])) a = 2;
  Vec3 t{0, 0, 0};
  t[a] = 1.0;
  Vec3 e1 = cross(u, t);
  e1 = (1.0 / norm(e1)) * e1;
  const Vec3 e2 = cross(u, e1);

  static const GaussRule gz = gauss_legendre(64);
  const int n_phi = 64;  // equal-weight azimuth rule, exact for trig polynomials

  auto w_ij = [&](const Vec3& x) { return x[i] * x[j]; };
  double total = 0.0;
  // split [-1, 1] at the kink of |z|
  for (int half = 0; half < 2; ++half) {
    const double lo = half == 0 ? -1.0 : 0.0;
    const double hi = half == 0 ? 0.0 : 1.0;
    const double mid = 0.5 * (lo + hi), hw = 0.5 * (hi - lo);
    for (std::size_t iz = 0; iz < gz.nodes.size(); ++iz) {
      const double z = mid + hw * gz.nodes[iz];
      const double wz = hw * gz.weights[iz];
      const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double bz = kernel.angular(z);
      double phi_sum = 0.0;
      for (int ip = 0; ip < n_phi; ++ip) {
        const double phi = 2.0 * kPi * (ip + 0.5) / n_phi;
        const Vec3 omega = z * u + (s * std::cos(phi)) * e1 + (s * std::sin(phi)) * e2;
        const auto [vp, vsp] = post_collision(v, v_star, omega);
        phi_sum += w_ij(vp) + w_ij(vsp) - w_ij(v) - w_ij(v_star);
      }
      total += wz * bz * phi_sum * (2.0 * kPi / n_phi);
    }
  }
  return 0.5 * total;
}

double q_moment(const DistributionMoments& f, int i, int j, double b0) {
  check_index(i, j);
  const double mass = f.mass;
  const Vec3& m = f.momentum;
  if (i != j) return -2.0 * b0 * (f.second[i][j] * mass - m[i] * m[j]);
  const double tracefree = f.second[i][i] - f.energy() / 3.0;
  return -2.0 * b0 * (tracefree * mass - m[i] * m[i] + norm2(m) / 3.0);
}

double qsym_moment_G(const DistributionMoments& f, const DistributionMoments& g, int i, int j,
                     double b0) {
  check_index(i, j);
  if (max_abs(g.momentum) > 1e-12)
    throw std::invalid_argument("qsym_moment_G: profile must have zero momentum");
  if (i != j) return -2.0 * b0 * (f.second[i][j] * g.mass + f.mass * g.second[i][j]);
  const double f_tf = f.second[i][i] - f.energy() / 3.0;
  const double g_tf = g.second[i][i] - g.energy() / 3.0;
  return -2.0 * b0 * (f_tf * g.mass + f.mass * g_tf);
}

namespace {

struct MixtureSampler {
  const GaussianMixture* mix;
  std::vector<Mat3> chol;
  std::vector<double> cum;  // cumulative mass fractions

  explicit MixtureSampler(const GaussianMixture& m) : mix(&m) {
    if (m.components.empty())
      throw std::invalid_argument("mc_collision_moment_oracle: empty mixture");
    const double total = m.total_mass();
    if (!(total > 0.0)) throw std::invalid_argument("mc_collision_moment_oracle: nonpositive mass");
    double acc = 0.0;
    for (const auto& c : m.components) {
      if (!(c.mass > 0.0))
        throw std::invalid_argument("mc_collision_moment_oracle: component masses must be positive");
      chol.push_back(c.cholesky());
      acc += c.mass / total;
      cum.push_back(acc);
    }
    cum.back() = 1.0;
  }

  // Returns the sample and its antithetic reflection about the component mean.
  std::pair<Vec3, Vec3> draw(RngStream& rng) const {
    const double u = rng.uniform();
    std::size_t c = 0;
    while (c + 1 < cum.size() && u > cum[c]) ++c;
    const Vec3 z = rng.normal3();
    const Mat3& l = chol[c];
    const Vec3 d{l[0][0] * z[0], l[1][0] * z[0] + l[1][1] * z[1],
                 l[2][0] * z[0] + l[2][1] * z[1] + l[2][2] * z[2]};
    const Vec3& mu = mix->components[c].mean;
    return {mu + d, mu - d};
  }
};

}  // namespace

McEstimate mc_collision_moment_oracle(const GaussianMixture& f, const KernelSpec& kernel, int i,
                                      int j, std::size_t n_pairs, RngStream& rng) {
  check_index(i, j);
  if (n_pairs < 10000)
    throw std::invalid_argument("mc_collision_moment_oracle: need at least 1e4 pairs");
  const double b0 = derive_constants(kernel).b0;
  if (!(b0 > 0.0)) throw std::invalid_argument("mc_collision_moment_oracle: degenerate kernel");
  MixtureSampler sampler(f);
  const double mass = f.total_mass();
  const double mass2 = mass * mass;

  const std::size_t n_batches = 100;
  std::vector<double> batch_sum(n_batches, 0.0);
  std::vector<std::size_t> batch_n(n_batches, 0);
  for (std::size_t b = 0; b < n_batches; ++b)
    batch_n[b] = n_pairs / n_batches + (b < n_pairs % n_batches ? 1 : 0);

  for (std::size_t b = 0; b < n_batches; ++b) {
    double s = 0.0;
    for (std::size_t k = 0; k < batch_n[b]; ++k) {
      const auto [v, va] = sampler.draw(rng);
      const auto [w, wa] = sampler.draw(rng);
      // 2x2 antithetic block; T is quadratic so the reflections cancel the
      // odd cross terms exactly.
      s += 0.25 * (t_ij_closed(v, w, i, j, b0) + t_ij_closed(va, w, i, j, b0) +
                   t_ij_closed(v, wa, i, j, b0) + t_ij_closed(va, wa, i, j, b0));
    }
    batch_sum[b] = s;
  }

  double total = 0.0;
  for (double s : batch_sum) total += s;
  const double mean = total / static_cast<double>(n_pairs);

  // jackknife over batches
  double jk_mean = 0.0;
  std::vector<double> jk(n_batches);
  for (std::size_t b = 0; b < n_batches; ++b) {
    jk[b] = (total - batch_sum[b]) / static_cast<double>(n_pairs - batch_n[b]);
    jk_mean += jk[b];
  }
  jk_mean /= static_cast<double>(n_batches);
  double var = 0.0;
  for (double v : jk) var += (v - jk_mean) * (v - jk_mean);
  var *= (static_cast<double>(n_batches) - 1.0) / static_cast<double>(n_batches);

  McEstimate est;
  est.value = mass2 * mean;
  est.std_error = mass2 * std::sqrt(var);
  est.n_pairs = n_pairs;
  return est;
}

double relaxation_rate_check(const KernelSpec& kernel, double eps) {
  const CollisionConstants c = derive_constants(kernel);
  DistributionMoments f;
  f.mass = 1.0;
  f.second = mat3_identity();
  f.second[0][1] = f.second[1][0] = eps;
  return -q_moment(f, 0, 1, c.b0) / eps;
}

}  // namespace usf
