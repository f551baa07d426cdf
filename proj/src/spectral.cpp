#include "usf/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "usf/fitting.hpp"

namespace usf {

double beta_cubic_residual(double beta, double alpha, double b0) {
  const double s = 2.0 * b0 + 2.0 * beta;
  return 2.0 * beta * s * s - 4.0 * b0 * alpha * alpha / 3.0;
}

double solve_beta(double alpha, double b0) {
  if (!(b0 > 0.0)) throw std::invalid_argument("solve_beta: b0 must be positive");
  if (alpha < 0.0) throw std::invalid_argument("solve_beta: alpha must be nonnegative");
  if (alpha == 0.0) return 0.0;

  // Residual is negative at 0+ and positive at the linearized value, so the
  // root is bracketed by [0, alpha^2/(6 b0)].
  double lo = 0.0, hi = alpha * alpha / (6.0 * b0);
  double x = hi;
  for (int it = 0; it < 200; ++it) {
    const double s = 2.0 * b0 + 2.0 * x;
    const double p = 2.0 * x * s * s - 4.0 * b0 * alpha * alpha / 3.0;
    if (p > 0.0)
      hi = x;
    else
      lo = x;
    const double dp = 2.0 * s * s + 8.0 * x * s;
    double xn = x - p / dp;
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);  // bisection fallback
    if (std::abs(xn - x) <= 1e-17 * (1.0 + std::abs(x)) && std::abs(p) <= 1e-12) return xn;
    x = xn;
  }
  if (std::abs(beta_cubic_residual(x, alpha, b0)) > 1e-12)
    throw std::runtime_error("solve_beta: did not converge");
  return x;
}

ShearParams make_shear_params(double alpha, double b0) {
  return ShearParams{alpha, b0, solve_beta(alpha, b0)};
}

Mat3 build_matrix(const ShearParams& p) {
  const double tb = 2.0 * p.beta;
  return {{{tb, 2.0 * p.alpha, 0.0},
           {0.0, tb + 2.0 * p.b0, p.alpha},
           {-2.0 * p.b0 / 3.0, 0.0, tb + 2.0 * p.b0}}};
}

std::array<std::complex<double>, 3> spectrum_from_matrix(const Mat3& a) {
  // det(A - x I) = -x^3 + tr x^2 - m2 x + det
  const double tr = a[0][0] + a[1][1] + a[2][2];
  const double m2 = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) +
                    (a[0][0] * a[2][2] - a[0][2] * a[2][0]) +
                    (a[1][1] * a[2][2] - a[1][2] * a[2][1]);
  const double det = mat_det(a);

  // One real root of x^3 - tr x^2 + m2 x - det by bisection, then deflate.
  auto p = [&](double x) { return ((x - tr) * x + m2) * x - det; };
  double bound = 1.0 + std::abs(tr) + std::abs(m2) + std::abs(det);
  double lo = -bound, hi = bound;
  if (p(lo) > 0.0) std::swap(lo, hi);
  double r = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    r = 0.5 * (lo + hi);
    if (p(r) < 0.0)
      lo = r;
    else
      hi = r;
  }
  // x^3 - tr x^2 + m2 x - det = (x - r)(x^2 + bx + c)
  const double b = r - tr;
  const double c = m2 + r * b;
  const std::complex<double> disc = std::complex<double>(b * b - 4.0 * c, 0.0);
  const std::complex<double> sq = std::sqrt(disc);
  return {std::complex<double>(r, 0.0), 0.5 * (-b + sq), 0.5 * (-b - sq)};
}

namespace {

void analytic_eigenvectors(const ShearParams& p, const std::complex<double>& l2, CMat3& Q) {
  const double a = p.alpha, b0 = p.b0, beta = p.beta;
  const std::complex<double> l3 = std::conj(l2);
  if (a == 0.0) {
    // A is lower triangular with a double eigenvalue 2 b0; still diagonalizable.
    Q = {{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {1.0 / 3.0, 0.0, 1.0}}};
    return;
  }
  const CVec3 q1 = {a * a / beta, -a, 2.0 * b0 + 2.0 * beta};
  const CVec3 q2 = {-2.0 * a / (2.0 * beta - l2), 1.0, -(2.0 * beta + 2.0 * b0 - l2) / a};
  const CVec3 q3 = {-2.0 * a / (2.0 * beta - l3), 1.0, -(2.0 * beta + 2.0 * b0 - l3) / a};
  for (int i = 0; i < 3; ++i) {
    Q[i][0] = q1[i];
    Q[i][1] = q2[i];
    Q[i][2] = q3[i];
  }
}

double cmat_frobenius(const CMat3& m) {
  double s = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s += std::norm(m[i][j]);
  return std::sqrt(s);
}

}  // namespace

Vec3 EigenSystem::kernel_vector() const {
  return {Q[0][0].real(), Q[1][0].real(), Q[2][0].real()};
}

double EigenSystem::condition() const { return cmat_frobenius(Q) * cmat_frobenius(Q_inv); }

EigenSystem eigensystem(const Mat3& a, const ShearParams& params) {
  EigenSystem eig;
  eig.params = params;
  const double b0 = params.b0, beta = params.beta;
  const double im = std::sqrt(std::max(0.0, 4.0 * b0 * beta + 3.0 * beta * beta));
  const std::complex<double> l2(2.0 * b0 + 3.0 * beta, im);
  eig.lambda = {0.0, l2, std::conj(l2)};
  eig.spectral_gap = l2.real();
  analytic_eigenvectors(params, l2, eig.Q);
  eig.Q_inv = cmat_inv(eig.Q);

  // Cross-check against the generic numerical spectrum of the same matrix.
  auto numeric = spectrum_from_matrix(a);
  std::sort(numeric.begin(), numeric.end(),
            [](const auto& x, const auto& y) { return x.imag() < y.imag(); });
  const double scale = 1.0 + std::abs(l2);
  if (std::abs(numeric[0] - std::conj(l2)) > 1e-10 * scale ||
      std::abs(numeric[1]) > 1e-10 * scale || std::abs(numeric[2] - l2) > 1e-10 * scale) {
    // alpha == 0 gives three real eigenvalues; the sort above is then arbitrary.
    bool ok = false;
    if (params.alpha == 0.0) {
      std::array<double, 3> re{numeric[0].real(), numeric[1].real(), numeric[2].real()};
      std::sort(re.begin(), re.end());
      ok = std::abs(re[0]) <= 1e-10 * scale && std::abs(re[1] - 2.0 * b0) <= 1e-10 * scale &&
           std::abs(re[2] - 2.0 * b0) <= 1e-10 * scale;
    }
    if (!ok) throw std::runtime_error("eigensystem: analytic spectrum disagrees with numeric spectrum");
  }

  // Reassembly check: Q diag(lambda) Q^-1 must reproduce A.
  CMat3 d{};
  d[0][0] = eig.lambda[0];
  d[1][1] = eig.lambda[1];
  d[2][2] = eig.lambda[2];
  const CMat3 re = cmat_mul(cmat_mul(eig.Q, d), eig.Q_inv);
  const Mat3 diff = mat_sub(cmat_real(re), a);
  if (mat_frobenius(diff) > 1e-9 * (1.0 + mat_frobenius(a)) || cmat_max_imag(re) > 1e-9)
    throw std::runtime_error("eigensystem: diagonalization residual too large");
  return eig;
}

Mat3 semigroup(const EigenSystem& eig, double t) {
  if (t < 0.0) throw std::invalid_argument("semigroup: t must be nonnegative");
  CMat3 d{};
  for (int i = 0; i < 3; ++i) d[i][i] = std::exp(-t * eig.lambda[i]);
  const CMat3 s = cmat_mul(cmat_mul(eig.Q, d), eig.Q_inv);
  return cmat_real(s);
}

Mat3 limit_semigroup(const EigenSystem& eig) {
  CMat3 d{};
  d[0][0] = 1.0;
  const CMat3 s = cmat_mul(cmat_mul(eig.Q, d), eig.Q_inv);
  return cmat_real(s);
}

void SourceSeries::validate(double b0) const {
  if (t.size() != R.size()) throw std::invalid_argument("SourceSeries: size mismatch");
  if (t.size() < 2) throw std::invalid_argument("SourceSeries: need at least two samples");
  const double max_step = 0.05 / b0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (R[k][0] != 0.0) throw std::invalid_argument("SourceSeries: energy component must be zero");
    if (k > 0) {
      const double h = t[k] - t[k - 1];
      if (!(h > 0.0)) throw std::invalid_argument("SourceSeries: grid must be increasing");
      if (h > max_step * (1.0 + 1e-9))
        throw std::invalid_argument("SourceSeries: grid step exceeds 0.05/b0");
    }
  }
}

Vec3 predict_U(const EigenSystem& eig, const Vec3& U0, const SourceSeries& source, double t) {
  source.validate(eig.params.b0);
  if (t < source.t.front() - 1e-12 || t > source.t.back() + 1e-12)
    throw std::invalid_argument("predict_U: t outside the sampled range");
  t = std::min(std::max(t, source.t.front()), source.t.back());

  Vec3 u = mat_vec(semigroup(eig, t - source.t.front()), U0);
  auto term = [&](double s, const Vec3& r) { return mat_vec(semigroup(eig, t - s), r); };
  for (std::size_t k = 0; k + 1 < source.t.size(); ++k) {
    const double s0 = source.t[k], s1 = source.t[k + 1];
    if (s0 >= t) break;
    if (s1 <= t) {
      u += (0.5 * (s1 - s0)) * (term(s0, source.R[k]) + term(s1, source.R[k + 1]));
    } else {
      // partial interval: linear interpolation of R at t
      const double w = (t - s0) / (s1 - s0);
      const Vec3 rt = (1.0 - w) * source.R[k] + w * source.R[k + 1];
      u += (0.5 * (t - s0)) * (term(s0, source.R[k]) + term(t, rt));
      break;
    }
  }
  return u;
}

Vec3 predict_U_infinity(const EigenSystem& eig, const Vec3& U0, const SourceSeries& source,
                        double* fitted_tail_rate) {
  source.validate(eig.params.b0);
  const std::size_t n = source.t.size();

  Vec3 total{0.0, 0.0, 0.0};
  for (std::size_t k = 0; k + 1 < n; ++k)
    total += (0.5 * (source.t[k + 1] - source.t[k])) * (source.R[k] + source.R[k + 1]);

  double mags_max = 0.0;
  std::vector<double> mags(n);
  for (std::size_t k = 0; k < n; ++k) {
    mags[k] = norm(source.R[k]);
    mags_max = std::max(mags_max, mags[k]);
  }

  double rate = 0.0;
  if (mags_max > 0.0) {
    const std::size_t m = std::max<std::size_t>(4, n / 5);
    double window_mean = 0.0;
    for (std::size_t k = n - m; k < n; ++k) window_mean += mags[k];
    window_mean /= static_cast<double>(m);
    // A trailing window far below the series peak means the source has
    // already decayed to the estimator noise floor; extrapolating a fit
    // through noise would only inflate it, so the tail is dropped. The
    // exponential fit handles the resolved slow-decay case.
    if (window_mean > 0.2 * mags_max) {
      std::vector<double> tt(source.t.end() - m, source.t.end());
      std::vector<double> yy(mags.end() - m, mags.end());
      for (double& y : yy) y = std::max(y, 1e-300);
      FitResult fit = fit_exponential(tt, yy, 1.0);
      rate = fit.rate;
      if (!(rate > 0.0)) {
        std::ostringstream os;
        os << "predict_U_infinity: source tail does not decay (fitted rate " << rate << ", r2 "
           << fit.r2 << " over last " << m << " samples; tail level " << window_mean
           << " vs peak " << mags_max << ")";
        throw std::runtime_error(os.str());
      }
      total += (1.0 / rate) * source.R[n - 1];
    }
  }
  if (fitted_tail_rate) *fitted_tail_rate = rate;

  const Mat3 s_inf = limit_semigroup(eig);
  return mat_vec(s_inf, U0 + total);
}

}  // namespace usf
