#include "usf/moments.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>

namespace usf {

namespace {
constexpr double kTwoPi = 6.28318530717958647692;
}

void ParticleEnsemble::validate() const {
  if (positions.size() != velocities.size())
    throw std::invalid_argument("ParticleEnsemble: position/velocity count mismatch");
  for (const Vec3& x : positions)
    for (int a = 0; a < 3; ++a)
      if (!(x[a] >= 0.0 && x[a] < 1.0))
        throw std::invalid_argument("ParticleEnsemble: positions must lie in [0,1)");
}

std::vector<double> global_moments(const ParticleEnsemble& ens, const std::vector<Monomial>& monomials) {
  for (const Monomial& m : monomials) {
    if (m.e1 < 0 || m.e2 < 0 || m.e3 < 0 || m.degree() > 4)
      throw std::invalid_argument("global_moments: monomial degree must be in [0, 4]");
  }
  std::vector<double> out(monomials.size(), 0.0);
  const std::size_t n = ens.size();
  if (n == 0) throw std::invalid_argument("global_moments: empty ensemble");
  for (const Vec3& v : ens.velocities) {
    for (std::size_t q = 0; q < monomials.size(); ++q) {
      const Monomial& m = monomials[q];
      double p = 1.0;
      for (int e = 0; e < m.e1; ++e) p *= v[0];
      for (int e = 0; e < m.e2; ++e) p *= v[1];
      for (int e = 0; e < m.e3; ++e) p *= v[2];
      out[q] += p;
    }
  }
  for (double& x : out) x /= static_cast<double>(n);
  return out;
}

std::vector<std::array<int, 3>> ModeMoments::half_lattice(int K) {
  std::vector<std::array<int, 3>> lat;
  for (int k1 = -K; k1 <= K; ++k1)
    for (int k2 = -K; k2 <= K; ++k2)
      for (int k3 = -K; k3 <= K; ++k3) {
        const bool positive = k1 > 0 || (k1 == 0 && k2 > 0) || (k1 == 0 && k2 == 0 && k3 > 0);
        if (positive) lat.push_back({k1, k2, k3});
      }
  return lat;
}

std::complex<double> ModeMoments::get(const std::array<int, 3>& k, int weight) const {
  const bool positive = k[0] > 0 || (k[0] == 0 && k[1] > 0) || (k[0] == 0 && k[1] == 0 && k[2] > 0);
  const std::array<int, 3> kk = positive ? k : std::array<int, 3>{-k[0], -k[1], -k[2]};
  for (std::size_t i = 0; i < lattice.size(); ++i) {
    if (lattice[i] == kk) return positive ? m[i][weight] : std::conj(m[i][weight]);
  }
  throw std::invalid_argument("ModeMoments: wavevector outside the stored lattice");
}

namespace {

struct ModeAccumulator {
  std::vector<std::array<std::complex<double>, kNumModeWeights>> m;
  std::array<std::array<double, kNumModeWeights>, kNumModeWeights> diag{};
};

void accumulate_range(const ParticleEnsemble& ens, int K,
                      const std::vector<std::array<int, 3>>& lattice, std::size_t begin,
                      std::size_t end, ModeAccumulator& acc) {
  const int width = 2 * K + 1;
  std::vector<std::complex<double>> phase(3 * width);
  auto ph = [&](int axis, int k) -> std::complex<double>& { return phase[axis * width + (k + K)]; };

  for (std::size_t jp = begin; jp < end; ++jp) {
    const Vec3& x = ens.positions[jp];
    const Vec3& v = ens.velocities[jp];
    for (int axis = 0; axis < 3; ++axis) {
      const std::complex<double> w(std::cos(kTwoPi * x[axis]), -std::sin(kTwoPi * x[axis]));
      ph(axis, 0) = 1.0;
      for (int k = 1; k <= K; ++k) {
        ph(axis, k) = ph(axis, k - 1) * w;
        ph(axis, -k) = std::conj(ph(axis, k));
      }
    }
    const std::array<double, kNumModeWeights> p = {
        1.0, v[0], v[1], v[2], v[0] * v[1], v[1] * v[1], norm2(v)};
    for (std::size_t idx = 0; idx < lattice.size(); ++idx) {
      const auto& k = lattice[idx];
      const std::complex<double> e = ph(0, k[0]) * ph(1, k[1]) * ph(2, k[2]);
      for (int q = 0; q < kNumModeWeights; ++q) acc.m[idx][q] += e * p[q];
    }
    for (int a = 0; a < kNumModeWeights; ++a)
      for (int b = a; b < kNumModeWeights; ++b) acc.diag[a][b] += p[a] * p[b];
  }
}

}  // namespace

ModeMoments mode_moments(const ParticleEnsemble& ens, int K, int n_threads) {
  if (K < 1) throw std::invalid_argument("mode_moments: K must be >= 1");
  const std::size_t n = ens.size();
  if (n == 0) throw std::invalid_argument("mode_moments: empty ensemble");

  ModeMoments out;
  out.K = K;
  out.n_particles = n;
  out.lattice = ModeMoments::half_lattice(K);
  out.m.assign(out.lattice.size(), {});

  n_threads = std::max(1, n_threads);
  std::vector<ModeAccumulator> accs(n_threads);
  for (auto& a : accs) a.m.assign(out.lattice.size(), {});

  if (n_threads == 1) {
    accumulate_range(ens, K, out.lattice, 0, n, accs[0]);
  } else {
    std::vector<std::thread> workers;
    const std::size_t chunk = (n + n_threads - 1) / n_threads;
    for (int w = 0; w < n_threads; ++w) {
      const std::size_t b = std::min(n, static_cast<std::size_t>(w) * chunk);
      const std::size_t e = std::min(n, b + chunk);
      workers.emplace_back(accumulate_range, std::cref(ens), K, std::cref(out.lattice), b, e,
                           std::ref(accs[w]));
    }
    for (auto& t : workers) t.join();
  }

  // fixed merge order keeps the reduction deterministic for a given thread count
  for (const auto& acc : accs) {
    for (std::size_t idx = 0; idx < out.m.size(); ++idx)
      for (int q = 0; q < kNumModeWeights; ++q) out.m[idx][q] += acc.m[idx][q];
    for (int a = 0; a < kNumModeWeights; ++a)
      for (int b = a; b < kNumModeWeights; ++b) out.pair_diag[a][b] += acc.diag[a][b];
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  for (auto& row : out.m)
    for (auto& z : row) z *= inv_n;
  for (int a = 0; a < kNumModeWeights; ++a)
    for (int b = a; b < kNumModeWeights; ++b) {
      out.pair_diag[a][b] *= inv_n * inv_n;
      out.pair_diag[b][a] = out.pair_diag[a][b];
    }
  return out;
}

MomentState assemble_U(const ParticleEnsemble& ens, const SteadyMoments& reference) {
  const std::size_t n = ens.size();
  if (n == 0) throw std::invalid_argument("assemble_U: empty ensemble");
  double e = 0.0, d12 = 0.0, d22 = 0.0;
  for (const Vec3& v : ens.velocities) {
    e += norm2(v);
    d12 += v[0] * v[1];
    d22 += v[1] * v[1];
  }
  MomentState st;
  st.reference = reference;
  st.raw = {e / n, d12 / n, d22 / n};
  st.U = st.raw - reference.as_vec();
  return st;
}

Vec3 null_structure_R(const ModeMoments& modes, double b0) {
  // Debiased nonzero-frequency product sums: full lattice = 2 Re of the half
  // lattice; each of the (2K+1)^3 - 1 points sheds the same self-pair diagonal.
  const double n_full = std::pow(2.0 * modes.K + 1.0, 3) - 1.0;
  auto product = [&](int p, int q) {
    double s = 0.0;
    for (const auto& row : modes.m) s += (row[p] * std::conj(row[q])).real();
    return 2.0 * s - n_full * modes.pair_diag[p][q];
  };

  const double r2 = product(kWV12, kWMass) - product(kWV1, kWV2);
  const double r3 = product(kWV22, kWMass) - product(kWVsq, kWMass) / 3.0 - product(kWV2, kWV2) +
                    (product(kWV1, kWV1) + product(kWV2, kWV2) + product(kWV3, kWV3)) / 3.0;
  return {0.0, -2.0 * b0 * r2, -2.0 * b0 * r3};
}

double renormalized_energy(const ParticleEnsemble& ens, const SteadyMoments& reference) {
  double e = 0.0;
  for (const Vec3& v : ens.velocities) e += norm2(v);
  return e / static_cast<double>(ens.size()) - reference.energy;
}

double lab_frame_energy(const ShearParams& params, double t, double e_alpha) {
  return std::exp(2.0 * params.beta * t) * (3.0 + e_alpha);
}

}  // namespace usf
