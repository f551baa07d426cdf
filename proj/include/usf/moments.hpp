#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <vector>

#include "usf/closure.hpp"
#include "usf/linalg.hpp"
#include "usf/profile.hpp"

namespace usf {

/// Equal-weight particle ensemble on the unit torus; total mass is 1 by
/// construction (weight 1/N each).
struct ParticleEnsemble {
  std::vector<Vec3> positions;   // componentwise in [0, 1)
  std::vector<Vec3> velocities;
  double time = 0.0;

  std::size_t size() const { return positions.size(); }
  void validate() const;
};

struct Monomial {
  int e1 = 0, e2 = 0, e3 = 0;
  int degree() const { return e1 + e2 + e3; }
};

/// (1/N) sum_j v1^e1 v2^e2 v3^e3 per monomial. Degrees above 4 are rejected
/// (no diagnostic consumes them).
std::vector<double> global_moments(const ParticleEnsemble& ens, const std::vector<Monomial>& monomials);

/// Velocity weights tracked per Fourier mode.
enum ModeWeight : int {
  kWMass = 0,   // 1
  kWV1 = 1,     // v1
  kWV2 = 2,     // v2
  kWV3 = 3,     // v3
  kWV12 = 4,    // v1 v2
  kWV22 = 5,    // v2^2
  kWVsq = 6,    // |v|^2
};
constexpr int kNumModeWeights = 7;

/// Empirical Fourier-mode velocity moments
///   m_p(k) = (1/N) sum_j exp(-2 pi i k.x_j) p(v_j)
/// stored on the half lattice 0 < ||k||_inf <= K (the other half follows from
/// conjugate symmetry of a real empirical measure). The self-pair diagonal
/// sums (1/N^2) sum_j p q are kept alongside so quadratic mode products can be
/// debiased; synthetic (field-defined) instances leave them at zero.
struct ModeMoments {
  int K = 0;
  std::size_t n_particles = 0;
  std::vector<std::array<int, 3>> lattice;                       // half lattice, fixed order
  std::vector<std::array<std::complex<double>, kNumModeWeights>> m;  // per lattice entry
  std::array<std::array<double, kNumModeWeights>, kNumModeWeights> pair_diag{};  // debias terms

  static std::vector<std::array<int, 3>> half_lattice(int K);

  /// Coefficient for an arbitrary k with 0 < ||k||_inf <= K.
  std::complex<double> get(const std::array<int, 3>& k, int weight) const;
};

ModeMoments mode_moments(const ParticleEnsemble& ens, int K, int n_threads = 1);

/// Zero-frequency second-moment state of the perturbation relative to the
/// steady profile moments: U = raw - reference.
struct MomentState {
  Vec3 raw{0.0, 0.0, 0.0};   // (energy, d12, d22) of the ensemble
  Vec3 U{0.0, 0.0, 0.0};
  SteadyMoments reference;
};

MomentState assemble_U(const ParticleEnsemble& ens, const SteadyMoments& reference);

/// Null-structure collision source for the zero-frequency second moments,
/// expressed purely in nonzero-frequency mode products:
///   R1 = 0
///   R2 = -2 b0 Re sum_k [ m_{v1v2} conj(m_1) - m_{v1} conj(m_{v2}) ]
///   R3 = -2 b0 Re sum_k [ (m_{v2^2} - m_{|v|^2}/3) conj(m_1)
///                         - |m_{v2}|^2 + (1/3) sum_i |m_{v_i}|^2 ]
/// Quadratic products are debiased by the stored self-pair diagonals.
Vec3 null_structure_R(const ModeMoments& modes, double b0);

/// Renormalized energy in the self-similar frame: raw energy minus the
/// profile energy; identical to the first component of U.
double renormalized_energy(const ParticleEnsemble& ens, const SteadyMoments& reference);

/// Lab-frame energy reconstructed from the renormalized one.
double lab_frame_energy(const ShearParams& params, double t, double e_alpha);

}  // namespace usf
