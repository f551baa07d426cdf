#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "usf/kernel.hpp"
#include "usf/moments.hpp"
#include "usf/profile.hpp"
#include "usf/spectral.hpp"

namespace usf {

/// Initial condition families. PerturbedMode places a single spatial mode of
/// amplitude eps on top of the profile, with the perturbation carried by the
/// chosen velocity weight. Gaussian draws velocities from a zero-mean
/// anisotropic Gaussian whose second moments realize the requested U(0)
/// offset from the steady reference (positions uniform).
struct InitSpec {
  enum class Type { Profile, PerturbedMode, Gaussian };
  enum class Shape { Mass, D12, Energy };

  Type type = Type::Profile;
  std::array<int, 3> mode{1, 0, 0};
  double amplitude = 0.0;
  Shape shape = Shape::Mass;
  Vec3 u0{0.0, 0.0, 0.0};  // Gaussian init: target U(0)
};

struct SimConfig {
  double alpha = 0.0;
  KernelSpec kernel;
  std::size_t n_particles = 0;
  int grid = 1;            // cells per axis; cell volume grid^-3
  double dt = 0.0;
  double t_end = 0.0;
  std::uint64_t seed = 0;
  int output_every = 1;
  int k_modes = 0;         // 0 disables mode/source extraction
  InitSpec init;
  ProfileOrder profile_order = ProfileOrder::FirstOrder;
  double truncation_radius = 8.0;
  std::string output_path;    // empty: no CSV written
  std::string manifest_path;  // empty: output_path + ".manifest.json"
  bool reproducible = false;
  int threads = 2;

  int effective_threads() const { return reproducible ? 1 : std::max(1, threads); }

  /// Time step and resolution constraints; throws on violation.
  void validate(const CollisionConstants& constants, const ShearParams& params) const;
};

struct SimState {
  ParticleEnsemble ens;
  double t = 0.0;
  std::uint64_t step = 0;
  std::uint64_t n_collisions = 0;
  std::vector<double> collision_carry;  // per cell
  std::uint64_t seed = 0;
};

SimState init_state(const SimConfig& config, const ShearParams& params);

/// Exact characteristic transport over dt from the state's current time:
/// positions advance along the closed-form trajectories (factor e^{beta t0}
/// taken at the step start, exactly as the characteristics prescribe) and
/// velocities contract through the shear flow; positions wrap into [0,1).
void transport_step(SimState& state, double dt, const ShearParams& params);

/// Cell-local Maxwell-molecule collisions: expected pair count
/// N_c (N_c - 1)/2 * sigma_T dt / (N V_c) with deterministic carry, pairs
/// uniform without replacement, scattering direction drawn from the angular
/// kernel. Per-pair momentum and energy are conserved exactly.
void collision_step(SimState& state, double dt, const SimConfig& config,
                    const CollisionConstants& constants);

/// One CSV row per output step (header fixed by the time-series contract).
struct TimeSeriesRow {
  double t = 0.0;
  double E0 = 0.0, d12_0 = 0.0, d22_0 = 0.0;
  double U1 = 0.0, U2 = 0.0, U3 = 0.0;
  double R2 = 0.0, R3 = 0.0;
  double mode_k100_mass_abs = 0.0, mode_k100_d12_abs = 0.0;
  std::uint64_t ncoll = 0;
};

struct RunResult {
  std::vector<TimeSeriesRow> rows;
  std::vector<double> times;
  std::vector<Vec3> U_series;
  std::vector<Vec3> U_sigma;        // jackknife standard error per component
  std::vector<double> mode_abs;     // |m_1(init mode)| per output
  SourceSeries source;              // measured R(t)
  SteadyMoments reference;
  ShearParams params;
  CollisionConstants constants;
  std::uint64_t total_collisions = 0;
  std::string csv_path, manifest_path;
};

/// Transport/collision loop with periodic moment extraction. Writes the CSV
/// and a JSON manifest when an output path is configured. Deterministic for a
/// given (config, seed) in reproducible mode.
RunResult run(const SimConfig& config);

std::string time_series_header();

}  // namespace usf
