#pragma once

#include <string>
#include <vector>

#include "usf/dsmc.hpp"
#include "usf/fitting.hpp"
#include "usf/spectral.hpp"

namespace usf {

/// One named check with its measured value and tolerance; value is expressed
/// so that pass means value <= tolerance.
struct Verdict {
  std::string criterion;
  bool pass = false;
  double value = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct ExperimentReport {
  std::string kind;
  SimConfig config;
  RunResult run;
  Vec3 U0{0, 0, 0};
  std::vector<Vec3> U_pred;       // prediction at each output time
  Vec3 U_end_pred{0, 0, 0};       // Duhamel prediction at t_end
  Vec3 U_infinity_pred{0, 0, 0};
  FitResult mode_fit;             // inhomogeneous: nonzero-mode amplitude decay
  FitResult energy_fit;           // homogeneous: |U1 - U1(inf)| convergence
  std::vector<Verdict> verdicts;

  bool all_pass() const;
  std::string to_json() const;
};

/// Homogeneous battery: runs the configured case (no spatial perturbation),
/// compares U(t) against the matrix-exponential prediction at 3 jackknife
/// sigma per component, and checks energy-moment convergence.
ExperimentReport verify_homogeneous(const SimConfig& config);

/// Inhomogeneous battery: seeded mode must decay (positive fitted rate,
/// r^2 >= 0.8 before the shot-noise floor), and U(t_end) must agree with the
/// Duhamel prediction driven by the measured source, and with the long-time
/// limit up to the explicit semigroup tail gap.
ExperimentReport verify_inhomogeneous(const SimConfig& config);

/// Lab-frame energy table: e^{2 beta t} (3 + E_alpha(t)) against the
/// predicted asymptote from E_alpha(inf); ratio tends to 1.
std::string energy_growth_report(const RunResult& run, const Vec3& U_infinity_pred);

/// Collision-moment identity suite (the `identities` subcommand): T_ij
/// quadrature vs closed form plus Monte Carlo oracles against q_moment on
/// Gaussian mixture cases. Returns JSON; all_pass reported inside.
std::string identities_report(std::size_t n_pairs, std::uint64_t seed, bool* all_pass = nullptr);

/// Fit window policy for mode-amplitude decay: truncates the series right
/// before it first drops under the shot-noise floor of an N-particle mode
/// estimator (or 2% of the initial value, whichever is larger).
std::size_t decay_fit_cutoff(const std::vector<double>& y, std::size_t n_particles);

}  // namespace usf
