#include "usf/dsmc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "usf/config.hpp"

namespace usf {

namespace {
constexpr double kTwoPi = 6.28318530717958647692;

double wrap_unit(double x) {
  double y = x - std::floor(x);
  if (y >= 1.0) y -= 1.0;
  if (y < 0.0) y += 1.0;
  return y;
}
}  // namespace

void SimConfig::validate(const CollisionConstants& constants, const ShearParams& params) const {
  kernel.validate();
  if (n_particles == 0) throw std::invalid_argument("SimConfig: n_particles must be positive");
  if (grid < 1) throw std::invalid_argument("SimConfig: grid must be >= 1");
  if (!(dt > 0.0) || !(t_end > 0.0)) throw std::invalid_argument("SimConfig: dt and t_end must be positive");
  if (output_every < 1) throw std::invalid_argument("SimConfig: output_every must be >= 1");
  if (k_modes < 0) throw std::invalid_argument("SimConfig: k_modes must be >= 0");
  if (alpha < 0.0) throw std::invalid_argument("SimConfig: alpha must be nonnegative");

  if (!constants.degenerate() && dt > 0.1 / constants.nu0 * (1.0 + 1e-12))
    throw std::invalid_argument("SimConfig: dt exceeds 0.1/nu0");
  const double v_max = truncation_radius;
  const double stream_bound = 0.2 / (grid * v_max * std::exp(params.beta * t_end));
  if (dt > stream_bound * (1.0 + 1e-12))
    throw std::invalid_argument("SimConfig: dt exceeds the transport consistency bound");
  const double per_cell = static_cast<double>(n_particles) / (static_cast<double>(grid) * grid * grid);
  if (per_cell < 20.0) throw std::invalid_argument("SimConfig: fewer than 20 particles per cell");

  if (init.type == InitSpec::Type::PerturbedMode) {
    if (!(init.amplitude >= 0.0 && init.amplitude < 1.0))
      throw std::invalid_argument("SimConfig: perturbation amplitude must be in [0, 1)");
    if (init.mode == std::array<int, 3>{0, 0, 0})
      throw std::invalid_argument("SimConfig: perturbation mode must be nonzero");
  }
}

namespace {

// Inverse-CDF sample of s in [0,1) with density 1 + eps cos(2 pi s).
double sample_cosine_density(double eps, RngStream& rng) {
  const double u = rng.uniform();
  double s = u;
  for (int it = 0; it < 64; ++it) {
    const double f = s + eps * std::sin(kTwoPi * s) / kTwoPi - u;
    const double fp = 1.0 + eps * std::cos(kTwoPi * s);
    const double step = f / fp;
    s -= step;
    if (std::abs(step) < 1e-15) break;
  }
  return wrap_unit(s);
}

Vec3 uniform_position(RngStream& rng) { return {rng.uniform(), rng.uniform(), rng.uniform()}; }

double shape_weight(InitSpec::Shape shape, const Vec3& v, double radius) {
  switch (shape) {
    case InitSpec::Shape::Mass:
      return 1.0;
    case InitSpec::Shape::D12:
      return v[0] * v[1] / (0.5 * radius * radius);
    case InitSpec::Shape::Energy:
      return (norm2(v) - 3.0) / (radius * radius - 3.0);
  }
  return 1.0;
}

}  // namespace

SimState init_state(const SimConfig& config, const ShearParams& params) {
  SimState state;
  state.seed = config.seed;
  state.collision_carry.assign(static_cast<std::size_t>(config.grid) * config.grid * config.grid, 0.0);
  const std::size_t n = config.n_particles;
  state.ens.positions.resize(n);
  state.ens.velocities.resize(n);

  ProfileSpec prof;
  prof.alpha = config.alpha;
  prof.order = config.profile_order;
  prof.constants = derive_constants(config.kernel);
  prof.truncation_radius = config.truncation_radius;

  RngStream rng = RngStream::from_path(config.seed, 0x1417u);

  switch (config.init.type) {
    case InitSpec::Type::Profile: {
      for (std::size_t i = 0; i < n; ++i) state.ens.positions[i] = uniform_position(rng);
      state.ens.velocities = sample_profile(prof, n, rng);
      break;
    }
    case InitSpec::Type::Gaussian: {
      const SteadyMoments ref = steady_moments(params);
      GaussianTestDistribution g;
      g.mass = 1.0;
      const double e_raw = ref.energy + config.init.u0[0];
      const double d12_raw = ref.d12 + config.init.u0[1];
      const double d22_raw = ref.d22 + config.init.u0[2];
      const double s11 = 0.5 * (e_raw - d22_raw);
      g.cov = {{{s11, d12_raw, 0.0}, {d12_raw, d22_raw, 0.0}, {0.0, 0.0, s11}}};
      const Mat3 l = g.cholesky();  // rejects non-realizable targets
      for (std::size_t i = 0; i < n; ++i) {
        state.ens.positions[i] = uniform_position(rng);
        const Vec3 z = rng.normal3();
        state.ens.velocities[i] = {l[0][0] * z[0], l[1][0] * z[0] + l[1][1] * z[1],
                                   l[2][0] * z[0] + l[2][1] * z[1] + l[2][2] * z[2]};
      }
      break;
    }
    case InitSpec::Type::PerturbedMode: {
      const double eps = config.init.amplitude;
      if (!(eps >= 0.0 && eps < 1.0))
        throw std::invalid_argument("init_state: amplitude must be in [0, 1)");
      const auto& k = config.init.mode;
      const double k2 = static_cast<double>(k[0]) * k[0] + static_cast<double>(k[1]) * k[1] +
                        static_cast<double>(k[2]) * k[2];
      if (k2 == 0.0) throw std::invalid_argument("init_state: perturbation mode must be nonzero");

      if (config.init.shape == InitSpec::Shape::Mass) {
        // positions by inversion along k, velocities independent from the profile
        for (std::size_t i = 0; i < n; ++i) {
          const double s = sample_cosine_density(eps, rng);
          Vec3 x = uniform_position(rng);
          const double phase = k[0] * x[0] + k[1] * x[1] + k[2] * x[2];
          const double shift = s - (phase - std::floor(phase));
          for (int a = 0; a < 3; ++a) x[a] = wrap_unit(x[a] + shift * k[a] / k2);
          state.ens.positions[i] = x;
        }
        state.ens.velocities = sample_profile(prof, n, rng);
      } else {
        // joint x-v rejection: target G(v) [1 + eps cos(2 pi k.x) psi(v)], |psi| <= 1
        for (std::size_t i = 0; i < n; ++i) {
          for (;;) {
            const Vec3 x = uniform_position(rng);
            const Vec3 v = sample_profile(prof, 1, rng)[0];
            const double psi = shape_weight(config.init.shape, v, config.truncation_radius);
            const double phase = k[0] * x[0] + k[1] * x[1] + k[2] * x[2];
            const double w = 1.0 + eps * std::cos(kTwoPi * phase) * psi;
            if (rng.uniform() * (1.0 + eps) <= w) {
              state.ens.positions[i] = x;
              state.ens.velocities[i] = v;
              break;
            }
          }
        }
      }
      break;
    }
  }

  // exact momentum recentring: the perturbation carries no net momentum
  Vec3 mean{0.0, 0.0, 0.0};
  for (const Vec3& v : state.ens.velocities) mean += v;
  mean = (1.0 / static_cast<double>(n)) * mean;
  for (Vec3& v : state.ens.velocities) v -= mean;
  return state;
}

void transport_step(SimState& state, double dt, const ShearParams& params) {
  const double alpha = params.alpha, beta = params.beta;
  const double factor = std::exp(beta * state.t);  // frozen at step start, exact for the flow
  const double decay = std::exp(-beta * dt);
  const std::size_t n = state.ens.size();
  for (std::size_t i = 0; i < n; ++i) {
    Vec3& x = state.ens.positions[i];
    Vec3& v = state.ens.velocities[i];
    x[0] = wrap_unit(x[0] + factor * (dt * v[0] - 0.5 * alpha * dt * dt * v[1]));
    x[1] = wrap_unit(x[1] + factor * dt * v[1]);
    x[2] = wrap_unit(x[2] + factor * dt * v[2]);
    v[0] = decay * (v[0] - alpha * dt * v[1]);
    v[1] *= decay;
    v[2] *= decay;
  }
  state.t += dt;
}

namespace {

struct CellIndex {
  std::vector<std::uint32_t> offsets;    // size ncells + 1
  std::vector<std::uint32_t> particles;  // particle ids grouped by cell
};

CellIndex build_cells(const ParticleEnsemble& ens, int grid) {
  const std::size_t ncells = static_cast<std::size_t>(grid) * grid * grid;
  CellIndex idx;
  idx.offsets.assign(ncells + 1, 0);
  std::vector<std::uint32_t> cell_of(ens.size());
  for (std::size_t i = 0; i < ens.size(); ++i) {
    const Vec3& x = ens.positions[i];
    int cx = std::min(grid - 1, static_cast<int>(x[0] * grid));
    int cy = std::min(grid - 1, static_cast<int>(x[1] * grid));
    int cz = std::min(grid - 1, static_cast<int>(x[2] * grid));
    const std::uint32_t c = static_cast<std::uint32_t>((cx * grid + cy) * grid + cz);
    cell_of[i] = c;
    ++idx.offsets[c + 1];
  }
  for (std::size_t c = 0; c < ncells; ++c) idx.offsets[c + 1] += idx.offsets[c];
  idx.particles.resize(ens.size());
  std::vector<std::uint32_t> cursor(idx.offsets.begin(), idx.offsets.end() - 1);
  for (std::size_t i = 0; i < ens.size(); ++i) idx.particles[cursor[cell_of[i]]++] = static_cast<std::uint32_t>(i);
  return idx;
}

std::uint64_t collide_cell_range(SimState& state, const SimConfig& config,
                                 const CollisionConstants& constants, const CellIndex& cells,
                                 double dt, std::size_t cell_begin, std::size_t cell_end) {
  const double n_total = static_cast<double>(config.n_particles);
  const double cell_volume = 1.0 / (static_cast<double>(config.grid) * config.grid * config.grid);
  std::uint64_t collided = 0;

  for (std::size_t c = cell_begin; c < cell_end; ++c) {
    const std::uint32_t lo = cells.offsets[c], hi = cells.offsets[c + 1];
    const std::uint64_t nc = hi - lo;
    if (nc < 2) continue;
    const double expected = 0.5 * static_cast<double>(nc) * static_cast<double>(nc - 1) *
                            constants.sigma_T * dt / (n_total * cell_volume);
    const double with_carry = expected + state.collision_carry[c];
    const double count_d = std::floor(with_carry);
    state.collision_carry[c] = with_carry - count_d;
    auto count = static_cast<std::uint64_t>(count_d);
    if (count == 0) continue;

    RngStream rng = RngStream::from_path(state.seed, 0xC011u, state.step, c);
    std::vector<std::uint64_t> used;
    used.reserve(count);
    for (std::uint64_t kk = 0; kk < count; ++kk) {
      std::uint64_t a = 0, b = 0;
      for (int attempt = 0; attempt < 64; ++attempt) {
        a = rng.uniform_below(nc);
        b = rng.uniform_below(nc - 1);
        if (b >= a) ++b;
        const std::uint64_t id = std::min(a, b) * nc + std::max(a, b);
        if (std::find(used.begin(), used.end(), id) == used.end()) {
          used.push_back(id);
          break;
        }
      }
      Vec3& vi = state.ens.velocities[cells.particles[lo + a]];
      Vec3& vj = state.ens.velocities[cells.particles[lo + b]];
      const Vec3 rel = vj - vi;
      const double rmag = norm(rel);
      // Maxwell rate is speed independent: zero relative velocity still
      // counts as a collision and the map degenerates to the identity.
      const Vec3 uhat = rmag > 0.0 ? (1.0 / rmag) * rel : Vec3{1.0, 0.0, 0.0};
      const Vec3 omega = sample_omega(config.kernel, uhat, rng);
      const auto [vp, vjp] = post_collision(vi, vj, omega);
      vi = vp;
      vj = vjp;
      ++collided;
    }
  }
  return collided;
}

}  // namespace

void collision_step(SimState& state, double dt, const SimConfig& config,
                    const CollisionConstants& constants) {
  if (constants.degenerate()) return;  // zero kernel: no collisions
  const CellIndex cells = build_cells(state.ens, config.grid);
  const std::size_t ncells = state.collision_carry.size();

  const int n_threads = config.effective_threads();
  if (n_threads == 1 || ncells < 64) {
    state.n_collisions += collide_cell_range(state, config, constants, cells, dt, 0, ncells);
    return;
  }
  // Cells are disjoint and the per-(step, cell) streams make the outcome
  // independent of the thread count.
  std::vector<std::uint64_t> counts(n_threads, 0);
  std::vector<std::thread> workers;
  const std::size_t chunk = (ncells + n_threads - 1) / n_threads;
  for (int w = 0; w < n_threads; ++w) {
    const std::size_t b = std::min(ncells, static_cast<std::size_t>(w) * chunk);
    const std::size_t e = std::min(ncells, b + chunk);
    workers.emplace_back([&, w, b, e]() {
      counts[w] = collide_cell_range(state, config, constants, cells, dt, b, e);
    });
  }
  for (auto& t : workers) t.join();
  for (std::uint64_t c : counts) state.n_collisions += c;
}

namespace {

// Jackknife standard error of the (energy, d12, d22) means over particle blocks.
Vec3 jackknife_sigma(const ParticleEnsemble& ens) {
  const std::size_t n = ens.size();
  const std::size_t n_blocks = std::min<std::size_t>(50, n);
  std::vector<Vec3> block_sum(n_blocks, Vec3{0, 0, 0});
  std::vector<std::size_t> block_n(n_blocks, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t b = i * n_blocks / n;
    const Vec3& v = ens.velocities[i];
    block_sum[b] += Vec3{norm2(v), v[0] * v[1], v[1] * v[1]};
    ++block_n[b];
  }
  Vec3 total{0, 0, 0};
  for (const Vec3& s : block_sum) total += s;
  Vec3 jk_mean{0, 0, 0};
  std::vector<Vec3> jk(n_blocks);
  for (std::size_t b = 0; b < n_blocks; ++b) {
    jk[b] = (1.0 / static_cast<double>(n - block_n[b])) * (total - block_sum[b]);
    jk_mean += jk[b];
  }
  jk_mean = (1.0 / static_cast<double>(n_blocks)) * jk_mean;
  Vec3 var{0, 0, 0};
  for (const Vec3& v : jk)
    for (int c = 0; c < 3; ++c) var[c] += (v[c] - jk_mean[c]) * (v[c] - jk_mean[c]);
  const double f = (static_cast<double>(n_blocks) - 1.0) / static_cast<double>(n_blocks);
  return {std::sqrt(f * var[0]), std::sqrt(f * var[1]), std::sqrt(f * var[2])};
}

void write_csv(const std::string& path, const std::vector<TimeSeriesRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("run: cannot open output CSV " + path);
  out << time_series_header() << "\n";
  char buf[512];
  for (const TimeSeriesRow& r : rows) {
    std::snprintf(buf, sizeof(buf),
                  "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%llu\n", r.t,
                  r.E0, r.d12_0, r.d22_0, r.U1, r.U2, r.U3, r.R2, r.R3, r.mode_k100_mass_abs,
                  r.mode_k100_d12_abs, static_cast<unsigned long long>(r.ncoll));
    out << buf;
  }
}

}  // namespace

std::string time_series_header() {
  return "t,E0,d12_0,d22_0,U1,U2,U3,R2,R3,mode_k100_mass_abs,mode_k100_d12_abs,ncoll";
}

RunResult run(const SimConfig& config) {
  const CollisionConstants constants = derive_constants(config.kernel);
  if (constants.degenerate()) throw std::invalid_argument("run: degenerate (zero) collision kernel");
  const ShearParams params = make_shear_params(config.alpha, constants.b0);
  config.validate(constants, params);

  RunResult result;
  result.params = params;
  result.constants = constants;
  result.reference = steady_moments(params);

  SimState state = init_state(config, params);
  const auto n_steps = static_cast<std::uint64_t>(std::llround(config.t_end / config.dt));
  if (n_steps < 1) throw std::invalid_argument("run: t_end shorter than one step");

  const std::array<int, 3> k100{1, 0, 0};
  auto record = [&]() {
    const MomentState ms = assemble_U(state.ens, result.reference);
    if (!std::isfinite(ms.raw[0]) || !std::isfinite(ms.raw[1]) || !std::isfinite(ms.raw[2])) {
      std::ostringstream os;
      os << "run: non-finite moments at step " << state.step << " (t = " << state.t << ")";
      throw std::runtime_error(os.str());
    }
    TimeSeriesRow row;
    row.t = state.t;
    row.E0 = ms.raw[0];
    row.d12_0 = ms.raw[1];
    row.d22_0 = ms.raw[2];
    row.U1 = ms.U[0];
    row.U2 = ms.U[1];
    row.U3 = ms.U[2];
    row.ncoll = state.n_collisions;

    Vec3 R{0.0, 0.0, 0.0};
    double init_mode_abs = 0.0;
    if (config.k_modes >= 1) {
      const ModeMoments modes = mode_moments(state.ens, config.k_modes, config.effective_threads());
      R = null_structure_R(modes, constants.b0);
      row.R2 = R[1];
      row.R3 = R[2];
      if (config.k_modes >= 1) {
        row.mode_k100_mass_abs = std::abs(modes.get(k100, kWMass));
        row.mode_k100_d12_abs = std::abs(modes.get(k100, kWV12));
      }
      const auto& km = config.init.mode;
      const int kmax = std::max({std::abs(km[0]), std::abs(km[1]), std::abs(km[2])});
      init_mode_abs = (km != std::array<int, 3>{0, 0, 0} && kmax <= config.k_modes)
                          ? std::abs(modes.get(km, kWMass))
                          : row.mode_k100_mass_abs;
    }
    result.rows.push_back(row);
    result.times.push_back(state.t);
    result.U_series.push_back(ms.U);
    result.U_sigma.push_back(jackknife_sigma(state.ens));
    result.mode_abs.push_back(init_mode_abs);
    result.source.t.push_back(state.t);
    result.source.R.push_back(R);
  };

  record();  // t = 0
  for (std::uint64_t s = 1; s <= n_steps; ++s) {
    state.step = s;
    transport_step(state, config.dt, params);
    collision_step(state, config.dt, config, constants);
    state.t = static_cast<double>(s) * config.dt;  // avoid accumulation drift
    if (s % static_cast<std::uint64_t>(config.output_every) == 0 || s == n_steps) record();
  }
  result.total_collisions = state.n_collisions;

  if (!config.output_path.empty()) {
    write_csv(config.output_path, result.rows);
    result.csv_path = config.output_path;
    result.manifest_path =
        config.manifest_path.empty() ? config.output_path + ".manifest.json" : config.manifest_path;
    write_manifest(result.manifest_path, config, result, n_steps);
  }
  return result;
}

}  // namespace usf
