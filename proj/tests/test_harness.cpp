#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <json.hpp>

#include "test_util.hpp"
#include "usf/config.hpp"
#include "usf/harness.hpp"
#include "usf/sha1.hpp"

using namespace usf;

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kB0 = kPi / 2.0;
}  // namespace

TEST_CASE("fit_exponential: exact exponential") {
  std::vector<double> t, y;
  for (int k = 0; k <= 100; ++k) {
    t.push_back(0.05 * k);
    y.push_back(std::exp(-2.0 * 0.05 * k));
  }
  const FitResult f = fit_exponential(t, y, 0.5);
  CHECK(std::abs(f.rate - 2.0) <= 1e-6);
  CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_FALSE(f.low_r2_warning);
}

TEST_CASE("fit_exponential: noisy exponential recovers the rate") {
  RngStream rng = RngStream::from_path(80);
  std::vector<double> t, y;
  for (int k = 0; k <= 200; ++k) {
    t.push_back(0.025 * k);
    y.push_back(3.0 * std::exp(-0.5 * 0.025 * k) + 1e-4 * rng.normal());
  }
  const FitResult f = fit_exponential(t, y, 0.5);
  CHECK(std::abs(f.rate - 0.5) <= 1e-2);
}

TEST_CASE("fit_exponential: constant series has zero rate") {
  std::vector<double> t, y;
  for (int k = 0; k < 40; ++k) {
    t.push_back(0.1 * k);
    y.push_back(2.5);
  }
  const FitResult f = fit_exponential(t, y, 1.0);
  CHECK(std::abs(f.rate) <= 1e-9);
  CHECK(f.r2 == 1.0);
}

TEST_CASE("fit_exponential: errors and warnings") {
  std::vector<double> t{0, 1, 2, 3}, y{1.0, 0.5, -0.1, 0.2};
  CHECK_THROWS_AS(fit_exponential(t, y, 1.0), std::invalid_argument);
  RngStream rng = RngStream::from_path(81);
  std::vector<double> tt, yy;
  for (int k = 0; k < 100; ++k) {
    tt.push_back(0.1 * k);
    yy.push_back(1.0 + 0.5 * rng.uniform());  // flat noise: meaningless fit
  }
  const FitResult f = fit_exponential(tt, yy, 1.0);
  CHECK(f.low_r2_warning);
}

TEST_CASE("decay_fit_cutoff stops at the shot-noise floor") {
  std::vector<double> y;
  for (int k = 0; k < 50; ++k) y.push_back(0.1 * std::exp(-0.4 * k));
  const std::size_t cut = decay_fit_cutoff(y, 1000000);
  REQUIRE(cut > 5);
  REQUIRE(cut < y.size());
  CHECK(y[cut - 1] < 5e-3);
  CHECK(y[cut - 2] >= 5e-3);
}

TEST_CASE("sha1: known digests") {
  CHECK(sha1_hex("abc") == "a9993e364706816aba3e25717850c26c9cd0d89d");
  CHECK(git_blob_sha1("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  CHECK(git_blob_sha1("hello world\n") == "3b18e512dba79e4c8300dd08aeb37f8e728b8dad");
}

TEST_CASE("config: full round trip through parse and echo") {
  const std::string text = R"(
# shear run
alpha = 0.1
n_particles = 100000
grid = 4
dt = 0.0015
t_end = 1.9
seed = 42
output_every = 20
k_modes = 3
kernel.family = grad_cutoff
kernel.coeffs = 1.0
profile.order = 1
profile.truncation_radius = 8
init.type = perturbed
init.mode = 1,0,0
init.amplitude = 0.2
init.shape = mass
output.path = /tmp/x.csv
reproducible = true
threads = 2
)";
  const SimConfig c = sim_config_from(ConfigMap::parse_string(text));
  CHECK(c.alpha == 0.1);
  CHECK(c.n_particles == 100000);
  CHECK(c.grid == 4);
  CHECK(c.seed == 42);
  CHECK(c.k_modes == 3);
  CHECK(c.kernel.family == KernelFamily::GradCutoff);
  CHECK(c.init.type == InitSpec::Type::PerturbedMode);
  CHECK(c.init.mode == std::array<int, 3>{1, 0, 0});
  CHECK(c.init.amplitude == 0.2);
  CHECK(c.reproducible);
  // echo -> parse -> echo is a fixed point
  const SimConfig c2 = sim_config_from(ConfigMap::parse_string(config_echo(c)));
  CHECK(config_echo(c2) == config_echo(c));
}

TEST_CASE("config: rejects unknown keys, missing keys, bad booleans") {
  CHECK_THROWS_AS(sim_config_from(ConfigMap::parse_string("alpha = 0.1\nbogus = 1\n")),
                  std::invalid_argument);
  CHECK_THROWS_AS(sim_config_from(ConfigMap::parse_string("n_particles = 10\n")),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      sim_config_from(ConfigMap::parse_string("alpha = 0\ndt = 0.1\nt_end = 1\nreproducible = maybe\n")),
      std::invalid_argument);
}

TEST_CASE("verify_homogeneous: small-N battery passes and reports a full document") {
  SimConfig c;
  c.alpha = 0.1;
  c.n_particles = 40000;
  c.grid = 1;
  c.dt = 0.1 / (2.0 * kPi);
  c.t_end = 1.2 / kB0;
  c.seed = 82;
  c.output_every = 3;
  c.init.type = InitSpec::Type::Gaussian;
  c.init.u0 = {0.63, 0.2, 0.1};
  const ExperimentReport rep = verify_homogeneous(c);
  CHECK(rep.verdicts.size() == 3);
  const auto doc = nlohmann::json::parse(rep.to_json());
  CHECK(doc.contains("measured"));
  CHECK(doc.contains("predicted"));
  CHECK(doc.contains("verdicts"));
  CHECK(doc["kind"] == "homogeneous");
  for (const Verdict& v : rep.verdicts) {
    INFO(v.criterion, " value=", v.value, " tol=", v.tolerance);
    CHECK(v.pass);
  }
}

TEST_CASE("verify_homogeneous: reports are bit-for-bit reproducible") {
  SimConfig c;
  c.alpha = 0.1;
  c.n_particles = 25000;
  c.grid = 1;
  c.dt = 0.1 / (2.0 * kPi);
  c.t_end = 0.6 / kB0;
  c.seed = 84;
  c.output_every = 4;
  c.init.type = InitSpec::Type::Gaussian;
  c.init.u0 = {0.4, 0.15, 0.05};
  c.reproducible = true;
  const std::string a = verify_homogeneous(c).to_json();
  const std::string b = verify_homogeneous(c).to_json();
  CHECK(a == b);
}

TEST_CASE("run rejects a degenerate kernel") {
  SimConfig c;
  c.alpha = 0.1;
  c.n_particles = 1000;
  c.grid = 1;
  c.dt = 0.01;
  c.t_end = 0.1;
  c.kernel.coeffs = {0.0};
  CHECK_THROWS_AS(run(c), std::invalid_argument);
}

TEST_CASE("verify_homogeneous rejects perturbed configurations") {
  SimConfig c;
  c.alpha = 0.1;
  c.init.type = InitSpec::Type::PerturbedMode;
  c.init.amplitude = 0.2;
  CHECK_THROWS_AS(verify_homogeneous(c), std::invalid_argument);
}

TEST_CASE("verify_inhomogeneous rejects unperturbed configurations") {
  SimConfig c;
  c.alpha = 0.1;
  c.init.type = InitSpec::Type::Profile;
  CHECK_THROWS_AS(verify_inhomogeneous(c), std::invalid_argument);
}

TEST_CASE("energy_growth_report: stationary state keeps the ratio at one") {
  SimConfig c;
  c.alpha = 0.1;
  c.n_particles = 50000;
  c.grid = 1;
  c.dt = 0.1 / (2.0 * kPi);
  c.t_end = 0.6 / kB0;
  c.seed = 83;
  c.output_every = 4;
  c.init.type = InitSpec::Type::Profile;
  const RunResult r = run(c);
  const EigenSystem eig = eigensystem(build_matrix(r.params), r.params);
  const Vec3 u_inf = mat_vec(limit_semigroup(eig), r.U_series.front());
  const auto doc = nlohmann::json::parse(energy_growth_report(r, u_inf));
  REQUIRE(doc["rows"].size() == r.times.size());
  for (const auto& row : doc["rows"]) {
    CHECK(std::abs(row["ratio"].get<double>() - 1.0) <= 0.05);
  }
}

TEST_CASE("energy limit state: no shear means no energy drift") {
  // at alpha = 0 the limit projector's first row is (1, 0, 0) exactly, so the
  // predicted limit energy equals the initial one and the lab energy is flat
  const ShearParams p = make_shear_params(0.0, kB0);
  const EigenSystem eig = eigensystem(build_matrix(p), p);
  const Vec3 u0{0.37, -0.1, 0.2};
  const Vec3 u_inf = mat_vec(limit_semigroup(eig), u0);
  CHECK(u_inf[0] == doctest::Approx(u0[0]).epsilon(1e-14));
  CHECK(lab_frame_energy(p, 5.0, u0[0]) == lab_frame_energy(p, 0.0, u0[0]));
}

TEST_CASE("identities_report: fast suite passes end to end") {
  bool all_pass = false;
  const auto doc = nlohmann::json::parse(identities_report(40000, 7, &all_pass));
  CHECK(all_pass);
  CHECK(doc["t_ij"]["pass"].get<bool>());
  REQUIRE(doc["collision_moments"].size() == 5);
  for (const auto& row : doc["collision_moments"]) CHECK(row["pass"].get<bool>());
}
