#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "usf/config.hpp"
#include "usf/harness.hpp"

using nlohmann::json;

namespace {

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text << "\n";
  } else {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open output file " + out_path);
    out << text << "\n";
  }
}

usf::KernelSpec kernel_from_flags(const std::string& family, const std::vector<double>& coeffs) {
  usf::KernelSpec k;
  if (family == "grad_cutoff")
    k.family = usf::KernelFamily::GradCutoff;
  else if (family == "constant")
    k.family = usf::KernelFamily::Constant;
  else if (family == "even_poly")
    k.family = usf::KernelFamily::EvenPolynomial;
  else
    throw CLI::ValidationError("--family must be grad_cutoff, constant, or even_poly");
  if (!coeffs.empty()) k.coeffs = coeffs;
  return k;
}

json spectrum_json(double alpha, const usf::KernelSpec& kernel) {
  const usf::CollisionConstants cc = usf::derive_constants(kernel);
  const usf::ShearParams params = usf::make_shear_params(alpha, cc.b0);
  const usf::EigenSystem eig = usf::eigensystem(usf::build_matrix(params), params);
  const usf::Mat3 s_inf = usf::limit_semigroup(eig);
  json doc;
  doc["alpha"] = alpha;
  doc["b0"] = cc.b0;
  doc["beta"] = params.beta;
  doc["lambda2_re"] = eig.lambda[1].real();
  doc["lambda2_im"] = eig.lambda[1].imag();
  doc["S_infinity"] = {{s_inf[0][0], s_inf[0][1], s_inf[0][2]},
                       {s_inf[1][0], s_inf[1][1], s_inf[1][2]},
                       {s_inf[2][0], s_inf[2][1], s_inf[2][2]}};
  return doc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shear-flow kinetic simulator and moment verification harness"};
  app.require_subcommand(1);

  std::string family = "grad_cutoff";
  std::vector<double> coeffs;
  double alpha = 0.1;
  std::string config_path, out_path, csv_path;
  std::size_t n_pairs = 10000000;
  std::uint64_t seed = 1;
  bool reproducible = false;

  auto* cmd_constants = app.add_subcommand("constants", "Kernel collision constants");
  cmd_constants->add_option("--family", family);
  cmd_constants->add_option("--coeffs", coeffs);
  cmd_constants->add_option("--out", out_path);

  auto* cmd_beta = app.add_subcommand("beta", "Energy growth exponent for a shear rate");
  cmd_beta->add_option("--alpha", alpha)->required();
  cmd_beta->add_option("--family", family);
  cmd_beta->add_option("--coeffs", coeffs);
  cmd_beta->add_option("--out", out_path);

  auto* cmd_spectrum = app.add_subcommand("spectrum", "Moment matrix spectrum and limit projector");
  cmd_spectrum->add_option("--alpha", alpha)->required();
  cmd_spectrum->add_option("--family", family);
  cmd_spectrum->add_option("--coeffs", coeffs);
  cmd_spectrum->add_option("--out", out_path);

  auto* cmd_identities = app.add_subcommand("identities", "Collision-moment identity suite");
  cmd_identities->add_option("--n-pairs", n_pairs);
  cmd_identities->add_option("--seed", seed);
  cmd_identities->add_option("--out", out_path);

  auto* cmd_simulate = app.add_subcommand("simulate", "Run the particle simulation from a config");
  cmd_simulate->add_option("--config", config_path)->required();
  cmd_simulate->add_flag("--reproducible", reproducible);
  cmd_simulate->add_option("--out", out_path);

  auto* cmd_homog = app.add_subcommand("verify-homogeneous", "Homogeneous moment-tracking battery");
  cmd_homog->add_option("--config", config_path)->required();
  cmd_homog->add_flag("--reproducible", reproducible);
  cmd_homog->add_option("--out", out_path);

  auto* cmd_inhomog =
      app.add_subcommand("verify-inhomogeneous", "Inhomogeneous decay and limit-state battery");
  cmd_inhomog->add_option("--config", config_path)->required();
  cmd_inhomog->add_flag("--reproducible", reproducible);
  cmd_inhomog->add_option("--out", out_path);

  auto* cmd_report = app.add_subcommand("report", "Lab-frame energy growth table for a config");
  cmd_report->add_option("--config", config_path)->required();
  cmd_report->add_flag("--reproducible", reproducible);
  cmd_report->add_option("--csv", csv_path);
  cmd_report->add_option("--out", out_path);

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_constants->parsed()) {
      const usf::KernelSpec k = kernel_from_flags(family, coeffs);
      const usf::CollisionConstants cc = usf::derive_constants(k);
      json doc{{"family", family},
               {"coeffs", k.coeffs},
               {"sigma_T", cc.sigma_T},
               {"nu0", cc.nu0},
               {"b0", cc.b0},
               {"degenerate", cc.degenerate()}};
      emit(doc.dump(2), out_path);
    } else if (cmd_beta->parsed()) {
      const usf::KernelSpec k = kernel_from_flags(family, coeffs);
      const usf::CollisionConstants cc = usf::derive_constants(k);
      const double beta = usf::solve_beta(alpha, cc.b0);
      json doc{{"alpha", alpha},
               {"b0", cc.b0},
               {"beta", beta},
               {"residual", usf::beta_cubic_residual(beta, alpha, cc.b0)}};
      emit(doc.dump(2), out_path);
    } else if (cmd_spectrum->parsed()) {
      emit(spectrum_json(alpha, kernel_from_flags(family, coeffs)).dump(2), out_path);
    } else if (cmd_identities->parsed()) {
      bool pass = false;
      emit(usf::identities_report(n_pairs, seed, &pass), out_path);
      return pass ? 0 : 1;
    } else if (cmd_simulate->parsed()) {
      usf::SimConfig config = usf::sim_config_from(usf::ConfigMap::parse_file(config_path));
      if (reproducible) config.reproducible = true;
      const usf::RunResult result = usf::run(config);
      json doc{{"csv", result.csv_path},
               {"manifest", result.manifest_path},
               {"outputs", result.rows.size()},
               {"total_collisions", result.total_collisions},
               {"beta", result.params.beta}};
      emit(doc.dump(2), out_path);
    } else if (cmd_homog->parsed() || cmd_inhomog->parsed()) {
      usf::SimConfig config = usf::sim_config_from(usf::ConfigMap::parse_file(config_path));
      if (reproducible) config.reproducible = true;
      const usf::ExperimentReport rep =
          cmd_homog->parsed() ? usf::verify_homogeneous(config) : usf::verify_inhomogeneous(config);
      emit(rep.to_json(), out_path);
      return rep.all_pass() ? 0 : 1;
    } else if (cmd_report->parsed()) {
      usf::SimConfig config = usf::sim_config_from(usf::ConfigMap::parse_file(config_path));
      if (reproducible) config.reproducible = true;
      if (!csv_path.empty()) config.output_path = csv_path;
      const usf::RunResult result = usf::run(config);
      const usf::EigenSystem eig =
          usf::eigensystem(usf::build_matrix(result.params), result.params);
      usf::Vec3 u_inf;
      if (config.k_modes >= 1 && config.init.type == usf::InitSpec::Type::PerturbedMode)
        u_inf = usf::predict_U_infinity(eig, result.U_series.front(), result.source);
      else
        u_inf = usf::mat_vec(usf::limit_semigroup(eig), result.U_series.front());
      emit(usf::energy_growth_report(result, u_inf), out_path);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
