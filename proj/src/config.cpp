#include "usf/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "usf/dsmc.hpp"
#include "usf/sha1.hpp"

namespace usf {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  return out;
}

std::array<int, 3> parse_int3(const std::string& s) {
  const auto v = parse_double_list(s);
  if (v.size() != 3) throw std::invalid_argument("config: expected three comma-separated integers");
  return {static_cast<int>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2])};
}

}  // namespace

ConfigMap ConfigMap::parse_string(const std::string& text) {
  ConfigMap map;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: missing '=' on line " + std::to_string(lineno));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument("config: empty key on line " + std::to_string(lineno));
    map.kv[key] = value;
  }
  return map;
}

ConfigMap ConfigMap::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str());
}

std::string ConfigMap::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = kv.find(key);
  return it == kv.end() ? fallback : it->second;
}

std::string ConfigMap::require_string(const std::string& key) const {
  const auto it = kv.find(key);
  if (it == kv.end()) throw std::invalid_argument("config: missing required key '" + key + "'");
  return it->second;
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
  const auto it = kv.find(key);
  return it == kv.end() ? fallback : std::stod(it->second);
}

double ConfigMap::require_double(const std::string& key) const {
  return std::stod(require_string(key));
}

std::int64_t ConfigMap::get_int(const std::string& key, std::int64_t fallback) const {
  const auto it = kv.find(key);
  return it == kv.end() ? fallback : std::stoll(it->second);
}

bool ConfigMap::get_bool(const std::string& key, bool fallback) const {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("config: bad boolean for '" + key + "'");
}

SimConfig sim_config_from(const ConfigMap& map) {
  static const std::set<std::string> known = {
      "alpha",          "n_particles",  "grid",        "dt",
      "t_end",          "seed",         "output_every", "k_modes",
      "kernel.family",  "kernel.coeffs", "profile.order", "profile.truncation_radius",
      "init.type",      "init.mode",    "init.amplitude", "init.shape",
      "init.u0",        "output.path",  "output.manifest", "reproducible",
      "threads"};
  for (const auto& [key, value] : map.kv) {
    (void)value;
    if (!known.count(key)) throw std::invalid_argument("config: unknown key '" + key + "'");
  }

  SimConfig c;
  c.alpha = map.require_double("alpha");
  c.n_particles = static_cast<std::size_t>(map.get_int("n_particles", 0));
  c.grid = static_cast<int>(map.get_int("grid", 1));
  c.dt = map.require_double("dt");
  c.t_end = map.require_double("t_end");
  c.seed = static_cast<std::uint64_t>(map.get_int("seed", 1));
  c.output_every = static_cast<int>(map.get_int("output_every", 1));
  c.k_modes = static_cast<int>(map.get_int("k_modes", 0));

  const std::string family = map.get_string("kernel.family", "grad_cutoff");
  if (family == "grad_cutoff")
    c.kernel.family = KernelFamily::GradCutoff;
  else if (family == "constant")
    c.kernel.family = KernelFamily::Constant;
  else if (family == "even_poly")
    c.kernel.family = KernelFamily::EvenPolynomial;
  else
    throw std::invalid_argument("config: unknown kernel.family '" + family + "'");
  c.kernel.coeffs = parse_double_list(map.get_string("kernel.coeffs", "1.0"));

  const auto order = map.get_int("profile.order", 1);
  if (order == 0)
    c.profile_order = ProfileOrder::Maxwellian;
  else if (order == 1)
    c.profile_order = ProfileOrder::FirstOrder;
  else
    throw std::invalid_argument("config: profile.order must be 0 or 1");
  c.truncation_radius = map.get_double("profile.truncation_radius", 8.0);

  const std::string init = map.get_string("init.type", "profile");
  if (init == "profile")
    c.init.type = InitSpec::Type::Profile;
  else if (init == "perturbed")
    c.init.type = InitSpec::Type::PerturbedMode;
  else if (init == "gaussian")
    c.init.type = InitSpec::Type::Gaussian;
  else
    throw std::invalid_argument("config: unknown init.type '" + init + "'");
  if (map.has("init.mode")) c.init.mode = parse_int3(map.require_string("init.mode"));
  c.init.amplitude = map.get_double("init.amplitude", 0.0);
  const std::string shape = map.get_string("init.shape", "mass");
  if (shape == "mass")
    c.init.shape = InitSpec::Shape::Mass;
  else if (shape == "d12")
    c.init.shape = InitSpec::Shape::D12;
  else if (shape == "energy")
    c.init.shape = InitSpec::Shape::Energy;
  else
    throw std::invalid_argument("config: unknown init.shape '" + shape + "'");
  if (map.has("init.u0")) {
    const auto u = parse_double_list(map.require_string("init.u0"));
    if (u.size() != 3) throw std::invalid_argument("config: init.u0 needs three components");
    c.init.u0 = {u[0], u[1], u[2]};
  }

  c.output_path = map.get_string("output.path", "");
  c.manifest_path = map.get_string("output.manifest", "");
  c.reproducible = map.get_bool("reproducible", false);
  c.threads = static_cast<int>(map.get_int("threads", 2));
  return c;
}

std::string config_echo(const SimConfig& c) {
  std::ostringstream os;
  char buf[64];
  auto num = [&](double x) {
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return std::string(buf);
  };
  os << "alpha = " << num(c.alpha) << "\n";
  os << "n_particles = " << c.n_particles << "\n";
  os << "grid = " << c.grid << "\n";
  os << "dt = " << num(c.dt) << "\n";
  os << "t_end = " << num(c.t_end) << "\n";
  os << "seed = " << c.seed << "\n";
  os << "output_every = " << c.output_every << "\n";
  os << "k_modes = " << c.k_modes << "\n";
  switch (c.kernel.family) {
    case KernelFamily::GradCutoff: os << "kernel.family = grad_cutoff\n"; break;
    case KernelFamily::Constant: os << "kernel.family = constant\n"; break;
    case KernelFamily::EvenPolynomial: os << "kernel.family = even_poly\n"; break;
  }
  os << "kernel.coeffs = ";
  for (std::size_t i = 0; i < c.kernel.coeffs.size(); ++i)
    os << (i ? "," : "") << num(c.kernel.coeffs[i]);
  os << "\n";
  os << "profile.order = " << (c.profile_order == ProfileOrder::Maxwellian ? 0 : 1) << "\n";
  os << "profile.truncation_radius = " << num(c.truncation_radius) << "\n";
  switch (c.init.type) {
    case InitSpec::Type::Profile: os << "init.type = profile\n"; break;
    case InitSpec::Type::PerturbedMode: os << "init.type = perturbed\n"; break;
    case InitSpec::Type::Gaussian: os << "init.type = gaussian\n"; break;
  }
  os << "init.mode = " << c.init.mode[0] << "," << c.init.mode[1] << "," << c.init.mode[2] << "\n";
  os << "init.amplitude = " << num(c.init.amplitude) << "\n";
  switch (c.init.shape) {
    case InitSpec::Shape::Mass: os << "init.shape = mass\n"; break;
    case InitSpec::Shape::D12: os << "init.shape = d12\n"; break;
    case InitSpec::Shape::Energy: os << "init.shape = energy\n"; break;
  }
  os << "init.u0 = " << num(c.init.u0[0]) << "," << num(c.init.u0[1]) << "," << num(c.init.u0[2])
     << "\n";
  os << "output.path = " << c.output_path << "\n";
  os << "reproducible = " << (c.reproducible ? "true" : "false") << "\n";
  os << "threads = " << c.threads << "\n";
  return os.str();
}

void write_manifest(const std::string& path, const SimConfig& config, const RunResult& result,
                    std::uint64_t n_steps) {
  const std::string echo = config_echo(config);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_manifest: cannot open " + path);
  auto jstr = [](const std::string& s) {
    std::string r = "\"";
    for (char ch : s) {
      if (ch == '"' || ch == '\\') r += '\\';
      if (ch == '\n') {
        r += "\\n";
        continue;
      }
      r += ch;
    }
    return r + "\"";
  };
  char buf[64];
  auto num = [&](double x) {
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return std::string(buf);
  };
  out << "{\n";
  out << "  \"format\": \"usfkin-manifest-v1\",\n";
  out << "  \"config\": " << jstr(echo) << ",\n";
  out << "  \"config_hash\": " << jstr(git_blob_sha1(echo)) << ",\n";
  out << "  \"seed\": " << config.seed << ",\n";
  out << "  \"csv\": " << jstr(result.csv_path) << ",\n";
  out << "  \"n_steps\": " << n_steps << ",\n";
  out << "  \"reproducible\": " << (config.reproducible ? "true" : "false") << ",\n";
  out << "  \"derived\": {\n";
  out << "    \"sigma_T\": " << num(result.constants.sigma_T) << ",\n";
  out << "    \"nu0\": " << num(result.constants.nu0) << ",\n";
  out << "    \"b0\": " << num(result.constants.b0) << ",\n";
  out << "    \"beta\": " << num(result.params.beta) << ",\n";
  out << "    \"reference\": [" << num(result.reference.energy) << ", " << num(result.reference.d12)
      << ", " << num(result.reference.d22) << "]\n";
  out << "  }\n";
  out << "}\n";
}

}  // namespace usf
