#include "emhydro/config.hpp"

#include <fstream>
#include <sstream>

namespace emhydro::cfg {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& v, const std::string& key) {
  try {
    size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return d;
  } catch (...) {
    throw ConfigError("bad numeric value for '" + key + "': " + v);
  }
}

int to_int(const std::string& v, const std::string& key) {
  try {
    size_t pos = 0;
    const int d = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return d;
  } catch (...) {
    throw ConfigError("bad integer value for '" + key + "': " + v);
  }
}

FieldComponent parse_component(const std::string& v) {
  std::istringstream is(v);
  FieldComponent comp;
  if (!(is >> comp.n[0] >> comp.n[1] >> comp.n[2] >> comp.pol >> comp.amplitude)) {
    throw ConfigError("component wants 'nx ny nz pol amplitude [phase]': " + v);
  }
  is >> comp.phase;  // optional
  if (comp.pol != "x" && comp.pol != "y" && comp.pol != "z") {
    throw ConfigError("component polarization must be x, y or z");
  }
  return comp;
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::array<double, 3> box{1.0, 1.0, 1.0};
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": bad section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    const std::string qual = section + "." + key;

    if (qual == "constants.hbar") cfg.constants.hbar = to_double(val, qual);
    else if (qual == "constants.c") cfg.constants.c = to_double(val, qual);
    else if (qual == "constants.eps0") cfg.constants.eps0 = to_double(val, qual);
    else if (qual == "constants.l") cfg.constants.l = to_double(val, qual);
    else if (qual == "grid.nx") cfg.grid.dims[0] = to_int(val, qual);
    else if (qual == "grid.ny") cfg.grid.dims[1] = to_int(val, qual);
    else if (qual == "grid.nz") cfg.grid.dims[2] = to_int(val, qual);
    else if (qual == "grid.lx") box[0] = to_double(val, qual);
    else if (qual == "grid.ly") box[1] = to_double(val, qual);
    else if (qual == "grid.lz") box[2] = to_double(val, qual);
    else if (qual == "field.preset") {
      if (val == "plane_wave") cfg.field.preset = FieldSpec::Preset::PlaneWave;
      else if (val == "standing_wave") cfg.field.preset = FieldSpec::Preset::StandingWave;
      else if (val == "superposition") cfg.field.preset = FieldSpec::Preset::Superposition;
      else throw ConfigError("unknown field preset: " + val);
    } else if (qual == "field.amplitude") cfg.field.amplitude = to_double(val, qual);
    else if (qual == "field.harmonic") cfg.field.harmonic = to_int(val, qual);
    else if (qual == "field.polarization") cfg.field.polarization = val;
    else if (qual == "field.component") cfg.field.components.push_back(parse_component(val));
    else if (qual == "ensemble.nx") cfg.ensemble_counts[0] = to_int(val, qual);
    else if (qual == "ensemble.ny") cfg.ensemble_counts[1] = to_int(val, qual);
    else if (qual == "ensemble.nz") cfg.ensemble_counts[2] = to_int(val, qual);
    else if (qual == "ensemble.n_theta1") cfg.ensemble_counts[3] = to_int(val, qual);
    else if (qual == "ensemble.n_theta2") cfg.ensemble_counts[4] = to_int(val, qual);
    else if (qual == "ensemble.n_theta3") cfg.ensemble_counts[5] = to_int(val, qual);
    else if (qual == "ensemble.sample_stride") cfg.sample_stride = to_int(val, qual);
    else if (qual == "integrator.dt_fraction") cfg.dt_fraction = to_double(val, qual);
    else if (qual == "integrator.t_final") cfg.t_final = to_double(val, qual);
    else if (qual == "quadrature.n_alpha") cfg.quad_alpha = to_int(val, qual);
    else if (qual == "quadrature.n_beta") cfg.quad_beta = to_int(val, qual);
    else if (qual == "quadrature.n_gamma") cfg.quad_gamma = to_int(val, qual);
    else if (qual == "reconstruction.n_alpha") cfg.recon_alpha = to_int(val, qual);
    else if (qual == "reconstruction.n_beta") cfg.recon_beta = to_int(val, qual);
    else if (qual == "reconstruction.n_gamma") cfg.recon_gamma = to_int(val, qual);
    else if (qual == "reconstruction.dt_fraction") cfg.recon_dt_fraction = to_double(val, qual);
    else if (qual == "reconstruction.fd_step_rel") cfg.fd_step_rel = to_double(val, qual);
    else if (qual == "output.dir") cfg.output_dir = val;
    else {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": unknown key '" +
                        qual + "'");
    }
  }

  try {
    cfg.constants.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  for (int a = 0; a < 3; ++a) {
    if (cfg.grid.dims[a] < 1 || !(box[a] > 0.0)) {
      throw ConfigError("grid dims must be >= 1 and extents positive");
    }
    cfg.grid.spacing[a] = box[a] / cfg.grid.dims[a];
  }
  for (int c : cfg.ensemble_counts) {
    if (c < 1) throw ConfigError("ensemble counts must be >= 1");
  }
  if (!(cfg.dt_fraction > 0.0) || !(cfg.recon_dt_fraction > 0.0)) {
    throw ConfigError("dt fractions must be positive");
  }
  if (cfg.t_final < 0.0) throw ConfigError("t_final must be >= 0");
  if (cfg.quad_alpha < 1 || cfg.quad_beta < 1 || cfg.quad_gamma < 1 ||
      cfg.recon_alpha < 1 || cfg.recon_beta < 1 || cfg.recon_gamma < 1) {
    throw ConfigError("quadrature orders must be >= 1");
  }
  if (cfg.field.preset == FieldSpec::Preset::Superposition &&
      cfg.field.components.empty()) {
    throw ConfigError("superposition preset needs at least one component");
  }
  if (cfg.field.preset != FieldSpec::Preset::Superposition &&
      cfg.field.harmonic == 0) {
    throw ConfigError("field harmonic must be nonzero");
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config: " + path);
  std::stringstream buf;
  buf << is.rdbuf();
  return parse_config_text(buf.str(), path);
}

}  // namespace emhydro::cfg
