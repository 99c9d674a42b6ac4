#pragma once

// Plain-text sectioned key=value run configuration. No environment lookups;
// a config file fully determines a run.

#include <array>
#include <string>
#include <vector>

#include "emhydro/fields.hpp"

namespace emhydro::cfg {

struct FieldComponent {
  std::array<int, 3> n{0, 0, 1};  // integer harmonics
  std::string pol = "x";          // x | y | z (projected transverse to k)
  double amplitude = 1.0;
  double phase = 0.0;
};

struct FieldSpec {
  enum class Preset { PlaneWave, StandingWave, Superposition };
  Preset preset = Preset::PlaneWave;
  double amplitude = 1.0;
  int harmonic = 1;                      // along z
  std::string polarization = "linear_x"; // linear_x | linear_y | circular_plus | circular_minus
  std::vector<FieldComponent> components;
};

struct RunConfig {
  PhysicalConstants constants;
  fields::GridSpec grid{{1, 1, 64}, {1.0 / 64, 1.0 / 64, 1.0 / 64}};
  FieldSpec field;

  std::array<int, 6> ensemble_counts{1, 1, 16, 16, 8, 4};
  int sample_stride = 0;

  double dt_fraction = 1e-3;  // trajectory dt as fraction of the dominant period
  double t_final = 1.0;

  int quad_alpha = 32, quad_beta = 32, quad_gamma = 8;

  int recon_alpha = 8, recon_beta = 8, recon_gamma = 4;
  double recon_dt_fraction = 4e-3;
  double fd_step_rel = 1e-4;

  std::string output_dir = "out";
};

RunConfig parse_config_text(const std::string& text, const std::string& origin);
RunConfig load_config(const std::string& path);

}  // namespace emhydro::cfg
