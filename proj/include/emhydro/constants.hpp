#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace emhydro {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// hbar only supplies the action scale of the hydrodynamic decomposition; it
// cancels out of trajectories, as does the manifold length constant l.
struct PhysicalConstants {
  double hbar = 1.0;
  double c = 1.0;
  double eps0 = 1.0;
  double l = 1.0;

  double h() const { return kTwoPi * hbar; }

  void validate() const {
    if (!(hbar > 0.0) || !(c > 0.0) || !(eps0 > 0.0) || !(l > 0.0)) {
      throw std::invalid_argument("physical constants must be positive");
    }
  }
};

}  // namespace emhydro
