#pragma once

// The four equivalent field descriptions on a periodic grid:
// (E, B) <-> Riemann-Silberstein F <-> spinor G_a <-> angular wavefunction psi,
// plus the observables built from them.

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "emhydro/constants.hpp"
#include "emhydro/errors.hpp"
#include "emhydro/so3.hpp"

namespace emhydro::fields {

using cplx = std::complex<double>;

struct GridSpec {
  std::array<int, 3> dims{1, 1, 1};        // (Nx, Ny, Nz); N=1 collapses an axis
  std::array<double, 3> spacing{1, 1, 1};  // (dx, dy, dz); periodic in all axes

  size_t size() const {
    return static_cast<size_t>(dims[0]) * dims[1] * dims[2];
  }
  // z-fastest linear index
  size_t index(int ix, int iy, int iz) const {
    return (static_cast<size_t>(ix) * dims[1] + iy) * dims[2] + iz;
  }
  double extent(int axis) const { return dims[axis] * spacing[axis]; }
  double cell_volume() const { return spacing[0] * spacing[1] * spacing[2]; }
  Eigen::Vector3d point(int ix, int iy, int iz) const {
    return {ix * spacing[0], iy * spacing[1], iz * spacing[2]};
  }
  // signed harmonic -> angular wavenumber along an axis
  double wavenumber(int axis, int harmonic) const {
    return kTwoPi * harmonic / extent(axis);
  }
  int signed_harmonic(int axis, int bin) const {
    return bin <= dims[axis] / 2 ? bin : bin - dims[axis];
  }
  bool operator==(const GridSpec&) const = default;

  void validate() const {
    for (int a = 0; a < 3; ++a) {
      if (dims[a] < 1 || !(spacing[a] > 0.0)) {
        throw ShapeMismatch("invalid grid dimensions/spacing");
      }
    }
  }
};

struct EMFieldGrid {
  GridSpec grid;
  std::array<std::vector<double>, 3> E;
  std::array<std::vector<double>, 3> B;

  static EMFieldGrid zeros(const GridSpec& g);
};

struct RSField {
  GridSpec grid;
  std::array<std::vector<cplx>, 3> F;

  static RSField zeros(const GridSpec& g);
};

// Canonical Eulerian state: complex triple G_a per grid point, a-major with
// index 0 <-> a=+1, 1 <-> a=0, 2 <-> a=-1.
struct SpinorField {
  GridSpec grid;
  std::array<std::vector<cplx>, 3> G;

  static SpinorField zeros(const GridSpec& g);
  // integral of G_a* G_a over the box (total field energy)
  double energy(const PhysicalConstants& k) const;
};

struct Observables {
  GridSpec grid;
  std::vector<double> energy_density;
  std::array<std::vector<double>, 3> poynting;
};

// --- conversions (pointwise linear maps, mutually inverse) -------------------

RSField em_to_rs(const EMFieldGrid& f, const PhysicalConstants& k);
EMFieldGrid rs_to_em(const RSField& f, const PhysicalConstants& k);
SpinorField rs_to_spinor(const RSField& f);
RSField spinor_to_rs(const SpinorField& g);
SpinorField em_to_spinor(const EMFieldGrid& f, const PhysicalConstants& k);
EMFieldGrid spinor_to_em(const SpinorField& g, const PhysicalConstants& k);

// psi(x, angles) = G_a(x) u_a(angles) at a grid point
cplx psi_eval(const SpinorField& g, size_t point, const so3::EulerAngles& angles);

// projection G_a = integral psi u_a* dOmega at fixed x
std::array<cplx, 3> spinor_from_psi(
    const std::function<cplx(const so3::EulerAngles&)>& psi,
    const so3::AngularQuadrature& q);

// --- observables --------------------------------------------------------------

enum class ObservableRoute { EB, RiemannSilberstein, Spinor, AngularIntegral };

Observables observables(const SpinorField& g, const PhysicalConstants& k,
                        ObservableRoute route,
                        const so3::AngularQuadrature* quad = nullptr);

// spectral max|div E|, max|div B|
std::pair<double, double> check_divergence(const EMFieldGrid& f);

}  // namespace emhydro::fields
