#pragma once

// Fourier-mode representation of the spinor field with exact in-time
// propagation (per-mode matrix exponential of the helicity operator), plus
// point evaluation of psi and its spatial/angular derivatives anywhere on
// R^3 (x) SO(3) at any time. This is the Eulerian reference solution that
// guides trajectories and benchmarks reconstructions.

#include <array>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "emhydro/fields.hpp"

namespace emhydro::eulerian {

using cplx = std::complex<double>;

struct Mode {
  std::array<int, 3> n{};   // integer harmonics per axis
  Eigen::Vector3d k;        // wavevector
  Eigen::Vector3cd g0;      // G_a coefficients at t=0, a-major
};

// exp(-i c t k.J / hbar) acting on coefficient triples; uses P^3 = P for the
// spin-1 helicity operator P = khat.J/hbar, so the exponential is
// I - i sin(theta) P + (cos(theta) - 1) P^2 with theta = c |k| t.
Eigen::Matrix3cd mode_propagator(const Eigen::Vector3d& k, double c, double t);

// Exact mode-wise propagation of a grid state (all FFT bins, no pruning).
fields::SpinorField evolve_spinor(const fields::SpinorField& g0, double t,
                                  const PhysicalConstants& consts);

class SpectralField {
 public:
  SpectralField(fields::GridSpec grid, PhysicalConstants consts,
                std::vector<Mode> modes);

  // FFT analysis of a grid state; modes with |g| <= prune_rel * max|g| dropped.
  static SpectralField from_grid(const fields::SpinorField& g,
                                 const PhysicalConstants& consts,
                                 double prune_rel = 1e-14);

  fields::SpinorField to_grid(double t) const;

  const fields::GridSpec& grid() const { return grid_; }
  const PhysicalConstants& constants() const { return consts_; }
  const std::vector<Mode>& modes() const { return modes_; }
  const std::array<int, 3>& max_harmonic() const { return max_harmonic_; }

  double energy() const;             // integral G* G d^3x (Parseval)
  double max_longitudinal() const;   // max over modes of |khat . Fhat| (0 = transverse)
  double max_wavenumber() const;
  // period of the fastest retained mode; the dominant optical time scale
  double dominant_period() const;

 private:
  fields::GridSpec grid_;
  PhysicalConstants consts_;
  std::vector<Mode> modes_;
  std::array<int, 3> max_harmonic_{0, 0, 0};
};

// Derivative table of psi at one point: d[s][r] with s a spatial multi-index
// (0:value, 1..3: d_x d_y d_z, 4..9: xx xy xz yy yz zz) and r an angular
// multi-index (0:value, 1:d_alpha, 2:d_beta, 3:aa, 4:ab, 5:bb). Derivatives
// in gamma vanish identically on the spin-1 span.
struct PsiTable {
  std::array<std::array<cplx, 6>, 10> d{};
  int spatial_order = 0;
  int angular_order = 0;

  cplx psi() const { return d[0][0]; }
};

inline constexpr int kSpatialPairIndex[3][3] = {{4, 5, 6}, {5, 7, 8}, {6, 8, 9}};
inline constexpr int kAngularPairIndex[2][2] = {{3, 4}, {4, 5}};

// Evaluates the field and its derivatives at arbitrary points for a fixed
// time. set_time is cheap (one 3x3 rotation per retained mode), so callers
// integrating ODE ensembles in lockstep re-prepare per stage time. Not
// shareable across threads; each worker owns a copy.
class FieldSlice {
 public:
  explicit FieldSlice(const SpectralField& field);

  void set_time(double t);
  double time() const { return t_; }
  const SpectralField& field() const { return *field_; }

  // G_a and spatial derivatives at x: out[a][s] for s up to the requested order.
  void eval_g(const Eigen::Vector3d& x, int spatial_order,
              std::array<std::array<cplx, 10>, 3>& out) const;

  PsiTable eval_psi(const Eigen::Vector3d& x, const so3::EulerAngles& ang,
                    int spatial_order, int angular_order) const;

 private:
  const SpectralField* field_;
  double t_ = 0.0;
  std::vector<Eigen::Vector3cd> gt_;  // coefficients rotated to time t_
  mutable std::vector<cplx> pow_[3];  // per-axis phase power workspaces
};

}  // namespace emhydro::eulerian
