#pragma once

// Hydrodynamic fields derived from the spinor state: density, phase
// gradients, velocities, quantum potential, per-equation Eulerian residuals
// and circulation. Phase gradients are extracted as hbar Im[(D psi)/psi],
// which needs no unwrapping; S itself is only materialized along explicit
// line integrals and trajectories.

#include <optional>
#include <vector>

#include "emhydro/spectral_field.hpp"

namespace emhydro::eulerian {

inline constexpr double kDefaultTauNode = 1e-6;

struct SamplePoint {
  Eigen::Vector3d x;
  so3::EulerAngles ang;
};

struct HydroSample {
  double rho = 0.0;
  Eigen::Vector3d dS_x;      // d_i S
  Eigen::Vector3d dS_ang;    // d_r S (gamma component identically 0)
  Eigen::Vector3d lambda_S;  // lambda_i S = A_{ir} d_r S
  Eigen::Vector3d v;         // (c/hbar) lambda_i S
  Eigen::Vector3d omega;     // (c/hbar) d_i S
  Eigen::Vector3d v_conj;    // conjugate angular velocities A_{ri} omega_i
  double Q = 0.0;
  double div6 = 0.0;         // d_i v_i + lambda_i omega_i
  cplx psi;
};

// Minimal data needed when integrating one path step.
struct PathSample {
  Eigen::Vector3d v;
  Eigen::Vector3d theta_dot;
  double weber_kin = 0.0;  // (hbar/c) (A^-1)_{ir} v_i thetadot_r
  double Q = 0.0;
  double div6 = 0.0;
  double rho = 0.0;
};

struct QGradient {
  double Q = 0.0;
  Eigen::Vector3d dQ_x;
  Eigen::Vector3d dQ_ang;
};

// rho_floor is an absolute |psi|^2 threshold; pass tau_node * scale.
HydroSample hydro_sample(const FieldSlice& slice, const Eigen::Vector3d& x,
                         const so3::EulerAngles& ang, double rho_floor);
PathSample path_sample(const FieldSlice& slice, const Eigen::Vector3d& x,
                       const so3::EulerAngles& ang, double rho_floor);
// velocities only (used for deformation cloud points)
void velocity_sample(const FieldSlice& slice, const Eigen::Vector3d& x,
                     const so3::EulerAngles& ang, double rho_floor,
                     Eigen::Vector3d& v, Eigen::Vector3d& theta_dot);
QGradient q_gradient(const FieldSlice& slice, const Eigen::Vector3d& x,
                     const so3::EulerAngles& ang, double rho_floor);

// max |psi|^2 over grid points x quadrature nodes at the slice's current time
double rho_scale(const FieldSlice& slice, const so3::AngularQuadrature& quad);

// Batch polar decomposition over a sample set; the node threshold is
// tau_node relative to the max |psi|^2 over this very set.
struct HydroFields {
  std::vector<SamplePoint> points;
  std::vector<HydroSample> samples;
  double rho_max = 0.0;
};
HydroFields polar_decompose(const SpectralField& field, double t,
                            const std::vector<SamplePoint>& points,
                            double tau_node = kDefaultTauNode);

double quantum_potential(const SpectralField& field, double t,
                         const SamplePoint& at, double tau_node = kDefaultTauNode);

// --- Eulerian residual checker ----------------------------------------------

// Max-norm residuals of the polar-form field equations over a node-avoiding
// sample set. Time derivatives use 5-point centered differences with spacing
// dt_frac of the dominant period; everything else is spectral/analytic.
struct EulerResiduals {
  double bernoulli = 0.0;     // (2.18)
  double continuity = 0.0;    // (2.19)
  double euler_omega = 0.0;   // (2.24)
  double euler_v = 0.0;       // (2.25)
  double euler_conj = 0.0;    // (2.28)
  double euler_coriolis = 0.0;// (2.29)
  double max() const;
};

EulerResiduals euler_residuals(const SpectralField& field, double t,
                               const std::vector<SamplePoint>& samples,
                               double dt_frac = 1e-4,
                               double tau_node = kDefaultTauNode);

// --- circulation --------------------------------------------------------------

// Closed polyline in (x, angles); consecutive vertices are joined by straight
// segments in the six coordinates and the last vertex connects back to the
// first. Must avoid node tubes.
struct Loop {
  std::vector<SamplePoint> vertices;
};

struct CirculationResult {
  int n = 0;          // winding number
  double defect = 0;  // |integral/h - n|
  double integral = 0;
};

CirculationResult circulation(const SpectralField& field, double t, const Loop& loop,
                              int gauss_per_segment = 8,
                              double tau_node = kDefaultTauNode);

}  // namespace emhydro::eulerian
