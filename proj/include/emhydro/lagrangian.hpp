#pragma once

// Fluid-element trajectories on R^3 (x) SO(3): guided integration through the
// Eulerian phase-gradient fields (with Weber phase and log-density transported
// along each path), the self-contained Q=0 classical mode, Newton-law
// residuals and material-loop circulation.

#include <cstdint>
#include <vector>

#include "emhydro/hydro.hpp"

namespace emhydro::lagrangian {

using eulerian::SpectralField;

struct FluidLabel {
  Eigen::Vector3d q0;
  so3::EulerAngles theta0;
};

enum TrajFlag : uint32_t {
  kFlagNone = 0,
  kFlagNode = 1u << 0,
  kFlagPole = 1u << 1,
  kFlagStep = 1u << 2,
};

struct TrajectorySample {
  double t = 0.0;
  Eigen::Vector3d q;
  Eigen::Vector3d theta;  // raw continuous angles (windings not reduced)
  Eigen::Vector3d qdot;
  Eigen::Vector3d thetadot;
  double S_weber = 0.0;
  double log_rho = 0.0;
};

struct Trajectory {
  FluidLabel label;
  std::vector<TrajectorySample> samples;
  uint32_t flags = kFlagNone;

  bool ok() const { return flags == kFlagNone; }
  const TrajectorySample& back() const { return samples.back(); }
  // canonical angles plus completed beta/gamma windings for a sample
  static so3::EulerAngles canonical(const Eigen::Vector3d& theta, int& wind_beta,
                                    int& wind_gamma);
};

struct IntegratorOptions {
  double dt = 0.0;
  double t_final = 0.0;
  int sample_stride = 0;       // 0: record endpoints only
  double tau_node = eulerian::kDefaultTauNode;
  double step_safety = 0.25;   // max step displacement as fraction of box/pi
  double rho_floor = -1.0;     // absolute floor; <0: tau_node * field scale
};

// Batch lockstep RK4 through the Eulerian fields; trajectories are
// independent, so any partition of the batch gives identical results.
class GuidedIntegrator {
 public:
  GuidedIntegrator(const SpectralField& field, const IntegratorOptions& opt);

  std::vector<Trajectory> integrate(const std::vector<FluidLabel>& labels,
                                    double t0, double t1) const;
  Trajectory integrate_one(const FluidLabel& label, double t0, double t1) const;

  double rho_floor() const { return rho_floor_; }

 private:
  const SpectralField* field_;
  IntegratorOptions opt_;
  double rho_floor_;
  double max_step_;
};

// initial conditions from the gradients of S0 at the label
void initial_velocity(const FluidLabel& label, const Eigen::Vector3d& dS0_x,
                      const Eigen::Vector3d& dS0_ang, const PhysicalConstants& k,
                      Eigen::Vector3d& qdot0, Eigen::Vector3d& thetadot0);

// Q = 0 classical mode: omega constant along the path, v precesses about it.
Trajectory integrate_classical(const FluidLabel& label, const Eigen::Vector3d& qdot0,
                               const Eigen::Vector3d& omega0,
                               const PhysicalConstants& k,
                               const IntegratorOptions& opt);

struct NewtonResidual {
  std::vector<double> t;
  std::vector<Eigen::Vector3d> eq_q;      // (4.3) residual vectors
  std::vector<Eigen::Vector3d> eq_theta;  // (4.4) residual vectors
  double max_q = 0.0;
  double max_theta = 0.0;
};

// Finite-difference accelerations from the stored samples inserted into the
// Newton law, with Q-gradients from the Eulerian state.
NewtonResidual newton_residual(const SpectralField& field, const Trajectory& traj);

// Circulation of the covariant velocity around an evolved material loop, in
// action units (compare against n h). The chain must be dense enough that
// consecutive gaps stay below half a period in the angles.
double circulation_transport(const SpectralField& field,
                             const std::vector<FluidLabel>& loop, double t,
                             const IntegratorOptions& opt);

struct EnsembleSpec {
  std::array<int, 6> counts{1, 1, 1, 1, 1, 1};  // (x, y, z, t1, t2, t3)
  std::array<double, 3> box{1.0, 1.0, 1.0};
  double dt = 0.0;
  double t_final = 0.0;
  int sample_stride = 0;
};

// Half-step offset lattice; avoids alpha poles by construction. Node
// filtering against the initial state is the caller's job.
std::vector<FluidLabel> make_label_lattice(const EnsembleSpec& spec);

struct ActionSample {
  double total = 0.0;
  double kinetic = 0.0;
  double internal = 0.0;  // quantum-potential-type term
  double gross = 0.0;     // weighted |integrand| magnitude, for scale checks
};

// Lagrangian-density quadrature over the ensemble at the stored sample time
// nearest t (values reported per unit of the length constant l).
ActionSample action_eval(const SpectralField& field, double t,
                         const std::vector<Trajectory>& ensemble,
                         const EnsembleSpec& spec);

}  // namespace emhydro::lagrangian
