#pragma once

// Recovery of the Maxwell field from the trajectory flow alone: invert the
// label map by backward integration, transport density through the flow-map
// Jacobian, transport phase by the Weber integral (cross-checked against the
// line integral of the velocity-derived gradients), project psi back onto the
// spin-1 basis and read off E and B.

#include "emhydro/lagrangian.hpp"

namespace emhydro::recon {

using eulerian::SpectralField;
using lagrangian::FluidLabel;
using so3::Matrix6d;

struct QueryPoint {
  Eigen::Vector3d x;
  so3::EulerAngles ang;
};

struct ReconOptions {
  double dt = 0.0;             // backward/forward integration step
  int n_alpha = 8;             // projection quadrature orders
  int n_beta = 8;
  int n_gamma = 4;
  double fd_step_rel = 1e-4;   // Jacobian cloud step, fraction of domain scale
  double tau_node = eulerian::kDefaultTauNode;
  bool check_roundtrip = true;
  double roundtrip_tol = 1e-6;  // forward-verification mismatch that flags a query
  int workers = 1;
};

struct LabelMapSample {
  QueryPoint query;
  FluidLabel label;
  double residual = 0.0;  // forward re-integration mismatch
};

struct QueryRecon {
  FluidLabel label;
  double roundtrip = 0.0;
  double rho = 0.0;
  double S = 0.0;            // Weber-transported phase
  double J = 1.0;            // flow-map Jacobian determinant
  double D = 1.0;            // deformation factor (sqrt(-g) ratio times J)
  double D_transport = 1.0;  // divergence-transport route, for cross-checks
  uint32_t flags = lagrangian::kFlagNone;
  std::complex<double> psi{};
  Eigen::Matrix<double, 6, 1> gradS;  // (dS_x, dS_ang) at the query via velocities

  bool ok() const { return flags == lagrangian::kFlagNone; }
};

struct ReconstructedState {
  double t = 0.0;
  fields::GridSpec grid;
  so3::AngularQuadrature quad;
  std::vector<QueryRecon> queries;  // grid-point major, quadrature-node minor
  fields::SpinorField G;
  fields::EMFieldGrid em;
  double f_t = 0.0;              // phase gauge pinned at the reference query
  double phase_method_gap = 0.0; // max |S_weber - S_line| mod h on the check chains
  double max_roundtrip = 0.0;
  size_t flagged = 0;
  size_t ref_query = 0;

  size_t query_index(size_t point, size_t node) const {
    return point * quad.nodes.size() + node;
  }
};

ReconstructedState reconstruct(const SpectralField& field, double t,
                               const ReconOptions& opt);

// single-query label inversion with forward verification
LabelMapSample invert_labels(const SpectralField& field, double t,
                             const QueryPoint& query, const ReconOptions& opt);

// Flow-map derivative data on a forward-integrated label lattice, by centered
// differences between neighbouring trajectories.
struct DeformationData {
  std::vector<Matrix6d> flow_jac;   // d xi / d xi0
  std::vector<Matrix6d> cofactor;   // J^sigma_mu, satisfies (d xi/d xi0) J = J delta
  std::vector<double> J;
  std::vector<double> D;
  std::vector<double> log_D_transport;  // from the transported log-density
  double min_D = 0.0, max_D = 0.0;
};

DeformationData deformation(const lagrangian::EnsembleSpec& spec,
                            const std::vector<lagrangian::Trajectory>& forward,
                            double t);

struct CompareReport {
  double phase = 0.0;  // global phase applied to the test state
  double rel_l2_G = 0.0;
  double max_abs_G = 0.0;
  double rel_l2_E = 0.0;
  double rel_l2_B = 0.0;
  double rel_l2_EB = 0.0;  // combined (E, cB) norm; robust when one field is ~0
  double energy_rel = 0.0;
  double div_E = 0.0, div_B = 0.0;
};

// Global-phase-aligned error norms; mask (per grid point, 0 or 1) restricts
// the comparison, e.g. to keep away from nodal planes.
CompareReport compare(const fields::SpinorField& test, const fields::SpinorField& ref,
                      const PhysicalConstants& k,
                      const std::vector<double>* mask = nullptr);

}  // namespace emhydro::recon
