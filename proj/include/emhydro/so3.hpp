#pragma once

// Euler-angle geometry of SO(3): body-frame matrices, spin-1 basis functions,
// angular momentum operators, quadrature over the group, and the 6-D metric
// of R^3 (x) SO(3).

#include <array>
#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "emhydro/constants.hpp"
#include "emhydro/errors.hpp"

namespace emhydro::so3 {

using cplx = std::complex<double>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;

// Angular distance from alpha to the nearest pole (multiple of pi) below
// which the chart is treated as singular.
inline constexpr double kPoleEps = 1e-9;

struct EulerAngles {
  double alpha = 0.0;  // [0, pi]
  double beta = 0.0;   // [0, 2pi)
  double gamma = 0.0;  // [0, 2pi)

  double pole_distance() const { return std::abs(std::remainder(alpha, kPi)); }
  bool pole_singular(double eps = kPoleEps) const { return pole_distance() < eps; }
};

inline void require_off_pole(const EulerAngles& a, double eps = kPoleEps) {
  if (a.pole_singular(eps)) throw PoleSingularity(a.alpha);
}

// A_{ir} and (A^-1)_{ir}, both stored with the spatial index i as row and the
// angular index r as column. They satisfy sum_i (A^-1)_{ir} A_{is} = delta_rs
// and sum_r A_{ir} (A^-1)_{jr} = delta_ij away from the poles.
struct BodyFrameMatrix {
  Eigen::Matrix3d A;
  Eigen::Matrix3d A_inv;
};

BodyFrameMatrix euler_A(const EulerAngles& angles);

// Partial derivatives of A and A^-1 with respect to (alpha, beta); the
// gamma derivatives vanish identically.
struct BodyFrameDerivs {
  Eigen::Matrix3d dA_dalpha, dA_dbeta;
  Eigen::Matrix3d dAinv_dalpha, dAinv_dbeta;
};

BodyFrameDerivs euler_A_derivs(const EulerAngles& angles);

// --- spin-1 matrix representation ------------------------------------------

// U (the change to the basis where the z angular momentum is diagonal).
Eigen::Matrix3cd unitary_U();

// (s_i)_{jk} = -i hbar eps_{ijk}
std::array<Eigen::Matrix3cd, 3> spin_matrices(double hbar);

// J_i = U s_i U^-1, spin-1 matrices in the diagonal basis.
std::array<Eigen::Matrix3cd, 3> diag_spin_matrices(double hbar);

// --- angular differential operators -----------------------------------------

enum class AngularOp { M1, M2, M3, L1, L2, L3 };

// Value and first angular derivatives of a function at one point of SO(3).
struct AngularJet {
  cplx value{};
  cplx d_alpha{};
  cplx d_beta{};
  cplx d_gamma{};
};

// Applies M_i (with its i*hbar factor) or the real operator lambda_i = M_i/(-i hbar)
// to a function given by its first derivatives at `at`.
cplx apply_angular_operator(AngularOp op, const AngularJet& f, const EulerAngles& at,
                            double hbar = 1.0);

// --- spin-1 basis -----------------------------------------------------------

// u_{+1} = (sqrt3/4pi) sin(a) e^{-ib},  u_0 = i (sqrt3 / 2 sqrt2 pi) cos(a),
// u_{-1} = (sqrt3/4pi) sin(a) e^{+ib};  all independent of gamma.
// Components are indexed a-major: index 0 <-> a=+1, 1 <-> a=0, 2 <-> a=-1.
inline constexpr int kNumSpin = 3;
inline int spin_index(int a) { return 1 - a; }
inline int spin_value(int idx) { return 1 - idx; }

// Derivatives of u_a up to second order in (alpha, beta). Layout of the jet:
// [0]=u, [1]=d_alpha, [2]=d_beta, [3]=d2_alpha2, [4]=d2_alpha_beta, [5]=d2_beta2.
inline constexpr int kAngJetLen = 6;
using BasisJet = std::array<cplx, kAngJetLen>;

cplx basis_u(int a, const EulerAngles& angles);
AngularJet basis_jet(int a, const EulerAngles& angles);
std::array<BasisJet, kNumSpin> basis_jet2(const EulerAngles& angles);

// --- quadrature over SO(3) --------------------------------------------------

// Gauss-Legendre in cos(alpha), midpoint-offset uniform grids (spectrally
// accurate trapezoid) in beta and gamma. Integrates f dOmega with
// dOmega = sin(a) da db dg; sum of weights is 8 pi^2.
struct AngularQuadrature {
  std::vector<EulerAngles> nodes;
  std::vector<double> weights;
  int n_alpha = 0, n_beta = 0, n_gamma = 0;

  cplx integrate(const std::function<cplx(const EulerAngles&)>& f) const;
};

AngularQuadrature make_angular_quadrature(int n_alpha, int n_beta, int n_gamma);

// Gauss-Legendre rule on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

// --- 6-D manifold metric ----------------------------------------------------

// Block-off-diagonal metric of R^3 (x) SO(3); coordinates ordered (x1..x3, a1..a3).
struct MetricSample {
  Matrix6d g_upper;
  Matrix6d g_lower;
  double sqrt_neg_g = 0.0;  // l^3 sin(alpha)
};

MetricSample metric_eval(const EulerAngles& angles, double l);

}  // namespace emhydro::so3
