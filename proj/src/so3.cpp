#include "emhydro/so3.hpp"

#include <cmath>

namespace emhydro::so3 {

namespace {
constexpr cplx kI{0.0, 1.0};
}

BodyFrameMatrix euler_A(const EulerAngles& angles) {
  require_off_pole(angles);
  const double sa = std::sin(angles.alpha);
  const double ca = std::cos(angles.alpha);
  const double sb = std::sin(angles.beta);
  const double cb = std::cos(angles.beta);
  const double cot = ca / sa;
  const double csc = 1.0 / sa;

  BodyFrameMatrix m;
  m.A << -cb, sb * cot, -sb * csc,
          sb, cb * cot, -cb * csc,
         0.0, -1.0, 0.0;
  m.A_inv << -cb, 0.0, -sa * sb,
              sb, 0.0, -sa * cb,
             0.0, -1.0, -ca;
  return m;
}

BodyFrameDerivs euler_A_derivs(const EulerAngles& angles) {
  require_off_pole(angles);
  const double sa = std::sin(angles.alpha);
  const double ca = std::cos(angles.alpha);
  const double sb = std::sin(angles.beta);
  const double cb = std::cos(angles.beta);
  const double cot = ca / sa;
  const double csc = 1.0 / sa;

  BodyFrameDerivs d;
  d.dA_dalpha << 0.0, -sb * csc * csc, sb * csc * cot,
                 0.0, -cb * csc * csc, cb * csc * cot,
                 0.0, 0.0, 0.0;
  d.dA_dbeta << sb, cb * cot, -cb * csc,
                cb, -sb * cot, sb * csc,
                0.0, 0.0, 0.0;
  d.dAinv_dalpha << 0.0, 0.0, -ca * sb,
                    0.0, 0.0, -ca * cb,
                    0.0, 0.0, sa;
  d.dAinv_dbeta << sb, 0.0, -sa * cb,
                   cb, 0.0, sa * sb,
                   0.0, 0.0, 0.0;
  return d;
}

Eigen::Matrix3cd unitary_U() {
  const double s = 1.0 / std::sqrt(2.0);
  Eigen::Matrix3cd u;
  u << cplx(-s, 0), cplx(0, s), 0.0,
       0.0, 0.0, 1.0,
       cplx(s, 0), cplx(0, s), 0.0;
  return u;
}

std::array<Eigen::Matrix3cd, 3> spin_matrices(double hbar) {
  std::array<Eigen::Matrix3cd, 3> s;
  for (auto& m : s) m.setZero();
  // (s_i)_{jk} = -i hbar eps_{ijk}
  auto set = [&](int i, int j, int k, double sign) { s[i](j, k) = -kI * hbar * sign; };
  set(0, 1, 2, 1.0); set(0, 2, 1, -1.0);
  set(1, 2, 0, 1.0); set(1, 0, 2, -1.0);
  set(2, 0, 1, 1.0); set(2, 1, 0, -1.0);
  return s;
}

std::array<Eigen::Matrix3cd, 3> diag_spin_matrices(double hbar) {
  const double s = hbar / std::sqrt(2.0);
  std::array<Eigen::Matrix3cd, 3> j;
  j[0] << 0, s, 0,
          s, 0, s,
          0, s, 0;
  j[1] << 0, cplx(0, -s), 0,
          cplx(0, s), 0, cplx(0, -s),
          0, cplx(0, s), 0;
  j[2] << hbar, 0, 0,
          0, 0, 0,
          0, 0, -hbar;
  return j;
}

cplx apply_angular_operator(AngularOp op, const AngularJet& f, const EulerAngles& at,
                            double hbar) {
  if (op == AngularOp::M3) return kI * hbar * f.d_beta;
  if (op == AngularOp::L3) return -f.d_beta;

  require_off_pole(at);
  const double sb = std::sin(at.beta);
  const double cb = std::cos(at.beta);
  const double cot = std::cos(at.alpha) / std::sin(at.alpha);
  const double csc = 1.0 / std::sin(at.alpha);

  cplx lam;  // lambda_1 or lambda_2 = A_{ir} d_r
  switch (op) {
    case AngularOp::M1:
    case AngularOp::L1:
      lam = -cb * f.d_alpha + sb * cot * f.d_beta - sb * csc * f.d_gamma;
      break;
    case AngularOp::M2:
    case AngularOp::L2:
      lam = sb * f.d_alpha + cb * cot * f.d_beta - cb * csc * f.d_gamma;
      break;
    default:
      lam = 0.0;
  }
  if (op == AngularOp::M1 || op == AngularOp::M2) return -kI * hbar * lam;
  return lam;
}

cplx basis_u(int a, const EulerAngles& angles) {
  static const double n1 = std::sqrt(3.0) / (4.0 * kPi);
  static const double n0 = std::sqrt(3.0) / (2.0 * std::sqrt(2.0) * kPi);
  switch (a) {
    case +1:
      return n1 * std::sin(angles.alpha) * std::exp(-kI * angles.beta);
    case 0:
      return kI * n0 * std::cos(angles.alpha);
    case -1:
      return n1 * std::sin(angles.alpha) * std::exp(kI * angles.beta);
    default:
      throw std::invalid_argument("spin index must be +1, 0 or -1");
  }
}

AngularJet basis_jet(int a, const EulerAngles& angles) {
  static const double n1 = std::sqrt(3.0) / (4.0 * kPi);
  static const double n0 = std::sqrt(3.0) / (2.0 * std::sqrt(2.0) * kPi);
  const double sa = std::sin(angles.alpha);
  const double ca = std::cos(angles.alpha);
  AngularJet j;
  if (a == 0) {
    j.value = kI * n0 * ca;
    j.d_alpha = -kI * n0 * sa;
    return j;
  }
  const cplx ph = std::exp(cplx(0.0, a == 1 ? -angles.beta : angles.beta));
  j.value = n1 * sa * ph;
  j.d_alpha = n1 * ca * ph;
  j.d_beta = (a == 1 ? -kI : kI) * j.value;
  return j;
}

std::array<BasisJet, kNumSpin> basis_jet2(const EulerAngles& angles) {
  static const double n1 = std::sqrt(3.0) / (4.0 * kPi);
  static const double n0 = std::sqrt(3.0) / (2.0 * std::sqrt(2.0) * kPi);
  const double sa = std::sin(angles.alpha);
  const double ca = std::cos(angles.alpha);
  const cplx em = std::exp(-kI * angles.beta);
  const cplx ep = std::conj(em);

  std::array<BasisJet, kNumSpin> out;
  // a = +1
  out[0] = {n1 * sa * em, n1 * ca * em, -kI * n1 * sa * em,
            -n1 * sa * em, -kI * n1 * ca * em, -n1 * sa * em};
  // a = 0 (beta-independent)
  out[1] = {kI * n0 * ca, -kI * n0 * sa, 0.0, -kI * n0 * ca, 0.0, 0.0};
  // a = -1
  out[2] = {n1 * sa * ep, n1 * ca * ep, kI * n1 * sa * ep,
            -n1 * sa * ep, kI * n1 * ca * ep, -n1 * sa * ep};
  return out;
}

MetricSample metric_eval(const EulerAngles& angles, double l) {
  const BodyFrameMatrix bf = euler_A(angles);
  MetricSample m;
  m.g_upper.setZero();
  m.g_lower.setZero();
  m.g_upper.block<3, 3>(0, 3) = bf.A / l;
  m.g_upper.block<3, 3>(3, 0) = bf.A.transpose() / l;
  m.g_lower.block<3, 3>(0, 3) = l * bf.A_inv;
  m.g_lower.block<3, 3>(3, 0) = l * bf.A_inv.transpose();
  m.sqrt_neg_g = l * l * l * std::sin(angles.alpha);
  return m;
}

}  // namespace emhydro::so3
