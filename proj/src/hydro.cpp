#include "emhydro/hydro.hpp"

#include <algorithm>
#include <cmath>

namespace emhydro::eulerian {

namespace {

int levi_civita(int i, int j, int k) {
  if (i == j || j == k || i == k) return 0;
  return ((j - i + 3) % 3 == 1) ? 1 : -1;
}

double check_floor(const cplx& psi, double rho_floor) {
  const double rho = std::norm(psi);
  if (rho < rho_floor) throw NodeTooClose(rho_floor > 0.0 ? rho / rho_floor : 0.0);
  return rho;
}

// S_{ab} = hbar Im[psi_ab/psi - (psi_a/psi)(psi_b/psi)]
double phase_second(const PsiTable& T, int sa, int ra, int sb, int rb, int sab,
                    int rab, double hbar) {
  const cplx inv = 1.0 / T.psi();
  return hbar * std::imag(T.d[sab][rab] * inv -
                          (T.d[sa][ra] * inv) * (T.d[sb][rb] * inv));
}

}  // namespace

HydroSample hydro_sample(const FieldSlice& slice, const Eigen::Vector3d& x,
                         const so3::EulerAngles& ang, double rho_floor) {
  so3::require_off_pole(ang);
  const auto& k = slice.field().constants();
  const PsiTable T = slice.eval_psi(x, ang, 1, 1);
  HydroSample h;
  h.psi = T.psi();
  h.rho = check_floor(h.psi, rho_floor);

  const cplx inv = 1.0 / h.psi;
  for (int i = 0; i < 3; ++i) h.dS_x[i] = k.hbar * std::imag(T.d[1 + i][0] * inv);
  h.dS_ang.setZero();
  for (int r = 0; r < 2; ++r) h.dS_ang[r] = k.hbar * std::imag(T.d[0][1 + r] * inv);

  const so3::BodyFrameMatrix bf = so3::euler_A(ang);
  h.lambda_S = bf.A.leftCols<2>() * h.dS_ang.head<2>();
  h.v = (k.c / k.hbar) * h.lambda_S;
  h.omega = (k.c / k.hbar) * h.dS_x;
  h.v_conj = bf.A.transpose() * h.omega;

  // quantum potential from mixed second derivatives of sqrt(rho)
  const double R = std::sqrt(h.rho);
  Eigen::Vector3d Ri;
  Eigen::Vector2d Ra;
  for (int i = 0; i < 3; ++i) Ri[i] = std::real(std::conj(h.psi) * T.d[1 + i][0]) / R;
  for (int r = 0; r < 2; ++r) Ra[r] = std::real(std::conj(h.psi) * T.d[0][1 + r]) / R;
  double q_acc = 0.0, div_acc = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int r = 0; r < 2; ++r) {
      const double rir = (std::real(std::conj(T.d[0][1 + r]) * T.d[1 + i][0]) +
                          std::real(std::conj(h.psi) * T.d[1 + i][1 + r])) / R -
                         Ri[i] * Ra[r] / R;
      q_acc += bf.A(i, r) * rir;
      div_acc += bf.A(i, r) * phase_second(T, 1 + i, 0, 0, 1 + r, 1 + i, 1 + r, k.hbar);
    }
  }
  h.Q = -(k.c * k.hbar) * q_acc / R;
  h.div6 = 2.0 * (k.c / k.hbar) * div_acc;
  return h;
}

PathSample path_sample(const FieldSlice& slice, const Eigen::Vector3d& x,
                       const so3::EulerAngles& ang, double rho_floor) {
  const HydroSample h = hydro_sample(slice, x, ang, rho_floor);
  const auto& k = slice.field().constants();
  const so3::BodyFrameMatrix bf = so3::euler_A(ang);
  PathSample p;
  p.v = h.v;
  p.theta_dot = h.v_conj;
  p.weber_kin = (k.hbar / k.c) * p.v.dot(bf.A_inv * p.theta_dot);
  p.Q = h.Q;
  p.div6 = h.div6;
  p.rho = h.rho;
  return p;
}

void velocity_sample(const FieldSlice& slice, const Eigen::Vector3d& x,
                     const so3::EulerAngles& ang, double rho_floor,
                     Eigen::Vector3d& v, Eigen::Vector3d& theta_dot) {
  so3::require_off_pole(ang);
  const auto& k = slice.field().constants();
  const PsiTable T = slice.eval_psi(x, ang, 1, 1);
  const double rho = check_floor(T.psi(), rho_floor);
  (void)rho;
  const cplx inv = 1.0 / T.psi();

  const so3::BodyFrameMatrix bf = so3::euler_A(ang);
  Eigen::Vector2d sa;
  Eigen::Vector3d sx;
  for (int r = 0; r < 2; ++r) sa[r] = k.hbar * std::imag(T.d[0][1 + r] * inv);
  for (int i = 0; i < 3; ++i) sx[i] = k.hbar * std::imag(T.d[1 + i][0] * inv);
  v = (k.c / k.hbar) * (bf.A.leftCols<2>() * sa);
  theta_dot = (k.c / k.hbar) * (bf.A.transpose() * sx);
}

QGradient q_gradient(const FieldSlice& slice, const Eigen::Vector3d& x,
                     const so3::EulerAngles& ang, double rho_floor) {
  so3::require_off_pole(ang);
  const auto& k = slice.field().constants();
  const PsiTable T = slice.eval_psi(x, ang, 2, 2);
  const cplx psi = T.psi();
  const double rho = check_floor(psi, rho_floor);
  const double R = std::sqrt(rho);
  const so3::BodyFrameMatrix bf = so3::euler_A(ang);
  const so3::BodyFrameDerivs dbf = so3::euler_A_derivs(ang);

  // rho derivatives up to the needed third-order patterns, then R = sqrt(rho)
  auto rho1 = [&](int s, int r) { return 2.0 * std::real(std::conj(psi) * T.d[s][r]); };
  auto rho2 = [&](int sa, int ra, int sb, int rb, int sab, int rab) {
    return 2.0 * std::real(std::conj(T.d[sb][rb]) * T.d[sa][ra] +
                           std::conj(psi) * T.d[sab][rab]);
  };
  // d_a d_b d_c rho with a=(sa,ra) etc; pair indices must be consistent
  auto rho3 = [&](int sa, int ra, int sb, int rb, int sc, int rc, int sab, int rab,
                  int sac, int rac, int sbc, int rbc, int sabc, int rabc) {
    return 2.0 * std::real(std::conj(T.d[sbc][rbc]) * T.d[sa][ra] +
                           std::conj(T.d[sb][rb]) * T.d[sac][rac] +
                           std::conj(T.d[sc][rc]) * T.d[sab][rab] +
                           std::conj(psi) * T.d[sabc][rabc]);
  };

  auto R1 = [&](double r1) { return r1 / (2.0 * R); };
  auto R2 = [&](double r2, double Ra, double Rb) { return (r2 - 2.0 * Ra * Rb) / (2.0 * R); };
  auto R3 = [&](double r3, double Rab, double Rc, double Rb, double Rac, double Ra,
                double Rbc) {
    return (r3 - 2.0 * (Rab * Rc + Rb * Rac + Ra * Rbc)) / (2.0 * R);
  };

  Eigen::Vector3d Rx;   // d_i R
  Eigen::Vector2d Rang; // d_r R
  for (int i = 0; i < 3; ++i) Rx[i] = R1(rho1(1 + i, 0));
  for (int r = 0; r < 2; ++r) Rang[r] = R1(rho1(0, 1 + r));

  Eigen::Matrix<double, 3, 2> Rir;  // d_i d_r R
  Eigen::Matrix3d Rij;              // d_i d_j R
  Eigen::Matrix2d Rrs;              // d_r d_s R
  for (int i = 0; i < 3; ++i) {
    for (int r = 0; r < 2; ++r) {
      Rir(i, r) = R2(rho2(1 + i, 0, 0, 1 + r, 1 + i, 1 + r), Rx[i], Rang[r]);
    }
    for (int j = 0; j < 3; ++j) {
      Rij(i, j) = R2(rho2(1 + i, 0, 1 + j, 0, kSpatialPairIndex[i][j], 0), Rx[i], Rx[j]);
    }
  }
  for (int r = 0; r < 2; ++r) {
    for (int s = 0; s < 2; ++s) {
      Rrs(r, s) = R2(rho2(0, 1 + r, 0, 1 + s, 0, kAngularPairIndex[r][s]), Rang[r], Rang[s]);
    }
  }

  // W = A_{ir} d_r d_i R ; Q = -c hbar W / R
  double W = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int r = 0; r < 2; ++r) W += bf.A(i, r) * Rir(i, r);
  }
  QGradient out;
  out.Q = -(k.c * k.hbar) * W / R;

  // spatial gradient: d_j Q = -c hbar (d_j W R - W R_j)/R^2, d_j W = A_{ir} R_{jir}
  for (int j = 0; j < 3; ++j) {
    double dW = 0.0;
    for (int i = 0; i < 3; ++i) {
      for (int r = 0; r < 2; ++r) {
        const double r3 = rho3(1 + j, 0, 1 + i, 0, 0, 1 + r,
                               kSpatialPairIndex[j][i], 0,   // (j,i)
                               1 + j, 1 + r,                 // (j,r)
                               1 + i, 1 + r,                 // (i,r)
                               kSpatialPairIndex[j][i], 1 + r);
        const double Rjir = R3(r3, Rij(j, i), Rang[r], Rx[i], Rir(j, r), Rx[j], Rir(i, r));
        dW += bf.A(i, r) * Rjir;
      }
    }
    out.dQ_x[j] = -(k.c * k.hbar) * (dW * R - W * Rx[j]) / rho;
  }

  // angular gradient: d_s W = dA_s(i,r) R_{ir} + A(i,r) R_{irs}; gamma component 0
  out.dQ_ang.setZero();
  const Eigen::Matrix3d* dA[2] = {&dbf.dA_dalpha, &dbf.dA_dbeta};
  for (int s = 0; s < 2; ++s) {
    double dW = 0.0;
    for (int i = 0; i < 3; ++i) {
      for (int r = 0; r < 2; ++r) {
        const double r3 = rho3(1 + i, 0, 0, 1 + r, 0, 1 + s,
                               1 + i, 1 + r,                 // (i,r)
                               1 + i, 1 + s,                 // (i,s)
                               0, kAngularPairIndex[r][s],   // (r,s)
                               1 + i, kAngularPairIndex[r][s]);
        const double Rirs = R3(r3, Rir(i, r), Rang[s], Rang[r], Rir(i, s), Rx[i], Rrs(r, s));
        dW += (*dA[s])(i, r) * Rir(i, r) + bf.A(i, r) * Rirs;
      }
    }
    out.dQ_ang[s] = -(k.c * k.hbar) * (dW * R - W * Rang[s]) / rho;
  }
  return out;
}

double rho_scale(const FieldSlice& slice, const so3::AngularQuadrature& quad) {
  const auto& g = slice.field().grid();
  double mx = 0.0;
  for (int ix = 0; ix < g.dims[0]; ++ix) {
    for (int iy = 0; iy < g.dims[1]; ++iy) {
      for (int iz = 0; iz < g.dims[2]; ++iz) {
        const Eigen::Vector3d x = g.point(ix, iy, iz);
        for (const auto& node : quad.nodes) {
          const PsiTable T = slice.eval_psi(x, node, 0, 0);
          mx = std::max(mx, std::norm(T.psi()));
        }
      }
    }
  }
  return mx;
}

HydroFields polar_decompose(const SpectralField& field, double t,
                            const std::vector<SamplePoint>& points, double tau_node) {
  FieldSlice slice(field);
  slice.set_time(t);
  HydroFields out;
  out.points = points;
  out.samples.reserve(points.size());
  for (const auto& p : points) {
    const PsiTable T = slice.eval_psi(p.x, p.ang, 0, 0);
    out.rho_max = std::max(out.rho_max, std::norm(T.psi()));
  }
  const double floor = tau_node * out.rho_max;
  for (const auto& p : points) {
    out.samples.push_back(hydro_sample(slice, p.x, p.ang, floor));
  }
  return out;
}

double quantum_potential(const SpectralField& field, double t, const SamplePoint& at,
                         double tau_node) {
  FieldSlice slice(field);
  slice.set_time(t);
  const double scale = rho_scale(slice, so3::make_angular_quadrature(16, 16, 4));
  return hydro_sample(slice, at.x, at.ang, tau_node * scale).Q;
}

double EulerResiduals::max() const {
  return std::max({bernoulli, continuity, euler_omega, euler_v, euler_conj,
                   euler_coriolis});
}

EulerResiduals euler_residuals(const SpectralField& field, double t,
                               const std::vector<SamplePoint>& samples,
                               double dt_frac, double tau_node) {
  const auto& k = field.constants();
  const double delta = dt_frac * field.dominant_period();

  FieldSlice slice(field);
  slice.set_time(t);
  const double floor = tau_node * rho_scale(slice, so3::make_angular_quadrature(16, 16, 4));

  // four offset slices for the 5-point time stencil
  std::array<FieldSlice, 4> off{FieldSlice(field), FieldSlice(field), FieldSlice(field),
                                FieldSlice(field)};
  const double offs[4] = {-2.0 * delta, -delta, delta, 2.0 * delta};
  for (int j = 0; j < 4; ++j) off[j].set_time(t + offs[j]);

  auto fd5 = [&](const std::array<double, 4>& f) {
    // f ordered (t-2d, t-d, t+d, t+2d)
    return (8.0 * (f[2] - f[1]) - (f[3] - f[0])) / (12.0 * delta);
  };

  EulerResiduals res;
  for (const auto& pt : samples) {
    const so3::BodyFrameMatrix bf = so3::euler_A(pt.ang);
    const so3::BodyFrameDerivs dbf = so3::euler_A_derivs(pt.ang);
    const HydroSample h = hydro_sample(slice, pt.x, pt.ang, floor);
    const QGradient qg = q_gradient(slice, pt.x, pt.ang, floor);
    const PsiTable T = slice.eval_psi(pt.x, pt.ang, 2, 2);
    const cplx inv = 1.0 / h.psi;

    // S second derivatives
    Eigen::Matrix3d Sxx;
    Eigen::Matrix<double, 3, 2> Sxa;
    Eigen::Matrix2d Saa;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        Sxx(i, j) = phase_second(T, 1 + i, 0, 1 + j, 0, kSpatialPairIndex[i][j], 0, k.hbar);
      }
      for (int r = 0; r < 2; ++r) {
        Sxa(i, r) = phase_second(T, 1 + i, 0, 0, 1 + r, 1 + i, 1 + r, k.hbar);
      }
    }
    for (int r = 0; r < 2; ++r) {
      for (int s = 0; s < 2; ++s) {
        Saa(r, s) = phase_second(T, 0, 1 + r, 0, 1 + s, 0, kAngularPairIndex[r][s], k.hbar);
      }
    }

    // time-offset first-order data
    std::array<double, 4> rho_t;
    std::array<double, 4> dS_arg;
    std::array<Eigen::Vector3d, 4> omega_t, v_t;
    std::array<Eigen::Vector3d, 4> w_t;
    for (int j = 0; j < 4; ++j) {
      const PsiTable Tj = off[j].eval_psi(pt.x, pt.ang, 1, 1);
      rho_t[j] = std::norm(Tj.psi());
      dS_arg[j] = k.hbar * std::arg(Tj.psi() * inv);
      const cplx invj = 1.0 / Tj.psi();
      Eigen::Vector3d sx;
      Eigen::Vector2d sa;
      for (int i = 0; i < 3; ++i) sx[i] = k.hbar * std::imag(Tj.d[1 + i][0] * invj);
      for (int r = 0; r < 2; ++r) sa[r] = k.hbar * std::imag(Tj.d[0][1 + r] * invj);
      omega_t[j] = (k.c / k.hbar) * sx;
      v_t[j] = (k.c / k.hbar) * (bf.A.leftCols<2>() * sa);
      w_t[j] = bf.A.transpose() * omega_t[j];
    }
    const double dt_S = fd5(dS_arg);
    const double dt_rho = fd5(rho_t);
    Eigen::Vector3d dt_omega, dt_v, dt_w;
    for (int i = 0; i < 3; ++i) {
      dt_omega[i] = fd5({omega_t[0][i], omega_t[1][i], omega_t[2][i], omega_t[3][i]});
      dt_v[i] = fd5({v_t[0][i], v_t[1][i], v_t[2][i], v_t[3][i]});
      dt_w[i] = fd5({w_t[0][i], w_t[1][i], w_t[2][i], w_t[3][i]});
    }

    // (2.18)
    res.bernoulli = std::max(res.bernoulli,
                             std::abs(dt_S + h.v.dot(h.dS_x) + h.Q));

    // (2.19): density gradients
    Eigen::Vector3d rho_x;
    Eigen::Vector2d rho_a;
    for (int i = 0; i < 3; ++i) rho_x[i] = 2.0 * std::real(std::conj(h.psi) * T.d[1 + i][0]);
    for (int r = 0; r < 2; ++r) rho_a[r] = 2.0 * std::real(std::conj(h.psi) * T.d[0][1 + r]);
    double div_v = 0.0, lam_omega = 0.0;
    for (int i = 0; i < 3; ++i) {
      for (int r = 0; r < 2; ++r) {
        div_v += (k.c / k.hbar) * bf.A(i, r) * Sxa(i, r);
        lam_omega += (k.c / k.hbar) * bf.A(i, r) * Sxa(i, r);
      }
    }
    const Eigen::Vector3d lam_rho = bf.A.leftCols<2>() * rho_a;
    res.continuity = std::max(res.continuity,
                              std::abs(dt_rho + rho_x.dot(h.v) + h.rho * div_v +
                                       lam_rho.dot(h.omega) + h.rho * lam_omega));

    // first derivatives of the velocity fields
    Eigen::Matrix3d dv_x;   // d_j v_i
    Eigen::Matrix3d domega_x;  // d_j omega_i
    Eigen::Matrix<double, 3, 2> dv_a;     // d_r v_i
    Eigen::Matrix<double, 3, 2> domega_a; // d_r omega_i
    const Eigen::Matrix3d* dA[2] = {&dbf.dA_dalpha, &dbf.dA_dbeta};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        domega_x(i, j) = (k.c / k.hbar) * Sxx(i, j);
        double acc = 0.0;
        for (int r = 0; r < 2; ++r) acc += bf.A(i, r) * Sxa(j, r);
        dv_x(i, j) = (k.c / k.hbar) * acc;
      }
      for (int r = 0; r < 2; ++r) {
        domega_a(i, r) = (k.c / k.hbar) * Sxa(i, r);
        double acc = 0.0;
        for (int q = 0; q < 2; ++q) {
          acc += (*dA[r])(i, q) * h.dS_ang[q] + bf.A(i, q) * Saa(r, q);
        }
        dv_a(i, r) = (k.c / k.hbar) * acc;
      }
    }

    // (2.24): material derivative of omega
    for (int i = 0; i < 3; ++i) {
      double conv = 0.0;
      for (int j = 0; j < 3; ++j) conv += h.v[j] * domega_x(i, j);
      double lam = 0.0;
      for (int j = 0; j < 3; ++j) {
        for (int r = 0; r < 2; ++r) lam += h.omega[j] * bf.A(j, r) * domega_a(i, r);
      }
      res.euler_omega = std::max(res.euler_omega,
                                 std::abs(dt_omega[i] + conv + lam +
                                          (k.c / k.hbar) * qg.dQ_x[i]));
    }

    // (2.25): material derivative of v with Coriolis term
    const Eigen::Vector3d lamQ = bf.A.leftCols<2>() * qg.dQ_ang.head<2>();
    for (int i = 0; i < 3; ++i) {
      double conv = 0.0;
      for (int j = 0; j < 3; ++j) conv += h.v[j] * dv_x(i, j);
      double lam = 0.0;
      for (int j = 0; j < 3; ++j) {
        for (int r = 0; r < 2; ++r) lam += h.omega[j] * bf.A(j, r) * dv_a(i, r);
      }
      const int j1 = (i + 1) % 3, j2 = (i + 2) % 3;
      const double coriolis = h.omega[j1] * h.v[j2] - h.omega[j2] * h.v[j1];
      res.euler_v = std::max(res.euler_v, std::abs(dt_v[i] + conv + lam - coriolis +
                                                   (k.c / k.hbar) * lamQ[i]));
    }

    // conjugate-velocity field derivatives: w_s = A_{is} omega_i
    Eigen::Matrix3d dw_x;  // d_j w_s
    Eigen::Matrix<double, 3, 2> dw_a;  // d_r w_s
    for (int s = 0; s < 3; ++s) {
      for (int j = 0; j < 3; ++j) {
        double acc = 0.0;
        for (int i = 0; i < 3; ++i) acc += bf.A(i, s) * domega_x(i, j);
        dw_x(s, j) = acc;
      }
      for (int r = 0; r < 2; ++r) {
        double acc = 0.0;
        for (int i = 0; i < 3; ++i) {
          acc += (*dA[r])(i, s) * h.omega[i] + bf.A(i, s) * domega_a(i, r);
        }
        dw_a(s, r) = acc;
      }
    }

    // (2.28)
    const Eigen::Matrix3d* dAinv[2] = {&dbf.dAinv_dalpha, &dbf.dAinv_dbeta};
    for (int s = 0; s < 3; ++s) {
      double conv = 0.0;
      for (int j = 0; j < 3; ++j) conv += h.v[j] * dw_x(s, j);
      for (int r = 0; r < 2; ++r) conv += h.v_conj[r] * dw_a(s, r);
      double geom = 0.0;
      for (int i = 0; i < 3; ++i) {
        for (int q = 0; q < 3; ++q) {
          for (int r = 0; r < 2; ++r) {
            geom += bf.A(i, s) * (*dAinv[r])(i, q) * h.v_conj[q] * h.v_conj[r];
          }
        }
      }
      double force = 0.0;
      for (int i = 0; i < 3; ++i) force += bf.A(i, s) * qg.dQ_x[i];
      res.euler_conj = std::max(res.euler_conj,
                                std::abs(dt_w[s] + conv + geom + (k.c / k.hbar) * force));
    }

    // (2.29)
    for (int i = 0; i < 3; ++i) {
      double conv = 0.0;
      for (int j = 0; j < 3; ++j) conv += h.v[j] * dv_x(i, j);
      for (int r = 0; r < 2; ++r) conv += h.v_conj[r] * dv_a(i, r);
      double cor = 0.0;
      for (int j = 0; j < 3; ++j) {
        for (int kk = 0; kk < 3; ++kk) {
          const int e = levi_civita(i, j, kk);
          if (e == 0) continue;
          for (int r = 0; r < 3; ++r) {
            cor += e * bf.A_inv(kk, r) * h.v[j] * h.v_conj[r];
          }
        }
      }
      res.euler_coriolis = std::max(
          res.euler_coriolis, std::abs(dt_v[i] + conv + cor + (k.c / k.hbar) * lamQ[i]));
    }
  }
  return res;
}

CirculationResult circulation(const SpectralField& field, double t, const Loop& loop,
                              int gauss_per_segment, double tau_node) {
  if (loop.vertices.size() < 3) throw std::invalid_argument("loop needs >= 3 vertices");
  // the chain must be explicitly closed: last vertex = first vertex up to
  // whole beta/gamma periods (which carry the winding)
  {
    const SamplePoint& a = loop.vertices.front();
    const SamplePoint& b = loop.vertices.back();
    const bool closed =
        (a.x - b.x).norm() < 1e-12 && std::abs(a.ang.alpha - b.ang.alpha) < 1e-12 &&
        std::abs(std::remainder(a.ang.beta - b.ang.beta, kTwoPi)) < 1e-12 &&
        std::abs(std::remainder(a.ang.gamma - b.ang.gamma, kTwoPi)) < 1e-12;
    if (!closed) throw std::invalid_argument("loop is not closed");
  }
  FieldSlice slice(field);
  slice.set_time(t);
  const double floor =
      tau_node * rho_scale(slice, so3::make_angular_quadrature(16, 16, 4));
  const auto& k = field.constants();

  std::vector<double> gn, gw;
  so3::gauss_legendre(gauss_per_segment, gn, gw);

  double integral = 0.0;
  const size_t nv = loop.vertices.size();
  for (size_t s = 0; s + 1 < nv; ++s) {
    const SamplePoint& a = loop.vertices[s];
    const SamplePoint& b = loop.vertices[s + 1];
    const Eigen::Vector3d dx = b.x - a.x;
    const Eigen::Vector3d dang(b.ang.alpha - a.ang.alpha, b.ang.beta - a.ang.beta,
                               b.ang.gamma - a.ang.gamma);
    for (int g = 0; g < gauss_per_segment; ++g) {
      const double u = 0.5 * (gn[g] + 1.0);
      const Eigen::Vector3d x = a.x + u * dx;
      const so3::EulerAngles ang{a.ang.alpha + u * dang[0], a.ang.beta + u * dang[1],
                                 a.ang.gamma + u * dang[2]};
      const PsiTable T = slice.eval_psi(x, ang, 1, 1);
      check_floor(T.psi(), floor);
      const cplx inv = 1.0 / T.psi();
      double integrand = 0.0;
      for (int i = 0; i < 3; ++i) {
        integrand += k.hbar * std::imag(T.d[1 + i][0] * inv) * dx[i];
      }
      for (int r = 0; r < 2; ++r) {
        integrand += k.hbar * std::imag(T.d[0][1 + r] * inv) * dang[r];
      }
      integral += 0.5 * gw[g] * integrand;
    }
  }

  CirculationResult out;
  out.integral = integral;
  const double ratio = integral / field.constants().h();
  out.n = static_cast<int>(std::lround(ratio));
  out.defect = std::abs(ratio - out.n);
  return out;
}

}  // namespace emhydro::eulerian
