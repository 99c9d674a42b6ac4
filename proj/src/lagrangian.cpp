#include "emhydro/lagrangian.hpp"

#include <algorithm>
#include <cmath>

namespace emhydro::lagrangian {

namespace {

using eulerian::FieldSlice;
using eulerian::PathSample;

so3::EulerAngles to_angles(const Eigen::Vector3d& theta) {
  return {theta[0], theta[1], theta[2]};
}

// raw alpha must stay inside the open (0, pi) chart
void require_alpha_range(double alpha) {
  if (!(alpha > so3::kPoleEps && alpha < kPi - so3::kPoleEps)) {
    throw PoleSingularity(alpha);
  }
}

struct PathDeriv {
  Eigen::Vector3d dq;
  Eigen::Vector3d dth;
  double dS = 0.0;
  double dlr = 0.0;
};

PathDeriv guided_rhs(const FieldSlice& slice, const Eigen::Vector3d& q,
                     const Eigen::Vector3d& th, double rho_floor) {
  require_alpha_range(th[0]);
  const PathSample s = eulerian::path_sample(slice, q, to_angles(th), rho_floor);
  PathDeriv d;
  d.dq = s.v;
  d.dth = s.theta_dot;
  d.dS = s.weber_kin - s.Q;
  d.dlr = -s.div6;
  return d;
}

}  // namespace

so3::EulerAngles Trajectory::canonical(const Eigen::Vector3d& theta, int& wind_beta,
                                       int& wind_gamma) {
  wind_beta = static_cast<int>(std::floor(theta[1] / kTwoPi));
  wind_gamma = static_cast<int>(std::floor(theta[2] / kTwoPi));
  return {theta[0], theta[1] - kTwoPi * wind_beta, theta[2] - kTwoPi * wind_gamma};
}

GuidedIntegrator::GuidedIntegrator(const SpectralField& field,
                                   const IntegratorOptions& opt)
    : field_(&field), opt_(opt) {
  if (!(opt.dt > 0.0)) throw std::invalid_argument("integrator dt must be positive");
  if (opt.rho_floor >= 0.0) {
    rho_floor_ = opt.rho_floor;
  } else {
    FieldSlice slice(field);
    rho_floor_ =
        opt.tau_node * eulerian::rho_scale(slice, so3::make_angular_quadrature(16, 16, 4));
  }
  double box_min = kPi;
  for (int a = 0; a < 3; ++a) {
    if (field.grid().dims[a] > 1) box_min = std::min(box_min, field.grid().extent(a));
  }
  max_step_ = opt.step_safety * box_min;
}

std::vector<Trajectory> GuidedIntegrator::integrate(const std::vector<FluidLabel>& labels,
                                                    double t0, double t1) const {
  struct Work {
    Eigen::Vector3d q, th;
    double S = 0.0, lr = 0.0;
    PathDeriv k1, k2, k3, k4;
    uint32_t flags = kFlagNone;
  };
  std::vector<Work> work(labels.size());
  std::vector<Trajectory> out(labels.size());
  for (size_t i = 0; i < labels.size(); ++i) {
    out[i].label = labels[i];
    work[i].q = labels[i].q0;
    work[i].th = {labels[i].theta0.alpha, labels[i].theta0.beta, labels[i].theta0.gamma};
  }

  const double span = t1 - t0;
  const int n_steps =
      span == 0.0 ? 0 : std::max(1, static_cast<int>(std::lround(std::abs(span) / opt_.dt)));
  const double dt = n_steps == 0 ? 0.0 : span / n_steps;

  FieldSlice slice(*field_);
  auto eval_into = [&](const Eigen::Vector3d& q, const Eigen::Vector3d& th, Work& w,
                       PathDeriv& k) {
    try {
      k = guided_rhs(slice, q, th, rho_floor_);
      if (k.dq.norm() * std::abs(dt) > max_step_) {
        w.flags |= kFlagStep;
        return false;
      }
      return true;
    } catch (const PoleSingularity&) {
      w.flags |= kFlagPole;
    } catch (const NodeTooClose&) {
      w.flags |= kFlagNode;
    }
    return false;
  };

  auto record = [&](double t, bool with_rates) {
    for (size_t i = 0; i < labels.size(); ++i) {
      if (work[i].flags != kFlagNone) continue;
      TrajectorySample s;
      s.t = t;
      s.q = work[i].q;
      s.theta = work[i].th;
      s.S_weber = work[i].S;
      s.log_rho = work[i].lr;
      if (with_rates) {
        s.qdot = work[i].k1.dq;
        s.thetadot = work[i].k1.dth;
      }
      out[i].samples.push_back(s);
    }
  };

  for (int step = 0; step <= n_steps; ++step) {
    const double t = t0 + step * dt;
    slice.set_time(t);
    for (size_t i = 0; i < labels.size(); ++i) {
      Work& w = work[i];
      if (w.flags != kFlagNone) continue;
      eval_into(w.q, w.th, w, w.k1);
    }
    const bool record_now =
        step == n_steps || step == 0 ||
        (opt_.sample_stride > 0 && step % opt_.sample_stride == 0);
    if (record_now) record(t, true);
    if (step == n_steps) break;

    slice.set_time(t + 0.5 * dt);
    for (auto& w : work) {
      if (w.flags != kFlagNone) continue;
      if (!eval_into(w.q + 0.5 * dt * w.k1.dq, w.th + 0.5 * dt * w.k1.dth, w, w.k2))
        continue;
      eval_into(w.q + 0.5 * dt * w.k2.dq, w.th + 0.5 * dt * w.k2.dth, w, w.k3);
    }
    slice.set_time(t + dt);
    for (auto& w : work) {
      if (w.flags != kFlagNone) continue;
      if (!eval_into(w.q + dt * w.k3.dq, w.th + dt * w.k3.dth, w, w.k4)) continue;
      w.q += (dt / 6.0) * (w.k1.dq + 2.0 * w.k2.dq + 2.0 * w.k3.dq + w.k4.dq);
      w.th += (dt / 6.0) * (w.k1.dth + 2.0 * w.k2.dth + 2.0 * w.k3.dth + w.k4.dth);
      w.S += (dt / 6.0) * (w.k1.dS + 2.0 * w.k2.dS + 2.0 * w.k3.dS + w.k4.dS);
      w.lr += (dt / 6.0) * (w.k1.dlr + 2.0 * w.k2.dlr + 2.0 * w.k3.dlr + w.k4.dlr);
    }
  }
  for (size_t i = 0; i < labels.size(); ++i) out[i].flags = work[i].flags;
  return out;
}

Trajectory GuidedIntegrator::integrate_one(const FluidLabel& label, double t0,
                                           double t1) const {
  return integrate({label}, t0, t1).front();
}

void initial_velocity(const FluidLabel& label, const Eigen::Vector3d& dS0_x,
                      const Eigen::Vector3d& dS0_ang, const PhysicalConstants& k,
                      Eigen::Vector3d& qdot0, Eigen::Vector3d& thetadot0) {
  const so3::BodyFrameMatrix bf = so3::euler_A(label.theta0);
  qdot0 = (k.c / k.hbar) * (bf.A * dS0_ang);
  thetadot0 = (k.c / k.hbar) * (bf.A.transpose() * dS0_x);
}

Trajectory integrate_classical(const FluidLabel& label, const Eigen::Vector3d& qdot0,
                               const Eigen::Vector3d& omega0, const PhysicalConstants& k,
                               const IntegratorOptions& opt) {
  if (!(opt.dt > 0.0)) throw std::invalid_argument("integrator dt must be positive");
  struct State {
    Eigen::Vector3d q, v, th;
    double S = 0.0;
  };
  struct Deriv {
    Eigen::Vector3d dq, dv, dth;
    double dS = 0.0;
  };
  auto rhs = [&](const State& y) {
    require_alpha_range(y.th[0]);
    const so3::BodyFrameMatrix bf = so3::euler_A(to_angles(y.th));
    Deriv d;
    d.dq = y.v;
    d.dv = omega0.cross(y.v);
    d.dth = bf.A.transpose() * omega0;
    d.dS = (k.hbar / k.c) * y.v.dot(bf.A_inv * d.dth);
    return d;
  };
  auto advance = [](const State& y, const Deriv& d, double h) {
    return State{y.q + h * d.dq, y.v + h * d.dv, y.th + h * d.dth, y.S + h * d.dS};
  };

  Trajectory traj;
  traj.label = label;
  State y{label.q0, qdot0,
          {label.theta0.alpha, label.theta0.beta, label.theta0.gamma}, 0.0};
  const int n_steps = std::max(1, static_cast<int>(std::lround(opt.t_final / opt.dt)));
  const double dt = opt.t_final / n_steps;

  auto record = [&](double t, const Deriv& d) {
    TrajectorySample s;
    s.t = t;
    s.q = y.q;
    s.theta = y.th;
    s.qdot = y.v;
    s.thetadot = d.dth;
    s.S_weber = y.S;
    traj.samples.push_back(s);
  };

  try {
    for (int step = 0; step <= n_steps; ++step) {
      const double t = step * dt;
      const Deriv k1 = rhs(y);
      if (step == 0 || step == n_steps ||
          (opt.sample_stride > 0 && step % opt.sample_stride == 0)) {
        record(t, k1);
      }
      if (step == n_steps) break;
      const Deriv k2 = rhs(advance(y, k1, 0.5 * dt));
      const Deriv k3 = rhs(advance(y, k2, 0.5 * dt));
      const Deriv k4 = rhs(advance(y, k3, dt));
      y.q += (dt / 6.0) * (k1.dq + 2.0 * k2.dq + 2.0 * k3.dq + k4.dq);
      y.v += (dt / 6.0) * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv);
      y.th += (dt / 6.0) * (k1.dth + 2.0 * k2.dth + 2.0 * k3.dth + k4.dth);
      y.S += (dt / 6.0) * (k1.dS + 2.0 * k2.dS + 2.0 * k3.dS + k4.dS);
    }
  } catch (const PoleSingularity&) {
    traj.flags |= kFlagPole;
  }
  return traj;
}

NewtonResidual newton_residual(const SpectralField& field, const Trajectory& traj) {
  NewtonResidual res;
  if (traj.samples.size() < 3) return res;
  const auto& k = field.constants();

  FieldSlice slice(field);
  const double floor = eulerian::kDefaultTauNode *
                       eulerian::rho_scale(slice, so3::make_angular_quadrature(16, 16, 4));

  for (size_t m = 1; m + 1 < traj.samples.size(); ++m) {
    const auto& prev = traj.samples[m - 1];
    const auto& cur = traj.samples[m];
    const auto& next = traj.samples[m + 1];
    const double h1 = cur.t - prev.t, h2 = next.t - cur.t;
    if (std::abs(h1 - h2) > 1e-12 * std::max(std::abs(h1), std::abs(h2))) continue;
    const double h = h1;

    const Eigen::Vector3d q_acc = (next.q - 2.0 * cur.q + prev.q) / (h * h);
    const Eigen::Vector3d th_acc = (next.theta - 2.0 * cur.theta + prev.theta) / (h * h);

    const so3::EulerAngles ang = to_angles(cur.theta);
    const so3::BodyFrameMatrix bf = so3::euler_A(ang);
    const so3::BodyFrameDerivs dbf = so3::euler_A_derivs(ang);
    slice.set_time(cur.t);
    const eulerian::QGradient qg = eulerian::q_gradient(slice, cur.q, ang, floor);

    // (4.3): qddot_i + eps_{ijk} qdot_j (A^-1 thdot)_k = -(c/hbar) A_{ir} dQ/dth_r
    const Eigen::Vector3d om = bf.A_inv * cur.thetadot;
    Eigen::Vector3d r_q = q_acc + cur.qdot.cross(om) +
                          (k.c / k.hbar) * (bf.A.leftCols<2>() * qg.dQ_ang.head<2>());

    // (4.4): thddot_s + A_{si} d_r (A^-1)_{iq} thdot_q thdot_r = -(c/hbar) A_{si} dQ/dq_i
    Eigen::Vector3d r_th = th_acc;
    const Eigen::Matrix3d* dAinv[2] = {&dbf.dAinv_dalpha, &dbf.dAinv_dbeta};
    for (int s = 0; s < 3; ++s) {
      double geom = 0.0;
      for (int i = 0; i < 3; ++i) {
        for (int q = 0; q < 3; ++q) {
          for (int r = 0; r < 2; ++r) {
            geom += bf.A(i, s) * (*dAinv[r])(i, q) * cur.thetadot[q] * cur.thetadot[r];
          }
        }
      }
      double force = 0.0;
      for (int i = 0; i < 3; ++i) force += bf.A(i, s) * qg.dQ_x[i];
      r_th[s] += geom + (k.c / k.hbar) * force;
    }

    res.t.push_back(cur.t);
    res.eq_q.push_back(r_q);
    res.eq_theta.push_back(r_th);
    res.max_q = std::max(res.max_q, r_q.cwiseAbs().maxCoeff());
    res.max_theta = std::max(res.max_theta, r_th.cwiseAbs().maxCoeff());
  }
  return res;
}

double circulation_transport(const SpectralField& field,
                             const std::vector<FluidLabel>& loop, double t,
                             const IntegratorOptions& opt) {
  GuidedIntegrator integrator(field, opt);
  const std::vector<Trajectory> trajs = integrator.integrate(loop, 0.0, t);
  const auto& k = field.constants();
  const auto& grid = field.grid();

  const size_t n = trajs.size();
  std::vector<Eigen::Vector3d> pos(n), ang(n), p_q(n), p_th(n);
  for (size_t i = 0; i < n; ++i) {
    if (!trajs[i].ok()) throw NodeTooClose(0.0);
    const TrajectorySample& s = trajs[i].back();
    const so3::BodyFrameMatrix bf = so3::euler_A(to_angles(s.theta));
    pos[i] = s.q;
    ang[i] = s.theta;
    p_q[i] = (k.hbar / k.c) * (bf.A_inv * s.thetadot);
    p_th[i] = (k.hbar / k.c) * (bf.A_inv.transpose() * s.qdot);
  }

  auto wrap = [](double x, double period) { return std::remainder(x, period); };
  double integral = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const size_t j = (i + 1) % n;
    Eigen::Vector3d dq = pos[j] - pos[i];
    for (int a = 0; a < 3; ++a) {
      if (grid.dims[a] > 1) dq[a] = wrap(dq[a], grid.extent(a));
    }
    Eigen::Vector3d dth = ang[j] - ang[i];
    dth[1] = wrap(dth[1], kTwoPi);
    dth[2] = wrap(dth[2], kTwoPi);
    integral += 0.5 * ((p_q[i] + p_q[j]).dot(dq) + (p_th[i] + p_th[j]).dot(dth));
  }
  return integral;
}

std::vector<FluidLabel> make_label_lattice(const EnsembleSpec& spec) {
  std::vector<FluidLabel> labels;
  size_t total = 1;
  for (int c : spec.counts) {
    if (c < 1) throw std::invalid_argument("lattice counts must be >= 1");
    total *= c;
  }
  labels.reserve(total);
  for (int ix = 0; ix < spec.counts[0]; ++ix) {
    for (int iy = 0; iy < spec.counts[1]; ++iy) {
      for (int iz = 0; iz < spec.counts[2]; ++iz) {
        for (int i1 = 0; i1 < spec.counts[3]; ++i1) {
          for (int i2 = 0; i2 < spec.counts[4]; ++i2) {
            for (int i3 = 0; i3 < spec.counts[5]; ++i3) {
              FluidLabel lab;
              lab.q0 = {spec.box[0] * (ix + 0.5) / spec.counts[0],
                        spec.box[1] * (iy + 0.5) / spec.counts[1],
                        spec.box[2] * (iz + 0.5) / spec.counts[2]};
              lab.theta0 = {kPi * (i1 + 0.5) / spec.counts[3],
                            kTwoPi * (i2 + 0.5) / spec.counts[4],
                            kTwoPi * (i3 + 0.5) / spec.counts[5]};
              labels.push_back(lab);
            }
          }
        }
      }
    }
  }
  return labels;
}

ActionSample action_eval(const SpectralField& field, double t,
                         const std::vector<Trajectory>& ensemble,
                         const EnsembleSpec& spec) {
  const auto& k = field.constants();
  FieldSlice slice0(field);
  FieldSlice slice(field);
  slice.set_time(t);

  // per-label lattice weight: d^3q d^3theta with sin(theta01) measure
  double cellw = 1.0;
  for (int a = 0; a < 3; ++a) cellw *= spec.box[a] / spec.counts[a];
  cellw *= (kPi / spec.counts[3]) * (kTwoPi / spec.counts[4]) * (kTwoPi / spec.counts[5]);

  ActionSample acc;
  for (const Trajectory& traj : ensemble) {
    if (!traj.ok() || traj.samples.empty()) continue;
    // nearest stored sample to the requested time
    const TrajectorySample* best = &traj.samples.front();
    for (const auto& s : traj.samples) {
      if (std::abs(s.t - t) < std::abs(best->t - t)) best = &s;
    }
    const so3::EulerAngles ang0 = traj.label.theta0;
    const eulerian::PsiTable T0 = slice0.eval_psi(traj.label.q0, ang0, 0, 0);
    const double rho0 = std::norm(T0.psi());
    const double w = rho0 * std::sin(ang0.alpha) * cellw;

    const so3::EulerAngles ang = to_angles(best->theta);
    const so3::BodyFrameMatrix bf = so3::euler_A(ang);
    const double kin = best->qdot.dot(bf.A_inv * best->thetadot);

    const eulerian::PsiTable T = slice.eval_psi(best->q, ang, 1, 1);
    const double rho = std::norm(T.psi());
    double internal = 0.0;
    if (rho > 0.0) {
      Eigen::Vector3d rho_x;
      Eigen::Vector2d rho_a;
      for (int i = 0; i < 3; ++i) {
        rho_x[i] = 2.0 * std::real(std::conj(T.psi()) * T.d[1 + i][0]);
      }
      for (int r = 0; r < 2; ++r) {
        rho_a[r] = 2.0 * std::real(std::conj(T.psi()) * T.d[0][1 + r]);
      }
      for (int i = 0; i < 3; ++i) {
        for (int r = 0; r < 2; ++r) {
          internal += (k.c * k.c / 4.0) * bf.A(i, r) * rho_x[i] * rho_a[r] / (rho * rho);
        }
      }
    }
    acc.kinetic += w * kin;
    acc.internal += w * internal;
    acc.gross += std::abs(w) * (std::abs(kin) + std::abs(internal));
  }
  acc.total = acc.kinetic - acc.internal;
  return acc;
}

}  // namespace emhydro::lagrangian
