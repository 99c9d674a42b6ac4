#include "emhydro/reconstruction.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace emhydro::recon {

using cplx = std::complex<double>;

namespace {

using eulerian::FieldSlice;
using lagrangian::kFlagNode;
using lagrangian::kFlagNone;
using lagrangian::kFlagPole;
using lagrangian::kFlagStep;

so3::EulerAngles to_angles(const Eigen::Vector3d& th) { return {th[0], th[1], th[2]}; }

void require_alpha_range(double alpha) {
  if (!(alpha > so3::kPoleEps && alpha < kPi - so3::kPoleEps)) {
    throw PoleSingularity(alpha);
  }
}

struct Vec6 {
  Eigen::Vector3d q;
  Eigen::Vector3d th;
};

Vec6 add(const Vec6& a, const Vec6& b, double h) {
  return {a.q + h * b.q, a.th + h * b.th};
}

// velocity-only RHS used for cloud points and forward verification
Vec6 velocity_rhs(const FieldSlice& slice, const Vec6& y, double floor) {
  require_alpha_range(y.th[0]);
  Vec6 d;
  eulerian::velocity_sample(slice, y.q, to_angles(y.th), floor, d.q, d.th);
  return d;
}

struct CenterDeriv {
  Vec6 y;
  double weber = 0.0;  // kin - Q
  double logd = 0.0;   // +div6 (backward orientation gives log D directly)
};

CenterDeriv center_rhs(const FieldSlice& slice, const Vec6& y, double floor) {
  require_alpha_range(y.th[0]);
  const eulerian::PathSample s =
      eulerian::path_sample(slice, y.q, to_angles(y.th), floor);
  CenterDeriv d;
  d.y = {s.v, s.theta_dot};
  d.weber = s.weber_kin - s.Q;
  d.logd = s.div6;
  return d;
}

// forward integrate positions only; returns end state
Vec6 forward_positions(FieldSlice& slice, Vec6 y, double t0, double t1, double dt,
                       double floor) {
  const double span = t1 - t0;
  const int n = span == 0.0 ? 0 : std::max(1, (int)std::lround(std::abs(span) / dt));
  const double h = n == 0 ? 0.0 : span / n;
  for (int s = 0; s < n; ++s) {
    const double t = t0 + s * h;
    slice.set_time(t);
    const Vec6 k1 = velocity_rhs(slice, y, floor);
    slice.set_time(t + 0.5 * h);
    const Vec6 k2 = velocity_rhs(slice, add(y, k1, 0.5 * h), floor);
    const Vec6 k3 = velocity_rhs(slice, add(y, k2, 0.5 * h), floor);
    slice.set_time(t + h);
    const Vec6 k4 = velocity_rhs(slice, add(y, k3, h), floor);
    y.q += (h / 6.0) * (k1.q + 2.0 * k2.q + 2.0 * k3.q + k4.q);
    y.th += (h / 6.0) * (k1.th + 2.0 * k2.th + 2.0 * k3.th + k4.th);
  }
  return y;
}

double wrap_mod(double x, double period) { return std::remainder(x, period); }

struct EngineContext {
  const SpectralField* field;
  ReconOptions opt;
  double t;
  double floor;
  double rho_max = 0.0;
  std::vector<int> active;          // active coordinate indices (0..5)
  std::array<double, 6> fd_step{};  // cloud steps per coordinate
  double max_step;
};

// backward-integrates one block of queries in lockstep and fills results
void process_block(const EngineContext& ctx, const std::vector<QueryPoint>& queries,
                   size_t begin, size_t end, std::vector<QueryRecon>& out) {
  const size_t nq = end - begin;
  const size_t nstates = 1 + 2 * ctx.active.size();

  struct Work {
    std::vector<Vec6> y;
    double weber = 0.0, logd = 0.0;
    uint32_t flags = kFlagNone;
    Eigen::Vector3d v0, th0dot;  // velocities at the query (time t)
    bool have_v0 = false;
  };
  std::vector<Work> work(nq);
  for (size_t i = 0; i < nq; ++i) {
    const QueryPoint& qp = queries[begin + i];
    Work& w = work[i];
    w.y.resize(nstates);
    const Vec6 c{qp.x, {qp.ang.alpha, qp.ang.beta, qp.ang.gamma}};
    w.y[0] = c;
    for (size_t a = 0; a < ctx.active.size(); ++a) {
      const int coord = ctx.active[a];
      Vec6 plus = c, minus = c;
      double* pplus = coord < 3 ? &plus.q[coord] : &plus.th[coord - 3];
      double* pminus = coord < 3 ? &minus.q[coord] : &minus.th[coord - 3];
      *pplus += ctx.fd_step[coord];
      *pminus -= ctx.fd_step[coord];
      w.y[1 + 2 * a] = plus;
      w.y[2 + 2 * a] = minus;
    }
  }

  FieldSlice slice(*ctx.field);
  const int n_steps =
      ctx.t == 0.0 ? 0 : std::max(1, (int)std::lround(ctx.t / ctx.opt.dt));
  const double dt = n_steps == 0 ? 0.0 : -ctx.t / n_steps;

  struct Stage {
    std::vector<Vec6> k;
    double weber = 0.0, logd = 0.0;
  };
  std::vector<std::array<Stage, 4>> stages(nq);
  for (auto& st : stages) {
    for (auto& s : st) s.k.resize(nstates);
  }

  auto eval_stage = [&](Work& w, Stage& st, const std::vector<Vec6>& y) {
    try {
      const CenterDeriv cd = center_rhs(slice, y[0], ctx.floor);
      st.k[0] = cd.y;
      st.weber = cd.weber;
      st.logd = cd.logd;
      if (!w.have_v0) {
        w.v0 = cd.y.q;
        w.th0dot = cd.y.th;
        w.have_v0 = true;
      }
      if (cd.y.q.norm() * std::abs(dt) > ctx.max_step) {
        w.flags |= kFlagStep;
        return;
      }
      for (size_t j = 1; j < y.size(); ++j) st.k[j] = velocity_rhs(slice, y[j], ctx.floor);
    } catch (const PoleSingularity&) {
      w.flags |= kFlagPole;
    } catch (const NodeTooClose&) {
      w.flags |= kFlagNode;
    }
  };

  std::vector<Vec6> ytmp(nstates);
  for (int step = 0; step < n_steps; ++step) {
    const double tau = ctx.t + step * dt;
    const double stage_times[3] = {tau, tau + 0.5 * dt, tau + dt};
    for (int sidx = 0; sidx < 4; ++sidx) {
      slice.set_time(stage_times[sidx == 0 ? 0 : (sidx < 3 ? 1 : 2)]);
      for (size_t i = 0; i < nq; ++i) {
        Work& w = work[i];
        if (w.flags != kFlagNone) continue;
        const double h = sidx == 0 ? 0.0 : (sidx < 3 ? 0.5 * dt : dt);
        const Stage* prev = sidx == 0 ? nullptr : &stages[i][sidx - 1];
        if (sidx == 0) {
          eval_stage(w, stages[i][0], w.y);
        } else {
          for (size_t j = 0; j < nstates; ++j) ytmp[j] = add(w.y[j], prev->k[j], h);
          eval_stage(w, stages[i][sidx], ytmp);
        }
      }
    }
    for (size_t i = 0; i < nq; ++i) {
      Work& w = work[i];
      if (w.flags != kFlagNone) continue;
      const auto& st = stages[i];
      for (size_t j = 0; j < nstates; ++j) {
        w.y[j].q += (dt / 6.0) * (st[0].k[j].q + 2.0 * st[1].k[j].q +
                                  2.0 * st[2].k[j].q + st[3].k[j].q);
        w.y[j].th += (dt / 6.0) * (st[0].k[j].th + 2.0 * st[1].k[j].th +
                                   2.0 * st[2].k[j].th + st[3].k[j].th);
      }
      w.weber += (dt / 6.0) * (st[0].weber + 2.0 * st[1].weber + 2.0 * st[2].weber +
                               st[3].weber);
      w.logd += (dt / 6.0) * (st[0].logd + 2.0 * st[1].logd + 2.0 * st[2].logd +
                              st[3].logd);
    }
  }

  // capture query-time velocities when no steps were taken (t = 0)
  if (n_steps == 0) {
    slice.set_time(ctx.t);
    for (size_t i = 0; i < nq; ++i) {
      Work& w = work[i];
      try {
        const CenterDeriv cd = center_rhs(slice, w.y[0], ctx.floor);
        w.v0 = cd.y.q;
        w.th0dot = cd.y.th;
        w.have_v0 = true;
      } catch (const PoleSingularity&) {
        w.flags |= kFlagPole;
      } catch (const NodeTooClose&) {
        w.flags |= kFlagNode;
      }
    }
  }

  const auto& k = ctx.field->constants();
  FieldSlice slice0(*ctx.field);
  slice0.set_time(0.0);
  FieldSlice fwd_slice(*ctx.field);

  for (size_t i = 0; i < nq; ++i) {
    const QueryPoint& qp = queries[begin + i];
    Work& w = work[i];
    QueryRecon& res = out[begin + i];
    res.flags = w.flags;
    if (w.flags != kFlagNone) continue;

    res.label.q0 = w.y[0].q;
    res.label.theta0 = to_angles(w.y[0].th);

    const eulerian::PsiTable T0 = slice0.eval_psi(res.label.q0, res.label.theta0, 0, 0);
    const double rho0 = std::norm(T0.psi());
    if (rho0 < ctx.floor) {
      res.flags |= kFlagNode;
      continue;
    }
    const double S0 = k.hbar * std::arg(T0.psi());

    // inverse flow-map derivative from the cloud; J = 1/det
    Matrix6d minv = Matrix6d::Identity();
    for (size_t a = 0; a < ctx.active.size(); ++a) {
      const int coord = ctx.active[a];
      const Vec6& p = w.y[1 + 2 * a];
      const Vec6& m = w.y[2 + 2 * a];
      const double inv2h = 1.0 / (2.0 * ctx.fd_step[coord]);
      for (int row = 0; row < 3; ++row) {
        minv(row, coord) = (p.q[row] - m.q[row]) * inv2h;
        minv(3 + row, coord) = (p.th[row] - m.th[row]) * inv2h;
      }
    }
    const double det_minv = minv.determinant();
    if (std::abs(det_minv) < 1e-10 || !(std::isfinite(det_minv))) {
      res.flags |= kFlagStep;
      continue;
    }
    res.J = 1.0 / det_minv;
    res.D = std::sin(qp.ang.alpha) / std::sin(res.label.theta0.alpha) * res.J;
    res.D_transport = std::exp(-w.logd);
    if (!(res.D > 0.0) || !std::isfinite(res.D)) {
      res.flags |= kFlagStep;
      continue;
    }

    res.rho = rho0 / res.D;
    res.S = S0 - w.weber;
    res.psi = std::sqrt(res.rho) * std::polar(1.0, res.S / k.hbar);

    // (4.8) gradients from the trajectory velocities at the query
    const so3::BodyFrameMatrix bf = so3::euler_A(qp.ang);
    res.gradS.head<3>() = (k.hbar / k.c) * (bf.A_inv * w.th0dot);
    res.gradS.tail<3>() = (k.hbar / k.c) * (bf.A_inv.transpose() * w.v0);

    if (ctx.opt.check_roundtrip && n_steps > 0) {
      try {
        const Vec6 back = forward_positions(fwd_slice, w.y[0], 0.0, ctx.t,
                                            ctx.opt.dt, ctx.floor);
        double err2 = (back.q - qp.x).squaredNorm();
        err2 += (back.th[0] - qp.ang.alpha) * (back.th[0] - qp.ang.alpha);
        err2 += std::pow(wrap_mod(back.th[1] - qp.ang.beta, kTwoPi), 2);
        err2 += std::pow(wrap_mod(back.th[2] - qp.ang.gamma, kTwoPi), 2);
        res.roundtrip = std::sqrt(err2);
        if (res.roundtrip > ctx.opt.roundtrip_tol) res.flags |= kFlagStep;
      } catch (const std::runtime_error&) {
        res.flags |= kFlagStep;
      }
    }
  }
}

}  // namespace

LabelMapSample invert_labels(const SpectralField& field, double t,
                             const QueryPoint& query, const ReconOptions& opt) {
  ReconOptions o = opt;
  o.check_roundtrip = true;
  EngineContext ctx;
  ctx.field = &field;
  ctx.opt = o;
  ctx.t = t;
  {
    FieldSlice s(field);
    s.set_time(t);
    ctx.floor =
        opt.tau_node * eulerian::rho_scale(s, so3::make_angular_quadrature(16, 16, 4));
  }
  ctx.active = {3, 4, 5};
  for (int a = 0; a < 3; ++a) {
    if (field.grid().dims[a] > 1) ctx.active.insert(ctx.active.begin(), a);
  }
  std::sort(ctx.active.begin(), ctx.active.end());
  const double scales[6] = {field.grid().extent(0), field.grid().extent(1),
                            field.grid().extent(2), kPi, kTwoPi, kTwoPi};
  for (int c = 0; c < 6; ++c) ctx.fd_step[c] = opt.fd_step_rel * scales[c];
  ctx.max_step = 0.25 * std::min({field.grid().extent(0), field.grid().extent(1),
                                  field.grid().extent(2), kPi});

  std::vector<QueryPoint> qs{query};
  std::vector<QueryRecon> res(1);
  process_block(ctx, qs, 0, 1, res);
  if (res[0].flags & kFlagNode) throw NodeTooClose(0.0);
  if (res[0].flags & kFlagPole) throw PoleSingularity(query.ang.alpha);
  if (res[0].flags != kFlagNone) throw StepTooLarge("label inversion failed");
  LabelMapSample out;
  out.query = query;
  out.label = res[0].label;
  out.residual = res[0].roundtrip;
  return out;
}

ReconstructedState reconstruct(const SpectralField& field, double t,
                               const ReconOptions& opt) {
  if (!(opt.dt > 0.0)) throw std::invalid_argument("reconstruction dt must be positive");
  const auto& grid = field.grid();
  const auto& k = field.constants();

  ReconstructedState state;
  state.t = t;
  state.grid = grid;
  state.quad = so3::make_angular_quadrature(opt.n_alpha, opt.n_beta, opt.n_gamma);

  // query set: grid points x quadrature nodes
  std::vector<QueryPoint> queries;
  queries.reserve(grid.size() * state.quad.nodes.size());
  for (int ix = 0; ix < grid.dims[0]; ++ix) {
    for (int iy = 0; iy < grid.dims[1]; ++iy) {
      for (int iz = 0; iz < grid.dims[2]; ++iz) {
        const Eigen::Vector3d x = grid.point(ix, iy, iz);
        for (const auto& node : state.quad.nodes) queries.push_back({x, node});
      }
    }
  }

  EngineContext ctx;
  ctx.field = &field;
  ctx.opt = opt;
  ctx.t = t;
  {
    FieldSlice s(field);
    s.set_time(t);
    ctx.rho_max = eulerian::rho_scale(s, state.quad);
    ctx.floor = opt.tau_node * ctx.rho_max;
  }
  for (int a = 0; a < 3; ++a) {
    if (grid.dims[a] > 1) ctx.active.push_back(a);
  }
  ctx.active.push_back(3);
  ctx.active.push_back(4);
  ctx.active.push_back(5);
  const double scales[6] = {grid.extent(0), grid.extent(1), grid.extent(2),
                            kPi, kTwoPi, kTwoPi};
  for (int c = 0; c < 6; ++c) ctx.fd_step[c] = opt.fd_step_rel * scales[c];
  ctx.max_step =
      0.25 * std::min({grid.extent(0), grid.extent(1), grid.extent(2), kPi});

  state.queries.assign(queries.size(), QueryRecon{});
  const size_t block = 2048;
  const int workers = std::max(1, opt.workers);
  if (workers == 1) {
    for (size_t b = 0; b < queries.size(); b += block) {
      process_block(ctx, queries, b, std::min(queries.size(), b + block),
                    state.queries);
    }
  } else {
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        while (true) {
          const size_t b = next.fetch_add(block);
          if (b >= queries.size()) break;
          process_block(ctx, queries, b, std::min(queries.size(), b + block),
                        state.queries);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  for (const auto& qr : state.queries) {
    if (!qr.ok()) ++state.flagged;
    state.max_roundtrip = std::max(state.max_roundtrip, qr.roundtrip);
  }

  // spin-1 projection per grid point
  state.G = fields::SpinorField::zeros(grid);
  const size_t nn = state.quad.nodes.size();
  for (size_t p = 0; p < grid.size(); ++p) {
    std::array<cplx, 3> acc{};
    for (size_t n = 0; n < nn; ++n) {
      const QueryRecon& qr = state.queries[p * nn + n];
      if (!qr.ok()) continue;
      const cplx pw = state.quad.weights[n] * qr.psi;
      for (int idx = 0; idx < 3; ++idx) {
        acc[idx] += pw * std::conj(so3::basis_u(so3::spin_value(idx), state.quad.nodes[n]));
      }
    }
    for (int idx = 0; idx < 3; ++idx) state.G.G[idx][p] = acc[idx];
  }
  state.em = fields::spinor_to_em(state.G, k);

  // reference query: largest reconstructed density
  size_t ref = 0;
  double best = -1.0;
  for (size_t qi = 0; qi < state.queries.size(); ++qi) {
    if (state.queries[qi].ok() && state.queries[qi].rho > best) {
      best = state.queries[qi].rho;
      ref = qi;
    }
  }
  state.ref_query = ref;
  if (best < 0.0) return state;  // everything flagged; nothing more to pin down
  state.f_t = state.queries[ref].S;

  // secondary phase route: line integrals of the (4.8) gradient field along
  // coordinate chains through the reference query, compared modulo h
  FieldSlice slice(field);
  slice.set_time(t);
  std::vector<double> gl_n, gl_w;
  so3::gauss_legendre(8, gl_n, gl_w);

  // segments must run through good fluid: node tubes hide phase jumps that a
  // gradient line integral cannot represent
  const double chain_floor = std::max(ctx.floor, 1e-3 * ctx.rho_max);
  auto seg_integral = [&](const QueryPoint& a, const QueryPoint& b) {
    const Eigen::Vector3d dx = b.x - a.x;
    const Eigen::Vector3d dang(b.ang.alpha - a.ang.alpha, b.ang.beta - a.ang.beta,
                               b.ang.gamma - a.ang.gamma);
    double acc = 0.0;
    for (size_t g = 0; g < gl_n.size(); ++g) {
      const double u = 0.5 * (gl_n[g] + 1.0);
      const Eigen::Vector3d x = a.x + u * dx;
      const so3::EulerAngles ang{a.ang.alpha + u * dang[0], a.ang.beta + u * dang[1],
                                 a.ang.gamma + u * dang[2]};
      Eigen::Vector3d v, thdot;
      eulerian::velocity_sample(slice, x, ang, chain_floor, v, thdot);
      const so3::BodyFrameMatrix bf = so3::euler_A(ang);
      const Eigen::Vector3d gx = (k.hbar / k.c) * (bf.A_inv * thdot);
      const Eigen::Vector3d ga = (k.hbar / k.c) * (bf.A_inv.transpose() * v);
      acc += 0.5 * gl_w[g] * (gx.dot(dx) + ga.dot(dang));
    }
    return acc;
  };

  const size_t ref_point = ref / nn;
  const size_t ref_node = ref % nn;
  const int rp[3] = {static_cast<int>(ref_point / (grid.dims[1] * grid.dims[2])),
                     static_cast<int>((ref_point / grid.dims[2]) % grid.dims[1]),
                     static_cast<int>(ref_point % grid.dims[2])};
  const int rn_a = static_cast<int>(ref_node / (opt.n_beta * opt.n_gamma));
  const int rn_b = static_cast<int>((ref_node / opt.n_gamma) % opt.n_beta);
  const int rn_g = static_cast<int>(ref_node % opt.n_gamma);

  auto walk_chain = [&](const std::vector<size_t>& chain) {
    // chain[0] must be the reference query
    double s_line = state.queries[chain[0]].S;
    for (size_t c = 1; c < chain.size(); ++c) {
      const QueryRecon& prev = state.queries[chain[c - 1]];
      const QueryRecon& cur = state.queries[chain[c]];
      if (!prev.ok() || !cur.ok()) break;
      try {
        s_line += seg_integral(queries[chain[c - 1]], queries[chain[c]]);
      } catch (const std::runtime_error&) {
        break;
      }
      const double gap = std::abs(wrap_mod(cur.S - s_line, k.h()));
      state.phase_method_gap = std::max(state.phase_method_gap, gap);
    }
  };

  auto node_index = [&](int ia, int ib, int ig) {
    return static_cast<size_t>((ia * opt.n_beta + ib) * opt.n_gamma + ig);
  };
  auto query_of = [&](int ix, int iy, int iz, size_t node) {
    return grid.index(ix, iy, iz) * nn + node;
  };

  // spatial chains along each non-collapsed axis, then alpha/beta/gamma chains
  for (int axis = 0; axis < 3; ++axis) {
    if (grid.dims[axis] == 1) continue;
    for (int dir : {+1, -1}) {
      std::vector<size_t> chain{ref};
      int pos[3] = {rp[0], rp[1], rp[2]};
      for (int s = 0; s < grid.dims[axis] - 1; ++s) {
        pos[axis] += dir;
        if (pos[axis] < 0 || pos[axis] >= grid.dims[axis]) break;
        chain.push_back(query_of(pos[0], pos[1], pos[2], ref_node));
      }
      walk_chain(chain);
    }
  }
  for (int dir : {+1, -1}) {
    std::vector<size_t> chain{ref};
    for (int ia = rn_a + dir; ia >= 0 && ia < opt.n_alpha; ia += dir) {
      chain.push_back(query_of(rp[0], rp[1], rp[2], node_index(ia, rn_b, rn_g)));
    }
    walk_chain(chain);
    chain = {ref};
    for (int ib = rn_b + dir; ib >= 0 && ib < opt.n_beta; ib += dir) {
      chain.push_back(query_of(rp[0], rp[1], rp[2], node_index(rn_a, ib, rn_g)));
    }
    walk_chain(chain);
    chain = {ref};
    for (int ig = rn_g + dir; ig >= 0 && ig < opt.n_gamma; ig += dir) {
      chain.push_back(query_of(rp[0], rp[1], rp[2], node_index(rn_a, rn_b, ig)));
    }
    walk_chain(chain);
  }

  return state;
}

DeformationData deformation(const lagrangian::EnsembleSpec& spec,
                            const std::vector<lagrangian::Trajectory>& forward,
                            double t) {
  size_t total = 1;
  for (int c : spec.counts) total *= c;
  if (forward.size() != total) {
    throw ShapeMismatch("deformation: ensemble does not match lattice spec");
  }
  if (spec.counts[3] > 1 && spec.counts[3] < 3) {
    throw std::invalid_argument("deformation: theta1 axis needs >= 3 points");
  }

  // strides of the lattice order produced by make_label_lattice
  std::array<size_t, 6> stride;
  stride[5] = 1;
  for (int a = 4; a >= 0; --a) stride[a] = stride[a + 1] * spec.counts[a + 1];

  auto sample_at = [&](const lagrangian::Trajectory& tr) -> const auto& {
    const auto* best = &tr.samples.front();
    for (const auto& s : tr.samples) {
      if (std::abs(s.t - t) < std::abs(best->t - t)) best = &s;
    }
    return *best;
  };
  auto state6 = [&](size_t idx) {
    const auto& s = sample_at(forward[idx]);
    Eigen::Matrix<double, 6, 1> y;
    y << s.q, s.theta;
    return y;
  };

  const double spacing[6] = {
      spec.box[0] / spec.counts[0], spec.box[1] / spec.counts[1],
      spec.box[2] / spec.counts[2], kPi / spec.counts[3],
      kTwoPi / spec.counts[4],      kTwoPi / spec.counts[5]};
  // evolved-coordinate shift applied when a label-axis difference wraps
  const double period[6] = {spec.box[0], spec.box[1], spec.box[2], 0.0, kTwoPi, kTwoPi};

  DeformationData out;
  out.flow_jac.resize(total);
  out.cofactor.resize(total);
  out.J.assign(total, std::numeric_limits<double>::quiet_NaN());
  out.D.assign(total, std::numeric_limits<double>::quiet_NaN());
  out.log_D_transport.assign(total, std::numeric_limits<double>::quiet_NaN());
  out.min_D = std::numeric_limits<double>::infinity();
  out.max_D = -std::numeric_limits<double>::infinity();

  std::array<int, 6> mi{};
  for (size_t idx = 0; idx < total; ++idx) {
    size_t rem = idx;
    for (int a = 0; a < 6; ++a) {
      mi[a] = static_cast<int>(rem / stride[a]);
      rem %= stride[a];
    }
    if (!forward[idx].ok()) continue;

    Matrix6d M = Matrix6d::Identity();
    bool usable = true;
    for (int a = 0; a < 6 && usable; ++a) {
      if (spec.counts[a] == 1) continue;  // collapsed axis: exact identity column
      Eigen::Matrix<double, 6, 1> col;
      if (a == 3 && (mi[a] == 0 || mi[a] == spec.counts[a] - 1)) {
        // theta1 is not periodic: one-sided second-order difference at the ends
        const int dir = mi[a] == 0 ? +1 : -1;
        const size_t i1 = idx + dir * static_cast<long>(stride[a]);
        const size_t i2 = idx + 2 * dir * static_cast<long>(stride[a]);
        if (!forward[i1].ok() || !forward[i2].ok()) {
          usable = false;
          break;
        }
        col = dir *
              (-3.0 * state6(idx) + 4.0 * state6(i1) - state6(i2)) / (2.0 * spacing[a]);
      } else {
        const int ip = (mi[a] + 1) % spec.counts[a];
        const int im = (mi[a] - 1 + spec.counts[a]) % spec.counts[a];
        const size_t idx_p = idx + (ip - mi[a]) * static_cast<long>(stride[a]);
        const size_t idx_m = idx + (im - mi[a]) * static_cast<long>(stride[a]);
        if (!forward[idx_p].ok() || !forward[idx_m].ok()) {
          usable = false;
          break;
        }
        Eigen::Matrix<double, 6, 1> yp = state6(idx_p);
        Eigen::Matrix<double, 6, 1> ym = state6(idx_m);
        if (mi[a] + 1 >= spec.counts[a]) yp[a] += period[a];
        if (mi[a] - 1 < 0) ym[a] -= period[a];
        col = (yp - ym) / (2.0 * spacing[a]);
      }
      M.col(a) = col;
    }
    if (!usable) continue;

    const double J = M.determinant();
    if (std::abs(J) < 1e-10) throw DegenerateJacobian(J);
    out.flow_jac[idx] = M;
    out.cofactor[idx] = J * M.inverse();
    out.J[idx] = J;
    const auto& s = sample_at(forward[idx]);
    out.D[idx] = std::sin(s.theta[0]) / std::sin(forward[idx].label.theta0.alpha) * J;
    out.log_D_transport[idx] = -s.log_rho;
    out.min_D = std::min(out.min_D, out.D[idx]);
    out.max_D = std::max(out.max_D, out.D[idx]);
  }
  return out;
}

CompareReport compare(const fields::SpinorField& test, const fields::SpinorField& ref,
                      const PhysicalConstants& k, const std::vector<double>* mask) {
  if (!(test.grid == ref.grid)) throw ShapeMismatch("compare: grids differ");
  const size_t n = ref.grid.size();
  auto mval = [&](size_t p) { return mask == nullptr ? 1.0 : (*mask)[p]; };

  // global phase alignment on the spinor inner product
  cplx inner = 0.0;
  for (int a = 0; a < 3; ++a) {
    for (size_t p = 0; p < n; ++p) {
      inner += mval(p) * std::conj(test.G[a][p]) * ref.G[a][p];
    }
  }
  CompareReport rep;
  rep.phase = std::abs(inner) > 0.0 ? std::arg(inner) : 0.0;
  const cplx rot = std::polar(1.0, rep.phase);

  fields::SpinorField aligned = test;
  for (int a = 0; a < 3; ++a) {
    for (size_t p = 0; p < n; ++p) aligned.G[a][p] *= rot;
  }

  double num = 0.0, den = 0.0;
  for (int a = 0; a < 3; ++a) {
    for (size_t p = 0; p < n; ++p) {
      num += mval(p) * std::norm(aligned.G[a][p] - ref.G[a][p]);
      den += mval(p) * std::norm(ref.G[a][p]);
      rep.max_abs_G =
          std::max(rep.max_abs_G, mval(p) * std::abs(aligned.G[a][p] - ref.G[a][p]));
    }
  }
  rep.rel_l2_G = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);

  const fields::EMFieldGrid em_t = fields::spinor_to_em(aligned, k);
  const fields::EMFieldGrid em_r = fields::spinor_to_em(ref, k);
  double ne = 0.0, nb = 0.0, de = 0.0, db = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (size_t p = 0; p < n; ++p) {
      const double w = mval(p);
      ne += w * std::pow(em_t.E[i][p] - em_r.E[i][p], 2);
      nb += w * std::pow(em_t.B[i][p] - em_r.B[i][p], 2);
      de += w * std::pow(em_r.E[i][p], 2);
      db += w * std::pow(em_r.B[i][p], 2);
    }
  }
  const double c2 = k.c * k.c;
  rep.rel_l2_E = de > 0.0 ? std::sqrt(ne / de) : std::sqrt(ne);
  rep.rel_l2_B = db > 0.0 ? std::sqrt(nb / db) : std::sqrt(nb);
  rep.rel_l2_EB = std::sqrt((ne + c2 * nb) / (de + c2 * db));

  const double e_test = aligned.energy(k), e_ref = ref.energy(k);
  rep.energy_rel = e_ref > 0.0 ? std::abs(e_test - e_ref) / e_ref : e_test;
  const auto div = fields::check_divergence(em_t);
  rep.div_E = div.first;
  rep.div_B = div.second;
  return rep;
}

}  // namespace emhydro::recon
