#include "emhydro/pipeline.hpp"

#include <cmath>

#include "emhydro/fft.hpp"
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

namespace emhydro::pipeline {

namespace {

namespace fs = std::filesystem;
using io::format_double;

void add_travelling_component(fields::EMFieldGrid& em, const PhysicalConstants& k,
                              const cfg::FieldComponent& comp) {
  const fields::GridSpec& g = em.grid;
  Eigen::Vector3d kv(g.wavenumber(0, comp.n[0]), g.wavenumber(1, comp.n[1]),
                     g.wavenumber(2, comp.n[2]));
  Eigen::Vector3d pol = Eigen::Vector3d::Zero();
  pol[comp.pol == "x" ? 0 : (comp.pol == "y" ? 1 : 2)] = 1.0;

  Eigen::Vector3d evec = pol, bvec = Eigen::Vector3d::Zero();
  if (kv.norm() > 0.0) {
    const Eigen::Vector3d khat = kv / kv.norm();
    evec = pol - pol.dot(khat) * khat;  // transverse projection
    if (evec.norm() < 1e-12) {
      throw ConfigError("component polarization parallel to its wavevector");
    }
    evec.normalize();
    bvec = khat.cross(evec) / k.c;
  }
  for (int ix = 0; ix < g.dims[0]; ++ix) {
    for (int iy = 0; iy < g.dims[1]; ++iy) {
      for (int iz = 0; iz < g.dims[2]; ++iz) {
        const size_t p = g.index(ix, iy, iz);
        const double arg = kv.dot(g.point(ix, iy, iz)) + comp.phase;
        const double osc = comp.amplitude * std::cos(arg);
        for (int i = 0; i < 3; ++i) {
          em.E[i][p] += osc * evec[i];
          em.B[i][p] += osc * bvec[i];
        }
      }
    }
  }
}

std::string snap_name(const char* stem, size_t idx) {
  std::ostringstream os;
  os << stem << "_" << std::setw(3) << std::setfill('0') << idx << ".emh1";
  return os.str();
}

}  // namespace

fields::EMFieldGrid initial_em(const cfg::RunConfig& cfg) {
  fields::EMFieldGrid em = fields::EMFieldGrid::zeros(cfg.grid);
  const fields::GridSpec& g = cfg.grid;
  const double kz = g.wavenumber(2, cfg.field.harmonic);
  const double E0 = cfg.field.amplitude;
  const double c = cfg.constants.c;

  switch (cfg.field.preset) {
    case cfg::FieldSpec::Preset::PlaneWave: {
      const std::string& pol = cfg.field.polarization;
      for (int ix = 0; ix < g.dims[0]; ++ix) {
        for (int iy = 0; iy < g.dims[1]; ++iy) {
          for (int iz = 0; iz < g.dims[2]; ++iz) {
            const size_t p = g.index(ix, iy, iz);
            const double z = iz * g.spacing[2];
            const double cz = std::cos(kz * z), sz = std::sin(kz * z);
            if (pol == "linear_x") {
              em.E[0][p] = E0 * cz;
              em.B[1][p] = E0 / c * cz;
            } else if (pol == "linear_y") {
              em.E[1][p] = E0 * cz;
              em.B[0][p] = -E0 / c * cz;
            } else if (pol == "circular_plus") {
              em.E[0][p] = E0 * cz;
              em.E[1][p] = -E0 * sz;
              em.B[0][p] = E0 / c * sz;
              em.B[1][p] = E0 / c * cz;
            } else if (pol == "circular_minus") {
              em.E[0][p] = E0 * cz;
              em.E[1][p] = E0 * sz;
              em.B[0][p] = -E0 / c * sz;
              em.B[1][p] = E0 / c * cz;
            } else {
              throw ConfigError("unknown plane_wave polarization: " + pol);
            }
          }
        }
      }
      break;
    }
    case cfg::FieldSpec::Preset::StandingWave: {
      for (int ix = 0; ix < g.dims[0]; ++ix) {
        for (int iy = 0; iy < g.dims[1]; ++iy) {
          for (int iz = 0; iz < g.dims[2]; ++iz) {
            em.E[0][g.index(ix, iy, iz)] = E0 * std::cos(kz * iz * g.spacing[2]);
          }
        }
      }
      break;
    }
    case cfg::FieldSpec::Preset::Superposition: {
      for (const auto& comp : cfg.field.components) {
        add_travelling_component(em, cfg.constants, comp);
      }
      break;
    }
  }
  return em;
}

eulerian::SpectralField make_field(const cfg::RunConfig& cfg) {
  const fields::EMFieldGrid em = initial_em(cfg);
  const auto div = fields::check_divergence(em);
  if (div.first > 1e-10 || div.second > 1e-10) {
    throw ConstraintViolation("initial field violates the divergence constraints: |div E|=" +
                              format_double(div.first) + " |div B|=" +
                              format_double(div.second));
  }
  const fields::SpinorField g = fields::em_to_spinor(em, cfg.constants);
  eulerian::SpectralField field = eulerian::SpectralField::from_grid(g, cfg.constants, 1e-13);
  if (field.max_longitudinal() > 1e-10) {
    throw ConstraintViolation("initial field has a longitudinal component");
  }
  return field;
}

lagrangian::EnsembleSpec ensemble_spec(const cfg::RunConfig& cfg,
                                       const eulerian::SpectralField& field) {
  lagrangian::EnsembleSpec spec;
  spec.counts = cfg.ensemble_counts;
  for (int a = 0; a < 3; ++a) spec.box[a] = cfg.grid.extent(a);
  spec.dt = cfg.dt_fraction * field.dominant_period();
  spec.t_final = cfg.t_final;
  spec.sample_stride = cfg.sample_stride;
  return spec;
}

std::vector<lagrangian::FluidLabel> make_labels(const cfg::RunConfig& cfg,
                                                const eulerian::SpectralField& field,
                                                size_t& dropped) {
  const lagrangian::EnsembleSpec spec = ensemble_spec(cfg, field);
  std::vector<lagrangian::FluidLabel> lattice = lagrangian::make_label_lattice(spec);
  eulerian::FieldSlice slice(field);
  const double floor = eulerian::kDefaultTauNode *
                       eulerian::rho_scale(slice, so3::make_angular_quadrature(16, 16, 4));
  std::vector<lagrangian::FluidLabel> keep;
  keep.reserve(lattice.size());
  for (const auto& lab : lattice) {
    const auto T = slice.eval_psi(lab.q0, lab.theta0, 0, 0);
    if (std::norm(T.psi()) >= floor) keep.push_back(lab);
  }
  dropped = lattice.size() - keep.size();
  return keep;
}

recon::ReconOptions recon_options(const cfg::RunConfig& cfg,
                                  const eulerian::SpectralField& field, int workers) {
  recon::ReconOptions opt;
  opt.dt = cfg.recon_dt_fraction * field.dominant_period();
  opt.n_alpha = cfg.recon_alpha;
  opt.n_beta = cfg.recon_beta;
  opt.n_gamma = cfg.recon_gamma;
  opt.fd_step_rel = cfg.fd_step_rel;
  opt.workers = workers;
  return opt;
}

int cmd_evolve(const cfg::RunConfig& cfg, const std::string& outdir,
               const std::vector<double>& times, std::ostream& log) {
  const eulerian::SpectralField field = make_field(cfg);
  fs::create_directories(outdir);
  const std::vector<double> ts = times.empty() ? std::vector<double>{0.0} : times;
  for (size_t i = 0; i < ts.size(); ++i) {
    io::Snapshot snap;
    snap.field = field.to_grid(ts[i]);
    snap.time = ts[i];
    snap.constants = cfg.constants;
    const std::string file = (fs::path(outdir) / snap_name("evolve", i)).string();
    io::write_snapshot(file, snap);
    const auto div = fields::check_divergence(
        fields::spinor_to_em(snap.field, cfg.constants));
    log << "evolve t=" << format_double(ts[i]) << " file=" << file
        << " energy=" << format_double(snap.field.energy(cfg.constants))
        << " divE=" << format_double(div.first)
        << " divB=" << format_double(div.second) << "\n";
  }
  return 0;
}

int cmd_trace(const cfg::RunConfig& cfg, const std::string& outdir, std::ostream& log) {
  const eulerian::SpectralField field = make_field(cfg);
  size_t dropped = 0;
  const auto labels = make_labels(cfg, field, dropped);
  const lagrangian::EnsembleSpec spec = ensemble_spec(cfg, field);

  lagrangian::IntegratorOptions opt;
  opt.dt = spec.dt;
  opt.t_final = spec.t_final;
  opt.sample_stride = spec.sample_stride;
  lagrangian::GuidedIntegrator integrator(field, opt);
  const auto trajs = integrator.integrate(labels, 0.0, spec.t_final);

  fs::create_directories(outdir);
  const std::string file = (fs::path(outdir) / "trajectories.csv").string();
  io::write_trajectory_csv(file, trajs);

  size_t failed = 0;
  std::ostringstream failed_list;
  for (size_t i = 0; i < trajs.size(); ++i) {
    if (!trajs[i].ok()) {
      if (failed < 20) failed_list << (failed ? "," : "") << i;
      ++failed;
    }
  }
  log << "trace labels=" << labels.size() << " dropped_node_seeds=" << dropped
      << " failed=" << failed << " file=" << file << "\n";
  if (failed > 0) {
    log << "failed labels: " << failed_list.str() << (failed > 20 ? ",..." : "")
        << "\n";
    std::ofstream sentinel(fs::path(outdir) / "FAILED");
    sentinel << "trace: " << failed << " trajectories flagged\n";
    return 4;
  }
  return 0;
}

int cmd_reconstruct(const cfg::RunConfig& cfg, const std::string& outdir,
                    const std::vector<double>& times, int workers, std::ostream& log) {
  const eulerian::SpectralField field = make_field(cfg);
  const recon::ReconOptions opt = recon_options(cfg, field, workers);
  fs::create_directories(outdir);
  const std::vector<double> ts = times.empty() ? std::vector<double>{cfg.t_final} : times;
  std::ofstream report(fs::path(outdir) / "reconstruction_report.txt");

  for (size_t i = 0; i < ts.size(); ++i) {
    const recon::ReconstructedState state = recon::reconstruct(field, ts[i], opt);
    io::Snapshot snap;
    snap.field = state.G;
    snap.time = ts[i];
    snap.constants = cfg.constants;
    const std::string file = (fs::path(outdir) / snap_name("recon", i)).string();
    io::write_snapshot(file, snap);

    const fields::SpinorField ref = field.to_grid(ts[i]);
    const recon::CompareReport rep = recon::compare(state.G, ref, cfg.constants);
    std::ostringstream line;
    line << "reconstruct t=" << format_double(ts[i]) << " file=" << file
         << " rel_l2_EB=" << format_double(rep.rel_l2_EB)
         << " rel_l2_G=" << format_double(rep.rel_l2_G)
         << " phase=" << format_double(rep.phase)
         << " flagged=" << state.flagged
         << " max_roundtrip=" << format_double(state.max_roundtrip)
         << " phase_gap=" << format_double(state.phase_method_gap)
         << " f_t=" << format_double(state.f_t);
    log << line.str() << "\n";
    report << line.str() << "\n";
  }
  return 0;
}

int cmd_compare(const std::string& path_a, const std::string& path_b, std::ostream& log) {
  const io::Snapshot a = io::read_snapshot(path_a);
  const io::Snapshot b = io::read_snapshot(path_b);
  const recon::CompareReport rep = recon::compare(a.field, b.field, b.constants);
  log << "compare rel_l2_G=" << format_double(rep.rel_l2_G)
      << " rel_l2_E=" << format_double(rep.rel_l2_E)
      << " rel_l2_B=" << format_double(rep.rel_l2_B)
      << " rel_l2_EB=" << format_double(rep.rel_l2_EB)
      << " max_abs_G=" << format_double(rep.max_abs_G)
      << " phase=" << format_double(rep.phase)
      << " energy_rel=" << format_double(rep.energy_rel)
      << " divE=" << format_double(rep.div_E)
      << " divB=" << format_double(rep.div_B) << "\n";
  return 0;
}

namespace {

struct CheckList {
  std::ostream& log;
  bool all_ok = true;

  void add(const std::string& name, double value, double tol) {
    const bool ok = value <= tol;
    all_ok = all_ok && ok;
    log << (ok ? "PASS " : "FAIL ") << name << " value=" << format_double(value)
        << " tol=" << format_double(tol) << "\n";
  }
};

fields::SpinorField random_spinor(const fields::GridSpec& g, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  fields::SpinorField f = fields::SpinorField::zeros(g);
  for (int a = 0; a < 3; ++a) {
    for (auto& v : f.G[a]) v = {nd(rng), nd(rng)};
  }
  return f;
}

}  // namespace

int cmd_verify(const cfg::RunConfig& cfg, const std::vector<std::string>& snapshots,
               std::ostream& log) {
  for (const auto& path : snapshots) {
    io::validate_snapshot(path);
    log << "snapshot ok: " << path << "\n";
  }

  CheckList checks{log};
  const auto& k = cfg.constants;

  // representation algebra
  {
    const Eigen::Matrix3cd U = so3::unitary_U();
    checks.add("U_unitary", (U * U.adjoint() - Eigen::Matrix3cd::Identity()).cwiseAbs().maxCoeff(),
               1e-14);
    const auto s = so3::spin_matrices(k.hbar);
    const auto J = so3::diag_spin_matrices(k.hbar);
    double worst = 0.0;
    for (int i = 0; i < 3; ++i) {
      const int j = (i + 1) % 3, l = (i + 2) % 3;
      worst = std::max(worst, ((s[i] * s[j] - s[j] * s[i]) -
                               std::complex<double>(0, 1) * k.hbar * s[l])
                                  .cwiseAbs()
                                  .maxCoeff());
      worst = std::max(worst, (U * s[i] * U.inverse() - J[i]).cwiseAbs().maxCoeff());
    }
    checks.add("spin_algebra", worst, 1e-13 * std::max(1.0, k.hbar));
  }

  // quadrature against orthonormality and the angular matrix elements
  {
    const auto quad =
        so3::make_angular_quadrature(cfg.quad_alpha, cfg.quad_beta, cfg.quad_gamma);
    const auto J = so3::diag_spin_matrices(k.hbar);
    double worst_gram = 0.0, worst_me = 0.0;
    const so3::AngularOp ops[3] = {so3::AngularOp::M1, so3::AngularOp::M2,
                                   so3::AngularOp::M3};
    for (int ai = 0; ai < 3; ++ai) {
      for (int bi = 0; bi < 3; ++bi) {
        const auto gram = quad.integrate([&](const so3::EulerAngles& ang) {
          return std::conj(so3::basis_u(so3::spin_value(ai), ang)) *
                 so3::basis_u(so3::spin_value(bi), ang);
        });
        worst_gram = std::max(worst_gram, std::abs(gram - (ai == bi ? 1.0 : 0.0)));
        for (int i = 0; i < 3; ++i) {
          const auto me = quad.integrate([&](const so3::EulerAngles& ang) {
            const so3::AngularJet jet = so3::basis_jet(so3::spin_value(bi), ang);
            return std::conj(so3::basis_u(so3::spin_value(ai), ang)) *
                   so3::apply_angular_operator(ops[i], jet, ang, k.hbar);
          });
          worst_me = std::max(worst_me, std::abs(me - J[i](ai, bi)));
        }
      }
    }
    checks.add("basis_orthonormality", worst_gram, 1e-12);
    checks.add("angular_matrix_elements", worst_me, 1e-10 * std::max(1.0, k.hbar));
  }

  // conversion round trips on a random state
  {
    fields::GridSpec g{{4, 4, 8}, {0.25, 0.25, 0.125}};
    const fields::SpinorField f = random_spinor(g, 12345);
    const fields::SpinorField back =
        fields::em_to_spinor(fields::spinor_to_em(f, k), k);
    double worst = 0.0;
    for (int a = 0; a < 3; ++a) {
      for (size_t p = 0; p < g.size(); ++p) {
        worst = std::max(worst, std::abs(back.G[a][p] - f.G[a][p]));
      }
    }
    checks.add("representation_roundtrip", worst, 1e-13);
  }

  const eulerian::SpectralField field = make_field(cfg);
  const double T = field.dominant_period();

  // exact propagation: unitarity, composition, reversibility
  {
    const fields::SpinorField g0 = field.to_grid(0.0);
    const fields::SpinorField gt = eulerian::evolve_spinor(g0, 0.37 * T, k);
    checks.add("evolution_energy_drift",
               std::abs(gt.energy(k) - g0.energy(k)) / g0.energy(k), 1e-12);
    const fields::SpinorField back = eulerian::evolve_spinor(gt, -0.37 * T, k);
    double worst = 0.0;
    for (int a = 0; a < 3; ++a) {
      for (size_t p = 0; p < g0.grid.size(); ++p) {
        worst = std::max(worst, std::abs(back.G[a][p] - g0.G[a][p]));
      }
    }
    checks.add("evolution_reversibility", worst, 1e-12);
  }

  // observable routes and the angular-average Poynting identity
  {
    const fields::SpinorField gt = field.to_grid(0.31 * T);
    const auto quad = so3::make_angular_quadrature(
        std::min(cfg.quad_alpha, 16), std::min(cfg.quad_beta, 16), 4);
    const auto o_eb = fields::observables(gt, k, fields::ObservableRoute::EB);
    const auto o_rs =
        fields::observables(gt, k, fields::ObservableRoute::RiemannSilberstein);
    const auto o_g = fields::observables(gt, k, fields::ObservableRoute::Spinor);
    double worst = 0.0;
    for (size_t p = 0; p < gt.grid.size(); ++p) {
      worst = std::max(worst, std::abs(o_eb.energy_density[p] - o_g.energy_density[p]));
      worst = std::max(worst, std::abs(o_rs.energy_density[p] - o_g.energy_density[p]));
      for (int i = 0; i < 3; ++i) {
        worst = std::max(worst, std::abs(o_eb.poynting[i][p] - o_g.poynting[i][p]));
        worst = std::max(worst, std::abs(o_rs.poynting[i][p] - o_g.poynting[i][p]));
      }
    }
    checks.add("observable_routes", worst, 1e-10);

    eulerian::FieldSlice slice(field);
    slice.set_time(0.31 * T);
    double worst_avg = 0.0;
    const size_t stride = std::max<size_t>(1, gt.grid.size() / 4);
    for (size_t p = 0; p < gt.grid.size(); p += stride) {
      const int iz = static_cast<int>(p % gt.grid.dims[2]);
      const int iy = static_cast<int>((p / gt.grid.dims[2]) % gt.grid.dims[1]);
      const int ix = static_cast<int>(p / (gt.grid.dims[1] * gt.grid.dims[2]));
      const Eigen::Vector3d x = gt.grid.point(ix, iy, iz);
      Eigen::Vector3d avg = Eigen::Vector3d::Zero();
      for (size_t n = 0; n < quad.nodes.size(); ++n) {
        const auto T1 = slice.eval_psi(x, quad.nodes[n], 0, 1);
        const so3::BodyFrameMatrix bf = so3::euler_A(quad.nodes[n]);
        // rho v_i = c Im[psi* lambda_i psi]
        for (int i = 0; i < 3; ++i) {
          const auto lam = bf.A(i, 0) * T1.d[0][1] + bf.A(i, 1) * T1.d[0][2];
          avg[i] += quad.weights[n] * k.c * std::imag(std::conj(T1.psi()) * lam);
        }
      }
      for (int i = 0; i < 3; ++i) {
        worst_avg = std::max(worst_avg, std::abs(avg[i] - o_eb.poynting[i][p]));
      }
    }
    checks.add("poynting_angular_average", worst_avg, 1e-8);
  }

  // Poynting theorem: du/dt + div S = 0 from closely spaced snapshots
  {
    const double delta = 1e-4 * T;
    const double t0 = 0.23 * T;
    std::array<fields::Observables, 4> obs;
    const double offs[4] = {-2 * delta, -delta, delta, 2 * delta};
    for (int j = 0; j < 4; ++j) {
      obs[j] = fields::observables(field.to_grid(t0 + offs[j]), k,
                                   fields::ObservableRoute::Spinor);
    }
    const auto o0 =
        fields::observables(field.to_grid(t0), k, fields::ObservableRoute::Spinor);
    // spectral divergence of the Poynting field
    std::vector<std::complex<double>> div(cfg.grid.size(), 0.0);
    const fields::GridSpec& g = cfg.grid;
    for (int axis = 0; axis < 3; ++axis) {
      if (g.dims[axis] == 1) continue;
      std::vector<std::complex<double>> comp(g.size());
      for (size_t p = 0; p < g.size(); ++p) comp[p] = o0.poynting[axis][p];
      fft::forward(g, comp);
      for (int ix = 0; ix < g.dims[0]; ++ix) {
        for (int iy = 0; iy < g.dims[1]; ++iy) {
          for (int iz = 0; iz < g.dims[2]; ++iz) {
            const int bins[3] = {ix, iy, iz};
            comp[g.index(ix, iy, iz)] *= std::complex<double>(
                0.0, g.wavenumber(axis, g.signed_harmonic(axis, bins[axis])));
          }
        }
      }
      for (size_t p = 0; p < g.size(); ++p) div[p] += comp[p];
    }
    fft::backward(g, div);
    double worst = 0.0;
    for (size_t p = 0; p < g.size(); ++p) {
      const double dudt = (8.0 * (obs[2].energy_density[p] - obs[1].energy_density[p]) -
                           (obs[3].energy_density[p] - obs[0].energy_density[p])) /
                          (12.0 * delta);
      worst = std::max(worst, std::abs(dudt + div[p].real()));
    }
    checks.add("poynting_theorem", worst, 1e-8);
  }

  // divergence constraints preserved under evolution
  {
    const auto div = fields::check_divergence(
        fields::spinor_to_em(field.to_grid(0.77 * T), k));
    checks.add("divergence_preservation", std::max(div.first, div.second), 1e-10);
  }

  // hbar drops out of the trajectories
  {
    cfg::RunConfig doubled = cfg;
    doubled.constants.hbar *= 2.0;
    const eulerian::SpectralField field2 = make_field(doubled);
    lagrangian::IntegratorOptions opt;
    opt.dt = cfg.dt_fraction * T;
    opt.t_final = 0.2 * T;
    lagrangian::GuidedIntegrator i1(field, opt), i2(field2, opt);
    const lagrangian::FluidLabel lab{{0.3 * cfg.grid.extent(0), 0.2 * cfg.grid.extent(1),
                                      0.15 * cfg.grid.extent(2)},
                                     {1.1, 0.7, 0.3}};
    const auto t1 = i1.integrate_one(lab, 0.0, opt.t_final);
    const auto t2 = i2.integrate_one(lab, 0.0, opt.t_final);
    double worst = 0.0;
    if (t1.ok() && t2.ok()) {
      worst = std::max((t1.back().q - t2.back().q).cwiseAbs().maxCoeff(),
                       (t1.back().theta - t2.back().theta).cwiseAbs().maxCoeff());
    } else {
      worst = t1.flags == t2.flags ? 0.0 : 1.0;
    }
    checks.add("hbar_independence", worst, 1e-12);
  }

  // l never enters EM-case outputs
  {
    cfg::RunConfig scaled = cfg;
    scaled.constants.l *= 2.0;
    const eulerian::SpectralField field2 = make_field(scaled);
    lagrangian::IntegratorOptions opt;
    opt.dt = cfg.dt_fraction * T;
    opt.t_final = 0.1 * T;
    std::vector<lagrangian::FluidLabel> ring;
    for (int i = 0; i < 32; ++i) {
      ring.push_back({{0.0, 0.0, 0.1 * cfg.grid.extent(2)},
                      {kPi / 3, kTwoPi * (i + 0.5) / 32, 0.4}});
    }
    const double c1 = lagrangian::circulation_transport(field, ring, opt.t_final, opt);
    const double c2 = lagrangian::circulation_transport(field2, ring, opt.t_final, opt);
    checks.add("l_independence", std::abs(c1 - c2), 1e-12 * std::max(1.0, std::abs(c1)));
  }

  // snapshot round trip through the output directory
  {
    fs::create_directories(cfg.output_dir);
    io::Snapshot snap;
    snap.field = field.to_grid(0.0);
    snap.time = 0.0;
    snap.constants = k;
    const std::string file = (fs::path(cfg.output_dir) / "verify_roundtrip.emh1").string();
    io::write_snapshot(file, snap);
    const io::Snapshot rd = io::read_snapshot(file);
    double worst = 0.0;
    for (int a = 0; a < 3; ++a) {
      for (size_t p = 0; p < snap.field.grid.size(); ++p) {
        if (rd.field.G[a][p] != snap.field.G[a][p]) worst = 1.0;
      }
    }
    checks.add("snapshot_roundtrip", worst, 0.0);
  }

  log << (checks.all_ok ? "verify: all checks passed\n" : "verify: FAILURES present\n");
  return checks.all_ok ? 0 : 1;
}

int cmd_demo(const std::string& outdir, int workers, std::ostream& log) {
  cfg::RunConfig cfg = plane_wave_run();
  cfg.ensemble_counts = {1, 1, 8, 8, 8, 4};
  cfg.output_dir = outdir;
  const eulerian::SpectralField field = make_field(cfg);
  const double T = field.dominant_period();

  log << "demo: Sec.-style plane wave, grid nz=" << cfg.grid.dims[2]
      << ", period T=" << format_double(T) << "\n";
  int rc = cmd_trace(cfg, outdir, log);
  if (rc != 0) return rc;
  rc = cmd_reconstruct(cfg, outdir, {0.5 * T}, workers, log);
  if (rc != 0) return rc;

  // speed law |V| = c cosec(theta01) on a few labels
  size_t dropped = 0;
  const auto labels = make_labels(cfg, field, dropped);
  lagrangian::IntegratorOptions opt;
  opt.dt = cfg.dt_fraction * T;
  opt.t_final = 0.0;
  lagrangian::GuidedIntegrator integrator(field, opt);
  double worst = 0.0;
  for (size_t i = 0; i < labels.size(); i += labels.size() / 7 + 1) {
    const auto tr = integrator.integrate_one(labels[i], 0.0, 0.0);
    if (!tr.ok()) continue;
    const double speed = tr.back().qdot.norm();
    const double expected = cfg.constants.c / std::sin(labels[i].theta0.alpha);
    worst = std::max(worst, std::abs(speed - expected) / expected);
  }
  log << "demo speed-law max relative deviation: " << format_double(worst) << "\n";
  return 0;
}

cfg::RunConfig plane_wave_run() {
  cfg::RunConfig cfg;
  cfg.constants = {1.0, 1.0, 2.0, 1.0};
  cfg.grid = {{1, 1, 64}, {1.0, 1.0, 1.0 / 64}};
  cfg.field.preset = cfg::FieldSpec::Preset::PlaneWave;
  cfg.field.amplitude = 1.0;
  cfg.field.harmonic = 1;
  cfg.field.polarization = "linear_x";
  cfg.ensemble_counts = {1, 1, 16, 16, 8, 4};
  cfg.dt_fraction = 1e-3;
  cfg.t_final = 1.0;
  cfg.recon_alpha = 8;
  cfg.recon_beta = 8;
  cfg.recon_gamma = 4;
  cfg.recon_dt_fraction = 4e-3;
  return cfg;
}

cfg::RunConfig standing_wave_run() {
  cfg::RunConfig cfg = plane_wave_run();
  cfg.field.preset = cfg::FieldSpec::Preset::StandingWave;
  cfg.dt_fraction = 2e-3;
  cfg.recon_dt_fraction = 1e-2;
  return cfg;
}

}  // namespace emhydro::pipeline
