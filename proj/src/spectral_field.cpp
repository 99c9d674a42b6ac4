#include "emhydro/spectral_field.hpp"

#include <algorithm>
#include <cmath>

#include "emhydro/fft.hpp"

namespace emhydro::eulerian {

namespace {
constexpr cplx kI{0.0, 1.0};

Eigen::Matrix3cd helicity_matrix(const Eigen::Vector3d& khat) {
  const double s = 1.0 / std::sqrt(2.0);
  Eigen::Matrix3cd p;
  // khat . J / hbar with the (2.8) matrices
  p << khat.z(), s * cplx(khat.x(), -khat.y()), 0.0,
       s * cplx(khat.x(), khat.y()), 0.0, s * cplx(khat.x(), -khat.y()),
       0.0, s * cplx(khat.x(), khat.y()), -khat.z();
  return p;
}
}  // namespace

Eigen::Matrix3cd mode_propagator(const Eigen::Vector3d& k, double c, double t) {
  const double kn = k.norm();
  if (kn == 0.0) return Eigen::Matrix3cd::Identity();
  const Eigen::Matrix3cd p = helicity_matrix(k / kn);
  const double theta = c * kn * t;
  return Eigen::Matrix3cd::Identity() - kI * std::sin(theta) * p +
         (std::cos(theta) - 1.0) * (p * p);
}

fields::SpinorField evolve_spinor(const fields::SpinorField& g0, double t,
                                  const PhysicalConstants& consts) {
  const fields::GridSpec& g = g0.grid;
  std::array<std::vector<cplx>, 3> hat;
  for (int a = 0; a < 3; ++a) {
    hat[a] = g0.G[a];
    fft::forward(g, hat[a]);
  }
  for (int ix = 0; ix < g.dims[0]; ++ix) {
    for (int iy = 0; iy < g.dims[1]; ++iy) {
      for (int iz = 0; iz < g.dims[2]; ++iz) {
        const Eigen::Vector3d k(g.wavenumber(0, g.signed_harmonic(0, ix)),
                                g.wavenumber(1, g.signed_harmonic(1, iy)),
                                g.wavenumber(2, g.signed_harmonic(2, iz)));
        const Eigen::Matrix3cd prop = mode_propagator(k, consts.c, t);
        const size_t p = g.index(ix, iy, iz);
        const Eigen::Vector3cd v = prop * Eigen::Vector3cd(hat[0][p], hat[1][p], hat[2][p]);
        hat[0][p] = v(0);
        hat[1][p] = v(1);
        hat[2][p] = v(2);
      }
    }
  }
  fields::SpinorField out = fields::SpinorField::zeros(g);
  for (int a = 0; a < 3; ++a) {
    fft::backward(g, hat[a]);
    out.G[a] = std::move(hat[a]);
  }
  return out;
}

SpectralField::SpectralField(fields::GridSpec grid, PhysicalConstants consts,
                             std::vector<Mode> modes)
    : grid_(grid), consts_(consts), modes_(std::move(modes)) {
  grid_.validate();
  consts_.validate();
  for (const Mode& m : modes_) {
    for (int a = 0; a < 3; ++a) {
      max_harmonic_[a] = std::max(max_harmonic_[a], std::abs(m.n[a]));
    }
  }
}

SpectralField SpectralField::from_grid(const fields::SpinorField& g,
                                       const PhysicalConstants& consts,
                                       double prune_rel) {
  const fields::GridSpec& grid = g.grid;
  std::array<std::vector<cplx>, 3> hat;
  const double inv_n = 1.0 / static_cast<double>(grid.size());
  for (int a = 0; a < 3; ++a) {
    hat[a] = g.G[a];
    fft::forward(grid, hat[a]);
    for (cplx& v : hat[a]) v *= inv_n;
  }
  double gmax = 0.0;
  for (int a = 0; a < 3; ++a) {
    for (const cplx& v : hat[a]) gmax = std::max(gmax, std::abs(v));
  }
  const double cut = prune_rel * gmax;

  std::vector<Mode> modes;
  for (int ix = 0; ix < grid.dims[0]; ++ix) {
    for (int iy = 0; iy < grid.dims[1]; ++iy) {
      for (int iz = 0; iz < grid.dims[2]; ++iz) {
        const size_t p = grid.index(ix, iy, iz);
        const Eigen::Vector3cd c3(hat[0][p], hat[1][p], hat[2][p]);
        if (c3.cwiseAbs().maxCoeff() <= cut) continue;
        Mode m;
        m.n = {grid.signed_harmonic(0, ix), grid.signed_harmonic(1, iy),
               grid.signed_harmonic(2, iz)};
        m.k = {grid.wavenumber(0, m.n[0]), grid.wavenumber(1, m.n[1]),
               grid.wavenumber(2, m.n[2])};
        m.g0 = c3;
        modes.push_back(m);
      }
    }
  }
  return SpectralField(grid, consts, std::move(modes));
}

fields::SpinorField SpectralField::to_grid(double t) const {
  std::array<std::vector<cplx>, 3> hat;
  for (int a = 0; a < 3; ++a) hat[a].assign(grid_.size(), 0.0);
  for (const Mode& m : modes_) {
    const Eigen::Vector3cd gt = mode_propagator(m.k, consts_.c, t) * m.g0;
    const int bx = (m.n[0] + grid_.dims[0]) % grid_.dims[0];
    const int by = (m.n[1] + grid_.dims[1]) % grid_.dims[1];
    const int bz = (m.n[2] + grid_.dims[2]) % grid_.dims[2];
    const size_t p = grid_.index(bx, by, bz);
    for (int a = 0; a < 3; ++a) hat[a][p] += gt(a);
  }
  fields::SpinorField out = fields::SpinorField::zeros(grid_);
  for (int a = 0; a < 3; ++a) {
    // synthesis: multiply by N then use the normalized backward transform
    for (cplx& v : hat[a]) v *= static_cast<double>(grid_.size());
    fft::backward(grid_, hat[a]);
    out.G[a] = std::move(hat[a]);
  }
  return out;
}

double SpectralField::energy() const {
  double acc = 0.0;
  for (const Mode& m : modes_) acc += m.g0.squaredNorm();
  return acc * grid_.extent(0) * grid_.extent(1) * grid_.extent(2);
}

double SpectralField::max_longitudinal() const {
  const Eigen::Matrix3cd u_dag = so3::unitary_U().adjoint();
  double worst = 0.0;
  for (const Mode& m : modes_) {
    const double kn = m.k.norm();
    if (kn == 0.0) continue;
    const Eigen::Vector3cd f = u_dag * m.g0;  // back to Riemann-Silberstein
    const cplx lon = (m.k / kn).cast<cplx>().dot(f);
    worst = std::max(worst, std::abs(lon));
  }
  return worst;
}

double SpectralField::max_wavenumber() const {
  double mx = 0.0;
  for (const Mode& m : modes_) mx = std::max(mx, m.k.norm());
  return mx;
}

double SpectralField::dominant_period() const {
  const double kmax = max_wavenumber();
  if (kmax == 0.0) return 1.0;
  return kTwoPi / (consts_.c * kmax);
}

FieldSlice::FieldSlice(const SpectralField& field) : field_(&field) {
  gt_.resize(field.modes().size());
  for (int a = 0; a < 3; ++a) pow_[a].resize(field.max_harmonic()[a] + 1);
  set_time(0.0);
}

void FieldSlice::set_time(double t) {
  t_ = t;
  const auto& modes = field_->modes();
  const double c = field_->constants().c;
  for (size_t m = 0; m < modes.size(); ++m) {
    gt_[m] = mode_propagator(modes[m].k, c, t) * modes[m].g0;
  }
}

void FieldSlice::eval_g(const Eigen::Vector3d& x, int spatial_order,
                        std::array<std::array<cplx, 10>, 3>& out) const {
  for (auto& row : out) row.fill(0.0);

  const auto& grid = field_->grid();
  const auto& maxn = field_->max_harmonic();
  for (int a = 0; a < 3; ++a) {
    pow_[a][0] = 1.0;
    if (maxn[a] == 0) continue;
    const cplx base = std::polar(1.0, grid.wavenumber(a, 1) * x[a]);
    for (int j = 1; j <= maxn[a]; ++j) pow_[a][j] = pow_[a][j - 1] * base;
  }
  auto axis_phase = [&](int axis, int n) {
    return n >= 0 ? pow_[axis][n] : std::conj(pow_[axis][-n]);
  };

  const auto& modes = field_->modes();
  for (size_t m = 0; m < modes.size(); ++m) {
    const Mode& mode = modes[m];
    const cplx phase = axis_phase(0, mode.n[0]) * axis_phase(1, mode.n[1]) *
                       axis_phase(2, mode.n[2]);
    const cplx ik[3] = {kI * mode.k.x() * phase, kI * mode.k.y() * phase,
                        kI * mode.k.z() * phase};
    for (int a = 0; a < 3; ++a) {
      const cplx g = gt_[m](a);
      out[a][0] += g * phase;
      if (spatial_order < 1) continue;
      out[a][1] += g * ik[0];
      out[a][2] += g * ik[1];
      out[a][3] += g * ik[2];
      if (spatial_order < 2) continue;
      for (int i = 0; i < 3; ++i) {
        for (int j = i; j < 3; ++j) {
          out[a][kSpatialPairIndex[i][j]] += g * ik[i] * (kI * mode.k[j]);
        }
      }
    }
  }
}

PsiTable FieldSlice::eval_psi(const Eigen::Vector3d& x, const so3::EulerAngles& ang,
                              int spatial_order, int angular_order) const {
  std::array<std::array<cplx, 10>, 3> g;
  eval_g(x, spatial_order, g);
  const auto ujets = so3::basis_jet2(ang);

  PsiTable t;
  t.spatial_order = spatial_order;
  t.angular_order = angular_order;
  const int ns = spatial_order >= 2 ? 10 : (spatial_order == 1 ? 4 : 1);
  const int nr = angular_order >= 2 ? 6 : (angular_order == 1 ? 3 : 1);
  for (int a = 0; a < 3; ++a) {
    for (int s = 0; s < ns; ++s) {
      const cplx ga = g[a][s];
      if (ga == 0.0) continue;
      for (int r = 0; r < nr; ++r) t.d[s][r] += ga * ujets[a][r];
    }
  }
  return t;
}

}  // namespace emhydro::eulerian
