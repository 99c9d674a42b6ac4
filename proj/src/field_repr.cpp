#include "emhydro/fields.hpp"

#include <cmath>

#include "emhydro/fft.hpp"

namespace emhydro::fields {

namespace {
constexpr cplx kI{0.0, 1.0};
const double kSqrt2 = std::sqrt(2.0);

template <typename FieldT>
void require_consistent(const FieldT& arrays, const GridSpec& g) {
  for (const auto& arr : arrays) {
    if (arr.size() != g.size()) throw ShapeMismatch("field arrays do not match grid");
  }
}
}  // namespace

EMFieldGrid EMFieldGrid::zeros(const GridSpec& g) {
  g.validate();
  EMFieldGrid f;
  f.grid = g;
  for (int i = 0; i < 3; ++i) {
    f.E[i].assign(g.size(), 0.0);
    f.B[i].assign(g.size(), 0.0);
  }
  return f;
}

RSField RSField::zeros(const GridSpec& g) {
  g.validate();
  RSField f;
  f.grid = g;
  for (int i = 0; i < 3; ++i) f.F[i].assign(g.size(), 0.0);
  return f;
}

SpinorField SpinorField::zeros(const GridSpec& g) {
  g.validate();
  SpinorField f;
  f.grid = g;
  for (int i = 0; i < 3; ++i) f.G[i].assign(g.size(), 0.0);
  return f;
}

double SpinorField::energy(const PhysicalConstants&) const {
  double acc = 0.0;
  for (const auto& comp : G) {
    for (const cplx& v : comp) acc += std::norm(v);
  }
  return acc * grid.cell_volume();
}

RSField em_to_rs(const EMFieldGrid& f, const PhysicalConstants& k) {
  require_consistent(f.E, f.grid);
  require_consistent(f.B, f.grid);
  RSField out = RSField::zeros(f.grid);
  const double amp = std::sqrt(k.eps0 / 2.0);
  for (int i = 0; i < 3; ++i) {
    for (size_t p = 0; p < f.grid.size(); ++p) {
      out.F[i][p] = amp * cplx(f.E[i][p], k.c * f.B[i][p]);
    }
  }
  return out;
}

EMFieldGrid rs_to_em(const RSField& f, const PhysicalConstants& k) {
  require_consistent(f.F, f.grid);
  EMFieldGrid out = EMFieldGrid::zeros(f.grid);
  const double inv = 1.0 / std::sqrt(k.eps0 / 2.0);
  for (int i = 0; i < 3; ++i) {
    for (size_t p = 0; p < f.grid.size(); ++p) {
      out.E[i][p] = inv * f.F[i][p].real();
      out.B[i][p] = inv * f.F[i][p].imag() / k.c;
    }
  }
  return out;
}

SpinorField rs_to_spinor(const RSField& f) {
  require_consistent(f.F, f.grid);
  SpinorField out = SpinorField::zeros(f.grid);
  for (size_t p = 0; p < f.grid.size(); ++p) {
    const cplx f1 = f.F[0][p], f2 = f.F[1][p], f3 = f.F[2][p];
    out.G[0][p] = (-f1 + kI * f2) / kSqrt2;  // a = +1
    out.G[1][p] = f3;                        // a = 0
    out.G[2][p] = (f1 + kI * f2) / kSqrt2;   // a = -1
  }
  return out;
}

RSField spinor_to_rs(const SpinorField& g) {
  require_consistent(g.G, g.grid);
  RSField out = RSField::zeros(g.grid);
  for (size_t p = 0; p < g.grid.size(); ++p) {
    const cplx g1 = g.G[0][p], g0 = g.G[1][p], gm = g.G[2][p];
    out.F[0][p] = (gm - g1) / kSqrt2;
    out.F[1][p] = -kI * (gm + g1) / kSqrt2;
    out.F[2][p] = g0;
  }
  return out;
}

SpinorField em_to_spinor(const EMFieldGrid& f, const PhysicalConstants& k) {
  return rs_to_spinor(em_to_rs(f, k));
}

EMFieldGrid spinor_to_em(const SpinorField& g, const PhysicalConstants& k) {
  return rs_to_em(spinor_to_rs(g), k);
}

cplx psi_eval(const SpinorField& g, size_t point, const so3::EulerAngles& angles) {
  cplx acc = 0.0;
  for (int idx = 0; idx < so3::kNumSpin; ++idx) {
    acc += g.G[idx][point] * so3::basis_u(so3::spin_value(idx), angles);
  }
  return acc;
}

std::array<cplx, 3> spinor_from_psi(
    const std::function<cplx(const so3::EulerAngles&)>& psi,
    const so3::AngularQuadrature& q) {
  std::array<cplx, 3> out{};
  for (size_t n = 0; n < q.nodes.size(); ++n) {
    const cplx p = q.weights[n] * psi(q.nodes[n]);
    for (int idx = 0; idx < so3::kNumSpin; ++idx) {
      out[idx] += p * std::conj(so3::basis_u(so3::spin_value(idx), q.nodes[n]));
    }
  }
  return out;
}

Observables observables(const SpinorField& g, const PhysicalConstants& k,
                        ObservableRoute route, const so3::AngularQuadrature* quad) {
  Observables obs;
  obs.grid = g.grid;
  obs.energy_density.assign(g.grid.size(), 0.0);
  for (int i = 0; i < 3; ++i) obs.poynting[i].assign(g.grid.size(), 0.0);

  switch (route) {
    case ObservableRoute::EB: {
      const EMFieldGrid em = spinor_to_em(g, k);
      for (size_t p = 0; p < g.grid.size(); ++p) {
        double e2 = 0.0, b2 = 0.0;
        for (int i = 0; i < 3; ++i) {
          e2 += em.E[i][p] * em.E[i][p];
          b2 += em.B[i][p] * em.B[i][p];
        }
        obs.energy_density[p] = 0.5 * k.eps0 * (e2 + k.c * k.c * b2);
        for (int i = 0; i < 3; ++i) {
          const int j = (i + 1) % 3, l = (i + 2) % 3;
          obs.poynting[i][p] =
              k.eps0 * k.c * k.c * (em.E[j][p] * em.B[l][p] - em.E[l][p] * em.B[j][p]);
        }
      }
      break;
    }
    case ObservableRoute::RiemannSilberstein: {
      const RSField rs = spinor_to_rs(g);
      for (size_t p = 0; p < g.grid.size(); ++p) {
        double u = 0.0;
        for (int i = 0; i < 3; ++i) u += std::norm(rs.F[i][p]);
        obs.energy_density[p] = u;
        // (c/hbar) F_j* (s_i)_{jk} F_k = -i c (F* x F)_i
        for (int i = 0; i < 3; ++i) {
          const int j = (i + 1) % 3, l = (i + 2) % 3;
          const cplx cr = std::conj(rs.F[j][p]) * rs.F[l][p] -
                          std::conj(rs.F[l][p]) * rs.F[j][p];
          obs.poynting[i][p] = (-kI * k.c * cr).real();
        }
      }
      break;
    }
    case ObservableRoute::Spinor: {
      const auto J = so3::diag_spin_matrices(k.hbar);
      for (size_t p = 0; p < g.grid.size(); ++p) {
        Eigen::Vector3cd gv(g.G[0][p], g.G[1][p], g.G[2][p]);
        obs.energy_density[p] = gv.squaredNorm();
        for (int i = 0; i < 3; ++i) {
          obs.poynting[i][p] = (k.c / k.hbar) * (gv.adjoint() * J[i] * gv)(0).real();
        }
      }
      break;
    }
    case ObservableRoute::AngularIntegral: {
      if (quad == nullptr) throw std::invalid_argument("angular route needs a quadrature");
      for (size_t p = 0; p < g.grid.size(); ++p) {
        double u = 0.0;
        std::array<double, 3> s{};
        for (size_t n = 0; n < quad->nodes.size(); ++n) {
          const auto& ang = quad->nodes[n];
          so3::AngularJet psi;
          for (int idx = 0; idx < so3::kNumSpin; ++idx) {
            const so3::AngularJet bj = so3::basis_jet(so3::spin_value(idx), ang);
            psi.value += g.G[idx][p] * bj.value;
            psi.d_alpha += g.G[idx][p] * bj.d_alpha;
            psi.d_beta += g.G[idx][p] * bj.d_beta;
          }
          const double w = quad->weights[n];
          u += w * std::norm(psi.value);
          const so3::AngularOp ops[3] = {so3::AngularOp::M1, so3::AngularOp::M2,
                                         so3::AngularOp::M3};
          for (int i = 0; i < 3; ++i) {
            const cplx m = so3::apply_angular_operator(ops[i], psi, ang, k.hbar);
            s[i] += w * (std::conj(psi.value) * m).real();
          }
        }
        obs.energy_density[p] = u;
        for (int i = 0; i < 3; ++i) obs.poynting[i][p] = (k.c / k.hbar) * s[i];
      }
      break;
    }
  }
  return obs;
}

std::pair<double, double> check_divergence(const EMFieldGrid& f) {
  const GridSpec& g = f.grid;
  auto spectral_div = [&](const std::array<std::vector<double>, 3>& field) {
    std::vector<cplx> div(g.size(), 0.0);
    for (int axis = 0; axis < 3; ++axis) {
      if (g.dims[axis] == 1) continue;  // collapsed axis: derivative is zero
      std::vector<cplx> comp(g.size());
      for (size_t p = 0; p < g.size(); ++p) comp[p] = field[axis][p];
      fft::forward(g, comp);
      for (int ix = 0; ix < g.dims[0]; ++ix) {
        for (int iy = 0; iy < g.dims[1]; ++iy) {
          for (int iz = 0; iz < g.dims[2]; ++iz) {
            const int bins[3] = {ix, iy, iz};
            const double kx = g.wavenumber(axis, g.signed_harmonic(axis, bins[axis]));
            comp[g.index(ix, iy, iz)] *= kI * kx;
          }
        }
      }
      for (size_t p = 0; p < g.size(); ++p) div[p] += comp[p];
    }
    fft::backward(g, div);
    double mx = 0.0;
    for (const cplx& v : div) mx = std::max(mx, std::abs(v.real()));
    return mx;
  };
  return {spectral_div(f.E), spectral_div(f.B)};
}

}  // namespace emhydro::fields
