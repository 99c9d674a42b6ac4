#include <doctest.h>

#include <random>

#include "emhydro/fields.hpp"
#include "emhydro/pipeline.hpp"

using namespace emhydro;
using namespace emhydro::fields;
using cplxd = std::complex<double>;

namespace {

std::mt19937_64 rng(777);

SpinorField random_spinor(const GridSpec& g) {
  std::normal_distribution<double> nd(0.0, 1.0);
  SpinorField f = SpinorField::zeros(g);
  for (int a = 0; a < 3; ++a) {
    for (auto& v : f.G[a]) v = {nd(rng), nd(rng)};
  }
  return f;
}

const GridSpec kSmall{{2, 3, 4}, {0.5, 1.0 / 3, 0.25}};

}  // namespace

TEST_CASE("em_to_rs literal cases and round trip") {
  PhysicalConstants k;
  k.eps0 = 2.0;
  EMFieldGrid em = EMFieldGrid::zeros(kSmall);
  for (size_t p = 0; p < kSmall.size(); ++p) em.E[0][p] = 1.0;
  RSField rs = em_to_rs(em, k);
  CHECK(rs.F[0][0] == cplxd(1.0, 0.0));
  CHECK(rs.F[1][0] == cplxd(0.0, 0.0));

  EMFieldGrid em2 = EMFieldGrid::zeros(kSmall);
  for (size_t p = 0; p < kSmall.size(); ++p) em2.B[1][p] = 1.0;
  rs = em_to_rs(em2, k);
  CHECK(rs.F[1][0] == cplxd(0.0, 1.0));

  // random round trip through all three representations
  PhysicalConstants k2{1.0, 2.0, 0.7, 1.0};
  EMFieldGrid r = EMFieldGrid::zeros(kSmall);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int i = 0; i < 3; ++i) {
    for (size_t p = 0; p < kSmall.size(); ++p) {
      r.E[i][p] = nd(rng);
      r.B[i][p] = nd(rng);
    }
  }
  const EMFieldGrid back = spinor_to_em(em_to_spinor(r, k2), k2);
  double worst = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (size_t p = 0; p < kSmall.size(); ++p) {
      worst = std::max(worst, std::abs(back.E[i][p] - r.E[i][p]));
      worst = std::max(worst, std::abs(back.B[i][p] - r.B[i][p]));
    }
  }
  CHECK(worst < 1e-14);
}

TEST_CASE("rs_to_spinor literal cases") {
  RSField rs = RSField::zeros(kSmall);
  for (size_t p = 0; p < kSmall.size(); ++p) rs.F[0][p] = 1.0;
  SpinorField g = rs_to_spinor(rs);
  CHECK(std::abs(g.G[0][0] - cplxd(-1.0 / std::sqrt(2.0))) < 1e-15);
  CHECK(std::abs(g.G[1][0]) < 1e-15);
  CHECK(std::abs(g.G[2][0] - cplxd(1.0 / std::sqrt(2.0))) < 1e-15);

  rs = RSField::zeros(kSmall);
  for (size_t p = 0; p < kSmall.size(); ++p) rs.F[2][p] = 1.0;
  g = rs_to_spinor(rs);
  CHECK(std::abs(g.G[1][0] - cplxd(1.0)) < 1e-15);

  // circularly polarized combination: F = (1, i, 0) -> G = (-sqrt2, 0, 0)
  rs = RSField::zeros(kSmall);
  for (size_t p = 0; p < kSmall.size(); ++p) {
    rs.F[0][p] = 1.0;
    rs.F[1][p] = cplxd(0.0, 1.0);
  }
  g = rs_to_spinor(rs);
  CHECK(std::abs(g.G[0][0] - cplxd(-std::sqrt(2.0))) < 1e-15);
  CHECK(std::abs(g.G[1][0]) < 1e-15);
  CHECK(std::abs(g.G[2][0]) < 1e-15);

  // inverse pair on random data
  const SpinorField rnd = random_spinor(kSmall);
  const SpinorField back = rs_to_spinor(spinor_to_rs(rnd));
  for (int a = 0; a < 3; ++a) {
    for (size_t p = 0; p < kSmall.size(); ++p) {
      CHECK(std::abs(back.G[a][p] - rnd.G[a][p]) < 1e-14);
    }
  }
}

TEST_CASE("psi_eval literal values") {
  const double n1 = std::sqrt(3.0) / (4.0 * kPi);
  SpinorField g = SpinorField::zeros(kSmall);
  g.G[0][0] = 1.0;
  CHECK(std::abs(psi_eval(g, 0, {kPi / 2, 0.0, 0.0}) - cplxd(n1)) < 1e-15);
  CHECK(n1 == doctest::Approx(0.1378).epsilon(1e-3));

  g = SpinorField::zeros(kSmall);
  g.G[1][0] = 1.0;
  CHECK(std::abs(psi_eval(g, 0, {kPi / 2, 0.4, 1.0})) < 1e-15);

  g = SpinorField::zeros(kSmall);
  g.G[2][0] = 1.0;
  CHECK(std::abs(psi_eval(g, 0, {kPi / 2, kPi, 0.0}) - cplxd(-n1)) < 1e-14);
}

TEST_CASE("spinor_from_psi projects the spin-1 span exactly") {
  const auto quad = so3::make_angular_quadrature(16, 16, 4);
  auto psi1 = [&](const so3::EulerAngles& ang) { return so3::basis_u(+1, ang); };
  auto c = spinor_from_psi(psi1, quad);
  CHECK(std::abs(c[0] - 1.0) < 1e-12);
  CHECK(std::abs(c[1]) < 1e-12);
  CHECK(std::abs(c[2]) < 1e-12);

  auto psi2 = [&](const so3::EulerAngles& ang) {
    return 2.0 * so3::basis_u(0, ang) - 3.0 * so3::basis_u(-1, ang);
  };
  c = spinor_from_psi(psi2, quad);
  CHECK(std::abs(c[0]) < 1e-12);
  CHECK(std::abs(c[1] - 2.0) < 1e-12);
  CHECK(std::abs(c[2] + 3.0) < 1e-12);
}

TEST_CASE("projection of the plane-wave initial state matches the conversion route") {
  // Section-5 initial data with eps0 = 2: the angular projection at fixed z
  // must agree with em->rs->spinor, i.e. G_1 = -sqrt(2) E cos(k z).
  cfg::RunConfig cfg = pipeline::plane_wave_run();
  const EMFieldGrid em = pipeline::initial_em(cfg);
  const SpinorField g = em_to_spinor(em, cfg.constants);
  const auto quad = so3::make_angular_quadrature(12, 12, 4);
  const double kz = kTwoPi;
  for (int iz : {0, 5, 20, 33}) {
    const size_t p = cfg.grid.index(0, 0, iz);
    auto psi = [&](const so3::EulerAngles& ang) { return psi_eval(g, p, ang); };
    const auto c = spinor_from_psi(psi, quad);
    const double z = iz * cfg.grid.spacing[2];
    const cplxd expected = -std::sqrt(2.0) * std::cos(kz * z);
    CHECK(std::abs(c[0] - expected) < 1e-12);
    CHECK(std::abs(c[1]) < 1e-12);
    CHECK(std::abs(c[2]) < 1e-12);
    CHECK(std::abs(g.G[0][p] - expected) < 1e-12);
  }
}

TEST_CASE("observables: literal, all four routes agree") {
  PhysicalConstants k;
  k.eps0 = 1.3;
  k.c = 2.0;
  k.hbar = 0.7;
  SpinorField g = SpinorField::zeros(kSmall);
  // pure electric field E = (E0, 0, 0): u = eps0 E0^2/2, S = 0
  {
    EMFieldGrid em = EMFieldGrid::zeros(kSmall);
    for (size_t p = 0; p < kSmall.size(); ++p) em.E[0][p] = 1.5;
    g = em_to_spinor(em, k);
    const Observables obs = observables(g, k, ObservableRoute::EB);
    CHECK(obs.energy_density[0] == doctest::Approx(0.5 * k.eps0 * 1.5 * 1.5).epsilon(1e-14));
    for (int i = 0; i < 3; ++i) CHECK(std::abs(obs.poynting[i][0]) < 1e-14);
  }

  const auto quad = so3::make_angular_quadrature(32, 32, 8);
  const SpinorField rnd = random_spinor(kSmall);
  const Observables o_eb = observables(rnd, k, ObservableRoute::EB);
  const Observables o_rs = observables(rnd, k, ObservableRoute::RiemannSilberstein);
  const Observables o_g = observables(rnd, k, ObservableRoute::Spinor);
  const Observables o_ang = observables(rnd, k, ObservableRoute::AngularIntegral, &quad);
  for (size_t p = 0; p < kSmall.size(); ++p) {
    CHECK(std::abs(o_eb.energy_density[p] - o_g.energy_density[p]) < 1e-12);
    CHECK(std::abs(o_rs.energy_density[p] - o_g.energy_density[p]) < 1e-12);
    CHECK(std::abs(o_ang.energy_density[p] - o_g.energy_density[p]) < 1e-10);
    CHECK(o_g.energy_density[p] >= 0.0);
    for (int i = 0; i < 3; ++i) {
      CHECK(std::abs(o_eb.poynting[i][p] - o_g.poynting[i][p]) < 1e-12);
      CHECK(std::abs(o_rs.poynting[i][p] - o_g.poynting[i][p]) < 1e-12);
      CHECK(std::abs(o_ang.poynting[i][p] - o_g.poynting[i][p]) < 1e-10);
    }
  }
}

TEST_CASE("plane-wave Poynting flux: S_z = eps0 c E^2 cos^2 k(z - ct)") {
  cfg::RunConfig cfg = pipeline::plane_wave_run();
  const auto& k = cfg.constants;
  const SpinorField g = em_to_spinor(pipeline::initial_em(cfg), k);
  const Observables obs = observables(g, k, ObservableRoute::EB);
  for (int iz : {1, 7, 30}) {
    const size_t p = cfg.grid.index(0, 0, iz);
    const double z = iz * cfg.grid.spacing[2];
    const double expect = k.eps0 * k.c * std::pow(std::cos(kTwoPi * z), 2);
    CHECK(obs.poynting[2][p] == doctest::Approx(expect).epsilon(1e-12).scale(1.0));
    CHECK(std::abs(obs.poynting[0][p]) < 1e-13);
    CHECK(std::abs(obs.poynting[1][p]) < 1e-13);
  }
}

TEST_CASE("energy is invariant under representation changes") {
  PhysicalConstants k{1.0, 3.0, 0.5, 1.0};
  const SpinorField g = random_spinor(kSmall);
  const Observables o_g = observables(g, k, ObservableRoute::Spinor);
  const Observables o_eb = observables(g, k, ObservableRoute::EB);
  double e1 = 0.0, e2 = 0.0;
  for (size_t p = 0; p < kSmall.size(); ++p) {
    e1 += o_g.energy_density[p];
    e2 += o_eb.energy_density[p];
  }
  CHECK(e1 == doctest::Approx(e2).epsilon(1e-13));
}

TEST_CASE("spectral divergence checker") {
  // transverse Section-5 data: zero divergence
  cfg::RunConfig cfg = pipeline::plane_wave_run();
  const EMFieldGrid em = pipeline::initial_em(cfg);
  auto div = check_divergence(em);
  CHECK(div.first < 1e-12);
  CHECK(div.second < 1e-12);

  // constant field: zero
  EMFieldGrid c = EMFieldGrid::zeros(kSmall);
  for (size_t p = 0; p < kSmall.size(); ++p) c.E[0][p] = 2.0;
  div = check_divergence(c);
  CHECK(div.first < 1e-14);

  // E = (sin x, 0, 0) on an x-resolving grid: max |div E| = 1
  GridSpec gx{{16, 1, 1}, {kTwoPi / 16, 1.0, 1.0}};
  EMFieldGrid s = EMFieldGrid::zeros(gx);
  for (int ix = 0; ix < 16; ++ix) {
    s.E[0][gx.index(ix, 0, 0)] = std::sin(kTwoPi / 16 * ix);
  }
  div = check_divergence(s);
  CHECK(div.first == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("shape mismatches are rejected") {
  PhysicalConstants k;
  EMFieldGrid em = EMFieldGrid::zeros(kSmall);
  em.E[1].resize(3);
  CHECK_THROWS_AS(em_to_rs(em, k), ShapeMismatch);
}
