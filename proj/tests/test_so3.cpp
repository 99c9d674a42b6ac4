#include <doctest.h>

#include <random>

#include "emhydro/so3.hpp"

using namespace emhydro;
using namespace emhydro::so3;
using cplxd = std::complex<double>;

namespace {

std::mt19937_64 rng(20240506);

EulerAngles random_angles(double margin = 0.1) {
  std::uniform_real_distribution<double> ua(margin, kPi - margin);
  std::uniform_real_distribution<double> ub(0.0, kTwoPi);
  return {ua(rng), ub(rng), ub(rng)};
}

}  // namespace

TEST_CASE("body-frame matrix at alpha=pi/2, beta=0") {
  const BodyFrameMatrix bf = euler_A({kPi / 2, 0.0, 0.0});
  Eigen::Matrix3d expected;
  expected << -1, 0, 0,
               0, 0, -1,
               0, -1, 0;
  CHECK((bf.A - expected).cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-15));
  CHECK((bf.A_inv - expected).cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(bf.A_inv.determinant() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("A and A_inv are a mutually inverse pair away from poles") {
  for (int trial = 0; trial < 50; ++trial) {
    const EulerAngles ang = random_angles();
    const BodyFrameMatrix bf = euler_A(ang);
    const Eigen::Matrix3d id1 = bf.A_inv.transpose() * bf.A;
    const Eigen::Matrix3d id2 = bf.A * bf.A_inv.transpose();
    CHECK((id1 - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((id2 - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-13);
    // cofactor expansion of the closed form gives det A_inv = sin(alpha)
    CHECK(bf.A_inv.determinant() == doctest::Approx(std::sin(ang.alpha)).epsilon(1e-12));
  }
}

TEST_CASE("pole-singular angles are rejected with the offending alpha") {
  CHECK_THROWS_AS(euler_A({0.0, 1.0, 2.0}), PoleSingularity);
  CHECK_THROWS_AS(euler_A({kPi, 0.3, 0.0}), PoleSingularity);
  try {
    euler_A({kPi, 0.3, 0.0});
  } catch (const PoleSingularity& e) {
    CHECK(e.alpha == doctest::Approx(kPi));
  }
  CHECK(EulerAngles{1e-10, 0, 0}.pole_singular());
  CHECK_FALSE(EulerAngles{1e-6, 0, 0}.pole_singular());
}

TEST_CASE("A-matrix derivatives match finite differences") {
  const double h = 1e-6;
  for (int trial = 0; trial < 10; ++trial) {
    const EulerAngles ang = random_angles();
    const BodyFrameDerivs d = euler_A_derivs(ang);
    const Eigen::Matrix3d fa =
        (euler_A({ang.alpha + h, ang.beta, 0}).A - euler_A({ang.alpha - h, ang.beta, 0}).A) /
        (2 * h);
    const Eigen::Matrix3d fb =
        (euler_A({ang.alpha, ang.beta + h, 0}).A - euler_A({ang.alpha, ang.beta - h, 0}).A) /
        (2 * h);
    const Eigen::Matrix3d fia = (euler_A({ang.alpha + h, ang.beta, 0}).A_inv -
                                 euler_A({ang.alpha - h, ang.beta, 0}).A_inv) /
                                (2 * h);
    const Eigen::Matrix3d fib = (euler_A({ang.alpha, ang.beta + h, 0}).A_inv -
                                 euler_A({ang.alpha, ang.beta - h, 0}).A_inv) /
                                (2 * h);
    CHECK((d.dA_dalpha - fa).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((d.dA_dbeta - fb).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((d.dAinv_dalpha - fia).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((d.dAinv_dbeta - fib).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("spin matrix algebra") {
  const double hbar = 1.37;
  const Eigen::Matrix3cd U = unitary_U();
  CHECK((U * U.adjoint() - Eigen::Matrix3cd::Identity()).cwiseAbs().maxCoeff() < 1e-14);

  const auto s = spin_matrices(hbar);
  const auto J = diag_spin_matrices(hbar);
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3, k = (i + 2) % 3;
    const Eigen::Matrix3cd comm = s[i] * s[j] - s[j] * s[i];
    CHECK((comm - cplxd(0, 1) * hbar * s[k]).cwiseAbs().maxCoeff() < 1e-14);
    const Eigen::Matrix3cd jcomm = J[i] * J[j] - J[j] * J[i];
    CHECK((jcomm - cplxd(0, 1) * hbar * J[k]).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((U * s[i] * U.inverse() - J[i]).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((J[i] - J[i].adjoint()).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("angular operators on the basis functions") {
  const double hbar = 1.0;
  for (int trial = 0; trial < 10; ++trial) {
    const EulerAngles ang = random_angles();
    // M3 u_1 = +hbar u_1 (eigenfunction), M3 u_0 = 0
    const AngularJet j1 = basis_jet(+1, ang);
    const cplxd m3u1 = apply_angular_operator(AngularOp::M3, j1, ang, hbar);
    CHECK(std::abs(m3u1 - hbar * j1.value) < 1e-14);
    const AngularJet j0 = basis_jet(0, ang);
    CHECK(std::abs(apply_angular_operator(AngularOp::M3, j0, ang, hbar)) < 1e-15);
    const AngularJet jm = basis_jet(-1, ang);
    const cplxd m3um = apply_angular_operator(AngularOp::M3, jm, ang, hbar);
    CHECK(std::abs(m3um + hbar * jm.value) < 1e-14);
  }
  // lambda_1 at (pi/2, 0) on f with gradient (1, 0, 0) -> A_{1r} d_r f = -1
  AngularJet f;
  f.d_alpha = 1.0;
  const cplxd lam =
      apply_angular_operator(AngularOp::L1, f, {kPi / 2, 0.0, 0.0});
  CHECK(std::abs(lam - cplxd(-1.0, 0.0)) < 1e-15);
}

TEST_CASE("lambda_i equals the A_{ir} d_r contraction at random points") {
  std::uniform_real_distribution<double> uc(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const EulerAngles ang = random_angles(0.05);
    AngularJet f;
    f.d_alpha = {uc(rng), uc(rng)};
    f.d_beta = {uc(rng), uc(rng)};
    f.d_gamma = {uc(rng), uc(rng)};
    const BodyFrameMatrix bf = euler_A(ang);
    const AngularOp lam[3] = {AngularOp::L1, AngularOp::L2, AngularOp::L3};
    const cplxd grad[3] = {f.d_alpha, f.d_beta, f.d_gamma};
    for (int i = 0; i < 3; ++i) {
      cplxd contraction = 0.0;
      for (int r = 0; r < 3; ++r) contraction += bf.A(i, r) * grad[r];
      const cplxd direct = apply_angular_operator(lam[i], f, ang);
      CHECK(std::abs(direct - contraction) < 1e-12 * std::max(1.0, std::abs(direct)));
    }
  }
}

TEST_CASE("operator commutators [lambda_i, lambda_j] = -eps_ijk lambda_k") {
  // test functions from the spin-1 span, with analytic second derivatives
  std::uniform_real_distribution<double> uc(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const EulerAngles ang = random_angles();
    const std::array<cplxd, 3> coef = {cplxd{uc(rng), uc(rng)},
                                       cplxd{uc(rng), uc(rng)},
                                       cplxd{uc(rng), uc(rng)}};
    const auto jets = basis_jet2(ang);
    // f derivatives up to second order
    cplxd f1[3] = {};   // (d_a, d_b, d_g)
    cplxd f2[3][3] = {};  // second derivatives, gamma row/col zero
    for (int a = 0; a < 3; ++a) {
      f1[0] += coef[a] * jets[a][1];
      f1[1] += coef[a] * jets[a][2];
      f2[0][0] += coef[a] * jets[a][3];
      f2[0][1] += coef[a] * jets[a][4];
      f2[1][0] += coef[a] * jets[a][4];
      f2[1][1] += coef[a] * jets[a][5];
    }
    const BodyFrameMatrix bf = euler_A(ang);
    const BodyFrameDerivs dbf = euler_A_derivs(ang);
    const Eigen::Matrix3d* dA[2] = {&dbf.dA_dalpha, &dbf.dA_dbeta};

    // lambda_i lambda_j f = A_{is} d_s (A_{jr} d_r f)
    auto lamlam = [&](int i, int j) {
      cplxd acc = 0.0;
      for (int s = 0; s < 2; ++s) {
        cplxd inner = 0.0;
        for (int r = 0; r < 2; ++r) {
          inner += (*dA[s])(j, r) * f1[r] + bf.A(j, r) * f2[s][r];
        }
        acc += bf.A(i, s) * inner;
      }
      return acc;
    };
    auto lam = [&](int i) {
      cplxd acc = 0.0;
      for (int r = 0; r < 2; ++r) acc += bf.A(i, r) * f1[r];
      return acc;
    };
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        if (i == j) continue;
        int k = 3 - i - j;
        const double eps = ((j - i + 3) % 3 == 1) ? 1.0 : -1.0;
        const cplxd comm = lamlam(i, j) - lamlam(j, i);
        CHECK(std::abs(comm + eps * lam(k)) < 1e-12);
      }
    }
  }
}

TEST_CASE("gauss-legendre integrates monomials exactly") {
  std::vector<double> x, w;
  gauss_legendre(8, x, w);
  for (int p = 0; p <= 15; ++p) {
    double acc = 0.0;
    for (size_t i = 0; i < x.size(); ++i) acc += w[i] * std::pow(x[i], p);
    const double exact = (p % 2 == 0) ? 2.0 / (p + 1) : 0.0;
    CHECK(acc == doctest::Approx(exact).epsilon(1e-13).scale(1.0));
  }
}

TEST_CASE("angular quadrature: measure, orthonormality, matrix elements") {
  const AngularQuadrature q = make_angular_quadrature(32, 32, 8);
  double total = 0.0;
  for (double w : q.weights) total += w;
  CHECK(total == doctest::Approx(8.0 * kPi * kPi).epsilon(1e-13));

  const double hbar = 1.0;
  const auto J = diag_spin_matrices(hbar);
  const AngularOp ops[3] = {AngularOp::M1, AngularOp::M2, AngularOp::M3};
  for (int ai = 0; ai < kNumSpin; ++ai) {
    for (int bi = 0; bi < kNumSpin; ++bi) {
      const cplxd gram = q.integrate([&](const EulerAngles& ang) {
        return std::conj(basis_u(spin_value(ai), ang)) * basis_u(spin_value(bi), ang);
      });
      CHECK(std::abs(gram - (ai == bi ? 1.0 : 0.0)) < 1e-12);
      for (int i = 0; i < 3; ++i) {
        const cplxd me = q.integrate([&](const EulerAngles& ang) {
          return std::conj(basis_u(spin_value(ai), ang)) *
                 apply_angular_operator(ops[i], basis_jet(spin_value(bi), ang), ang, hbar);
        });
        CHECK(std::abs(me - J[i](ai, bi)) < 1e-10);
      }
    }
  }
}

TEST_CASE("basis jets match finite differences") {
  const double h = 1e-6;
  for (int trial = 0; trial < 5; ++trial) {
    const EulerAngles ang = random_angles();
    const auto jets = basis_jet2(ang);
    for (int idx = 0; idx < kNumSpin; ++idx) {
      const int a = spin_value(idx);
      auto u = [&](double da, double db) {
        return basis_u(a, {ang.alpha + da, ang.beta + db, ang.gamma});
      };
      CHECK(std::abs(jets[idx][0] - u(0, 0)) < 1e-15);
      CHECK(std::abs(jets[idx][1] - (u(h, 0) - u(-h, 0)) / (2 * h)) < 1e-9);
      CHECK(std::abs(jets[idx][2] - (u(0, h) - u(0, -h)) / (2 * h)) < 1e-9);
      CHECK(std::abs(jets[idx][3] - (u(h, 0) - 2.0 * u(0, 0) + u(-h, 0)) / (h * h)) < 1e-3);
      CHECK(std::abs(jets[idx][5] - (u(0, h) - 2.0 * u(0, 0) + u(0, -h)) / (h * h)) < 1e-3);
      CHECK(std::abs(jets[idx][4] -
                     (u(h, h) - u(h, -h) - u(-h, h) + u(-h, -h)) / (4 * h * h)) < 1e-3);
    }
  }
}

TEST_CASE("manifold metric blocks, inverse pair and volume factor") {
  const double l = 1.7;
  for (int trial = 0; trial < 20; ++trial) {
    const EulerAngles ang = random_angles();
    const MetricSample m = metric_eval(ang, l);
    CHECK((m.g_upper * m.g_lower - Matrix6d::Identity()).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(m.g_upper.block<3, 3>(0, 0).cwiseAbs().maxCoeff() == 0.0);
    CHECK(m.g_upper.block<3, 3>(3, 3).cwiseAbs().maxCoeff() == 0.0);
    CHECK(m.g_lower.block<3, 3>(0, 0).cwiseAbs().maxCoeff() == 0.0);
    CHECK(m.g_lower.block<3, 3>(3, 3).cwiseAbs().maxCoeff() == 0.0);
    CHECK(m.sqrt_neg_g == doctest::Approx(l * l * l * std::sin(ang.alpha)).epsilon(1e-14));
    // block-determinant: det g = -l^6 sin^2(alpha)
    CHECK(m.g_lower.determinant() ==
          doctest::Approx(-std::pow(l, 6) * std::pow(std::sin(ang.alpha), 2))
              .epsilon(1e-10));
  }
  const MetricSample m = metric_eval({kPi / 2, 0.3, 0.9}, 1.0);
  CHECK(m.sqrt_neg_g == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("divergence identity d_r(sqrt(-g) g^{ir}) = 0") {
  const double l = 1.0, h = 1e-6;
  for (int trial = 0; trial < 10; ++trial) {
    const EulerAngles ang = random_angles();
    for (int i = 0; i < 3; ++i) {
      double acc = 0.0;
      for (int r = 0; r < 2; ++r) {  // gamma derivative vanishes by inspection
        EulerAngles p = ang, mnt = ang;
        (r == 0 ? p.alpha : p.beta) += h;
        (r == 0 ? mnt.alpha : mnt.beta) -= h;
        const MetricSample mp = metric_eval(p, l);
        const MetricSample mm = metric_eval(mnt, l);
        acc += (mp.sqrt_neg_g * mp.g_upper(i, 3 + r) -
                mm.sqrt_neg_g * mm.g_upper(i, 3 + r)) /
               (2 * h);
      }
      CHECK(std::abs(acc) < 1e-8);
    }
  }
}
