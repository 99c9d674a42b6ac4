#include <cmath>
#include <stdexcept>

#include "emhydro/so3.hpp"

namespace emhydro::so3 {

// Newton iteration on Legendre polynomials; standard Golub-Welsch-free route,
// accurate to ~1e-15 for the orders used here.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
}

AngularQuadrature make_angular_quadrature(int n_alpha, int n_beta, int n_gamma) {
  if (n_alpha < 1 || n_beta < 1 || n_gamma < 1) {
    throw std::invalid_argument("quadrature orders must be positive");
  }
  std::vector<double> gl_nodes, gl_weights;
  gauss_legendre(n_alpha, gl_nodes, gl_weights);

  AngularQuadrature q;
  q.n_alpha = n_alpha;
  q.n_beta = n_beta;
  q.n_gamma = n_gamma;
  q.nodes.reserve(static_cast<size_t>(n_alpha) * n_beta * n_gamma);
  q.weights.reserve(q.nodes.capacity());

  // Uniform periodic grids offset by half a cell so nodes avoid the beta=0
  // plane, where common initial states put wavefunction nodes.
  const double db = kTwoPi / n_beta;
  const double dg = kTwoPi / n_gamma;
  for (int ia = 0; ia < n_alpha; ++ia) {
    const double alpha = std::acos(gl_nodes[ia]);  // substitution u = cos(alpha)
    const double wa = gl_weights[ia];
    for (int ib = 0; ib < n_beta; ++ib) {
      const double beta = db * (ib + 0.5);
      for (int ig = 0; ig < n_gamma; ++ig) {
        const double gamma = dg * (ig + 0.5);
        q.nodes.push_back({alpha, beta, gamma});
        q.weights.push_back(wa * db * dg);
      }
    }
  }
  return q;
}

cplx AngularQuadrature::integrate(const std::function<cplx(const EulerAngles&)>& f) const {
  cplx acc = 0.0;
  for (size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
  return acc;
}

}  // namespace emhydro::so3
