#include "finsler/connection.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace finsler {

namespace {

std::vector<int> all_directions(int n) {
  std::vector<int> d(n);
  std::iota(d.begin(), d.end(), 0);
  return d;
}

Jet evaluate_seeded(const FinslerLagrangian& L, const SeededPoint& s) {
  return L.evaluate(std::span<const Jet>(s.x), std::span<const Jet>(s.xdot));
}

}  // namespace

ConnectionData connection_data(const FinslerLagrangian& L, const TangentPoint& p, double det_threshold) {
  const int n = L.model().dimension();
  if (p.x.size() != n || p.xdot.size() != n) throw std::invalid_argument("tangent point dimension does not match model");
  const auto fibers = all_directions(n);
  const auto f4 = JetSpace::make(n, 0, 4, 0);
  const auto f2 = JetSpace::make(n, 0, 2, 0);
  const int base_var = n;  // the single base variable follows the fiber variables

  ConnectionData d;
  d.dL_dx = Vector::Zero(n);
  d.dL_dv = Vector::Zero(n);
  d.g_L = Matrix::Zero(n, n);
  d.dgL_dx.assign(n, Matrix::Zero(n, n));
  d.dgL_dv.assign(n, Matrix::Zero(n, n));

  // mixed[m][q] = ∂_m ∂̇_q L and dx[m] = ∂_m L as fiber jets of order 2.
  std::vector<std::vector<Jet>> mixed(n, std::vector<Jet>(n));
  std::vector<Jet> dx(n);
  std::vector<Jet> dv(n);
  std::vector<Jet> gL(static_cast<std::size_t>(n) * n);

  for (int m = 0; m < n; ++m) {
    const std::array<int, 1> base{m};
    const auto seeded = seed(p, base, fibers, JetOrders{1, 4});
    const Jet full = evaluate_seeded(L, seeded);

    if (m == 0) {
      const Jet fiber = full.restrict_to(f4);
      d.L = fiber.value();
      for (int a = 0; a < n; ++a) {
        dv[a] = fiber.differentiate(a);
        d.dL_dv[a] = dv[a].value();
      }
      for (int a = 0; a < n; ++a)
        for (int b = a; b < n; ++b) {
          Jet h = 0.5 * dv[a].differentiate(b);  // order 2 in the fiber
          gL[a * n + b] = h;
          gL[b * n + a] = h;
          d.g_L(a, b) = d.g_L(b, a) = h.value();
        }
      for (int c = 0; c < n; ++c)
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) d.dgL_dv[c](a, b) = gL[a * n + b].differentiate(c).value();
    }

    const Jet base_derivative = full.differentiate(base_var);
    d.dL_dx[m] = base_derivative.value();
    dx[m] = base_derivative.restrict_to(f2);
    for (int q = 0; q < n; ++q) {
      const Jet mq = base_derivative.differentiate(q);
      mixed[m][q] = mq.restrict_to(f2);
      for (int b = q; b < n; ++b) {
        const double v = 0.5 * mq.differentiate(b).value();
        d.dgL_dx[m](q, b) = d.dgL_dx[m](b, q) = v;
      }
    }
  }

  std::vector<Jet> v(n);
  for (int a = 0; a < n; ++a) v[a] = Jet::variable(f2, a, p.xdot[a]);
  std::vector<Jet> y(n);
  for (int q = 0; q < n; ++q) {
    Jet acc = -dx[q];
    for (int m = 0; m < n; ++m) acc += v[m] * mixed[m][q];
    y[q] = std::move(acc);
  }
  const auto z = jet_linear_solve(gL, y, det_threshold);

  d.G = Vector::Zero(n);
  d.N = Matrix::Zero(n, n);
  d.Xi = Tensor3(n);
  for (int a = 0; a < n; ++a) {
    d.G[a] = 0.25 * z[a].value();
    for (int b = 0; b < n; ++b) {
      const Jet zb = z[a].differentiate(b);
      d.N(a, b) = 0.25 * zb.value();
      for (int c = b; c < n; ++c) {
        const double xi = 0.25 * zb.differentiate(c).value();
        d.Xi(a, b, c) = xi;
        d.Xi(a, c, b) = xi;
      }
    }
  }
  return d;
}

Matrix l_metric(const FinslerLagrangian& L, const TangentPoint& p) {
  const int n = L.model().dimension();
  const auto fibers = all_directions(n);
  const auto seeded = seed(p, {}, fibers, JetOrders{0, 2});
  const Jet l = evaluate_seeded(L, seeded);
  Matrix g(n, n);
  std::vector<std::uint8_t> e(n, 0);
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) {
      ++e[a];
      ++e[b];
      g(a, b) = g(b, a) = 0.5 * l.derivative(e);
      e[a] = 0;
      e[b] = 0;
    }
  return g;
}

Matrix nonlinear_connection(const FinslerLagrangian& L, const TangentPoint& p, double det_threshold) {
  return connection_data(L, p, det_threshold).N;
}

Vector geodesic_spray(const FinslerLagrangian& L, const TangentPoint& p, double det_threshold) {
  return connection_data(L, p, det_threshold).G;
}

Tensor3 affine_coefficients(const FinslerLagrangian& L, const TangentPoint& p, double det_threshold) {
  return connection_data(L, p, det_threshold).Xi;
}

double IdentityResiduals::max() const { return std::max({max_delta_L, max_compat, max_torsion, max_spray}); }

IdentityResiduals identity_residuals(const ConnectionData& d, const Vector& xdot) {
  const int n = static_cast<int>(xdot.size());
  IdentityResiduals r;
  auto relative = [](double residual, double scale) { return std::abs(residual) / std::max(1.0, scale); };
  // N comes out of a linear solve, so its error is relative to ‖N‖, not to
  // each entry; an entry that is exactly zero still carries cond·ε·‖N‖.
  const double nmax = d.N.lpNorm<Eigen::Infinity>();

  r.delta_L = d.dL_dx - d.N.transpose() * d.dL_dv;
  for (int a = 0; a < n; ++a) {
    double scale = std::abs(d.dL_dx[a]);
    for (int b = 0; b < n; ++b) scale += nmax * std::abs(d.dL_dv[b]);
    r.max_delta_L = std::max(r.max_delta_L, relative(r.delta_L[a], scale));
  }

  r.compat = Matrix::Zero(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      double s = 0.0, scale = 0.0;
      for (int c = 0; c < n; ++c) {
        double delta_c = d.dgL_dx[c](a, b);
        double delta_scale = std::abs(delta_c);
        for (int e = 0; e < n; ++e) {
          delta_c -= d.N(e, c) * d.dgL_dv[e](a, b);
          delta_scale += nmax * std::abs(d.dgL_dv[e](a, b));
        }
        s += xdot[c] * delta_c;
        scale += std::abs(xdot[c]) * delta_scale;
        const double t1 = d.N(c, a) * d.g_L(c, b);
        const double t2 = d.N(c, b) * d.g_L(a, c);
        s -= t1 + t2;
        scale += nmax * (std::abs(d.g_L(c, b)) + std::abs(d.g_L(a, c)));
      }
      r.compat(a, b) = s;
      r.max_compat = std::max(r.max_compat, relative(s, scale));
    }

  // Ξ^a_bc = ∂̇_c N^a_b, so torsion^a_bc = Ξ^a_cb − Ξ^a_bc.
  r.torsion = Tensor3(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        r.torsion(a, b, c) = d.Xi(a, c, b) - d.Xi(a, b, c);
        r.max_torsion = std::max(
            r.max_torsion, relative(r.torsion(a, b, c), std::abs(d.Xi(a, c, b)) + std::abs(d.Xi(a, b, c))));
      }

  r.spray = 2.0 * d.G - d.N * xdot;
  for (int a = 0; a < n; ++a) {
    double scale = 2.0 * std::abs(d.G[a]);
    for (int b = 0; b < n; ++b) scale += nmax * std::abs(xdot[b]);
    r.max_spray = std::max(r.max_spray, relative(r.spray[a], scale));
  }
  return r;
}

IdentityResiduals identity_residuals(const FinslerLagrangian& L, const TangentPoint& p, double det_threshold) {
  return identity_residuals(connection_data(L, p, det_threshold), p.xdot);
}

}  // namespace finsler
