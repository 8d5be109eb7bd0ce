#pragma once

// Finite-difference oracles and random generators shared by the tests.
// Every difference quotient takes one Richardson step: D* = (4 D(h/2) − D(h)) / 3.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>

#include "finsler/connection.hpp"
#include "finsler/sampler.hpp"

namespace testing {

using finsler::Matrix;
using finsler::Tensor3;
using finsler::Vector;

inline constexpr double kStep1 = 1e-4;  // first derivatives of values
inline constexpr double kStep2 = 1e-3;  // second derivatives of values
inline constexpr double kStep3 = 1e-2;  // third derivatives of values
inline constexpr double kStepJet = 1e-4;  // first differences of jet-derived quantities

template <class F>
auto richardson(F&& quotient, double h) {
  using R = decltype(quotient(h));
  const R fine = quotient(h / 2);
  const R coarse = quotient(h);
  return R((4.0 * fine - coarse) / 3.0);
}

// d/dt f(t) at 0, for scalar- or Eigen-valued f.
template <class F>
auto fd1(F&& f, double h = kStep1) {
  return richardson([&](double k) { return ((f(k) - f(-k)) / (2.0 * k)).eval(); }, h);
}

inline double fd1_scalar(const std::function<double(double)>& f, double h = kStep1) {
  return richardson([&](double k) { return (f(k) - f(-k)) / (2.0 * k); }, h);
}

inline double fd2_scalar(const std::function<double(double)>& f, double h = kStep2) {
  return richardson([&](double k) { return (f(k) - 2.0 * f(0.0) + f(-k)) / (k * k); }, h);
}

inline double fd3_scalar(const std::function<double(double)>& f, double h = kStep3) {
  return richardson([&](double k) { return (f(2 * k) - 2.0 * f(k) + 2.0 * f(-k) - f(-2 * k)) / (2.0 * k * k * k); }, h);
}

// ‖a − b‖∞ / ‖b‖∞, or the absolute difference when b vanishes.
template <class A, class B>
double rel_err(const A& a, const B& b) {
  const double scale = b.template lpNorm<Eigen::Infinity>();
  const double diff = (a - b).template lpNorm<Eigen::Infinity>();
  return scale > 0.0 ? diff / scale : diff;
}

inline double rel_err(double a, double b) { return std::abs(b) > 0.0 ? std::abs(a - b) / std::abs(b) : std::abs(a); }

inline double rel_err(const Tensor3& a, const Tensor3& b) {
  const double scale = b.norm_inf();
  const double diff = finsler::max_abs_diff(a, b);
  return scale > 0.0 ? diff / scale : diff;
}

struct Gen {
  explicit Gen(std::uint64_t seed) : rng(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
  Vector vector(int n, double lo, double hi) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = uniform(lo, hi);
    return v;
  }
  std::mt19937_64 rng;
};

inline Vector unit(int n, int i) {
  Vector e = Vector::Zero(n);
  e[i] = 1.0;
  return e;
}

inline std::vector<finsler::TangentPoint> admissible_points(const finsler::FinslerLagrangian& L,
                                                           finsler::SamplerConfig config, int bases, int fibers) {
  config.base_points = bases;
  config.fiber_samples = fibers;
  const finsler::AdmissibleSampler sampler(config);
  std::vector<finsler::TangentPoint> out;
  for (int i = 0; i < bases; ++i) {
    const auto b = sampler.sample(L, i);
    for (const auto& v : b.fibers) out.push_back({b.x, v});
  }
  return out;
}

// Second partial ∂_i∂_j f at z from values only.
inline double fd_mixed(const std::function<double(const Vector&)>& f, const Vector& z, int i, int j,
                       double h = kStep2) {
  const Vector ei = unit(static_cast<int>(z.size()), i), ej = unit(static_cast<int>(z.size()), j);
  return richardson(
      [&](double k) {
        return (f(z + k * ei + k * ej) - f(z + k * ei - k * ej) - f(z - k * ei + k * ej) + f(z - k * ei - k * ej)) /
               (4.0 * k * k);
      },
      h);
}

// Finite-difference counterpart of ConnectionData. First and second
// derivatives of L come from values of L alone; third derivatives difference
// the fiber Hessian once, N differences G once, Ξ differences N once.
struct ConnectionOracle {
  Vector dL_dx, dL_dv;
  Matrix g_L;
  std::vector<Matrix> dgL_dx, dgL_dv;
  Vector y;  // ẋ^m ∂_m∂̇_q L − ∂_q L
  Vector G;
  Matrix N;
  Tensor3 Xi;
};

inline ConnectionOracle fd_connection(const finsler::FinslerLagrangian& L, const finsler::TangentPoint& p,
                                      bool with_N = true) {
  using finsler::TangentPoint;
  const int n = static_cast<int>(p.x.size());
  Vector z(2 * n);
  z << p.x, p.xdot;
  auto f = [&](const Vector& w) { return L(TangentPoint{w.head(n), w.tail(n)}); };
  ConnectionOracle o;
  o.dL_dx.resize(n);
  o.dL_dv.resize(n);
  o.g_L.resize(n, n);
  for (int a = 0; a < n; ++a) {
    o.dL_dx[a] = fd1_scalar([&](double t) { return f(z + t * unit(2 * n, a)); });
    o.dL_dv[a] = fd1_scalar([&](double t) { return f(z + t * unit(2 * n, n + a)); });
  }
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) o.g_L(a, b) = o.g_L(b, a) = 0.5 * fd_mixed(f, z, n + a, n + b);
  Vector y(n);
  for (int q = 0; q < n; ++q) {
    double s = -o.dL_dx[q];
    for (int m = 0; m < n; ++m) s += p.xdot[m] * fd_mixed(f, z, m, n + q);
    y[q] = s;
  }
  o.y = y;
  o.G = 0.25 * o.g_L.lu().solve(y);
  for (int c = 0; c < n; ++c) {
    const Vector e = unit(n, c);
    o.dgL_dx.push_back(fd1([&](double t) -> Matrix { return finsler::l_metric(L, {p.x + t * e, p.xdot}); }, kStepJet));
    o.dgL_dv.push_back(fd1([&](double t) -> Matrix { return finsler::l_metric(L, {p.x, p.xdot + t * e}); }, kStepJet));
  }
  if (!with_N) return o;
  o.N.resize(n, n);
  o.Xi = Tensor3(n);
  for (int b = 0; b < n; ++b) {
    const Vector e = unit(n, b);
    o.N.col(b) = fd1([&](double t) -> Vector { return finsler::geodesic_spray(L, {p.x, p.xdot + t * e}); }, kStepJet);
    const Matrix dN = fd1([&](double t) -> Matrix { return finsler::nonlinear_connection(L, {p.x, p.xdot + t * e}); },
                          kStepJet);
    for (int a = 0; a < n; ++a)
      for (int c = 0; c < n; ++c) o.Xi(a, c, b) = dN(a, c);
  }
  return o;
}

// G solves 4 g^L G = y, and g^L can be badly conditioned, so the forward
// error of a difference-quotient G is cond(g^L) times that of y. The
// norm-wise backward error of G against the difference-quotient system is
// bounded by the quotients' own error instead.
inline double spray_backward_error(const Vector& G, const ConnectionOracle& o) {
  const Vector r = 4.0 * o.g_L * G - o.y;
  const double scale = o.g_L.lpNorm<Eigen::Infinity>() * 4.0 * G.lpNorm<Eigen::Infinity>() + o.y.lpNorm<Eigen::Infinity>();
  return scale > 0.0 ? r.lpNorm<Eigen::Infinity>() / scale : 0.0;
}

}  // namespace testing
