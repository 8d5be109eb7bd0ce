#include "finsler/berwald.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "finsler/classify.hpp"

namespace finsler {

TensorField zero_tensor_field(int n) {
  return [n](const Vector&) { return Tensor3(n); };
}

TensorField constant_tensor_field(Tensor3 t) {
  return [t = std::move(t)](const Vector&) { return t; };
}

OmegaField::OmegaField(FinslerLagrangian L, double eps_A) : L_(std::move(L)), eps_A_(eps_A) {}

double OmegaField::operator()(const TangentPoint& p) const {
  const auto inv = invariants_at(model(), p);
  if (!(std::abs(inv.A) >= eps_A_)) throw InadmissiblePointError("Omega undefined: |A| below threshold");
  return L_(p) / inv.A;
}

OmegaField::Derivatives OmegaField::derivatives(const TangentPoint& p) const {
  const auto& m = model();
  const int n = m.dimension();
  std::vector<int> dirs(n);
  std::iota(dirs.begin(), dirs.end(), 0);
  const auto s = seed(p, dirs, dirs, JetOrders{1, 1});

  auto b = m.bindings<Jet>(s.x);
  const Jet A = quadratic_form<Jet>(m.metric_components(b), s.xdot);
  if (!(std::abs(A.value()) >= eps_A_)) throw InadmissiblePointError("Omega undefined: |A| below threshold");
  const Jet L = L_.evaluate(std::span<const Jet>(s.x), std::span<const Jet>(s.xdot));
  const Jet omega = L / A;

  Derivatives d;
  d.value = omega.value();
  d.A = A.value();
  d.d_dx = Vector::Zero(n);
  d.d_dv = Vector::Zero(n);
  std::vector<std::uint8_t> e(2 * n, 0);
  for (int a = 0; a < n; ++a) {
    e[a] = 1;
    d.d_dv[a] = omega.derivative(e);
    e[a] = 0;
    e[n + a] = 1;
    d.d_dx[a] = omega.derivative(e);
    e[n + a] = 0;
  }
  return d;
}

OmegaField omega_from_lagrangian(const FinslerLagrangian& L, double eps_A) { return OmegaField(L, eps_A); }

namespace {

struct TransportTerms {
  Vector r;
  double scale = 1.0;
};

TransportTerms theorem1_terms(const OmegaField& omega, const Tensor3& T, const TangentPoint& p) {
  const auto& m = omega.model();
  const int n = m.dimension();
  if (T.dimension() != n) throw std::invalid_argument("T has wrong dimension");
  const auto d = omega.derivatives(p);
  const Tensor3 gamma = christoffel(m, p.x);
  const Matrix g = metric_at(m, p.x).g;
  const Vector v = p.xdot;
  const Vector v_low = g * v;
  const Matrix gv = gamma.contract(v);  // Γ^b_ac ẋ^c as (b, a)
  const Matrix tv = T.contract(v);      // T^b_ac ẋ^c as (b, a)

  const Vector bracket = d.d_dv + (2.0 * d.value / d.A) * v_low;
  TransportTerms out;
  out.r = d.d_dx - gv.transpose() * d.d_dv - tv.transpose() * bracket;
  out.scale = std::max({1.0, std::abs(d.value), d.d_dx.lpNorm<Eigen::Infinity>(), d.d_dv.lpNorm<Eigen::Infinity>()});
  return out;
}

}  // namespace

Vector theorem1_residual(const OmegaField& omega, const Tensor3& T, const TangentPoint& p) {
  return theorem1_terms(omega, T, p).r;
}

Vector theorem1_residual(const OmegaField& omega, const TensorField& T, const TangentPoint& p) {
  return theorem1_residual(omega, T(p.x), p);
}

double theorem1_relative(const OmegaField& omega, const Tensor3& T, const TangentPoint& p) {
  const auto t = theorem1_terms(omega, T, p);
  return t.r.lpNorm<Eigen::Infinity>() / t.scale;
}

double theorem1_relative(const OmegaField& omega, const TensorField& T, const TangentPoint& p) {
  return theorem1_relative(omega, T(p.x), p);
}

Vector tavakol_residual(const ConformalFactor& f, const MetricModel& m, const TangentPoint& p) {
  const int n = m.dimension();
  std::vector<int> dirs(n);
  std::iota(dirs.begin(), dirs.end(), 0);
  const auto s = seed(p, dirs, dirs, JetOrders{1, 1});
  const Jet sigma = evaluate(f.sigma, m.bindings<Jet>(s.x));
  const Tensor3 gamma = christoffel(m, p.x);
  const Matrix gv = gamma.contract(p.xdot);

  Vector d_dx(n), d_dv(n);
  std::vector<std::uint8_t> e(2 * n, 0);
  for (int a = 0; a < n; ++a) {
    e[a] = 1;
    d_dv[a] = sigma.derivative(e);
    e[a] = 0;
    e[n + a] = 1;
    d_dx[a] = sigma.derivative(e);
    e[n + a] = 0;
  }
  return d_dx - gv.transpose() * d_dv;
}

ExtractedT extract_T(const MetricModel& m, const Vector& x, const std::vector<Tensor3>& xi, double det_threshold) {
  if (xi.empty()) throw std::invalid_argument("extract_T needs at least one fiber sample");
  ExtractedT out;
  out.xi_mean = mean(xi);
  out.christoffel = christoffel(m, x, det_threshold);
  out.T = out.xi_mean - out.christoffel;
  for (const auto& t : xi) out.score = std::max(out.score, max_abs_diff(t, out.xi_mean));
  return out;
}

ExtractedT extract_T(const FinslerLagrangian& L, const Vector& x, const std::vector<Vector>& fiber_samples,
                     double det_threshold) {
  std::vector<Tensor3> xi;
  xi.reserve(fiber_samples.size());
  for (const auto& v : fiber_samples) xi.push_back(affine_coefficients(L, TangentPoint{x, v}, det_threshold));
  return extract_T(L.model(), x, xi, det_threshold);
}

}  // namespace finsler
