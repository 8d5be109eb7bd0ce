#include "finsler/alpha_beta.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

namespace finsler {

namespace {

constexpr double kProfileEps = 1e-9;

bool is_integer(double x) { return std::isfinite(x) && x == std::round(x); }

}  // namespace

void validate(const KropinaParams& p) {
  if (!std::isfinite(p.n) || !std::isfinite(p.m) || !std::isfinite(p.c))
    throw std::invalid_argument("Kropina parameters must be finite");
  if (p.c <= 0.0 && p.m <= 0.0) throw std::invalid_argument("Kropina parameters leave no s > 0 with c + m s > 0");
}

OmegaProfile::OmegaProfile(std::string name, ProfileKind kind, Expr omega, Bindings<double> params)
    : name_(std::move(name)), kind_(kind), omega_(std::move(omega)), params_(std::move(params)) {
  for (const auto& s : omega_.symbols())
    if (s != "s" && !params_.count(s)) throw ModelError("profile '" + name_ + "' uses unknown symbol '" + s + "'");
  if (params_.count("s")) throw ModelError("profile parameter may not be named 's'");
}

double OmegaProfile::derivative(int k, double s) const {
  if (k < 0 || k > kMaxFiberOrder) throw std::invalid_argument("profile derivative order out of range");
  if (k == 0) return value(s);
  const Jet j = value(Jet::variable(JetSpace::make(1, 0, k, 0), 0, s));
  const std::array<std::uint8_t, 1> e{static_cast<std::uint8_t>(k)};
  return j.derivative(e);
}

Jet OmegaProfile::derivative(int k, const Jet& s) const {
  if (k < 0 || k > kMaxFiberOrder) throw std::invalid_argument("profile derivative order out of range");
  const int degree = s.space() ? s.space()->max_degree() : 0;
  const int order = k + degree;
  // Taylor coefficients of Ω at s0 up to `order`, then shifted by k.
  const Jet u = value(Jet::variable(JetSpace::make(1, 0, order, 0), 0, s.value()));
  std::vector<double> taylor(degree + 1);
  for (int j = 0; j <= degree; ++j) {
    // Ω^(k)(s0 + h) = Σ_j Ω^(k+j)(s0)/j! h^j and u_i = Ω^(i)(s0)/i!.
    double falling = 1.0;
    for (int i = j + 1; i <= k + j; ++i) falling *= i;
    taylor[j] = u.coefficients()[k + j] * falling;
  }
  return compose(s, taylor);
}

bool OmegaProfile::admissible_s(double s) const {
  if (!std::isfinite(s)) return false;
  switch (kind_) {
    case ProfileKind::unit:
    case ProfileKind::exponential:
      return true;
    case ProfileKind::randers:
      return s >= 0.0 && 1.0 + std::sqrt(s) > kProfileEps;
    case ProfileKind::generalized_kropina: {
      const auto& p = *kropina_;
      if (!(std::abs(s) > kProfileEps) || !(p.c + p.m * s > kProfileEps)) return false;
      if (s < 0.0 && !(is_integer(p.n) && is_integer(p.n + 1.0))) return false;
      return true;
    }
    case ProfileKind::expression:
      try {
        return std::isfinite(value(s)) && std::isfinite(derivative(1, s));
      } catch (const DomainError&) {
        return false;
      } catch (const EvalError&) {
        return false;
      }
  }
  return false;
}

bool OmegaProfile::admissible(double A, double B, const AdmissibilityThresholds& t) const {
  if (!(std::abs(A) > t.eps_A)) return false;
  if (kind_ == ProfileKind::randers && !(A > t.eps_A)) return false;
  return admissible_s(B * B / A);
}

std::string_view to_string(ProfileKind k) {
  switch (k) {
    case ProfileKind::unit: return "unit";
    case ProfileKind::randers: return "randers";
    case ProfileKind::exponential: return "exponential";
    case ProfileKind::generalized_kropina: return "generalized-kropina";
    case ProfileKind::expression: return "expression";
  }
  return "expression";
}

OmegaProfile profile_unit() { return OmegaProfile("unit", ProfileKind::unit, Expr::number(1.0)); }

OmegaProfile profile_randers() { return OmegaProfile("randers", ProfileKind::randers, parse("(1 + sqrt(s))^2")); }

OmegaProfile profile_exponential() {
  return OmegaProfile("exponential", ProfileKind::exponential, parse("exp(-s)"));
}

OmegaProfile profile_generalized_kropina(KropinaParams p) {
  validate(p);
  OmegaProfile out("generalized-kropina", ProfileKind::generalized_kropina, parse("s^(-n) * (c + m*s)^(n + 1)"),
                   Bindings<double>{{"n", p.n}, {"m", p.m}, {"c", p.c}});
  out.kropina_ = p;
  return out;
}

OmegaProfile profile_expression(std::string name, Expr omega, Bindings<double> params) {
  return OmegaProfile(std::move(name), ProfileKind::expression, std::move(omega), std::move(params));
}

// ---------------------------------------------------------------------------

namespace {

class AlphaBetaLagrangian : public LagrangianEvaluatorImpl<AlphaBetaLagrangian> {
 public:
  explicit AlphaBetaLagrangian(OmegaProfile p) : profile_(std::move(p)) {}

  template <class T>
  T eval(const MetricModel& m, std::span<const T> x, std::span<const T> v) const {
    const auto b = m.bindings<T>(x);
    const T A = quadratic_form<T>(m.metric_components(b), v);
    const T B = contract<T>(m.oneform_components(b), v);
    const T s = ScalarOps<T>::divide(B * B, A);
    return profile_.value(s) * A;
  }

  bool admissible(double A, double B, const AdmissibilityThresholds& t) const override {
    return profile_.admissible(A, B, t);
  }
  std::string provenance() const override {
    return "alpha-beta: " + profile_.name() + ", Omega(s) = " + profile_.expression().to_string();
  }

 private:
  OmegaProfile profile_;
};

}  // namespace

FinslerLagrangian build_ab_lagrangian(std::shared_ptr<const MetricModel> model, OmegaProfile profile) {
  if (!model->has_oneform()) throw ModelError("(alpha,beta) Lagrangian needs a 1-form; model '" + model->name() + "' has none");
  return FinslerLagrangian(std::move(model), std::make_shared<AlphaBetaLagrangian>(std::move(profile)));
}

// ---------------------------------------------------------------------------

Tensor3 structured_T_at(const StructuredTParams& params, const MetricModel& m, const Vector& x) {
  const int n = m.dimension();
  std::vector<double> xs(x.data(), x.data() + n);
  const auto b = m.bindings<double>(xs);
  const double lambda = evaluate(params.lambda, b);
  const double rho = evaluate(params.rho, b);
  const double sigma = evaluate(params.sigma, b);
  const auto metric = metric_at(m, x);
  const Vector beta = oneform_at(m, x);
  const Vector beta_up = metric.inverse * beta;

  Tensor3 t(n);
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double v = lambda * beta_up[a] * beta[i] * beta[j] + sigma * beta_up[a] * metric.g(i, j);
        if (a == i) v += rho * beta[j];
        if (a == j) v += rho * beta[i];
        t(a, i, j) = v;
      }
  return t;
}

TensorField structured_T(StructuredTParams params, std::shared_ptr<const MetricModel> m) {
  if (!m->has_oneform()) throw ModelError("structured T needs a 1-form");
  return [params = std::move(params), m = std::move(m)](const Vector& x) { return structured_T_at(params, *m, x); };
}

// ---------------------------------------------------------------------------

namespace {

struct BaseData {
  Matrix g;
  Vector beta;
  Matrix nabla;
};

BaseData base_data(const MetricModel& m, const Vector& x) {
  if (!m.has_oneform()) throw ModelError("model '" + m.name() + "' has no 1-form");
  return BaseData{metric_at(m, x).g, oneform_at(m, x), nabla_beta(m, x)};
}

template <class S>
std::vector<S> corollary2_impl(const BaseData& bd, const OmegaProfile& profile, const Tensor3& T,
                               std::span<const S> v) {
  const int n = static_cast<int>(v.size());
  if (T.dimension() != n) throw std::invalid_argument("T has wrong dimension");
  S A(0.0), B(0.0);
  std::vector<S> v_low(n, S(0.0));
  for (int a = 0; a < n; ++a) {
    for (int c = 0; c < n; ++c) v_low[a] += bd.g(a, c) * v[c];
    A += v_low[a] * v[a];
    B += bd.beta[a] * v[a];
  }
  const S s = ScalarOps<S>::divide(B * B, A);
  const S omega = profile.value(s);
  const S omega_prime = profile.derivative(1, s);
  if (ScalarOps<S>::value(omega_prime) == 0.0) throw DomainError("profile-degenerate: Omega'(s) = 0");
  const S F = ScalarOps<S>::divide(omega, omega_prime * B) - ScalarOps<S>::divide(B, A);

  std::vector<S> r(n, S(0.0));
  for (int a = 0; a < n; ++a) {
    S acc(0.0);
    for (int c = 0; c < n; ++c) {
      acc += bd.nabla(a, c) * v[c];
      for (int b = 0; b < n; ++b) {
        const double t = T(b, a, c);
        if (t == 0.0) continue;
        acc -= t * v[c] * (bd.beta[b] + v_low[b] * F);
      }
    }
    r[a] = std::move(acc);
  }
  return r;
}

}  // namespace

double corollary2_factor(const MetricModel& m, const OmegaProfile& profile, const TangentPoint& p) {
  const auto inv = invariants_at(m, p);
  const double s = inv.B * inv.B / inv.A;
  const double op = profile.derivative(1, s);
  if (op == 0.0) throw DomainError("profile-degenerate: Omega'(s) = 0");
  return profile.value(s) / (op * inv.B) - inv.B / inv.A;
}

Vector corollary2_residual_vector(const MetricModel& m, const OmegaProfile& profile, const Tensor3& T,
                                  const TangentPoint& p) {
  const auto bd = base_data(m, p.x);
  std::vector<double> v(p.xdot.data(), p.xdot.data() + p.xdot.size());
  const auto r = corollary2_impl<double>(bd, profile, T, v);
  return Eigen::Map<const Vector>(r.data(), static_cast<Eigen::Index>(r.size()));
}

double corollary2_residual(const MetricModel& m, const OmegaProfile& profile, const Tensor3& T, const TangentPoint& p) {
  return corollary2_residual_vector(m, profile, T, p).lpNorm<Eigen::Infinity>();
}

double corollary2_residual(const MetricModel& m, const OmegaProfile& profile, const TensorField& T,
                           const TangentPoint& p) {
  return corollary2_residual(m, profile, T(p.x), p);
}

Matrix corollary2_fiber_jacobian(const MetricModel& m, const OmegaProfile& profile, const Tensor3& T,
                                 const TangentPoint& p) {
  const auto bd = base_data(m, p.x);
  const int n = m.dimension();
  std::vector<int> dirs(n);
  std::iota(dirs.begin(), dirs.end(), 0);
  const auto seeded = seed(p, {}, dirs, JetOrders{0, 1});
  const auto r = corollary2_impl<Jet>(bd, profile, T, seeded.xdot);
  Matrix J(n, n);
  for (int a = 0; a < n; ++a)
    for (int d = 0; d < n; ++d) J(a, d) = r[a].coefficients()[*seeded.space->unit(d)];
  return J;
}

Matrix corollary2_pointwise_residual(const MetricModel& m, const OmegaProfile& profile, const Tensor3& T,
                                     const TangentPoint& p) {
  const auto bd = base_data(m, p.x);
  const int n = m.dimension();
  const Vector& v = p.xdot;
  const Vector v_low = bd.g * v;
  const double A = v_low.dot(v);
  const double B = bd.beta.dot(v);
  const double s = B * B / A;
  const double om = profile.value(s);
  const double op = profile.derivative(1, s);
  const double opp = profile.derivative(2, s);
  if (op == 0.0) throw DomainError("profile-degenerate: Omega'(s) = 0");
  const double F = om / (op * B) - B / A;
  const double ratio = om * opp / (op * op);

  const Matrix tv = T.contract(v);  // (b, a) = T^b_ac ẋ^c
  Matrix P(n, n);
  for (int a = 0; a < n; ++a) {
    double tvv = 0.0;  // T^b_ac ẋ^c ẋ_b
    for (int b = 0; b < n; ++b) tvv += tv(b, a) * v_low[b];
    for (int d = 0; d < n; ++d) {
      double t_beta = 0.0, t_vlow = 0.0, tv_g = 0.0;
      for (int b = 0; b < n; ++b) {
        t_beta += T(b, a, d) * bd.beta[b];
        t_vlow += T(b, a, d) * v_low[b];
        tv_g += tv(b, a) * bd.g(d, b);
      }
      const double bracket = v_low[d] * (2.0 * B / (A * A)) * ratio -
                             bd.beta[d] * (-1.0 / A + om / (op * B * B) + 2.0 * ratio / A);
      P(a, d) = bd.nabla(a, d) - t_beta - (t_vlow + tv_g) * F - tvv * bracket;
    }
  }
  return P;
}

// ---------------------------------------------------------------------------

Matrix corollary3_design(const MetricModel& m, const KropinaParams& p, const Vector& x) {
  if (!m.has_oneform()) throw ModelError("model '" + m.name() + "' has no 1-form");
  const auto metric = metric_at(m, x);
  const Vector beta = oneform_at(m, x);
  const double beta2 = beta.dot(metric.inverse * beta);
  return (p.c * (1.0 - p.n) + p.m * beta2) * (beta * beta.transpose()) + (p.c * p.n * beta2) * metric.g;
}

Matrix corollary3_residual(const MetricModel& m, const KropinaParams& p, double q, const Vector& x) {
  return nabla_beta(m, x) - q * corollary3_design(m, p, x);
}

Matrix corollary3_residual(const MetricModel& m, const KropinaParams& p, const Expr& q, const Vector& x) {
  std::vector<double> xs(x.data(), x.data() + x.size());
  return corollary3_residual(m, p, evaluate(q, m.bindings<double>(xs)), x);
}

QFit solve_q(const MetricModel& m, const KropinaParams& p, const Vector& x) {
  const Matrix nabla = nabla_beta(m, x);
  const Matrix D = corollary3_design(m, p, x);
  QFit fit;
  if (p.n == 1.0) fit.note = "n = 1: the beta_a beta_b coefficient c(1-n) vanishes, q is fixed by the remaining terms";
  const double dd = D.squaredNorm();
  if (!(dd > 1e-28)) {
    fit.defined = false;
    fit.q = std::numeric_limits<double>::quiet_NaN();
    fit.residual = nabla.norm();
    fit.note = "design tensor vanishes at this point; q is undefined";
    return fit;
  }
  fit.q = (nabla.array() * D.array()).sum() / dd;
  fit.residual = (nabla - fit.q * D).norm();
  return fit;
}

double omega_ode_residual(const KropinaParams& p, double lambda_T, double sigma_T, double s) {
  const OmegaProfile profile = profile_generalized_kropina(p);
  if (!profile.admissible_s(s)) throw DomainError("s outside the smooth locus of the profile");
  const double om = profile.value(s);
  const double op = profile.derivative(1, s);
  const double opp = profile.derivative(2, s);
  return op * om * sigma_T + s * om * opp * (sigma_T - lambda_T * s) - sigma_T * op * op * s;
}

double omega_general_solution(double lambda_T, double sigma_T, double c1, double c2, double s) {
  const double k = sigma_T / c1;
  return c2 * std::pow(s, -k) * std::pow(lambda_T * s + c1, k + 1.0);
}

}  // namespace finsler
