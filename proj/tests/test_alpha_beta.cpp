#include <doctest.h>

#include <cmath>

#include "finsler/fixtures.hpp"
#include "support.hpp"

using namespace finsler;
using testing::Gen;

namespace {

const KropinaParams kKropina{2.0, 1.0, 1.0};

double eval_at(const MetricModel& m, const Expr& e, const Vector& x) {
  std::vector<double> xs(x.data(), x.data() + x.size());
  return evaluate(e, m.bindings<double>(xs));
}

FinslerLagrangian build(const FixtureSpec& f) { return f.definition.lagrangian.build(f.definition.model); }

const OmegaProfile& profile_of(const FixtureSpec& f) { return *f.definition.lagrangian.profile; }

// λ β^a β_b β_c + ρ(β_c δ^a_b + β_b δ^a_c) + σ β^a g_bc, written out directly.
Tensor3 structured_direct(double lambda, double rho, double sigma, const MetricModel& m, const Vector& x) {
  const auto mv = metric_at(m, x);
  const Vector lo = oneform_at(m, x);
  const Vector up = mv.inverse * lo;
  const int n = m.dimension();
  Tensor3 t(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        t(a, b, c) = lambda * up[a] * lo[b] * lo[c] + rho * ((a == b ? lo[c] : 0.0) + (a == c ? lo[b] : 0.0)) +
                     sigma * up[a] * mv.g(b, c);
  return t;
}

// Ω′Ωσ + sΩΩ″(σ − λs) − σΩ′²s with derivatives from finite differences.
double ode_fd(const std::function<double(double)>& omega, double lambda, double sigma, double s) {
  const double om = omega(s);
  const double op = testing::fd1_scalar([&](double t) { return omega(s + t); });
  const double opp = testing::fd2_scalar([&](double t) { return omega(s + t); });
  return op * om * sigma + s * om * opp * (sigma - lambda * s) - sigma * op * op * s;
}

}  // namespace

TEST_CASE("profile values and derivatives") {
  const OmegaProfile k = profile_generalized_kropina(kKropina);
  for (double s : {0.2, 0.7, 1.5, 4.0}) {
    const double om = std::pow(s, -2.0) * std::pow(1.0 + s, 3.0);
    CHECK(k.value(s) == doctest::Approx(om).epsilon(1e-14));
    CHECK(k.derivative(1, s) == doctest::Approx(om * (-2.0 / s + 3.0 / (1.0 + s))).epsilon(1e-13));
    for (int order = 1; order <= 3; ++order) {
      const double fd = testing::fd1_scalar([&](double t) { return k.derivative(order - 1, s + t); });
      CHECK(testing::rel_err(k.derivative(order, s), fd) < 1e-8);
    }
  }
  const OmegaProfile r = profile_randers();
  CHECK(r.value(0.25) == doctest::Approx(2.25));
  CHECK(r.derivative(1, 0.25) == doctest::Approx(3.0));  // (1 + √s)/√s
  CHECK(profile_exponential().derivative(2, 0.5) == doctest::Approx(std::exp(-0.5)));
  CHECK(profile_unit().derivative(1, 3.0) == 0.0);
  CHECK_THROWS_AS(k.derivative(5, 1.0), std::invalid_argument);
}

TEST_CASE("profile smooth loci") {
  const OmegaProfile r = profile_randers();
  CHECK(r.admissible_s(0.5));
  CHECK_FALSE(r.admissible_s(-0.5));
  CHECK_FALSE(r.admissible_s(std::nan("")));
  AdmissibilityThresholds t;
  CHECK_FALSE(r.admissible(-1.0, 0.5, t));  // Randers needs A > 0
  CHECK(profile_exponential().admissible(-1.0, 0.5, t));

  const OmegaProfile k = profile_generalized_kropina(kKropina);
  CHECK(k.admissible_s(0.5));
  CHECK_FALSE(k.admissible_s(0.0));
  CHECK(k.admissible_s(-0.5));   // integer n, c + m s = 0.5
  CHECK_FALSE(k.admissible_s(-1.0));
  CHECK_FALSE(profile_generalized_kropina({2.0, -1.0, 1.0}).admissible_s(2.0));
  CHECK_FALSE(profile_generalized_kropina({1.5, 1.0, 1.0}).admissible_s(-0.5));

  CHECK_FALSE(profile_expression("root", parse("sqrt(s)")).admissible_s(-1.0));
  CHECK(profile_expression("root", parse("sqrt(s)")).admissible_s(1.0));
  CHECK_THROWS_AS(profile_expression("bad", parse("s + k")), ModelError);
  CHECK(profile_expression("ok", parse("s + k"), {{"k", 2.0}}).value(1.0) == 3.0);

  CHECK_NOTHROW(validate(KropinaParams{2.0, -1.0, 1.0}));
  CHECK_THROWS_AS(validate(KropinaParams{2.0, -1.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(validate(KropinaParams{std::nan(""), 1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("(alpha,beta) Lagrangians are Ω(B²/A)·A") {
  const auto& f = find_fixture("flat_randers_nonparallel");
  const auto model = f.definition.model;
  const auto randers = build_ab_lagrangian(model, profile_randers());
  const auto expo = build_ab_lagrangian(model, profile_exponential());
  const auto kropina = build_ab_lagrangian(model, profile_generalized_kropina(kKropina));
  Gen g(3);
  int checked = 0;
  while (checked < 50) {
    const TangentPoint p{g.vector(3, 0.5, 1.5), g.vector(3, -1, 1)};
    const auto inv = invariants_at(*model, p);
    if (inv.A < 0.1 || std::abs(inv.B) < 0.1) continue;
    ++checked;
    CHECK(inv.B == doctest::Approx(p.x[0] * p.xdot[1]).epsilon(1e-14));
    const double s = inv.B * inv.B / inv.A;
    CHECK(randers(p) == doctest::Approx(std::pow(std::sqrt(inv.A) + std::abs(inv.B), 2)).epsilon(1e-13));
    CHECK(expo(p) == doctest::Approx(std::exp(-s) * inv.A).epsilon(1e-13));
    CHECK(kropina(p) == doctest::Approx(std::pow(inv.A + inv.B * inv.B, 3) / std::pow(inv.B, 4)).epsilon(1e-12));
  }
  const auto riemannian = find_fixture("curved_riemannian").definition.model;
  CHECK_THROWS_AS(build_ab_lagrangian(riemannian, profile_randers()), ModelError);
}

TEST_CASE("structured T matches its defining formula") {
  for (const char* name : {"kundt_kropina", "kundt_sphere_kropina"}) {
    const auto& f = find_fixture(name);
    const MetricModel& m = *f.definition.model;
    const StructuredTParams& params = *f.expected_T;
    const auto field = structured_T(params, f.definition.model);
    Gen g(5);
    for (int i = 0; i < 10; ++i) {
      Vector x = g.vector(4, -0.5, 0.5);
      x[2] += 1.0;
      const Tensor3 expected = structured_direct(eval_at(m, params.lambda, x), eval_at(m, params.rho, x),
                                                 eval_at(m, params.sigma, x), m, x);
      CHECK(testing::rel_err(structured_T_at(params, m, x), expected) < 1e-14);
      CHECK(max_abs_diff(field(x), structured_T_at(params, m, x)) == 0.0);
    }
  }
}

TEST_CASE("the condition on nabla beta: CCNV, Kundt and flat") {
  SUBCASE("T = 0 on CCNV") {
    for (const char* name : {"ccnv_randers", "ccnv_exponential", "ccnv_kropina"}) {
      const auto& f = find_fixture(name);
      for (const auto& p : testing::admissible_points(build(f), f.definition.sampling, 4, 3))
        CHECK(corollary2_residual(*f.definition.model, profile_of(f), Tensor3(4), p) < 1e-12);
    }
  }
  SUBCASE("structured T on Kundt, also transporting Omega") {
    for (const char* name : {"kundt_kropina", "kundt_vsi_kropina"}) {
      const auto& f = find_fixture(name);
      const auto L = build(f);
      const OmegaField omega(L);
      const auto T = structured_T(*f.expected_T, f.definition.model);
      for (const auto& p : testing::admissible_points(L, f.definition.sampling, 4, 3)) {
        CHECK(corollary2_residual(*f.definition.model, profile_of(f), T, p) < 1e-9);
        CHECK(theorem1_residual(omega, T, p).lpNorm<Eigen::Infinity>() < 1e-9);
        // negative control: dropping T
        CHECK(corollary2_residual(*f.definition.model, profile_of(f), Tensor3(4), p) > 1e-3);
      }
    }
  }
  SUBCASE("no structured T fixes a non-parallel beta on flat space") {
    const auto& f = find_fixture("flat_exponential_nonparallel");
    Gen g(17);
    for (const auto& p : testing::admissible_points(build(f), f.definition.sampling, 3, 3)) {
      const StructuredTParams params{Expr::number(g.uniform(-2, 2)), Expr::number(g.uniform(-2, 2)),
                                     Expr::number(g.uniform(-2, 2))};
      const Tensor3 T = structured_T_at(params, *f.definition.model, p.x);
      CHECK(corollary2_residual(*f.definition.model, profile_of(f), T, p) > 1e-3);
    }
  }
}

TEST_CASE("fiber jacobian of the condition: jets, finite differences and the closed form") {
  for (const char* name : {"kundt_kropina", "flat_randers_nonparallel", "ccnv_exponential"}) {
    const auto& f = find_fixture(name);
    const MetricModel& m = *f.definition.model;
    const int n = m.dimension();
    Gen g(21);
    for (const auto& p : testing::admissible_points(build(f), f.definition.sampling, 3, 2)) {
      INFO(name);
      // an arbitrary T so that every term contributes
      Tensor3 T(n);
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          for (int c = 0; c < n; ++c) T(a, b, c) = g.uniform(-1, 1);
      const Matrix J = corollary2_fiber_jacobian(m, profile_of(f), T, p);
      Matrix fd(n, n);
      for (int d = 0; d < n; ++d)
        fd.col(d) = testing::fd1([&](double t) -> Vector {
          return corollary2_residual_vector(m, profile_of(f), T, {p.x, p.xdot + t * testing::unit(n, d)});
        });
      CHECK(testing::rel_err(J, fd) < 1e-7);
      CHECK(testing::rel_err(corollary2_pointwise_residual(m, profile_of(f), T, p), J) < 1e-10);
    }
  }
}

TEST_CASE("the factor F = Ω/(Ω′B) − B/A") {
  const auto& f = find_fixture("kundt_kropina");
  const MetricModel& m = *f.definition.model;
  for (const auto& p : testing::admissible_points(build(f), f.definition.sampling, 3, 3)) {
    const auto inv = invariants_at(m, p);
    const double s = inv.B * inv.B / inv.A;
    // Ω/Ω′ = 1 / (−n/s + (n+1)m/(c+ms)) for the generalized Kropina profile
    const double om_over_op = 1.0 / (-2.0 / s + 3.0 / (1.0 + s));
    CHECK(corollary2_factor(m, profile_of(f), p) == doctest::Approx(om_over_op / inv.B - inv.B / inv.A).epsilon(1e-12));
  }
  // Ω′ = 0 for the unit profile
  const TangentPoint p = testing::admissible_points(build(f), f.definition.sampling, 1, 1).front();
  CHECK_THROWS_AS(corollary2_factor(m, profile_unit(), p), DomainError);
  CHECK_THROWS_AS(corollary2_residual(m, profile_unit(), Tensor3(4), p), DomainError);
}

TEST_CASE("generalized Kropina: q from the design tensor") {
  SUBCASE("Kundt: q c (1 − n) = ∂_v H") {
    for (const char* name : {"kundt_kropina", "kundt_vsi_kropina"}) {
      const auto& f = find_fixture(name);
      const MetricModel& m = *f.definition.model;
      Gen g(9);
      for (int i = 0; i < 20; ++i) {
        const Vector x = g.vector(4, -0.5, 0.5);
        const QFit fit = solve_q(m, kKropina, x);
        const double dH = eval_at(m, *f.dH_dv, x);
        REQUIRE(fit.defined);
        CHECK(fit.residual < 1e-12);
        CHECK(fit.q * kKropina.c * (1.0 - kKropina.n) == doctest::Approx(dH).epsilon(1e-12).scale(1.0));
        CHECK(corollary3_residual(m, kKropina, fit.q, x).lpNorm<Eigen::Infinity>() < 1e-12);
        CHECK(corollary3_residual(m, kKropina, fit.q + 0.1, x).lpNorm<Eigen::Infinity>() > 1e-3);
      }
    }
  }
  SUBCASE("CCNV: q = 0") {
    const MetricModel& m = *find_fixture("ccnv_kropina").definition.model;
    const QFit fit = solve_q(m, kKropina, Vector::Constant(4, 0.2));
    CHECK(fit.defined);
    CHECK(std::abs(fit.q) < 1e-14);
    CHECK(fit.residual < 1e-14);
  }
  SUBCASE("the design tensor can vanish") {
    const MetricModel& m = *find_fixture("flat_randers_nonparallel").definition.model;
    const QFit fit = solve_q(m, kKropina, Vector::Zero(3));  // β = x1 dx2 = 0 here
    CHECK_FALSE(fit.defined);
    CHECK(std::isnan(fit.q));
    CHECK_FALSE(fit.note.empty());
    CHECK(solve_q(m, {1.0, 1.0, 1.0}, Vector::Constant(3, 1.0)).note.find("n = 1") != std::string::npos);
  }
  SUBCASE("design tensor formula") {
    const MetricModel& m = *find_fixture("kundt_kropina").definition.model;
    const Vector x = Vector::Constant(4, 0.3);
    // β = du is null for the Kundt form, so D = c(1−n) β_a β_b.
    Matrix expected = Matrix::Zero(4, 4);
    expected(0, 0) = kKropina.c * (1.0 - kKropina.n);
    CHECK(testing::rel_err(corollary3_design(m, kKropina, x), expected) < 1e-14);
  }
}

TEST_CASE("profile equation for Ω") {
  for (const KropinaParams& p : {kKropina, KropinaParams{3.0, 0.5, 2.0}, KropinaParams{1.5, 2.0, 0.7}}) {
    const double sigma = 0.8;
    const double lambda = sigma * p.m / (p.n * p.c);
    for (int i = 0; i <= 20; ++i) {
      const double s = 0.2 + 4.8 * i / 20.0;
      const double scale = std::max(1.0, std::abs(profile_generalized_kropina(p).value(s)));
      CHECK(std::abs(omega_ode_residual(p, lambda, sigma, s)) < 1e-10 * scale * scale);
    }
    // a mismatched ratio leaves a residual
    CHECK(std::abs(omega_ode_residual(p, 1.5 * lambda, sigma, 1.0)) > 1e-3);
  }
  CHECK_THROWS_AS(omega_ode_residual(kKropina, 1.0, 1.0, -1.0), DomainError);

  // The two-constant family solves the same equation for any c1, c2.
  Gen g(13);
  for (int i = 0; i < 30; ++i) {
    const double lambda = g.uniform(0.2, 2.0), sigma = g.uniform(-2.0, 2.0);
    const double c1 = g.uniform(0.3, 2.0), c2 = g.uniform(0.5, 2.0);
    const double s = g.uniform(0.3, 3.0);
    const auto omega = [&](double t) { return omega_general_solution(lambda, sigma, c1, c2, t); };
    const double scale = std::max(1.0, omega(s) * omega(s));
    CHECK(std::abs(ode_fd(omega, lambda, sigma, s)) < 1e-6 * scale);
    CHECK(std::abs(ode_fd(omega, lambda, sigma + 0.5, s)) > 1e-6 * scale);
  }
}
