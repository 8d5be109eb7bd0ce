#include <doctest.h>

#include "finsler/fixtures.hpp"
#include "support.hpp"

using namespace finsler;
using testing::Gen;

namespace {

FinslerLagrangian build(const FixtureSpec& f) { return f.definition.lagrangian.build(f.definition.model); }

// Levi-Civita connections of e^{2σ}g and g differ by
//   δ^a_b ∂_cσ + δ^a_c ∂_bσ − g_bc g^{ad} ∂_dσ.
Tensor3 conformal_difference(const MetricModel& m, const Vector& x, const Vector& dsigma) {
  const auto mv = metric_at(m, x);
  const int n = m.dimension();
  const Vector up = mv.inverse * dsigma;
  Tensor3 t(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        t(a, b, c) = (a == b ? dsigma[c] : 0.0) + (a == c ? dsigma[b] : 0.0) - mv.g(b, c) * up[a];
  return t;
}

}  // namespace

TEST_CASE("Omega and its derivatives against finite differences") {
  for (const char* name : {"ccnv_kropina", "kundt_kropina", "flat_exponential_nonparallel", "conformal_riemannian"}) {
    const auto& f = find_fixture(name);
    const auto L = build(f);
    const OmegaField omega(L);
    for (const auto& p : testing::admissible_points(L, f.definition.sampling, 3, 2)) {
      INFO(std::string(name) << " x=" << p.x.transpose() << " v=" << p.xdot.transpose());
      const auto d = omega.derivatives(p);
      CHECK(d.value == doctest::Approx(L(p) / d.A).epsilon(1e-12));
      const int n = static_cast<int>(p.x.size());
      Vector fdx(n), fdv(n);
      for (int a = 0; a < n; ++a) {
        const Vector e = testing::unit(n, a);
        fdx[a] = testing::fd1_scalar([&](double t) { return omega({p.x + t * e, p.xdot}); });
        fdv[a] = testing::fd1_scalar([&](double t) { return omega({p.x, p.xdot + t * e}); });
      }
      // Ω is constant along the fiber for the conformal fixture; measure
      // against Ω itself so exact zeros are not compared to roundoff.
      const auto err = [&](const Vector& a, const Vector& b) {
        return (a - b).lpNorm<Eigen::Infinity>() / std::max(std::abs(d.value), b.lpNorm<Eigen::Infinity>());
      };
      CHECK(err(d.d_dx, fdx) < 1e-7);
      CHECK(err(d.d_dv, fdv) < 1e-7);
      // Ω is 0-homogeneous
      CHECK(std::abs(d.d_dv.dot(p.xdot)) < 1e-9 * std::max(1.0, d.d_dv.lpNorm<Eigen::Infinity>()));
    }
  }
  const auto& f = find_fixture("curved_riemannian");
  const OmegaField omega(build(f), 0.5);
  CHECK_THROWS_AS(omega({Vector::Zero(3), Vector::Constant(3, 0.1)}), InadmissiblePointError);
}

TEST_CASE("conformal rescaling: extracted T matches the closed form and transports Omega") {
  const auto& f = find_fixture("conformal_riemannian");  // L = e^{2 x1} A
  const auto L = build(f);
  const OmegaField omega(L);
  const MetricModel& m = L.model();
  Gen g(8);
  for (int trial = 0; trial < 10; ++trial) {
    const Vector x = g.vector(3, -0.5, 0.5);
    std::vector<Vector> fibers;
    for (int k = 0; k < 4; ++k) fibers.push_back(g.vector(3, -1, 1));
    const ExtractedT ex = extract_T(L, x, fibers);
    const Tensor3 T = conformal_difference(m, x, testing::unit(3, 0));
    CHECK(ex.score < 1e-12);
    CHECK(testing::rel_err(ex.T, T) < 1e-12);
    CHECK(testing::rel_err(ex.christoffel, christoffel(m, x)) == 0.0);
    for (const auto& v : fibers) {
      const TangentPoint p{x, v};
      CHECK(theorem1_residual(omega, T, p).lpNorm<Eigen::Infinity>() < 1e-12);
      CHECK(theorem1_relative(omega, T, p) < 1e-12);
      // negative control: the Levi-Civita connection of g alone is not it
      CHECK(theorem1_relative(omega, zero_tensor_field(3), p) > 1e-3);
    }
  }
  ConformalFactor sigma{parse("x1")};
  const TangentPoint p{g.vector(3, -0.5, 0.5), g.vector(3, -1, 1)};
  CHECK(testing::rel_err(tavakol_residual(sigma, m, p), testing::unit(3, 0)) < 1e-15);
}

TEST_CASE("Omega is transported with T = 0 on CCNV and not with a perturbed T") {
  const auto& f = find_fixture("ccnv_randers");
  const auto L = build(f);
  const OmegaField omega(L);
  Tensor3 bump(4);
  bump(1, 0, 0) = 0.5;
  for (const auto& p : testing::admissible_points(L, f.definition.sampling, 4, 2)) {
    CHECK(theorem1_relative(omega, Tensor3(4), p) < 1e-12);
    CHECK(theorem1_residual(omega, constant_tensor_field(bump), p).lpNorm<Eigen::Infinity>() > 1e-3);
  }
  CHECK_THROWS_AS(theorem1_residual(omega, Tensor3(3), testing::admissible_points(L, f.definition.sampling, 1, 1)[0]),
                  std::invalid_argument);
}

TEST_CASE("classify: Berwald, not Berwald, inconclusive") {
  SUBCASE("Riemannian metrics are Berwald with T = 0") {
    const auto& f = find_fixture("curved_riemannian");
    const auto r = classify_berwald(build(f), AdmissibleSampler(f.definition.sampling));
    CHECK(r.verdict == Verdict::berwald);
    CHECK(r.max_spread < 1e-12);
    CHECK(r.points.size() == 16);
    for (const auto& p : r.points) CHECK(p.T.norm_inf() < 1e-12);
  }
  SUBCASE("a non-parallel 1-form on flat space is not Berwald") {
    const auto& f = find_fixture("flat_randers_nonparallel");
    const auto r = classify_berwald(build(f), AdmissibleSampler(f.definition.sampling));
    CHECK(r.verdict == Verdict::not_berwald);
    REQUIRE(r.witness.has_value());
    CHECK(r.points[*r.witness].spread == r.max_spread);
    CHECK(r.max_spread > 1e-3);
  }
  SUBCASE("starved sampler") {
    const auto& f = find_fixture("ccnv_kropina");
    SamplerConfig cfg = f.definition.sampling;
    cfg.thresholds.eps_B = 5.0;  // fibers have norm <= 2, so no B passes
    const auto r = classify_berwald(build(f), AdmissibleSampler(cfg));
    CHECK(r.verdict == Verdict::inconclusive);
    CHECK_FALSE(r.note.empty());
  }
  SUBCASE("too few samples requested") {
    const auto& f = find_fixture("curved_riemannian");
    SamplerConfig cfg = f.definition.sampling;
    cfg.base_points = 7;
    CHECK_THROWS_AS(classify_berwald(build(f), AdmissibleSampler(cfg)), std::invalid_argument);
    cfg.base_points = 8;
    cfg.fiber_samples = 1;
    CHECK_THROWS_AS(classify_berwald(build(f), AdmissibleSampler(cfg)), std::invalid_argument);
  }
}

TEST_CASE("classify does not depend on the number of workers") {
  const auto& f = find_fixture("kundt_kropina");
  const auto L = build(f);
  const AdmissibleSampler s(f.definition.sampling);
  ClassifyOptions one, many;
  many.jobs = 8;
  const auto a = classify_berwald(L, s, one), b = classify_berwald(L, s, many);
  CHECK(a.verdict == b.verdict);
  CHECK(a.max_spread == b.max_spread);
  CHECK(a.accepted == b.accepted);
  for (std::size_t i = 0; i < a.points.size(); ++i) CHECK(max_abs_diff(a.points[i].T, b.points[i].T) == 0.0);
}

TEST_CASE("spread and mean helpers, verdict names") {
  Tensor3 a(2), b(2), c(2);
  b(0, 0, 0) = 1.0;
  c(1, 1, 1) = -2.0;
  CHECK(pairwise_spread({a, b, c}) == 2.0);
  CHECK(pairwise_spread({a}) == 0.0);
  CHECK(mean({b, c})(0, 0, 0) == 0.5);
  for (Verdict v : {Verdict::berwald, Verdict::not_berwald, Verdict::inconclusive})
    CHECK(parse_verdict(to_string(v)) == v);
  CHECK(to_string(Verdict::not_berwald) == "not-berwald");
  CHECK_FALSE(parse_verdict("maybe").has_value());
}
