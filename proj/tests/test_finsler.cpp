#include <doctest.h>

#include <atomic>
#include <set>

#include "finsler/fixtures.hpp"
#include "finsler/parallel.hpp"
#include "support.hpp"

using namespace finsler;
using testing::Gen;

namespace {

FinslerLagrangian build(const FixtureSpec& f) { return f.definition.lagrangian.build(f.definition.model); }

std::vector<TangentPoint> points_of(const FixtureSpec& f, int bases = 3, int fibers = 3) {
  return testing::admissible_points(build(f), f.definition.sampling, bases, fibers);
}

}  // namespace

TEST_CASE("L is positively 2-homogeneous in the velocity") {
  Gen g(1);
  for (const auto& f : canned_fixtures()) {
    const auto L = build(f);
    for (const auto& p : points_of(f)) {
      const double lambda = g.uniform(0.2, 3.0);
      INFO(f.name);
      CHECK(L({p.x, lambda * p.xdot}) == doctest::Approx(lambda * lambda * L(p)).epsilon(1e-12));
    }
  }
}

TEST_CASE("connection data agrees with finite-difference oracles") {
  for (const auto& f : canned_fixtures()) {
    const auto L = build(f);
    for (const auto& p : points_of(f, 2, 2)) {
      INFO(f.name << " x=" << p.x.transpose() << " v=" << p.xdot.transpose());
      const ConnectionData d = connection_data(L, p);
      const auto o = testing::fd_connection(L, p);
      CHECK(testing::rel_err(d.dL_dx, o.dL_dx) < 1e-7);
      CHECK(testing::rel_err(d.dL_dv, o.dL_dv) < 1e-7);
      CHECK(testing::rel_err(d.g_L, o.g_L) < 1e-6);
      for (int c = 0; c < p.x.size(); ++c) {
        CHECK(testing::rel_err(d.dgL_dx[c], o.dgL_dx[c]) < 1e-6);
        CHECK(testing::rel_err(d.dgL_dv[c], o.dgL_dv[c]) < 1e-6);
      }
      // The oracle for G uses second differences of L, N and Ξ difference an
      // ill-conditioned solve; 1e-5 is what the oracles themselves resolve.
      CHECK(testing::rel_err(d.G, o.G) < 1e-5);
      CHECK(testing::spray_backward_error(d.G, o) < 1e-6);
      CHECK(testing::rel_err(d.N, o.N) < 1e-5);
      CHECK(testing::rel_err(d.Xi, o.Xi) < 1e-5);
    }
  }
}

TEST_CASE("homogeneity relations of L, g^L, G, N and Ξ") {
  for (const auto& f : canned_fixtures()) {
    const auto L = build(f);
    for (const auto& p : points_of(f)) {
      INFO(f.name);
      const ConnectionData d = connection_data(L, p);
      const double scale = std::max(1.0, std::abs(d.L));
      CHECK(std::abs(d.dL_dv.dot(p.xdot) - 2.0 * d.L) < 1e-9 * scale);
      CHECK(std::abs(p.xdot.dot(d.g_L * p.xdot) - d.L) < 1e-9 * scale);
      const double gscale = std::max(1.0, d.N.lpNorm<Eigen::Infinity>() * p.xdot.lpNorm<Eigen::Infinity>());
      CHECK((d.N * p.xdot - 2.0 * d.G).lpNorm<Eigen::Infinity>() < 1e-9 * gscale);
      CHECK(testing::rel_err(d.Xi.contract(p.xdot), d.N) < 1e-9);
    }
  }
}

TEST_CASE("for L = A the canonical connection is Levi-Civita") {
  const auto& f = find_fixture("curved_riemannian");
  const auto L = build(f);
  for (const auto& p : points_of(f)) {
    const ConnectionData d = connection_data(L, p);
    const Tensor3 gamma = christoffel(L.model(), p.x);
    const Matrix gv = gamma.contract(p.xdot);
    CHECK(testing::rel_err(d.g_L, metric_at(L.model(), p.x).g) < 1e-14);
    CHECK(testing::rel_err(d.N, gv) < 1e-12);
    CHECK(testing::rel_err(d.G, (0.5 * gv * p.xdot).eval()) < 1e-12);
    CHECK(testing::rel_err(d.Xi, gamma) < 1e-12);
  }
}

TEST_CASE("identity residuals vanish on every fixture") {
  for (const auto& f : canned_fixtures()) {
    const auto L = build(f);
    for (const auto& p : points_of(f)) {
      INFO(f.name);
      const auto r = identity_residuals(L, p);
      CHECK(r.max_delta_L < 1e-9);
      CHECK(r.max_compat < 1e-9);
      CHECK(r.max_torsion < 1e-9);
      CHECK(r.max_spray < 1e-9);
    }
  }
}

TEST_CASE("negative control: corrupted connection data breaks the identities") {
  const auto& f = find_fixture("ccnv_randers");
  const auto L = build(f);
  const auto p = points_of(f, 1, 1).front();
  const ConnectionData clean = connection_data(L, p);
  CHECK(identity_residuals(clean, p.xdot).max() < 1e-9);

  ConnectionData bad_N = clean;
  bad_N.N(1, 2) += 1e-3;
  const auto rN = identity_residuals(bad_N, p.xdot);
  CHECK(std::max(rN.max_delta_L, rN.max_compat) > 1e-6);
  CHECK(rN.max_spray > 1e-6);

  ConnectionData bad_Xi = clean;
  bad_Xi.Xi(0, 1, 2) += 1e-3;
  CHECK(identity_residuals(bad_Xi, p.xdot).max_torsion > 1e-6);

  ConnectionData bad_G = clean;
  bad_G.G[0] += 1e-3;
  CHECK(identity_residuals(bad_G, p.xdot).max_spray > 1e-6);
}

TEST_CASE("free Lagrangians: symbols, velocity names and the A/B shorthands") {
  const auto model = std::make_shared<MetricModel>(*find_fixture("curved_riemannian").definition.model);
  const auto by_name = FinslerLagrangian::from_expression(
      model, parse("x1_dot^2 + 0.4*x3*x1_dot*x2_dot + (1 + x1^2)*x2_dot^2 + exp(x2)*x3_dot^2"));
  const auto by_A = FinslerLagrangian::from_expression(model, parse("A"));
  Gen g(4);
  for (int i = 0; i < 10; ++i) {
    TangentPoint p{g.vector(3, -0.5, 0.5), g.vector(3, -1, 1)};
    CHECK(by_name(p) == doctest::Approx(by_A(p)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(FinslerLagrangian::from_expression(model, parse("A + w")), ModelError);
  CHECK_THROWS_AS(FinslerLagrangian::from_expression(model, parse("B^2")), ModelError);
  CHECK(velocity_symbol("u") == "u_dot");
}

TEST_CASE("admissibility rejects small A, small B and non-finite L") {
  const auto& f = find_fixture("ccnv_kropina");
  const auto L = build(f);
  AdmissibilityThresholds t;
  t.eps_A = 0.25;
  t.eps_B = 0.05;
  Vector x = Vector::Zero(4);
  // g = 2 du dv + 2H du² + ..., so v = (0, 1, 0, 0) is null and has B = 0
  CHECK_FALSE(L.admissible_basic({x, testing::unit(4, 1)}, t));
  Vector v(4);
  v << 1.0, 0.0, 1.0, 0.0;  // A = 2H + 1 = 1 at x = 0, B = 1
  CHECK(L.admissible_basic({x, v}, t));
  v << 0.01, 0.0, 1.0, 0.0;  // B below eps_B
  CHECK_FALSE(L.admissible_basic({x, v}, t));
}

TEST_CASE("sampler: determinism, bounds and admissibility") {
  const auto& f = find_fixture("kundt_kropina");
  const auto L = build(f);
  SamplerConfig cfg = f.definition.sampling;
  const AdmissibleSampler s(cfg);
  for (int i = 0; i < 6; ++i) {
    const auto a = s.sample(L, i), b = s.sample(L, i);
    REQUIRE(a.base_found);
    CHECK(a.x == b.x);
    REQUIRE(a.fibers.size() == b.fibers.size());
    for (std::size_t k = 0; k < a.fibers.size(); ++k) CHECK(a.fibers[k] == b.fibers[k]);
    CHECK(a.accepted == static_cast<int>(a.fibers.size()));
    CHECK(a.proposed >= a.accepted);
    for (int c = 0; c < 4; ++c) {
      CHECK(a.x[c] >= cfg.box[c].first);
      CHECK(a.x[c] <= cfg.box[c].second);
    }
    for (const auto& v : a.fibers) {
      CHECK(s.admissible(L, {a.x, v}));
      const double r = v.norm();
      CHECK((std::abs(r - 1.0) < 1e-12 || std::abs(r - 2.0) < 1e-12));
    }
  }
  cfg.seed = 2;
  CHECK(AdmissibleSampler(cfg).sample(L, 0).x != s.sample(L, 0).x);
  CHECK(s.sample(L, 0).x != s.sample(L, 1).x);

  SamplerConfig bad = cfg;
  bad.box = {{1.0, 0.0}};
  CHECK_THROWS_AS(AdmissibleSampler{bad}, std::invalid_argument);
  bad = cfg;
  bad.shells = {};
  CHECK_THROWS_AS(AdmissibleSampler{bad}, std::invalid_argument);
  bad = cfg;
  bad.fiber_samples = 0;
  CHECK_THROWS_AS(AdmissibleSampler{bad}, std::invalid_argument);
  bad = cfg;
  bad.box = {{0, 1}, {0, 1}};
  CHECK_THROWS_AS(AdmissibleSampler(bad).sample(L, 0), std::invalid_argument);
}

TEST_CASE("parallel_for visits every index once and propagates exceptions") {
  for (int jobs : {1, 3, 8}) {
    std::vector<std::atomic<int>> hits(257);
    parallel_for(hits.size(), jobs, [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) CHECK(h.load() == 1);
    CHECK_THROWS_AS(parallel_for(50, jobs, [](std::size_t i) {
                      if (i == 17) throw std::runtime_error("boom");
                    }),
                    std::runtime_error);
  }
}
