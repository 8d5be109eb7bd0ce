#include "finsler/fixtures.hpp"

#include <stdexcept>

namespace finsler {

namespace {

void reject_v(const Expr& e, const std::string& what) {
  if (e.references("v")) throw ModelError(what + " must not depend on v: " + e.to_string());
}

std::vector<std::string> lightcone_coordinates(int N) {
  std::vector<std::string> c{"u", "v"};
  for (int i = 1; i <= N - 2; ++i) c.push_back("x" + std::to_string(i));
  return c;
}

Expr two_times(const Expr& e) { return Expr::number(2.0) * e; }

}  // namespace

MetricModel ccnv_metric(const Expr& H, const std::vector<Expr>& W, const std::vector<std::vector<Expr>>& h, int N,
                        std::string name) {
  if (N < 3) throw std::invalid_argument("CCNV metric needs N >= 3");
  const std::size_t t = static_cast<std::size_t>(N - 2);
  if (W.size() != t || h.size() != t) throw std::invalid_argument("CCNV metric: W and h must have N-2 entries");
  reject_v(H, "H");
  for (const auto& w : W) reject_v(w, "W");
  for (const auto& row : h) {
    if (row.size() != t) throw std::invalid_argument("CCNV metric: h must be square");
    for (const auto& e : row) reject_v(e, "h");
  }
  MetricModel m(std::move(name), lightcone_coordinates(N));
  m.set_metric(0, 1, Expr::number(1.0));
  m.set_metric(0, 0, two_times(H));
  for (std::size_t a = 0; a < t; ++a) {
    m.set_metric(0, static_cast<int>(a + 2), W[a]);
    for (std::size_t b = a; b < t; ++b) m.set_metric(static_cast<int>(a + 2), static_cast<int>(b + 2), h[a][b]);
  }
  std::vector<Expr> beta(N, Expr::number(0.0));
  beta[0] = Expr::number(1.0);
  m.set_oneform(std::move(beta));
  return m;
}

MetricModel kundt_metric(const Expr& H, const Expr& W1, const Expr& W2, const std::array<std::array<Expr, 2>, 2>& h,
                         std::string name) {
  reject_v(W1, "W1");
  reject_v(W2, "W2");
  for (const auto& row : h)
    for (const auto& e : row) reject_v(e, "h");
  MetricModel m(std::move(name), lightcone_coordinates(4));
  m.set_metric(0, 1, Expr::number(1.0));
  m.set_metric(0, 0, two_times(H));
  m.set_metric(0, 2, W1);
  m.set_metric(0, 3, W2);
  m.set_metric(2, 2, h[0][0]);
  m.set_metric(2, 3, h[0][1]);
  m.set_metric(3, 3, h[1][1]);
  m.set_oneform({Expr::number(1.0), Expr::number(0.0), Expr::number(0.0), Expr::number(0.0)});
  return m;
}

CsiProfile kundt_csi_profile(const Expr& Phi, const Expr& PhiTilde, double sigma0) {
  const Expr v = Expr::symbol("v");
  CsiProfile out;
  out.H = Phi + v * PhiTilde + Expr::binary(Expr::Kind::power, v, Expr::number(2.0)) * Expr::number(sigma0);
  out.vanishing_invariants = sigma0 == 0.0;
  return out;
}

// ---------------------------------------------------------------------------

namespace {

ModelDefinition definition(MetricModel m, LagrangianSpec lag, std::optional<Verdict> expected) {
  ModelDefinition d;
  d.model = std::make_shared<MetricModel>(std::move(m));
  d.lagrangian = std::move(lag);
  d.expected = expected;
  return d;
}

LagrangianSpec profile_spec(OmegaProfile p) {
  LagrangianSpec s;
  s.kind = LagrangianSpec::Kind::profile;
  s.profile = std::move(p);
  return s;
}

const KropinaParams kKropina{2.0, 1.0, 1.0};
// g^L degenerates where c + m s -> 0; fibers there wreck the Ξ spread.
constexpr double kKropinaDet = 1e-6;

// Structured T realizing the Kundt Berwald connection for the generalized
// Kropina profile: σ = n/(1−n) ∂_vH, ρ = −σ, λ = (m/(nc)) σ.
StructuredTParams kundt_T(const KropinaParams& p, const Expr& dH_dv) {
  const Expr sigma = Expr::number(p.n / (1.0 - p.n)) * dH_dv;
  return StructuredTParams{Expr::number(p.m / (p.n * p.c)) * sigma, -sigma, sigma};
}

FixtureSpec ccnv_fixture(const std::string& name, OmegaProfile profile) {
  const std::vector<Expr> W{parse("0.3*u*x2"), parse("0.2*x1")};
  const std::vector<std::vector<Expr>> h{{Expr::number(1.0), Expr::number(0.0)},
                                         {Expr::number(0.0), Expr::number(1.0)}};
  FixtureSpec f;
  f.name = name;
  f.family = "ccnv";
  f.citation = "CCNV spacetimes: du is a covariantly constant null 1-form, so any (alpha,beta) Lagrangian is Berwald";
  f.definition = definition(ccnv_metric(parse("x1^2 - x2^2 + u*x1"), W, h, 4, name), profile_spec(std::move(profile)),
                            Verdict::berwald);
  f.definition.description = "CCNV pp-wave type metric with beta = du";
  f.definition.sampling.box = {{-0.5, 0.5}};
  // Lorentzian A changes sign; near the null cone s = B²/A blows up and the
  // profile derivatives lose all precision.
  f.definition.sampling.thresholds.eps_A = 0.25;
  f.definition.checks.corollary2 = true;
  f.definition.checks.structured_T = StructuredTParams{};
  f.expect_zero_T = true;
  return f;
}

FixtureSpec kundt_fixture(const std::string& name, double sigma0, bool sphere) {
  const Expr dH_dv = sphere ? parse("u + x2") : parse("u + x2 + 2*sigma0*v");
  const auto csi = kundt_csi_profile(parse("x1^2"), parse("u + x2"), sigma0);
  std::array<std::array<Expr, 2>, 2> h{{{Expr::number(1.0), Expr::number(0.0)},
                                        {Expr::number(0.0), Expr::number(1.0)}}};
  if (sphere) h[1][1] = parse("sin(x1)^2");
  // Keep σ₀ symbolic in the file so the hand-derived ∂H/∂v can reference it.
  const Expr H = sphere ? parse("x1^2 + v*(u + x2)") : parse("x1^2 + v*(u + x2) + v^2*sigma0");
  MetricModel m = kundt_metric(H, parse("0.2*u*x2"), parse("0.1*x1"), h, name);
  if (!sphere) m.set_parameter("sigma0", sigma0);

  FixtureSpec f;
  f.name = name;
  f.family = sphere ? "kundt-sphere" : "kundt-csi";
  f.citation = sphere ? "Kundt metric with spherical transverse space, exploratory"
                      : "Kundt CSI spacetime with generalized Kropina Lagrangian; beta = du is not parallel";
  f.definition = definition(std::move(m), profile_spec(profile_generalized_kropina(kKropina)),
                            sphere ? std::nullopt : std::optional<Verdict>(Verdict::berwald));
  f.definition.description = sphere ? "Kundt form with h = diag(1, sin(x1)^2)" : "Kundt CSI form with beta = du";
  f.definition.sampling.box = {{-0.5, 0.5}, {-0.5, 0.5}, {-0.5, 0.5}, {-0.5, 0.5}};
  if (sphere) f.definition.sampling.box[2] = {0.6, 1.4};
  f.definition.sampling.thresholds.eps_A = 0.25;
  f.definition.sampling.thresholds.eps_B = 0.05;
  f.definition.sampling.thresholds.eps_det = kKropinaDet;
  f.definition.checks.corollary2 = true;
  f.definition.checks.corollary3 = true;
  f.definition.checks.structured_T = kundt_T(kKropina, dH_dv);
  f.expected_T = kundt_T(kKropina, dH_dv);
  f.dH_dv = dH_dv;
  f.vanishing_invariants = !sphere && csi.vanishing_invariants;
  f.exploratory = sphere;
  return f;
}

FixtureSpec flat_nonparallel(const std::string& name, OmegaProfile profile) {
  MetricModel m(name, {"x1", "x2", "x3"});
  for (int a = 0; a < 3; ++a) m.set_metric(a, a, Expr::number(1.0));
  m.set_oneform({Expr::number(0.0), parse("x1"), Expr::number(0.0)});
  FixtureSpec f;
  f.name = name;
  f.family = "flat-nonparallel";
  f.citation = "Euclidean metric with beta = x1 dx2, which is not parallel; Berwald would require nabla beta = 0";
  f.definition = definition(std::move(m), profile_spec(std::move(profile)), Verdict::not_berwald);
  f.definition.description = "flat metric, beta = x1 dx2";
  // Stay away from x1 = 0, where β vanishes and most fibers are rejected.
  f.definition.sampling.box = {{0.5, 1.5}, {-0.5, 0.5}, {-0.5, 0.5}};
  f.definition.sampling.thresholds.eps_B = 0.05;
  f.definition.checks.corollary2 = true;
  f.definition.checks.structured_T = StructuredTParams{};
  return f;
}

MetricModel curved_metric(const std::string& name) {
  MetricModel m(name, {"x1", "x2", "x3"});
  m.set_metric(0, 0, Expr::number(1.0));
  m.set_metric(0, 1, parse("0.2*x3"));
  m.set_metric(1, 1, parse("1 + x1^2"));
  m.set_metric(2, 2, parse("exp(x2)"));
  return m;
}

}  // namespace

std::vector<FixtureSpec> canned_fixtures() {
  std::vector<FixtureSpec> out;
  out.push_back(ccnv_fixture("ccnv_randers", profile_randers()));
  out.push_back(ccnv_fixture("ccnv_exponential", profile_exponential()));
  out.push_back(ccnv_fixture("ccnv_kropina", profile_generalized_kropina(kKropina)));
  out.back().definition.sampling.thresholds.eps_B = 0.05;
  out.back().definition.sampling.thresholds.eps_det = kKropinaDet;
  out.push_back(kundt_fixture("kundt_kropina", 0.3, false));
  out.push_back(kundt_fixture("kundt_vsi_kropina", 0.0, false));
  out.push_back(flat_nonparallel("flat_randers_nonparallel", profile_randers()));
  out.push_back(flat_nonparallel("flat_exponential_nonparallel", profile_exponential()));

  {
    FixtureSpec f;
    f.name = "curved_riemannian";
    f.family = "riemannian";
    f.citation = "L = A on a curved metric: the spray is the Levi-Civita spray";
    f.definition = definition(curved_metric(f.name), LagrangianSpec{}, Verdict::berwald);
    f.definition.description = "non-flat Riemannian metric, L = A";
    f.definition.sampling.box = {{-0.5, 0.5}};
    f.expect_zero_T = true;
    out.push_back(std::move(f));
  }
  {
    // e^{2x1} A is a Riemannian metric conformal to g; its connection is
    // affine but differs from that of g, so T is nonzero.
    FixtureSpec f;
    f.name = "conformal_riemannian";
    f.family = "conformal";
    f.citation = "L = exp(2 sigma) A with non-constant sigma: Berwald with T != 0";
    LagrangianSpec lag;
    lag.kind = LagrangianSpec::Kind::free;
    lag.expression = parse("exp(2*x1)*A");
    f.definition = definition(curved_metric(f.name), std::move(lag), Verdict::berwald);
    f.definition.description = "conformally rescaled Riemannian metric as a free Lagrangian";
    f.definition.sampling.box = {{-0.5, 0.5}};
    out.push_back(std::move(f));
  }
  out.push_back(kundt_fixture("kundt_sphere_kropina", 0.0, true));
  return out;
}

const FixtureSpec& find_fixture(std::string_view name) {
  static const std::vector<FixtureSpec> all = canned_fixtures();
  for (const auto& f : all)
    if (f.name == name) return f;
  throw std::out_of_range("no fixture named '" + std::string(name) + "'");
}

}  // namespace finsler
