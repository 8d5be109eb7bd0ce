#include "finsler/classify.hpp"

#include <algorithm>
#include <stdexcept>

#include "finsler/parallel.hpp"

namespace finsler {

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::berwald: return "berwald";
    case Verdict::not_berwald: return "not-berwald";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

std::optional<Verdict> parse_verdict(std::string_view s) {
  if (s == "berwald") return Verdict::berwald;
  if (s == "not-berwald") return Verdict::not_berwald;
  if (s == "inconclusive") return Verdict::inconclusive;
  return std::nullopt;
}

double pairwise_spread(const std::vector<Tensor3>& xs) {
  double worst = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = i + 1; j < xs.size(); ++j) worst = std::max(worst, max_abs_diff(xs[i], xs[j]));
  return worst;
}

Tensor3 mean(const std::vector<Tensor3>& xs) {
  if (xs.empty()) throw std::invalid_argument("mean of no tensors");
  Tensor3 m(xs.front().dimension());
  for (const auto& x : xs) m += x;
  return m * (1.0 / static_cast<double>(xs.size()));
}

double BerwaldReport::identity_max() const { return std::max({max_delta_L, max_compat, max_torsion, max_spray}); }

namespace {

BasePointResult evaluate_base_point(const FinslerLagrangian& L, const AdmissibleSampler& sampler, int index) {
  const BaseSample s = sampler.sample(L, index);
  BasePointResult r;
  r.index = index;
  r.base_found = s.base_found;
  r.x = s.x;
  r.proposed = s.proposed;
  const double eps_det = sampler.config().thresholds.eps_det;

  for (const Vector& v : s.fibers) {
    const TangentPoint p{s.x, v};
    ConnectionData d;
    try {
      d = connection_data(L, p, eps_det);
    } catch (const SingularMatrixError&) {
      continue;  // l_metric passed but the solve did not; count it as rejected
    } catch (const DomainError&) {
      continue;
    }
    const auto id = identity_residuals(d, v);
    r.max_delta_L = std::max(r.max_delta_L, id.max_delta_L);
    r.max_compat = std::max(r.max_compat, id.max_compat);
    r.max_torsion = std::max(r.max_torsion, id.max_torsion);
    r.max_spray = std::max(r.max_spray, id.max_spray);
    const Matrix xv = d.Xi.contract(v);
    r.quadratic_spray = std::max(r.quadratic_spray, (xv * v - 2.0 * d.G).lpNorm<Eigen::Infinity>());
    r.xi.push_back(std::move(d.Xi));
    r.fibers.push_back(v);
  }
  r.accepted = static_cast<int>(r.xi.size());
  r.identity_max = std::max({r.max_delta_L, r.max_compat, r.max_torsion, r.max_spray});
  if (!r.xi.empty()) {
    r.spread = pairwise_spread(r.xi);
    r.xi_mean = mean(r.xi);
    r.christoffel = christoffel(L.model(), r.x, eps_det);
    r.T = r.xi_mean - r.christoffel;
  }
  return r;
}

}  // namespace

BerwaldReport classify_berwald(const FinslerLagrangian& L, const AdmissibleSampler& sampler,
                               const ClassifyOptions& options) {
  const auto& cfg = sampler.config();
  if (cfg.base_points < 8) throw std::invalid_argument("classification needs at least 8 base points");
  if (cfg.fiber_samples < 2) throw std::invalid_argument("classification needs at least 2 fiber samples per base point");

  BerwaldReport report;
  report.options = options;
  report.sampling = cfg;
  report.points.resize(cfg.base_points);
  parallel_for(static_cast<std::size_t>(cfg.base_points), options.jobs,
               [&](std::size_t i) { report.points[i] = evaluate_base_point(L, sampler, static_cast<int>(i)); });

  // Sequential reduction in base-point order.
  bool too_few = false;
  for (const auto& r : report.points) {
    report.proposed += r.proposed;
    report.accepted += r.accepted;
    if (r.accepted < 2) too_few = true;
    if (r.accepted == 0) continue;
    if (!report.witness || r.spread > report.max_spread) {
      report.max_spread = r.spread;
      report.witness = r.index;
    }
    report.max_delta_L = std::max(report.max_delta_L, r.max_delta_L);
    report.max_compat = std::max(report.max_compat, r.max_compat);
    report.max_torsion = std::max(report.max_torsion, r.max_torsion);
    report.max_spray = std::max(report.max_spray, r.max_spray);
    report.max_quadratic_spray = std::max(report.max_quadratic_spray, r.quadratic_spray);
  }

  const bool low_yield = report.proposed == 0 || 2 * report.accepted < report.proposed;
  if (low_yield) {
    report.verdict = Verdict::inconclusive;
    report.note = "more than half of the proposed fiber samples were inadmissible";
  } else if (too_few) {
    report.verdict = Verdict::inconclusive;
    report.note = "some base point has fewer than 2 admissible fiber samples";
  } else if (report.identity_max() > options.identity_tol) {
    report.verdict = Verdict::inconclusive;
    report.note = "connection identities exceed their tolerance; Ξ is not trustworthy";
  } else {
    report.verdict = report.max_spread < options.tol ? Verdict::berwald : Verdict::not_berwald;
  }
  return report;
}

}  // namespace finsler
