#include "finsler/sampler.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "finsler/connection.hpp"

namespace finsler {

AdmissibleSampler::AdmissibleSampler(SamplerConfig config) : config_(std::move(config)) {
  if (config_.box.empty()) throw std::invalid_argument("sampler box is empty");
  for (const auto& [lo, hi] : config_.box)
    if (!(lo <= hi)) throw std::invalid_argument("sampler box has lo > hi");
  if (config_.shells.empty()) throw std::invalid_argument("sampler needs at least one shell radius");
  for (double r : config_.shells)
    if (!(r > 0.0)) throw std::invalid_argument("shell radii must be positive");
  if (config_.base_points < 1 || config_.fiber_samples < 1)
    throw std::invalid_argument("sampler needs at least one base point and one fiber sample");
  if (config_.base_attempts < 1 || config_.fiber_attempts < 1)
    throw std::invalid_argument("attempt limits must be positive");
}

std::pair<double, double> AdmissibleSampler::bounds(int coordinate) const {
  if (config_.box.size() == 1) return config_.box.front();
  if (coordinate >= static_cast<int>(config_.box.size()))
    throw std::invalid_argument("sampler box has fewer entries than coordinates");
  return config_.box[coordinate];
}

bool AdmissibleSampler::admissible(const FinslerLagrangian& L, const TangentPoint& p) const {
  if (!L.admissible_basic(p, config_.thresholds)) return false;
  try {
    const Matrix g = l_metric(L, p);
    const double det = g.determinant();
    return std::isfinite(det) && std::abs(det) > config_.thresholds.eps_det;
  } catch (const DomainError&) {
    return false;
  } catch (const EvalError&) {
    return false;
  }
}

BaseSample AdmissibleSampler::sample(const FinslerLagrangian& L, int index) const {
  const int n = L.model().dimension();
  std::seed_seq seq{static_cast<std::uint32_t>(config_.seed), static_cast<std::uint32_t>(config_.seed >> 32),
                    static_cast<std::uint32_t>(index)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  BaseSample out;
  out.index = index;
  out.x.resize(n);
  for (int attempt = 0; attempt < config_.base_attempts && !out.base_found; ++attempt) {
    for (int i = 0; i < n; ++i) {
      const auto [lo, hi] = bounds(i);
      out.x[i] = lo + (hi - lo) * unit(rng);
    }
    try {
      metric_at(L.model(), out.x, config_.thresholds.eps_det);
      out.base_found = true;
    } catch (const SingularMatrixError&) {
    } catch (const DomainError&) {
    } catch (const EvalError&) {
    }
  }
  if (!out.base_found) return out;

  const int budget = config_.fiber_samples * config_.fiber_attempts;
  while (out.accepted < config_.fiber_samples && out.proposed < budget) {
    Vector dir(n);
    double norm = 0.0;
    while (norm < 1e-8) {
      for (int i = 0; i < n; ++i) dir[i] = gauss(rng);
      norm = dir.norm();
    }
    const double radius = config_.shells[out.proposed % config_.shells.size()];
    ++out.proposed;
    TangentPoint p{out.x, dir * (radius / norm)};
    if (admissible(L, p)) {
      out.fibers.push_back(p.xdot);
      ++out.accepted;
    }
  }
  return out;
}

}  // namespace finsler
