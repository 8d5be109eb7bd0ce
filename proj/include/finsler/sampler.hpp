#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "finsler/lagrangian.hpp"

namespace finsler {

struct SamplerConfig {
  // Per-coordinate [lo, hi]; a single entry applies to every coordinate.
  std::vector<std::pair<double, double>> box{{-1.0, 1.0}};
  std::vector<double> shells{1.0, 2.0};
  int base_points = 16;
  int fiber_samples = 8;
  std::uint64_t seed = 1;
  AdmissibilityThresholds thresholds;
  int base_attempts = 64;   // proposals for a non-degenerate base point
  int fiber_attempts = 8;   // proposals per requested fiber sample
};

struct BaseSample {
  int index = 0;
  bool base_found = false;
  Vector x;
  std::vector<Vector> fibers;
  int proposed = 0;  // fiber proposals
  int accepted = 0;
};

// Draws base points uniformly in the box and fiber vectors on Euclidean
// shells with Gaussian directions. Every base point owns an RNG stream
// derived from (seed, index), so results do not depend on scheduling.
class AdmissibleSampler {
 public:
  explicit AdmissibleSampler(SamplerConfig config);

  const SamplerConfig& config() const noexcept { return config_; }
  BaseSample sample(const FinslerLagrangian& L, int index) const;
  // admissible_basic plus |det g^L| > eps_det.
  bool admissible(const FinslerLagrangian& L, const TangentPoint& p) const;

 private:
  std::pair<double, double> bounds(int coordinate) const;
  SamplerConfig config_;
};

}  // namespace finsler
