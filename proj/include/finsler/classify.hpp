#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "finsler/connection.hpp"
#include "finsler/sampler.hpp"

namespace finsler {

enum class Verdict { berwald, not_berwald, inconclusive };

std::string_view to_string(Verdict v);
std::optional<Verdict> parse_verdict(std::string_view s);

struct ClassifyOptions {
  double tol = 1e-7;           // on the Ξ-spread
  double identity_tol = 1e-9;  // on the connection identities
  int jobs = 1;
};

struct BasePointResult {
  int index = 0;
  bool base_found = false;
  Vector x;
  int proposed = 0;
  int accepted = 0;
  std::vector<Vector> fibers;
  std::vector<Tensor3> xi;  // Ξ at each fiber sample
  double spread = 0.0;      // max pairwise ‖Ξ_i − Ξ_j‖∞
  Tensor3 xi_mean;
  Tensor3 christoffel;
  Tensor3 T;                // xi_mean − christoffel
  double identity_max = 0.0;
  double max_delta_L = 0.0;
  double max_compat = 0.0;
  double max_torsion = 0.0;
  double max_spray = 0.0;
  double quadratic_spray = 0.0;  // max_a |ẋ^b Ξ^a_bc ẋ^c − 2G^a|
};

struct BerwaldReport {
  Verdict verdict = Verdict::inconclusive;
  ClassifyOptions options;
  double max_spread = 0.0;
  std::optional<int> witness;  // base point attaining max_spread
  double max_delta_L = 0.0;
  double max_compat = 0.0;
  double max_torsion = 0.0;
  double max_spray = 0.0;
  double max_quadratic_spray = 0.0;
  int proposed = 0;
  int accepted = 0;
  SamplerConfig sampling;
  std::vector<BasePointResult> points;
  std::string note;  // reason for an inconclusive verdict
  double identity_max() const;
};

// Pre: at least 8 base points and 2 fiber samples per base point requested
// (std::invalid_argument otherwise).
BerwaldReport classify_berwald(const FinslerLagrangian& L, const AdmissibleSampler& sampler,
                               const ClassifyOptions& options = {});

// max pairwise ∞-norm distance.
double pairwise_spread(const std::vector<Tensor3>& xs);
Tensor3 mean(const std::vector<Tensor3>& xs);

}  // namespace finsler
