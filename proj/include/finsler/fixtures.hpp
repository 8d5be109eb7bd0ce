#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "finsler/model_file.hpp"

namespace finsler {

// g = 2 du dv + 2H du² + 2 W_a du dx^a + h_ab dx^a dx^b in coordinates
// (u, v, x1, ..., x{N-2}), with β = du. Throws ModelError if H, W or h
// reference v.
MetricModel ccnv_metric(const Expr& H, const std::vector<Expr>& W, const std::vector<std::vector<Expr>>& h, int N,
                        std::string name = "ccnv");

// 4D Kundt form g = 2du(dv + H du + W1 dx1 + W2 dx2) + h_ab dx^a dx^b with
// β = du. H may depend on v; W1, W2 and h may not.
MetricModel kundt_metric(const Expr& H, const Expr& W1, const Expr& W2, const std::array<std::array<Expr, 2>, 2>& h,
                         std::string name = "kundt");

// H = Φ + v Φ̃ + v² σ₀; the vanishing-invariant subfamily is σ₀ = 0.
struct CsiProfile {
  Expr H;
  bool vanishing_invariants = false;
};
CsiProfile kundt_csi_profile(const Expr& Phi, const Expr& PhiTilde, double sigma0);

struct FixtureSpec {
  std::string name;
  std::string family;
  std::string citation;  // which example family of the theory it realizes
  ModelDefinition definition;
  bool expect_zero_T = false;
  std::optional<StructuredTParams> expected_T;
  std::optional<Expr> dH_dv;  // hand-derived ∂H/∂v for Kundt fixtures
  bool vanishing_invariants = false;
  bool exploratory = false;  // no expected verdict

  std::optional<Verdict> expected() const { return definition.expected; }
};

std::vector<FixtureSpec> canned_fixtures();
const FixtureSpec& find_fixture(std::string_view name);

}  // namespace finsler
