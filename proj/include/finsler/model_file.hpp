#pragma once

// Sectioned plain-text model files:
//
//   [model]       name, coordinates, dimension (optional), expect, description
//   [parameters]  <name> = <number>
//   [metric]      g_<a><b> = <expr>, coordinate names concatenated
//   [oneform]     beta_<a> = <expr>
//   [lagrangian]  type = riemannian | randers | exponential | kropina | omega | free
//                 n, m, c (kropina), omega (omega, in s), L (free)
//   [sampling]    box, box_<coord>, shells, base_points, fiber_samples, seed, eps_A, eps_B, eps_det
//   [checks]      identities, theorem1, corollary2, corollary3 (true/false); T_lambda, T_rho, T_sigma
//   [tolerances]  spread, identity, theorem1, corollary2, corollary3
//
// '#' and ';' start comments, also after a value. Unknown sections and keys
// are rejected.

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "finsler/alpha_beta.hpp"
#include "finsler/classify.hpp"

namespace finsler {

struct LagrangianSpec {
  enum class Kind { riemannian, profile, free };
  Kind kind = Kind::riemannian;
  std::optional<OmegaProfile> profile;
  std::optional<Expr> expression;  // free L

  FinslerLagrangian build(std::shared_ptr<const MetricModel> model) const;
  std::string type_name() const;  // the [lagrangian] type key
};

struct CheckSelection {
  bool identities = true;
  bool theorem1 = true;
  bool corollary2 = false;
  bool corollary3 = false;
  std::optional<StructuredTParams> structured_T;
};

struct Tolerances {
  double spread = 1e-7;
  double identity = 1e-9;
  double theorem1 = 1e-7;
  double corollary2 = 1e-7;
  double corollary3 = 1e-8;
};

struct ModelDefinition {
  std::shared_ptr<MetricModel> model;
  std::string description;
  LagrangianSpec lagrangian;
  SamplerConfig sampling;
  CheckSelection checks;
  Tolerances tolerances;
  std::optional<Verdict> expected;
};

// Errors carry the line number. Throws ModelError.
ModelDefinition parse_model_file(std::string_view text, const std::string& origin = "<input>");
ModelDefinition load_model_file(const std::filesystem::path& path);
std::string write_model_file(const ModelDefinition& def);

}  // namespace finsler
