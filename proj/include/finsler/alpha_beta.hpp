#pragma once

// (α,β)-Lagrangians L = Ω(s)·A with s = B²/A, and the conditions on ∇β that
// make them Berwald.

#include <optional>
#include <string>

#include "finsler/berwald.hpp"
#include "finsler/lagrangian.hpp"

namespace finsler {

struct KropinaParams {
  double n = 2.0;
  double m = 1.0;
  double c = 1.0;
};

// Throws std::invalid_argument when c + m·s > 0 has no solution with s > 0.
void validate(const KropinaParams& p);

enum class ProfileKind { unit, randers, exponential, generalized_kropina, expression };

class OmegaProfile {
 public:
  // `omega` is an expression in s and the named parameters.
  OmegaProfile(std::string name, ProfileKind kind, Expr omega, Bindings<double> params = {});

  const std::string& name() const noexcept { return name_; }
  ProfileKind kind() const noexcept { return kind_; }
  const Expr& expression() const noexcept { return omega_; }
  const Bindings<double>& parameters() const noexcept { return params_; }
  const std::optional<KropinaParams>& kropina() const noexcept { return kropina_; }

  template <class T>
  T value(const T& s) const {
    Bindings<T> b;
    for (const auto& [k, v] : params_) b.emplace(k, T(v));
    b.insert_or_assign("s", s);
    return evaluate(omega_, b);
  }

  // Ω^(k)(s) for k <= 4.
  double derivative(int k, double s) const;
  // Ω^(k)(s(·)) propagated through the jet s.
  Jet derivative(int k, const Jet& s) const;

  // Smooth locus in terms of A = g(ẋ,ẋ) and B = β(ẋ).
  bool admissible(double A, double B, const AdmissibilityThresholds& t) const;
  // Smooth locus in terms of s alone.
  bool admissible_s(double s) const;

 private:
  friend OmegaProfile profile_generalized_kropina(KropinaParams p);

  std::string name_;
  ProfileKind kind_;
  Expr omega_;
  Bindings<double> params_;
  std::optional<KropinaParams> kropina_;
};

OmegaProfile profile_unit();
OmegaProfile profile_randers();      // (1 + √s)², i.e. L = (√A + |B|)²
OmegaProfile profile_exponential();  // e^{−s}
OmegaProfile profile_generalized_kropina(KropinaParams p);  // s^{−n}(c + m s)^{n+1}
OmegaProfile profile_expression(std::string name, Expr omega, Bindings<double> params = {});

std::string_view to_string(ProfileKind k);

// Throws ModelError when the model has no 1-form.
FinslerLagrangian build_ab_lagrangian(std::shared_ptr<const MetricModel> model, OmegaProfile profile);

// ---------------------------------------------------------------------------
// Structured T^a_bc = λ β^a β_b β_c + ρ(β_c δ^a_b + β_b δ^a_c) + σ β^a g_bc.

struct StructuredTParams {
  Expr lambda = Expr::number(0.0);
  Expr rho = Expr::number(0.0);
  Expr sigma = Expr::number(0.0);
};

// λ, ρ, σ evaluated at x with the model's coordinates and parameters.
Tensor3 structured_T_at(const StructuredTParams& params, const MetricModel& m, const Vector& x);
TensorField structured_T(StructuredTParams params, std::shared_ptr<const MetricModel> m);

// ---------------------------------------------------------------------------
// The Berwald condition on ∇β for L = Ω(B²/A)A:
//   R_a = ẋ^c ∇_aβ_c − T^b_ac ẋ^c β_b − T^b_ac ẋ^c ẋ_b F,  F = Ω/(Ω′B) − B/A.
// Throws DomainError when Ω′(s) = 0 (profile-degenerate).

Vector corollary2_residual_vector(const MetricModel& m, const OmegaProfile& profile, const Tensor3& T,
                                  const TangentPoint& p);
double corollary2_residual(const MetricModel& m, const OmegaProfile& profile, const Tensor3& T, const TangentPoint& p);
double corollary2_residual(const MetricModel& m, const OmegaProfile& profile, const TensorField& T,
                           const TangentPoint& p);

// J(a, d) = ∂̇_d R_a by propagating jets through the residual above.
Matrix corollary2_fiber_jacobian(const MetricModel& m, const OmegaProfile& profile, const Tensor3& T,
                                 const TangentPoint& p);

// The fiber-differentiated condition written out with Ω″ explicitly:
//   P_ad = ∇_aβ_d − T^b_ad β_b − (T^b_ad ẋ_b + T^b_ac ẋ^c g_db) F
//          − T^b_ac ẋ^c ẋ_b [ ẋ_d (2B/A²)(ΩΩ″/Ω′²) − β_d(−1/A + Ω/(Ω′B²) + 2ΩΩ″/(Ω′²A)) ].
Matrix corollary2_pointwise_residual(const MetricModel& m, const OmegaProfile& profile, const Tensor3& T,
                                     const TangentPoint& p);

// F = Ω/(Ω′B) − B/A at p.
double corollary2_factor(const MetricModel& m, const OmegaProfile& profile, const TangentPoint& p);

// ---------------------------------------------------------------------------
// Generalized Kropina: ∇_aβ_b = q · D_ab with
//   D_ab = [c(1−n) + m β²] β_a β_b + c n β² g_ab,  β² = g^{ab} β_a β_b.

Matrix corollary3_design(const MetricModel& m, const KropinaParams& p, const Vector& x);
Matrix corollary3_residual(const MetricModel& m, const KropinaParams& p, double q, const Vector& x);
Matrix corollary3_residual(const MetricModel& m, const KropinaParams& p, const Expr& q, const Vector& x);

struct QFit {
  double q = 0.0;
  double residual = 0.0;  // ‖∇β − q D‖_F at the optimum
  bool defined = true;    // false when D vanishes
  std::string note;
};

QFit solve_q(const MetricModel& m, const KropinaParams& p, const Vector& x);

// Residual of the profile equation for Ω(s) with constant λ_T, σ_T:
//   Ω′Ω σ + s Ω Ω″ (σ − λ s) − σ Ω′² s,
// evaluated on the generalized Kropina profile. Throws DomainError outside
// the profile's smooth locus.
double omega_ode_residual(const KropinaParams& p, double lambda_T, double sigma_T, double s);

// c₂ s^{−σ/c₁} (λ s + c₁)^{σ/c₁ + 1}.
double omega_general_solution(double lambda_T, double sigma_T, double c1, double c2, double s);

}  // namespace finsler
