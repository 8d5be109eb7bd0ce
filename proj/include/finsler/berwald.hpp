#pragma once

#include <functional>
#include <vector>

#include "finsler/connection.hpp"
#include "finsler/lagrangian.hpp"

namespace finsler {

// A (1,2)-tensor field on the base: x ↦ T^a_bc(x).
using TensorField = std::function<Tensor3(const Vector& x)>;

TensorField zero_tensor_field(int n);
TensorField constant_tensor_field(Tensor3 t);

// Ω = L / A, the 0-homogeneous factor of L relative to the metric.
class OmegaField {
 public:
  explicit OmegaField(FinslerLagrangian L, double eps_A = 1e-6);

  struct Derivatives {
    double value = 0.0;
    double A = 0.0;
    Vector d_dx;  // ∂_a Ω
    Vector d_dv;  // ∂̇_a Ω
  };

  // Throws InadmissiblePointError when |A| < eps_A.
  double operator()(const TangentPoint& p) const;
  Derivatives derivatives(const TangentPoint& p) const;

  const FinslerLagrangian& lagrangian() const noexcept { return L_; }
  const MetricModel& model() const noexcept { return L_.model(); }

 private:
  FinslerLagrangian L_;
  double eps_A_;
};

OmegaField omega_from_lagrangian(const FinslerLagrangian& L, double eps_A = 1e-6);

// R_a = ∂_aΩ − Γ^b_ac ẋ^c ∂̇_bΩ − T^b_ac ẋ^c (∂̇_bΩ + 2 ẋ_b Ω / A), ẋ_b = g_bc ẋ^c.
Vector theorem1_residual(const OmegaField& omega, const TensorField& T, const TangentPoint& p);
Vector theorem1_residual(const OmegaField& omega, const Tensor3& T, const TangentPoint& p);

// ‖R‖∞ / max(1, |Ω|, ‖∂Ω‖∞, ‖∂̇Ω‖∞). R is linear in Ω, and for singular
// profiles Ω and its derivatives span many decades; noise in an extracted T
// is amplified by ∂̇Ω, so the absolute residual is not comparable across
// samples.
double theorem1_relative(const OmegaField& omega, const TensorField& T, const TangentPoint& p);
double theorem1_relative(const OmegaField& omega, const Tensor3& T, const TangentPoint& p);

// Conformal factor σ(x) of L = e^{2σ} A.
struct ConformalFactor {
  Expr sigma;
};

// R_a = ∂_a σ − Γ^b_ac ẋ^c ∂̇_b σ. The second term vanishes for a base
// function, so R is the gradient of σ.
Vector tavakol_residual(const ConformalFactor& f, const MetricModel& m, const TangentPoint& p);

struct ExtractedT {
  Tensor3 T;             // mean Ξ − Γ
  Tensor3 xi_mean;
  Tensor3 christoffel;
  double score = 0.0;    // max_i ‖Ξ_i − mean‖∞
};

ExtractedT extract_T(const FinslerLagrangian& L, const Vector& x, const std::vector<Vector>& fiber_samples,
                     double det_threshold = kDefaultDetThreshold);
// Same, from Ξ values already computed at x.
ExtractedT extract_T(const MetricModel& m, const Vector& x, const std::vector<Tensor3>& xi,
                     double det_threshold = kDefaultDetThreshold);

}  // namespace finsler
