#pragma once

// Canonical (Cartan) nonlinear connection of a Finsler Lagrangian, computed
// from exact jet derivatives:
//   g^L_ab = ½ ∂̇_a ∂̇_b L,   y_q = ẋ^m ∂_m ∂̇_q L − ∂_q L,   z = (g^L)^{-1} y,
//   G^a = ¼ z^a,   N^a_b = ¼ ∂̇_b z^a,   Ξ^a_bc = ∂̇_c N^a_b.

#include <vector>

#include "finsler/geometry.hpp"
#include "finsler/lagrangian.hpp"

namespace finsler {

struct ConnectionData {
  double L = 0.0;
  Vector dL_dx;                  // ∂_a L
  Vector dL_dv;                  // ∂̇_a L
  Matrix g_L;                    // g^L_ab
  std::vector<Matrix> dgL_dx;    // [c](a, b) = ∂_c g^L_ab
  std::vector<Matrix> dgL_dv;    // [c](a, b) = ∂̇_c g^L_ab
  Matrix N;                      // N(a, b) = N^a_b
  Vector G;                      // G^a
  Tensor3 Xi;                    // Ξ^a_bc
};

// Throws SingularMatrixError when |det g^L| <= det_threshold.
ConnectionData connection_data(const FinslerLagrangian& L, const TangentPoint& p,
                               double det_threshold = kDefaultDetThreshold);

// Fiber Hessian only; cheaper than connection_data and does not invert.
Matrix l_metric(const FinslerLagrangian& L, const TangentPoint& p);

Matrix nonlinear_connection(const FinslerLagrangian& L, const TangentPoint& p,
                            double det_threshold = kDefaultDetThreshold);
Vector geodesic_spray(const FinslerLagrangian& L, const TangentPoint& p,
                      double det_threshold = kDefaultDetThreshold);
Tensor3 affine_coefficients(const FinslerLagrangian& L, const TangentPoint& p,
                            double det_threshold = kDefaultDetThreshold);

// Residuals of the defining identities of the canonical connection:
//   δ_a L = ∂_a L − N^b_a ∂̇_b L,
//   compat_ab = ẋ^c δ_c g^L_ab − N^c_a g^L_cb − N^c_b g^L_ac,
//   torsion^a_bc = ∂̇_b N^a_c − ∂̇_c N^a_b,
//   spray^a = 2 G^a − N^a_b ẋ^b.
// Torsion and spray vanish structurally because N and Ξ come from one
// 2-homogeneous potential; they are still reported so corrupted inputs show.
//
// The max_* fields are mixed absolute/relative: each component is divided by
// max(1, Σ|terms|), the sum of magnitudes of the terms that cancel in it,
// with every entry of N replaced by ‖N‖∞ (N is only known norm-wise).
// L = Ω A ranges over many decades near the cone (Ω ~ s^{-n}, e^{-s}), and
// roundoff scales with those magnitudes, not with the residual.
struct IdentityResiduals {
  Vector delta_L;
  Matrix compat;
  Tensor3 torsion;
  Vector spray;
  double max_delta_L = 0.0;
  double max_compat = 0.0;
  double max_torsion = 0.0;
  double max_spray = 0.0;
  double max() const;
};

IdentityResiduals identity_residuals(const ConnectionData& d, const Vector& xdot);
IdentityResiduals identity_residuals(const FinslerLagrangian& L, const TangentPoint& p,
                                     double det_threshold = kDefaultDetThreshold);

}  // namespace finsler
