#pragma once

// Truncated multivariate Taylor arithmetic ("jets").
//
// A JetSpace fixes the seeded variables and the truncation: variables are
// split into a fiber group (velocity directions) and a base group (position
// directions), and each group's total degree is capped separately. A Jet
// stores the Taylor coefficients f_α = ∂^α f / α! for every monomial α of its
// space, so derivatives are exact up to the caps.
//
// A Jet without a space is a constant; it combines with any spaced jet.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "finsler/error.hpp"
#include "finsler/expr.hpp"

namespace finsler {

class JetSpace {
 public:
  struct Product {
    std::uint32_t lhs;
    std::uint32_t rhs;
    std::uint32_t out;
  };

  // Spaces are interned: equal parameters give the same pointer.
  static std::shared_ptr<const JetSpace> make(int fiber_vars, int base_vars, int fiber_order,
                                              int base_order);

  int fiber_vars() const noexcept { return fiber_vars_; }
  int base_vars() const noexcept { return base_vars_; }
  int fiber_order() const noexcept { return fiber_order_; }
  int base_order() const noexcept { return base_order_; }
  int variables() const noexcept { return fiber_vars_ + base_vars_; }
  int max_degree() const noexcept;
  std::size_t size() const noexcept { return degrees_.size(); }

  // Exponent vector of monomial k; fiber variables first, then base variables.
  std::span<const std::uint8_t> exponents(std::size_t k) const;
  int degree(std::size_t k) const { return degrees_[k]; }
  std::optional<std::size_t> index_of(std::span<const std::uint8_t> exponents) const;
  // Index of the first-order monomial of variable `var`, if the caps allow it.
  std::optional<std::size_t> unit(int var) const;
  std::span<const Product> products() const { return products_; }

  static constexpr int kMaxVariables = 16;

 private:
  JetSpace(int fiber_vars, int base_vars, int fiber_order, int base_order);
  std::uint64_t key(std::span<const std::uint8_t> e) const;

  int fiber_vars_;
  int base_vars_;
  int fiber_order_;
  int base_order_;
  std::vector<std::uint8_t> exponents_;  // size() * variables()
  std::vector<int> degrees_;
  std::vector<std::pair<std::uint64_t, std::uint32_t>> lookup_;  // sorted by key
  std::vector<Product> products_;
};

using JetSpacePtr = std::shared_ptr<const JetSpace>;

class Jet {
 public:
  Jet() : coeffs_{0.0} {}
  Jet(double value) : coeffs_{value} {}  // NOLINT: constants convert implicitly
  Jet(JetSpacePtr space, double value);

  // value + unit seed in variable `var`.
  static Jet variable(JetSpacePtr space, int var, double value);

  const JetSpacePtr& space() const noexcept { return space_; }
  double value() const noexcept { return coeffs_[0]; }
  bool is_constant() const noexcept;
  std::span<const double> coefficients() const noexcept { return coeffs_; }
  std::span<double> coefficients() noexcept { return coeffs_; }

  // Taylor coefficient and the corresponding partial derivative; zero for
  // monomials outside the space.
  double coefficient(std::span<const std::uint8_t> exponents) const;
  double derivative(std::span<const std::uint8_t> exponents) const;

  // Exact derivative with respect to one seeded variable; the result lives in
  // the space whose cap for that variable's group is one lower.
  Jet differentiate(int var) const;
  // Drops monomials that the target space does not contain. The target shares
  // the fiber variables and may drop trailing base variables.
  Jet restrict_to(const JetSpacePtr& target) const;

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(const Jet& o);
  Jet& operator*=(double s);

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator/(const Jet& a, const Jet& b);
  friend Jet operator-(Jet a);

 private:
  void adopt_space(const Jet& o);

  JetSpacePtr space_;
  std::vector<double> coeffs_;
};

// f(a) for a univariate f given its Taylor coefficients f^(k)(a0)/k! at
// a0 = a.value(), k = 0..; coefficients beyond the space's degree are ignored.
Jet compose(const Jet& a, std::span<const double> taylor);

Jet reciprocal(const Jet& a);
Jet sqrt(const Jet& a);
Jet exp(const Jet& a);
Jet log(const Jet& a);
Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet abs(const Jet& a);

template <>
struct ScalarOps<Jet> {
  static bool is_constant(const Jet& x) { return x.is_constant(); }
  static double value(const Jet& x) { return x.value(); }
  static Jet divide(const Jet& a, const Jet& b) { return a / b; }
  static Jet sqrt(const Jet& x) { return finsler::sqrt(x); }
  static Jet exp(const Jet& x) { return finsler::exp(x); }
  static Jet log(const Jet& x) { return finsler::log(x); }
  static Jet sin(const Jet& x) { return finsler::sin(x); }
  static Jet cos(const Jet& x) { return finsler::cos(x); }
  static Jet abs(const Jet& x) { return finsler::abs(x); }
};

// ---------------------------------------------------------------------------
// Seeding tangent-bundle points

struct TangentPoint {
  Eigen::VectorXd x;
  Eigen::VectorXd xdot;
};

struct JetOrders {
  int base = 0;
  int fiber = 0;
};

inline constexpr int kMaxBaseOrder = 1;
inline constexpr int kMaxFiberOrder = 4;

struct SeededPoint {
  std::vector<Jet> x;
  std::vector<Jet> xdot;
  JetSpacePtr space;
};

// Fiber direction fiber_dirs[k] becomes fiber variable k, base direction
// base_dirs[k] becomes base variable k. Unseeded coordinates are constants.
SeededPoint seed(const TangentPoint& p, std::span<const int> base_dirs, std::span<const int> fiber_dirs,
                 JetOrders orders);

// Solves M z = rhs where M and rhs are jets over a common space. The value part
// of M is factorized once; higher Taylor blocks are obtained by substitution.
// Throws SingularMatrixError when |det M(value)| <= det_threshold.
std::vector<Jet> jet_linear_solve(std::span<const Jet> matrix, std::span<const Jet> rhs, double det_threshold = 1e-10);

}  // namespace finsler
