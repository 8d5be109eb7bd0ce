#pragma once

// Pseudo-Riemannian backbone: metric model, inverse, Christoffel symbols and
// the Levi-Civita derivative of the 1-form.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "finsler/expr.hpp"
#include "finsler/jet.hpp"

namespace finsler {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Rank-3 array with one upper and two lower indices: t(a, b, c) = t^a_bc.
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(int n) : n_(n), data_(static_cast<std::size_t>(n) * n * n, 0.0) {}

  int dimension() const noexcept { return n_; }
  double& operator()(int a, int b, int c) { return data_[(static_cast<std::size_t>(a) * n_ + b) * n_ + c]; }
  double operator()(int a, int b, int c) const { return data_[(static_cast<std::size_t>(a) * n_ + b) * n_ + c]; }
  std::span<const double> data() const noexcept { return data_; }

  double norm_inf() const;
  Tensor3& operator+=(const Tensor3& o);
  Tensor3& operator-=(const Tensor3& o);
  Tensor3& operator*=(double s);
  friend Tensor3 operator+(Tensor3 a, const Tensor3& b) { return a += b; }
  friend Tensor3 operator-(Tensor3 a, const Tensor3& b) { return a -= b; }
  friend Tensor3 operator*(Tensor3 a, double s) { return a *= s; }

  // Contracts the last lower index with v: (t v)^a_b = t^a_bc v^c.
  Matrix contract(const Vector& v) const;

 private:
  int n_ = 0;
  std::vector<double> data_;
};

// max |a - b| over all components.
double max_abs_diff(const Tensor3& a, const Tensor3& b);

class MetricModel {
 public:
  MetricModel(std::string name, std::vector<std::string> coordinates);

  const std::string& name() const noexcept { return name_; }
  int dimension() const noexcept { return static_cast<int>(coordinates_.size()); }
  const std::vector<std::string>& coordinates() const noexcept { return coordinates_; }
  int coordinate_index(std::string_view name) const;  // -1 when absent

  // Sets g_ab and g_ba together; unset components are zero.
  void set_metric(int a, int b, Expr e);
  const Expr& metric(int a, int b) const { return metric_[static_cast<std::size_t>(a) * dimension() + b]; }

  void set_oneform(std::vector<Expr> beta);
  bool has_oneform() const noexcept { return oneform_.has_value(); }
  const std::vector<Expr>& oneform() const;

  void set_parameter(const std::string& name, double value);
  const Bindings<double>& parameters() const noexcept { return parameters_; }

  // Coordinates plus named parameters, ready for expression evaluation.
  template <class T>
  Bindings<T> bindings(std::span<const T> x) const {
    Bindings<T> b;
    for (const auto& [k, v] : parameters_) b.emplace(k, T(v));
    for (int i = 0; i < dimension(); ++i) b.insert_or_assign(coordinates_[i], x[i]);
    return b;
  }

  template <class T>
  std::vector<T> metric_components(const Bindings<T>& b) const {
    const int n = dimension();
    std::vector<T> g(static_cast<std::size_t>(n) * n);
    for (int a = 0; a < n; ++a) {
      for (int c = a; c < n; ++c) {
        g[a * n + c] = evaluate(metric(a, c), b);
        g[c * n + a] = g[a * n + c];
      }
    }
    return g;
  }

  template <class T>
  std::vector<T> oneform_components(const Bindings<T>& b) const {
    std::vector<T> beta;
    for (const auto& e : oneform()) beta.push_back(evaluate(e, b));
    return beta;
  }

 private:
  std::string name_;
  std::vector<std::string> coordinates_;
  std::vector<Expr> metric_;
  std::optional<std::vector<Expr>> oneform_;
  Bindings<double> parameters_;
};

// A = g_ab v^a v^b.
template <class T>
T quadratic_form(std::span<const T> g, std::span<const T> v) {
  const std::size_t n = v.size();
  T a(0.0);
  for (std::size_t i = 0; i < n; ++i) {
    T row = g[i * n + i] * v[i];
    for (std::size_t j = i + 1; j < n; ++j) row += 2.0 * g[i * n + j] * v[j];
    a += row * v[i];
  }
  return a;
}

// B = beta_a v^a.
template <class T>
T contract(std::span<const T> beta, std::span<const T> v) {
  T b(0.0);
  for (std::size_t i = 0; i < v.size(); ++i) b += beta[i] * v[i];
  return b;
}

struct MetricValue {
  Matrix g;
  Matrix inverse;
};

inline constexpr double kDefaultDetThreshold = 1e-10;

MetricValue metric_at(const MetricModel& m, const Vector& x, double det_threshold = kDefaultDetThreshold);

// Metric and its first partials: dg[c](a, b) = ∂_c g_ab.
struct MetricJet {
  Matrix g;
  Matrix inverse;
  std::vector<Matrix> dg;
};
MetricJet metric_jet(const MetricModel& m, const Vector& x, double det_threshold = kDefaultDetThreshold);

// Γ^b_ac, stored as t(b, a, c).
Tensor3 christoffel(const MetricModel& m, const Vector& x, double det_threshold = kDefaultDetThreshold);

// nabla(a, b) = ∇_a β_b = ∂_a β_b − Γ^c_ab β_c. Throws ModelError without a 1-form.
Matrix nabla_beta(const MetricModel& m, const Vector& x, double det_threshold = kDefaultDetThreshold);

// max_abc |∇_a g_bc| computed from the jet-evaluated metric derivatives.
double metric_compatibility_residual(const MetricModel& m, const Vector& x);

// Values of the 1-form at x.
Vector oneform_at(const MetricModel& m, const Vector& x);

}  // namespace finsler
