#pragma once

#include <memory>
#include <span>
#include <string>

#include "finsler/geometry.hpp"
#include "finsler/jet.hpp"

namespace finsler {

// Rejection thresholds standing in for the smooth conic subbundle.
struct AdmissibilityThresholds {
  double eps_A = 1e-6;
  double eps_B = 1e-6;
  double eps_det = kDefaultDetThreshold;
};

// Evaluates L(x, xdot) over doubles and jets. Implementations derive from
// LagrangianEvaluatorImpl and provide a single template `eval<T>`.
class LagrangianEvaluator {
 public:
  virtual ~LagrangianEvaluator() = default;
  virtual double evaluate(const MetricModel& m, std::span<const double> x, std::span<const double> v) const = 0;
  virtual Jet evaluate(const MetricModel& m, std::span<const Jet> x, std::span<const Jet> v) const = 0;
  // Smooth locus of the particular Lagrangian, in terms of A = g(v,v), B = β(v).
  virtual bool admissible(double A, double B, const AdmissibilityThresholds& t) const = 0;
  virtual std::string provenance() const = 0;
};

template <class Derived>
class LagrangianEvaluatorImpl : public LagrangianEvaluator {
 public:
  double evaluate(const MetricModel& m, std::span<const double> x, std::span<const double> v) const override {
    return static_cast<const Derived&>(*this).template eval<double>(m, x, v);
  }
  Jet evaluate(const MetricModel& m, std::span<const Jet> x, std::span<const Jet> v) const override {
    return static_cast<const Derived&>(*this).template eval<Jet>(m, x, v);
  }
};

// Name under which the velocity component of a coordinate is bound in free
// Lagrangian expressions.
std::string velocity_symbol(const std::string& coordinate);

class FinslerLagrangian {
 public:
  FinslerLagrangian(std::shared_ptr<const MetricModel> model, std::shared_ptr<const LagrangianEvaluator> evaluator);

  // Free L(x, xdot). The expression may use coordinates, `<coord>_dot`,
  // parameters, and the shorthands A and B (B only with a 1-form).
  static FinslerLagrangian from_expression(std::shared_ptr<const MetricModel> model, Expr lagrangian);

  const MetricModel& model() const noexcept { return *model_; }
  const std::shared_ptr<const MetricModel>& model_ptr() const noexcept { return model_; }
  std::string provenance() const { return evaluator_->provenance(); }

  double evaluate(std::span<const double> x, std::span<const double> v) const;
  Jet evaluate(std::span<const Jet> x, std::span<const Jet> v) const;
  double operator()(const TangentPoint& p) const;

  // |A| > eps_A, |B| > eps_B when a 1-form is present, the evaluator's own
  // predicate, and a finite value of L. Non-degeneracy of g^L is checked by
  // the sampler, which needs the fiber Hessian.
  bool admissible_basic(const TangentPoint& p, const AdmissibilityThresholds& t) const;

 private:
  std::shared_ptr<const MetricModel> model_;
  std::shared_ptr<const LagrangianEvaluator> evaluator_;
};

// A and B at a tangent point; B is zero without a 1-form.
struct QuadraticInvariants {
  double A = 0.0;
  double B = 0.0;
};
QuadraticInvariants invariants_at(const MetricModel& m, const TangentPoint& p);

}  // namespace finsler
