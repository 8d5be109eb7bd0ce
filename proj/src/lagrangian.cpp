#include "finsler/lagrangian.hpp"

#include <cmath>
#include <set>
#include <vector>

namespace finsler {

namespace {

class ExpressionLagrangian : public LagrangianEvaluatorImpl<ExpressionLagrangian> {
 public:
  explicit ExpressionLagrangian(Expr e) : expr_(std::move(e)) {}

  template <class T>
  T eval(const MetricModel& m, std::span<const T> x, std::span<const T> v) const {
    auto b = m.bindings<T>(x);
    const auto g = m.metric_components(b);
    T A = quadratic_form<T>(g, v);
    if (m.has_oneform()) {
      const auto beta = m.oneform_components(b);
      b.insert_or_assign("B", contract<T>(beta, v));
    }
    b.insert_or_assign("A", std::move(A));
    for (int i = 0; i < m.dimension(); ++i) b.insert_or_assign(velocity_symbol(m.coordinates()[i]), v[i]);
    return finsler::evaluate(expr_, b);
  }

  bool admissible(double, double, const AdmissibilityThresholds&) const override { return true; }
  std::string provenance() const override { return "expression: L = " + expr_.to_string(); }

 private:
  Expr expr_;
};

}  // namespace

std::string velocity_symbol(const std::string& coordinate) { return coordinate + "_dot"; }

FinslerLagrangian::FinslerLagrangian(std::shared_ptr<const MetricModel> model,
                                     std::shared_ptr<const LagrangianEvaluator> evaluator)
    : model_(std::move(model)), evaluator_(std::move(evaluator)) {
  if (!model_ || !evaluator_) throw std::invalid_argument("FinslerLagrangian needs a model and an evaluator");
}

FinslerLagrangian FinslerLagrangian::from_expression(std::shared_ptr<const MetricModel> model, Expr lagrangian) {
  std::set<std::string> known{"A"};
  if (model->has_oneform()) known.insert("B");
  for (const auto& c : model->coordinates()) {
    known.insert(c);
    known.insert(velocity_symbol(c));
  }
  for (const auto& [p, _] : model->parameters()) known.insert(p);
  for (const auto& s : lagrangian.symbols())
    if (!known.count(s)) throw ModelError("Lagrangian expression uses unknown symbol '" + s + "'");
  return FinslerLagrangian(std::move(model), std::make_shared<ExpressionLagrangian>(std::move(lagrangian)));
}

double FinslerLagrangian::evaluate(std::span<const double> x, std::span<const double> v) const {
  return evaluator_->evaluate(*model_, x, v);
}

Jet FinslerLagrangian::evaluate(std::span<const Jet> x, std::span<const Jet> v) const {
  return evaluator_->evaluate(*model_, x, v);
}

double FinslerLagrangian::operator()(const TangentPoint& p) const {
  return evaluate(std::span<const double>(p.x.data(), p.x.size()),
                  std::span<const double>(p.xdot.data(), p.xdot.size()));
}

QuadraticInvariants invariants_at(const MetricModel& m, const TangentPoint& p) {
  const int n = m.dimension();
  std::vector<double> x(p.x.data(), p.x.data() + n);
  std::vector<double> v(p.xdot.data(), p.xdot.data() + n);
  auto b = m.bindings<double>(x);
  QuadraticInvariants out;
  out.A = quadratic_form<double>(m.metric_components(b), v);
  if (m.has_oneform()) out.B = contract<double>(m.oneform_components(b), v);
  return out;
}

bool FinslerLagrangian::admissible_basic(const TangentPoint& p, const AdmissibilityThresholds& t) const {
  try {
    const auto inv = invariants_at(*model_, p);
    if (!(std::abs(inv.A) > t.eps_A)) return false;
    if (model_->has_oneform() && !(std::abs(inv.B) > t.eps_B)) return false;
    if (!evaluator_->admissible(inv.A, inv.B, t)) return false;
    return std::isfinite((*this)(p));
  } catch (const DomainError&) {
    return false;
  } catch (const EvalError&) {
    return false;
  }
}

}  // namespace finsler
