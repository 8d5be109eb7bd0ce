#include "finsler/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace finsler {

double Tensor3::norm_inf() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

Tensor3& Tensor3::operator+=(const Tensor3& o) {
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

Tensor3& Tensor3::operator-=(const Tensor3& o) {
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

Tensor3& Tensor3::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix Tensor3::contract(const Vector& v) const {
  Matrix out = Matrix::Zero(n_, n_);
  for (int a = 0; a < n_; ++a)
    for (int b = 0; b < n_; ++b)
      for (int c = 0; c < n_; ++c) out(a, b) += (*this)(a, b, c) * v[c];
  return out;
}

double max_abs_diff(const Tensor3& a, const Tensor3& b) {
  double m = 0.0;
  auto x = a.data();
  auto y = b.data();
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
  return m;
}

// ---------------------------------------------------------------------------

MetricModel::MetricModel(std::string name, std::vector<std::string> coordinates)
    : name_(std::move(name)), coordinates_(std::move(coordinates)) {
  if (coordinates_.empty()) throw ModelError("metric model needs at least one coordinate");
  for (std::size_t i = 0; i < coordinates_.size(); ++i)
    for (std::size_t j = i + 1; j < coordinates_.size(); ++j)
      if (coordinates_[i] == coordinates_[j]) throw ModelError("duplicate coordinate '" + coordinates_[i] + "'");
  metric_.assign(coordinates_.size() * coordinates_.size(), Expr::number(0.0));
}

int MetricModel::coordinate_index(std::string_view name) const {
  for (int i = 0; i < dimension(); ++i)
    if (coordinates_[i] == name) return i;
  return -1;
}

void MetricModel::set_metric(int a, int b, Expr e) {
  const int n = dimension();
  if (a < 0 || b < 0 || a >= n || b >= n) throw ModelError("metric index out of range");
  metric_[static_cast<std::size_t>(a) * n + b] = e;
  metric_[static_cast<std::size_t>(b) * n + a] = std::move(e);
}

void MetricModel::set_oneform(std::vector<Expr> beta) {
  if (static_cast<int>(beta.size()) != dimension()) throw ModelError("1-form has wrong number of components");
  oneform_ = std::move(beta);
}

const std::vector<Expr>& MetricModel::oneform() const {
  if (!oneform_) throw ModelError("model '" + name_ + "' has no 1-form");
  return *oneform_;
}

void MetricModel::set_parameter(const std::string& name, double value) {
  if (coordinate_index(name) >= 0) throw ModelError("parameter '" + name + "' shadows a coordinate");
  parameters_.insert_or_assign(name, value);
}

// ---------------------------------------------------------------------------

namespace {

void check_point(const MetricModel& m, const Vector& x) {
  if (x.size() != m.dimension()) throw std::invalid_argument("point dimension does not match model");
}

Matrix invert_checked(const Matrix& g, double det_threshold) {
  Eigen::PartialPivLU<Matrix> lu(g);
  if (!(std::abs(lu.determinant()) > det_threshold)) throw SingularMatrixError("metric is singular at sample point");
  return lu.inverse();
}

}  // namespace

MetricValue metric_at(const MetricModel& m, const Vector& x, double det_threshold) {
  check_point(m, x);
  const int n = m.dimension();
  std::vector<double> xs(x.data(), x.data() + n);
  auto comps = m.metric_components(m.bindings<double>(xs));
  MetricValue out;
  out.g = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(comps.data(), n, n);
  out.inverse = invert_checked(out.g, det_threshold);
  return out;
}

MetricJet metric_jet(const MetricModel& m, const Vector& x, double det_threshold) {
  check_point(m, x);
  const int n = m.dimension();
  auto space = JetSpace::make(0, n, 0, 1);
  std::vector<Jet> xs;
  for (int i = 0; i < n; ++i) xs.push_back(Jet::variable(space, i, x[i]));
  auto comps = m.metric_components(m.bindings<Jet>(xs));

  MetricJet out;
  out.g.resize(n, n);
  out.dg.assign(n, Matrix::Zero(n, n));
  std::vector<std::uint8_t> e(n, 0);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const Jet& j = comps[a * n + b];
      out.g(a, b) = j.value();
      for (int c = 0; c < n; ++c) {
        e[c] = 1;
        out.dg[c](a, b) = j.derivative(e);
        e[c] = 0;
      }
    }
  }
  out.inverse = invert_checked(out.g, det_threshold);
  return out;
}

Tensor3 christoffel(const MetricModel& m, const Vector& x, double det_threshold) {
  const auto mj = metric_jet(m, x, det_threshold);
  const int n = m.dimension();
  // Lowered symbols Γ_qac = ½(∂_a g_qc + ∂_c g_qa − ∂_q g_ac).
  Tensor3 lowered(n);
  for (int q = 0; q < n; ++q)
    for (int a = 0; a < n; ++a)
      for (int c = 0; c < n; ++c) lowered(q, a, c) = 0.5 * (mj.dg[a](q, c) + mj.dg[c](q, a) - mj.dg[q](a, c));
  Tensor3 gamma(n);
  for (int b = 0; b < n; ++b)
    for (int a = 0; a < n; ++a)
      for (int c = a; c < n; ++c) {
        double s = 0.0;
        for (int q = 0; q < n; ++q) s += mj.inverse(b, q) * lowered(q, a, c);
        gamma(b, a, c) = s;
        gamma(b, c, a) = s;
      }
  return gamma;
}

Vector oneform_at(const MetricModel& m, const Vector& x) {
  check_point(m, x);
  const int n = m.dimension();
  std::vector<double> xs(x.data(), x.data() + n);
  auto beta = m.oneform_components(m.bindings<double>(xs));
  return Eigen::Map<const Vector>(beta.data(), n);
}

Matrix nabla_beta(const MetricModel& m, const Vector& x, double det_threshold) {
  if (!m.has_oneform()) throw ModelError("nabla_beta: model '" + m.name() + "' has no 1-form");
  const int n = m.dimension();
  const Tensor3 gamma = christoffel(m, x, det_threshold);

  auto space = JetSpace::make(0, n, 0, 1);
  std::vector<Jet> xs;
  for (int i = 0; i < n; ++i) xs.push_back(Jet::variable(space, i, x[i]));
  auto beta = m.oneform_components(m.bindings<Jet>(xs));

  Matrix out(n, n);
  std::vector<std::uint8_t> e(n, 0);
  for (int a = 0; a < n; ++a) {
    e[a] = 1;
    for (int b = 0; b < n; ++b) {
      double v = beta[b].derivative(e);
      for (int c = 0; c < n; ++c) v -= gamma(c, a, b) * beta[c].value();
      out(a, b) = v;
    }
    e[a] = 0;
  }
  return out;
}

double metric_compatibility_residual(const MetricModel& m, const Vector& x) {
  const auto mj = metric_jet(m, x);
  const Tensor3 gamma = christoffel(m, x);
  const int n = m.dimension();
  double worst = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        double v = mj.dg[a](b, c);
        for (int d = 0; d < n; ++d) v -= gamma(d, a, b) * mj.g(d, c) + gamma(d, a, c) * mj.g(b, d);
        worst = std::max(worst, std::abs(v));
      }
  return worst;
}

}  // namespace finsler
