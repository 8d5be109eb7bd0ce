#include "finsler/jet.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <tuple>

namespace finsler {

namespace {

void enumerate(int vars, int order, std::vector<std::vector<std::uint8_t>>& out) {
  std::vector<std::uint8_t> e(vars, 0);
  // Odometer over all exponent vectors with total degree <= order.
  std::function<void(int, int)> rec = [&](int var, int remaining) {
    if (var == vars) {
      out.push_back(e);
      return;
    }
    for (int d = 0; d <= remaining; ++d) {
      e[var] = static_cast<std::uint8_t>(d);
      rec(var + 1, remaining - d);
    }
    e[var] = 0;
  };
  rec(0, order);
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace

JetSpace::JetSpace(int fiber_vars, int base_vars, int fiber_order, int base_order)
    : fiber_vars_(fiber_vars), base_vars_(base_vars), fiber_order_(fiber_order), base_order_(base_order) {
  std::vector<std::vector<std::uint8_t>> fiber;
  std::vector<std::vector<std::uint8_t>> base;
  enumerate(fiber_vars, fiber_order, fiber);
  enumerate(base_vars, base_order, base);

  std::vector<std::vector<std::uint8_t>> all;
  all.reserve(fiber.size() * base.size());
  for (const auto& f : fiber) {
    for (const auto& b : base) {
      auto m = f;
      m.insert(m.end(), b.begin(), b.end());
      all.push_back(std::move(m));
    }
  }
  auto deg = [](const std::vector<std::uint8_t>& m) {
    int d = 0;
    for (auto v : m) d += v;
    return d;
  };
  // Graded order with the reverse-lexicographic tie break puts x_0 before x_1.
  std::sort(all.begin(), all.end(), [&](const auto& a, const auto& b) {
    const int da = deg(a);
    const int db = deg(b);
    if (da != db) return da < db;
    return a > b;
  });

  const int nv = variables();
  exponents_.reserve(all.size() * nv);
  for (std::size_t k = 0; k < all.size(); ++k) {
    exponents_.insert(exponents_.end(), all[k].begin(), all[k].end());
    degrees_.push_back(deg(all[k]));
    lookup_.emplace_back(key(all[k]), static_cast<std::uint32_t>(k));
  }
  std::sort(lookup_.begin(), lookup_.end());

  std::vector<std::uint8_t> sum(nv);
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = 0; j < all.size(); ++j) {
      if (degrees_[i] + degrees_[j] > max_degree()) continue;
      for (int v = 0; v < nv; ++v) sum[v] = static_cast<std::uint8_t>(all[i][v] + all[j][v]);
      if (auto k = index_of(sum)) {
        products_.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                             static_cast<std::uint32_t>(*k)});
      }
    }
  }
}

std::shared_ptr<const JetSpace> JetSpace::make(int fiber_vars, int base_vars, int fiber_order, int base_order) {
  if (fiber_vars < 0 || base_vars < 0 || fiber_order < 0 || base_order < 0 ||
      fiber_vars + base_vars > kMaxVariables || fiber_order > 15 || base_order > 15)
    throw std::invalid_argument("invalid jet space parameters");
  static std::mutex mutex;
  static std::map<std::tuple<int, int, int, int>, std::shared_ptr<const JetSpace>> cache;
  std::lock_guard lock(mutex);
  auto k = std::make_tuple(fiber_vars, base_vars, fiber_order, base_order);
  auto it = cache.find(k);
  if (it != cache.end()) return it->second;
  std::shared_ptr<const JetSpace> s(new JetSpace(fiber_vars, base_vars, fiber_order, base_order));
  cache.emplace(k, s);
  return s;
}

int JetSpace::max_degree() const noexcept {
  return (fiber_vars_ > 0 ? fiber_order_ : 0) + (base_vars_ > 0 ? base_order_ : 0);
}

std::span<const std::uint8_t> JetSpace::exponents(std::size_t k) const {
  return {exponents_.data() + k * variables(), static_cast<std::size_t>(variables())};
}

std::uint64_t JetSpace::key(std::span<const std::uint8_t> e) const {
  std::uint64_t k = 0;
  for (std::size_t i = 0; i < e.size(); ++i) k |= static_cast<std::uint64_t>(e[i] & 0xF) << (4 * i);
  return k;
}

std::optional<std::size_t> JetSpace::index_of(std::span<const std::uint8_t> e) const {
  if (static_cast<int>(e.size()) != variables()) return std::nullopt;
  int fd = 0;
  int bd = 0;
  for (int i = 0; i < variables(); ++i) (i < fiber_vars_ ? fd : bd) += e[i];
  if (fd > fiber_order_ || bd > base_order_) return std::nullopt;
  const auto k = key(e);
  auto it = std::lower_bound(lookup_.begin(), lookup_.end(), std::make_pair(k, std::uint32_t{0}));
  if (it == lookup_.end() || it->first != k) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> JetSpace::unit(int var) const {
  if (var < 0 || var >= variables()) return std::nullopt;
  std::vector<std::uint8_t> e(variables(), 0);
  e[var] = 1;
  return index_of(e);
}

// ---------------------------------------------------------------------------

Jet::Jet(JetSpacePtr space, double value) : space_(std::move(space)) {
  coeffs_.assign(space_ ? space_->size() : 1, 0.0);
  coeffs_[0] = value;
}

Jet Jet::variable(JetSpacePtr space, int var, double value) {
  Jet j(space, value);
  if (auto k = space->unit(var)) j.coeffs_[*k] = 1.0;
  return j;
}

bool Jet::is_constant() const noexcept {
  for (std::size_t k = 1; k < coeffs_.size(); ++k)
    if (coeffs_[k] != 0.0) return false;
  return true;
}

double Jet::coefficient(std::span<const std::uint8_t> e) const {
  if (!space_) {
    for (auto v : e)
      if (v) return 0.0;
    return coeffs_[0];
  }
  auto k = space_->index_of(e);
  return k ? coeffs_[*k] : 0.0;
}

double Jet::derivative(std::span<const std::uint8_t> e) const {
  double f = 1.0;
  for (auto v : e) f *= factorial(v);
  return coefficient(e) * f;
}

Jet Jet::differentiate(int var) const {
  if (!space_) return Jet(0.0);
  const JetSpace& s = *space_;
  if (var < 0 || var >= s.variables()) throw std::out_of_range("jet variable out of range");
  const bool fiber = var < s.fiber_vars();
  const int fo = fiber ? std::max(s.fiber_order() - 1, 0) : s.fiber_order();
  const int bo = fiber ? s.base_order() : std::max(s.base_order() - 1, 0);
  auto target = JetSpace::make(s.fiber_vars(), s.base_vars(), fo, bo);
  Jet out(target, 0.0);
  if ((fiber ? s.fiber_order() : s.base_order()) == 0) return out;
  std::vector<std::uint8_t> e(s.variables());
  for (std::size_t k = 0; k < s.size(); ++k) {
    auto src = s.exponents(k);
    if (src[var] == 0) continue;
    std::copy(src.begin(), src.end(), e.begin());
    e[var] -= 1;
    if (auto t = target->index_of(e)) out.coeffs_[*t] += src[var] * coeffs_[k];
  }
  return out;
}

Jet Jet::restrict_to(const JetSpacePtr& target) const {
  if (!space_ || space_ == target) {
    Jet out(target, value());
    if (space_) out.coeffs_ = coeffs_;
    return out;
  }
  if (target->fiber_vars() != space_->fiber_vars() || target->base_vars() > space_->base_vars())
    throw std::invalid_argument("restrict_to: incompatible variables");
  Jet out(target, 0.0);
  // Base variables missing from the target are evaluated at their seed point.
  std::vector<std::uint8_t> e(space_->variables(), 0);
  for (std::size_t k = 0; k < target->size(); ++k) {
    auto t = target->exponents(k);
    std::copy(t.begin(), t.end(), e.begin());
    if (auto src = space_->index_of(e)) out.coeffs_[k] = coeffs_[*src];
  }
  return out;
}

void Jet::adopt_space(const Jet& o) {
  if (!o.space_ || space_ == o.space_) return;
  if (space_) throw std::logic_error("arithmetic between jets of different spaces");
  const double v = coeffs_[0];
  space_ = o.space_;
  coeffs_.assign(space_->size(), 0.0);
  coeffs_[0] = v;
}

Jet& Jet::operator+=(const Jet& o) {
  adopt_space(o);
  if (!o.space_) {
    coeffs_[0] += o.coeffs_[0];
  } else {
    for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] += o.coeffs_[k];
  }
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  adopt_space(o);
  if (!o.space_) {
    coeffs_[0] -= o.coeffs_[0];
  } else {
    for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] -= o.coeffs_[k];
  }
  return *this;
}

Jet& Jet::operator*=(double s) {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

Jet& Jet::operator*=(const Jet& o) { return *this = *this * o; }

Jet operator*(const Jet& a, const Jet& b) {
  if (!b.space_) return a * b.coeffs_[0];
  if (!a.space_) return b * a.coeffs_[0];
  if (a.space_ != b.space_) throw std::logic_error("arithmetic between jets of different spaces");
  Jet out(a.space_, 0.0);
  const double* x = a.coeffs_.data();
  const double* y = b.coeffs_.data();
  double* r = out.coeffs_.data();
  for (const auto& p : a.space_->products()) r[p.out] += x[p.lhs] * y[p.rhs];
  return out;
}

Jet operator/(const Jet& a, const Jet& b) {
  if (!b.space_) {
    if (b.coeffs_[0] == 0.0) throw DomainError("division by zero");
    return a * (1.0 / b.coeffs_[0]);
  }
  return a * reciprocal(b);
}

Jet operator-(Jet a) { return a *= -1.0; }

Jet compose(const Jet& a, std::span<const double> taylor) {
  if (taylor.empty()) return Jet(0.0);
  if (!a.space()) return Jet(taylor[0]);
  const int top = std::min<int>(static_cast<int>(taylor.size()) - 1, a.space()->max_degree());
  Jet h = a;
  h.coefficients()[0] = 0.0;
  Jet result(a.space(), taylor[top]);
  for (int k = top - 1; k >= 0; --k) {
    result = result * h;
    result.coefficients()[0] += taylor[k];
  }
  return result;
}

namespace {

int degree_of(const Jet& a) { return a.space() ? a.space()->max_degree() : 0; }

}  // namespace

Jet reciprocal(const Jet& a) {
  const double a0 = a.value();
  if (a0 == 0.0) throw DomainError("division by zero");
  std::vector<double> t(degree_of(a) + 1);
  double p = 1.0 / a0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    t[k] = (k % 2 ? -p : p);
    p /= a0;
  }
  return compose(a, t);
}

Jet sqrt(const Jet& a) {
  const double a0 = a.value();
  if (a0 < 0.0 || (a0 == 0.0 && !a.is_constant())) throw DomainError("sqrt outside its smooth domain");
  if (a.is_constant()) {
    Jet r = a;
    r.coefficients()[0] = std::sqrt(a0);
    return r;
  }
  std::vector<double> t(degree_of(a) + 1);
  // binom(1/2, k) * a0^(1/2 - k)
  double binom = 1.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    t[k] = binom * std::pow(a0, 0.5 - static_cast<double>(k));
    binom *= (0.5 - static_cast<double>(k)) / static_cast<double>(k + 1);
  }
  return compose(a, t);
}

Jet exp(const Jet& a) {
  const double e = std::exp(a.value());
  std::vector<double> t(degree_of(a) + 1);
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = e / factorial(static_cast<int>(k));
  return compose(a, t);
}

Jet log(const Jet& a) {
  const double a0 = a.value();
  if (a0 <= 0.0) throw DomainError("log of non-positive value");
  std::vector<double> t(degree_of(a) + 1);
  t[0] = std::log(a0);
  double p = 1.0;
  for (std::size_t k = 1; k < t.size(); ++k) {
    p /= a0;
    t[k] = (k % 2 ? p : -p) / static_cast<double>(k);
  }
  return compose(a, t);
}

Jet sin(const Jet& a) {
  const double s = std::sin(a.value());
  const double c = std::cos(a.value());
  const double cycle[4] = {s, c, -s, -c};
  std::vector<double> t(degree_of(a) + 1);
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = cycle[k % 4] / factorial(static_cast<int>(k));
  return compose(a, t);
}

Jet cos(const Jet& a) {
  const double s = std::sin(a.value());
  const double c = std::cos(a.value());
  const double cycle[4] = {c, -s, -c, s};
  std::vector<double> t(degree_of(a) + 1);
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = cycle[k % 4] / factorial(static_cast<int>(k));
  return compose(a, t);
}

Jet abs(const Jet& a) {
  const double a0 = a.value();
  if (a0 > 0.0) return a;
  if (a0 < 0.0) return -a;
  if (a.is_constant()) return a;
  throw DomainError("abs is not smooth at zero");
}

// ---------------------------------------------------------------------------

SeededPoint seed(const TangentPoint& p, std::span<const int> base_dirs, std::span<const int> fiber_dirs,
                 JetOrders orders) {
  const int n = static_cast<int>(p.x.size());
  if (p.xdot.size() != p.x.size()) throw std::invalid_argument("seed: x and xdot differ in dimension");
  if (orders.base < 0 || orders.base > kMaxBaseOrder || orders.fiber < 0 || orders.fiber > kMaxFiberOrder)
    throw std::invalid_argument("seed: jet order caps exceeded (base <= 1, fiber <= 4)");
  for (int d : base_dirs)
    if (d < 0 || d >= n) throw std::invalid_argument("seed: base direction out of range");
  for (int d : fiber_dirs)
    if (d < 0 || d >= n) throw std::invalid_argument("seed: fiber direction out of range");

  const int nf = static_cast<int>(fiber_dirs.size());
  SeededPoint out;
  out.space = JetSpace::make(nf, static_cast<int>(base_dirs.size()), orders.fiber, orders.base);
  out.x.reserve(n);
  out.xdot.reserve(n);
  for (int i = 0; i < n; ++i) {
    out.x.emplace_back(out.space, p.x[i]);
    out.xdot.emplace_back(out.space, p.xdot[i]);
  }
  for (std::size_t k = 0; k < base_dirs.size(); ++k)
    out.x[base_dirs[k]] = Jet::variable(out.space, nf + static_cast<int>(k), p.x[base_dirs[k]]);
  for (std::size_t k = 0; k < fiber_dirs.size(); ++k)
    out.xdot[fiber_dirs[k]] = Jet::variable(out.space, static_cast<int>(k), p.xdot[fiber_dirs[k]]);
  return out;
}

std::vector<Jet> jet_linear_solve(std::span<const Jet> matrix, std::span<const Jet> rhs, double det_threshold) {
  const std::size_t n = rhs.size();
  if (matrix.size() != n * n) throw std::invalid_argument("jet_linear_solve: shape mismatch");

  JetSpacePtr space;
  for (const auto& j : matrix)
    if (j.space()) space = j.space();
  for (const auto& j : rhs)
    if (j.space()) space = j.space();

  Eigen::MatrixXd m0(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m0(i, j) = matrix[i * n + j].value();
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(m0);
  const double det = lu.determinant();
  if (!(std::abs(det) > det_threshold)) throw SingularMatrixError("jet_linear_solve: singular value part");

  if (!space) {
    Eigen::VectorXd b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = rhs[i].value();
    Eigen::VectorXd z = lu.solve(b);
    return {z.data(), z.data() + n};
  }

  const std::size_t size = space->size();
  // Nilpotent part of M: everything but the value.
  std::vector<Jet> m1(matrix.begin(), matrix.end());
  for (auto& j : m1) {
    j = j.restrict_to(space);
    j.coefficients()[0] = 0.0;
  }

  std::vector<Jet> z(n, Jet(space, 0.0));
  Eigen::MatrixXd r(n, size);
  // Iteration k fixes all Taylor blocks of degree <= k.
  for (int iter = 0; iter <= space->max_degree(); ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      Jet ri = rhs[i].restrict_to(space);
      for (std::size_t j = 0; j < n; ++j) ri -= m1[i * n + j] * z[j];
      auto c = ri.coefficients();
      for (std::size_t k = 0; k < size; ++k) r(i, k) = c[k];
    }
    Eigen::MatrixXd sol = lu.solve(r);
    for (std::size_t i = 0; i < n; ++i) {
      auto c = z[i].coefficients();
      for (std::size_t k = 0; k < size; ++k) c[k] = sol(i, k);
    }
  }
  return z;
}

}  // namespace finsler
