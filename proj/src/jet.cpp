#include "pmcv/jet.hpp"

#include "pmcv/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <utility>

namespace pmcv {

namespace {

void enumerate(int vars, int remaining, int pos, std::vector<int>& current, std::vector<int>& out) {
  if (pos == vars - 1) {
    current[pos] = remaining;
    out.insert(out.end(), current.begin(), current.end());
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    current[pos] = e;
    enumerate(vars, remaining - e, pos + 1, current, out);
  }
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace

JetLayout::JetLayout(int vars, int order) : vars_(vars), order_(order) {
  if (vars < 1) throw DimensionError("jet layout needs at least one variable");
  if (order < 0 || order > kMaxJetOrder) throw DimensionError("jet order must lie in [0, 4]");
  std::vector<int> current(vars, 0);
  for (int d = 0; d <= order; ++d) {
    const std::size_t before = exponents_.size();
    enumerate(vars, d, 0, current, exponents_);
    degrees_.insert(degrees_.end(), (exponents_.size() - before) / vars, d);
  }
  for (int k = 0; k < size(); ++k) {
    std::uint64_t key = 0;
    for (int a : exponent(k)) key = key * (order_ + 1) + static_cast<std::uint64_t>(a);
    lookup_.emplace(key, k);
  }
  std::vector<int> sum(vars);
  for (int i = 0; i < size(); ++i) {
    for (int j = 0; j < size(); ++j) {
      if (degrees_[i] + degrees_[j] > order) continue;
      auto a = exponent(i);
      auto b = exponent(j);
      for (int v = 0; v < vars; ++v) sum[v] = a[v] + b[v];
      products_.push_back({i, j, index(sum)});
    }
  }
}

std::shared_ptr<const JetLayout> JetLayout::get(int vars, int order) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const JetLayout>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{vars, order}];
  if (!slot) slot = std::make_shared<const JetLayout>(vars, order);
  return slot;
}

int JetLayout::index(std::span<const int> alpha) const {
  if (static_cast<int>(alpha.size()) != vars_) throw DimensionError("multi-index length does not match jet variables");
  std::uint64_t key = 0;
  for (int a : alpha) {
    if (a < 0 || a > order_) return -1;
    key = key * (order_ + 1) + static_cast<std::uint64_t>(a);
  }
  auto it = lookup_.find(key);
  return it == lookup_.end() ? -1 : it->second;
}

Jet::Jet(std::shared_ptr<const JetLayout> layout) : layout_(std::move(layout)), coeffs_(layout_->size(), 0.0) {}

Jet Jet::constant(const std::shared_ptr<const JetLayout>& layout, double value) {
  Jet j(layout);
  j.coeffs_[0] = value;
  return j;
}

Jet Jet::variable(const std::shared_ptr<const JetLayout>& layout, int var, double value) {
  Jet j = constant(layout, value);
  if (layout->order() >= 1) j.coeffs_[1 + var] = 1.0;
  return j;
}

std::vector<Jet> Jet::variables(int order, std::span<const double> point) {
  auto layout = JetLayout::get(static_cast<int>(point.size()), order);
  std::vector<Jet> out;
  out.reserve(point.size());
  for (std::size_t i = 0; i < point.size(); ++i) out.push_back(variable(layout, static_cast<int>(i), point[i]));
  return out;
}

double Jet::coefficient(std::span<const int> alpha) const {
  const int k = layout_->index(alpha);
  return k < 0 ? 0.0 : coeffs_[k];
}

double Jet::derivative(std::span<const int> alpha) const {
  double scale = 1.0;
  for (int a : alpha) scale *= factorial(a);
  return coefficient(alpha) * scale;
}

Jet Jet::partial(int var) const {
  if (order() == 0) throw DimensionError("cannot differentiate an order-0 jet");
  Jet out(JetLayout::get(vars(), order() - 1));
  const auto& lo = *out.layout_;
  std::vector<int> alpha(vars());
  for (int k = 0; k < lo.size(); ++k) {
    auto e = lo.exponent(k);
    std::copy(e.begin(), e.end(), alpha.begin());
    alpha[var] += 1;
    out.coeffs_[k] = alpha[var] * coeffs_[layout_->index(alpha)];
  }
  return out;
}

Jet Jet::truncated(int new_order) const {
  if (new_order > order()) throw DimensionError("cannot raise jet order by truncation");
  Jet out(JetLayout::get(vars(), new_order));
  // Graded ordering makes the lower-order layout a prefix.
  std::copy_n(coeffs_.begin(), out.coeffs_.size(), out.coeffs_.begin());
  return out;
}

Jet Jet::increment() const {
  Jet out = *this;
  out.coeffs_[0] = 0.0;
  return out;
}

void Jet::require_compatible(const Jet& o) const {
  if (layout_ != o.layout_) throw DimensionError("jet layouts differ (order or variable count mismatch)");
}

Jet& Jet::operator+=(const Jet& o) {
  require_compatible(o);
  for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] += o.coeffs_[k];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  require_compatible(o);
  for (std::size_t k = 0; k < coeffs_.size(); ++k) coeffs_[k] -= o.coeffs_[k];
  return *this;
}

Jet& Jet::operator*=(const Jet& o) {
  *this = *this * o;
  return *this;
}

Jet& Jet::operator/=(const Jet& o) {
  *this = *this * reciprocal(o);
  return *this;
}

Jet& Jet::operator+=(double s) {
  coeffs_[0] += s;
  return *this;
}

Jet& Jet::operator-=(double s) {
  coeffs_[0] -= s;
  return *this;
}

Jet& Jet::operator*=(double s) {
  for (double& c : coeffs_) c *= s;
  return *this;
}

Jet& Jet::operator/=(double s) {
  for (double& c : coeffs_) c /= s;
  return *this;
}

Jet Jet::operator-() const {
  Jet out = *this;
  for (double& c : out.coeffs_) c = -c;
  return out;
}

Jet operator+(Jet a, const Jet& b) { return a += b; }
Jet operator-(Jet a, const Jet& b) { return a -= b; }

Jet operator*(const Jet& a, const Jet& b) {
  if (a.layout() != b.layout()) throw DimensionError("jet layouts differ (order or variable count mismatch)");
  Jet out(a.layout());
  auto x = a.coefficients();
  auto y = b.coefficients();
  auto z = out.coefficients();
  for (const auto& p : a.layout()->products()) z[p.out] += x[p.lhs] * y[p.rhs];
  return out;
}

Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }
Jet operator+(Jet a, double s) { return a += s; }
Jet operator+(double s, Jet a) { return a += s; }
Jet operator-(Jet a, double s) { return a -= s; }
Jet operator-(double s, const Jet& a) { return -a + s; }
Jet operator*(Jet a, double s) { return a *= s; }
Jet operator*(double s, Jet a) { return a *= s; }
Jet operator/(Jet a, double s) { return a /= s; }
Jet operator/(double s, const Jet& a) { return reciprocal(a) * s; }

Jet power_series(const Jet& d, std::span<const double> coeffs) {
  Jet r = Jet::constant(d.layout(), coeffs.back());
  for (int k = static_cast<int>(coeffs.size()) - 2; k >= 0; --k) {
    r = r * d;
    r += coeffs[k];
  }
  return r;
}

Jet compose(const Jet& a, std::span<const double> taylor) {
  const int n = std::min<int>(static_cast<int>(taylor.size()), a.order() + 1);
  return power_series(a.increment(), taylor.first(n));
}

Jet pow(const Jet& a, double exponent) {
  const double a0 = a.value();
  if (a0 <= 0.0 && std::floor(exponent) != exponent) throw DomainError("non-integer power of a non-positive jet");
  if (a0 == 0.0) throw DomainError("power series of a jet with zero constant term");
  std::vector<double> t(a.order() + 1);
  double binom = 1.0;
  for (int k = 0; k <= a.order(); ++k) {
    t[k] = binom * std::pow(a0, exponent - k);
    binom *= (exponent - k) / (k + 1);
  }
  return compose(a, t);
}

Jet sqrt(const Jet& a) {
  if (a.value() <= 0.0) throw DomainError("square root of a non-positive jet");
  return pow(a, 0.5);
}

Jet reciprocal(const Jet& a) {
  const double a0 = a.value();
  if (a0 == 0.0) throw DomainError("division by a jet with zero constant term");
  std::vector<double> t(a.order() + 1);
  double p = 1.0 / a0;
  for (int k = 0; k <= a.order(); ++k) {
    t[k] = p;
    p *= -1.0 / a0;
  }
  return compose(a, t);
}

Jet exp(const Jet& a) {
  std::vector<double> t(a.order() + 1);
  const double e = std::exp(a.value());
  for (int k = 0; k <= a.order(); ++k) t[k] = e / factorial(k);
  return compose(a, t);
}

Jet log(const Jet& a) {
  const double a0 = a.value();
  if (a0 <= 0.0) throw DomainError("logarithm of a non-positive jet");
  std::vector<double> t(a.order() + 1);
  t[0] = std::log(a0);
  for (int k = 1; k <= a.order(); ++k) t[k] = ((k % 2) ? 1.0 : -1.0) / (k * std::pow(a0, k));
  return compose(a, t);
}

namespace {

std::vector<double> trig_series(double a0, int order, bool is_sin) {
  const double s = std::sin(a0);
  const double c = std::cos(a0);
  // d^k sin = sin, cos, -sin, -cos, ...
  const double cycle_sin[4] = {s, c, -s, -c};
  const double cycle_cos[4] = {c, -s, -c, s};
  std::vector<double> t(order + 1);
  for (int k = 0; k <= order; ++k) t[k] = (is_sin ? cycle_sin[k % 4] : cycle_cos[k % 4]) / factorial(k);
  return t;
}

}  // namespace

Jet sin(const Jet& a) { return compose(a, trig_series(a.value(), a.order(), true)); }
Jet cos(const Jet& a) { return compose(a, trig_series(a.value(), a.order(), false)); }

Eigen::VectorXd ImmersionJet::coefficient(std::span<const int> alpha) const {
  Eigen::VectorXd out(ambient_dim());
  for (int i = 0; i < ambient_dim(); ++i) out[i] = components[i].coefficient(alpha);
  return out;
}

Eigen::VectorXd ImmersionJet::value() const {
  Eigen::VectorXd out(ambient_dim());
  for (int i = 0; i < ambient_dim(); ++i) out[i] = components[i].value();
  return out;
}

ImmersionJet ImmersionJet::truncated(int new_order) const {
  ImmersionJet out{base_point, {}};
  out.components.reserve(components.size());
  for (const auto& c : components) out.components.push_back(c.truncated(new_order));
  return out;
}

}  // namespace pmcv
