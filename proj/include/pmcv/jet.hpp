#ifndef PMCV_JET_HPP
#define PMCV_JET_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <initializer_list>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

namespace pmcv {

inline constexpr int kMaxJetOrder = 4;

/**
 * Dense enumeration of the monomials u^alpha with |alpha| <= order in a fixed
 * number of variables, graded by total degree. Layouts are interned: two jets
 * are compatible iff they share the same layout pointer.
 */
class JetLayout {
 public:
  struct Product {
    int lhs;
    int rhs;
    int out;
  };

  static std::shared_ptr<const JetLayout> get(int vars, int order);

  int vars() const { return vars_; }
  int order() const { return order_; }
  int size() const { return static_cast<int>(degrees_.size()); }

  std::span<const int> exponent(int k) const {
    return {exponents_.data() + static_cast<std::size_t>(k) * vars_, static_cast<std::size_t>(vars_)};
  }
  int degree(int k) const { return degrees_[k]; }

  /// Index of the monomial with exponent alpha, or -1 when |alpha| > order.
  int index(std::span<const int> alpha) const;

  /// All (i, j, k) with monomial_i * monomial_j = monomial_k, |k| <= order.
  std::span<const Product> products() const { return products_; }

  JetLayout(int vars, int order);

 private:
  int vars_;
  int order_;
  std::vector<int> exponents_;
  std::vector<int> degrees_;
  std::vector<Product> products_;
  std::unordered_map<std::uint64_t, int> lookup_;
};

/**
 * Truncated multivariate Taylor polynomial of a scalar function around a chart
 * point. Coefficient k holds d^alpha f / alpha! for the k-th monomial alpha of
 * the layout.
 */
class Jet {
 public:
  Jet() = default;
  explicit Jet(std::shared_ptr<const JetLayout> layout);

  static Jet constant(const std::shared_ptr<const JetLayout>& layout, double value);
  static Jet variable(const std::shared_ptr<const JetLayout>& layout, int var, double value);
  static std::vector<Jet> variables(int order, std::span<const double> point);

  const std::shared_ptr<const JetLayout>& layout() const { return layout_; }
  bool empty() const { return layout_ == nullptr; }
  int order() const { return layout_->order(); }
  int vars() const { return layout_->vars(); }

  double value() const { return coeffs_[0]; }
  std::span<const double> coefficients() const { return coeffs_; }
  std::span<double> coefficients() { return coeffs_; }

  double coefficient(std::span<const int> alpha) const;
  /// Partial derivative d^alpha f at the base point (coefficient times alpha!).
  double derivative(std::span<const int> alpha) const;
  double derivative(std::initializer_list<int> alpha) const {
    return derivative(std::span<const int>(alpha.begin(), alpha.size()));
  }

  /// d/du_var as a jet one order lower.
  Jet partial(int var) const;
  Jet truncated(int order) const;
  /// Jet without its constant term.
  Jet increment() const;

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(const Jet& o);
  Jet& operator/=(const Jet& o);
  Jet& operator+=(double s);
  Jet& operator-=(double s);
  Jet& operator*=(double s);
  Jet& operator/=(double s);
  Jet operator-() const;

 private:
  void require_compatible(const Jet& o) const;

  std::shared_ptr<const JetLayout> layout_;
  std::vector<double> coeffs_;
};

Jet operator+(Jet a, const Jet& b);
Jet operator-(Jet a, const Jet& b);
Jet operator*(const Jet& a, const Jet& b);
Jet operator/(const Jet& a, const Jet& b);
Jet operator+(Jet a, double s);
Jet operator+(double s, Jet a);
Jet operator-(Jet a, double s);
Jet operator-(double s, const Jet& a);
Jet operator*(Jet a, double s);
Jet operator*(double s, Jet a);
Jet operator/(Jet a, double s);
Jet operator/(double s, const Jet& a);

/// f(a) for f given by its Taylor coefficients f^(k)(a0)/k! at a0 = a.value().
Jet compose(const Jet& a, std::span<const double> taylor);

Jet sqrt(const Jet& a);
Jet pow(const Jet& a, double exponent);
Jet reciprocal(const Jet& a);
Jet exp(const Jet& a);
Jet log(const Jet& a);
Jet sin(const Jet& a);
Jet cos(const Jet& a);

/// Horner evaluation of sum_k coeffs[k] * d^k for an increment jet d.
Jet power_series(const Jet& d, std::span<const double> coeffs);

/**
 * Taylor expansion of a chart-to-ambient map: one scalar jet per ambient
 * coordinate, all on the same layout.
 */
struct ImmersionJet {
  Eigen::VectorXd base_point;
  std::vector<Jet> components;

  int order() const { return components.front().order(); }
  int chart_dim() const { return static_cast<int>(base_point.size()); }
  int ambient_dim() const { return static_cast<int>(components.size()); }

  /// Ambient vector of Taylor coefficients d^alpha x / alpha!.
  Eigen::VectorXd coefficient(std::span<const int> alpha) const;
  Eigen::VectorXd coefficient(std::initializer_list<int> alpha) const {
    return coefficient(std::span<const int>(alpha.begin(), alpha.size()));
  }
  Eigen::VectorXd value() const;
  ImmersionJet truncated(int order) const;
};

}  // namespace pmcv

#endif  // PMCV_JET_HPP
