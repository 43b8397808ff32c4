#ifndef PMCV_LINALG_HPP
#define PMCV_LINALG_HPP

#include <Eigen/Dense>

#include <complex>
#include <span>
#include <string>
#include <vector>

namespace pmcv {

inline constexpr double kDefaultTolerance = 1e-8;

/// Dimension and index (number of negative squares) of a nondegenerate quadratic form.
struct Signature {
  int dim = 0;
  int index = 0;

  Signature() = default;
  Signature(int dim, int index);

  bool operator==(const Signature&) const = default;
};

/**
 * Symmetric nondegenerate real matrix used as an inner product. Construction
 * validates symmetry and nondegeneracy against `tolerance`.
 */
class MetricMatrix {
 public:
  explicit MetricMatrix(Eigen::MatrixXd entries, double tolerance = kDefaultTolerance);

  /// diag(-1, ..., -1, +1, ..., +1) with `sig.index` leading minus signs.
  static MetricMatrix pseudo_euclidean(Signature sig);
  static MetricMatrix diagonal(std::initializer_list<double> entries);

  const Eigen::MatrixXd& entries() const { return entries_; }
  double tolerance() const { return tolerance_; }
  int dim() const { return static_cast<int>(entries_.rows()); }
  Signature signature() const { return signature_; }
  bool is_lorentzian() const { return signature_.index == 1; }

 private:
  Eigen::MatrixXd entries_;
  double tolerance_;
  Signature signature_;
};

/// Inertia of a symmetric matrix; throws DegenerateError when an eigenvalue is within tol * ||g||.
Signature signature_of(const Eigen::MatrixXd& symmetric, double tol = kDefaultTolerance);

double indefinite_inner(const Eigen::VectorXd& u, const Eigen::VectorXd& v, const MetricMatrix& g);

enum class CausalCharacter { kTimelike, kSpacelike, kLightlike };

std::string to_string(CausalCharacter c);

/// Sign of <v,v> relative to tol * |v|^2. Throws DomainError for v = 0.
CausalCharacter causal_character(const Eigen::VectorXd& v, const MetricMatrix& g, double tol = kDefaultTolerance);

/**
 * Monic characteristic polynomial det(tI - A), highest degree first:
 * {1, c1, ..., cn} means t^n + c1 t^(n-1) + ... + cn. Computed from an
 * orthogonal Hessenberg reduction followed by the Hyman-type recurrence.
 */
std::vector<double> char_poly(const Eigen::MatrixXd& a);

/// Roots of a monic polynomial (highest degree first) via the companion matrix.
std::vector<std::complex<double>> polynomial_roots(std::span<const double> monic);

/// Rank by complete-pivoting elimination; pivots with |p| <= threshold count as zero.
struct RankDecision {
  int rank = 0;
  double smallest_kept = 0.0;     ///< smallest accepted pivot (inf if rank 0)
  double largest_dropped = 0.0;   ///< largest rejected pivot candidate (0 if full rank)
};

RankDecision numerical_rank(const Eigen::MatrixXd& m, double threshold);

enum class FormTag { kI, kII, kIII, kIV, kOther };

std::string to_string(FormTag tag);
FormTag form_tag_from_string(const std::string& s);

struct RealEigenvalue {
  double value = 0.0;
  int algebraic = 0;
  int geometric = 0;
  /// Jordan block sizes, descending; sums to `algebraic` when rank decisions are consistent.
  std::vector<int> jordan_blocks;
};

struct ComplexPair {
  double gamma = 0.0;
  double tau = 0.0;  ///< always > 0
  int multiplicity = 0;
};

struct ShapeSpectrum {
  std::vector<RealEigenvalue> real_eigenvalues;  ///< ascending by value
  std::vector<ComplexPair> complex_pairs;
  FormTag form_tag = FormTag::kOther;
  std::vector<double> char_poly;
  /// False when the rank sequence of (A - lambda I)^k disagrees with the algebraic multiplicities.
  bool jordan_consistent = true;

  int dim() const;
  int distinct_count() const { return static_cast<int>(real_eigenvalues.size() + complex_pairs.size()); }
  /// Max coefficient defect between char_poly and the product of the listed root factors.
  double root_residual() const;
};

/**
 * Clusters the roots of char_poly(A) into distinct eigenvalues and determines
 * geometric multiplicities and Jordan block sizes by numerical rank.
 *
 * A cluster of m roots is accepted when every member lies within
 * max(r tol^(1/m), s (1e3 eps)^(1/m)) of the cluster centroid, with
 * r = max(1, max |root|) and s = max(1, ||A||_inf). The first term is the
 * splitting of an m-fold root under relative perturbation tol, the second the
 * round-off splitting of a badly scaled Jordan block. A candidate within a
 * factor two of that radius raises AmbiguityError.
 */
ShapeSpectrum eigen_structure(const Eigen::MatrixXd& a, double tol = kDefaultTolerance);

/// Form tag from the Jordan pattern alone (no metric checks).
FormTag form_from_pattern(const ShapeSpectrum& spectrum);

/// max |(gA - A^T g)_ij|
double self_adjointness_defect(const Eigen::MatrixXd& a, const Eigen::MatrixXd& g);

/**
 * Lorentzian canonical form of a g-self-adjoint operator. Requires index(g) = 1
 * and ||gA - A^T g|| <= tol * ||g|| * max(1, ||A||) (ContractViolation otherwise).
 * Throws AmbiguityError if root clustering or rank decisions are ambiguous.
 */
FormTag classify_canonical_form(const Eigen::MatrixXd& a, const MetricMatrix& g, double tol = kDefaultTolerance);

/**
 * Parameters of a canonical (A, G) pair. `diagonal` lists the diagonal of A in
 * table order: all n entries for forms I-III (so the Jordan eigenvalue is
 * repeated 2 or 3 times at the front) and the n-2 real entries for form IV. If
 * `multiplicities` is non-empty, `diagonal` holds distinct values that are
 * expanded by these counts first.
 */
struct CanonicalParams {
  std::vector<double> diagonal;
  std::vector<int> multiplicities;
  double gamma = 0.0;
  double tau = 0.0;
};

struct CanonicalPair {
  Eigen::MatrixXd shape;
  Eigen::MatrixXd metric;
};

CanonicalPair canonical_shape_matrix(FormTag tag, const CanonicalParams& params);

}  // namespace pmcv

#endif  // PMCV_LINALG_HPP
