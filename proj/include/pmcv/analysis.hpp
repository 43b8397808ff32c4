#ifndef PMCV_ANALYSIS_HPP
#define PMCV_ANALYSIS_HPP

#include "pmcv/geometry.hpp"
#include "pmcv/linalg.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace pmcv {

struct Tolerances {
  double rank = kDefaultTolerance;   ///< eigen_structure / classification
  double lambda_relative = 1e-5;     ///< lambda spread < lambda_relative * (1 + |lambda|)
  double minimal = 1e-8;             ///< max |H| below this means minimal
  double isoparametric = 1e-6;       ///< char-poly coefficient spread < tol * (1 + |coef|)
  double residual = 1e-6;            ///< Gauss/Codazzi, condition 1, |grad H|, Weingarten
  double quadric = 1e-8;
  double theorem = 1e-6;             ///< closed-form cross-checks
};

enum class Status { kPass, kFail, kNotApplicable };

std::string to_string(Status s);

struct TheoremStatus {
  Status status = Status::kNotApplicable;
  double margin = 0.0;  ///< signed slack of the decisive inequality or residual (positive is good)
  std::string detail;
};

struct CheckResult {
  std::string name;
  Status status = Status::kPass;
  double margin = 0.0;  ///< threshold minus measured value
};

/// sqrt|<R, R>| with R = A(grad H) + (n/2) eps H grad H.
double check_pmcv_condition1(const Immersion& imm, const Eigen::VectorXd& u,
                             NormalOrientation orientation = NormalOrientation::kPositiveFrame);
double pmcv_condition1_residual(const PointGeometry& p);

struct LambdaEstimate {
  bool minimal = false;
  double lambda = 0.0;  ///< mean of the pointwise values; meaningless when minimal
  double spread = 0.0;
  std::vector<double> pointwise;
};

/// Pointwise lambda = (Delta H + eps H tr A^2) / H. Throws InconsistencyError on mixed minimal/non-minimal samples.
LambdaEstimate estimate_lambda(const Immersion& imm, const std::vector<Eigen::VectorXd>& samples,
                               const Tolerances& tol = {},
                               NormalOrientation orientation = NormalOrientation::kPositiveFrame);
LambdaEstimate estimate_lambda(const std::vector<PointGeometry>& points, const Tolerances& tol = {});

struct IsoparametricResult {
  bool isoparametric = false;
  double coefficient_spread = 0.0;  ///< max over coefficients of spread / (1 + |coef|)
};

IsoparametricResult isoparametric_check(const Immersion& imm, const std::vector<Eigen::VectorXd>& samples,
                                        const Tolerances& tol = {},
                                        NormalOrientation orientation = NormalOrientation::kPositiveFrame);
IsoparametricResult isoparametric_check(const std::vector<Eigen::MatrixXd>& shape_operators, const Tolerances& tol = {});

/// Mean-curvature bound for at most two distinct principal curvatures (or one complex pair).
TheoremStatus verify_mean_curvature_bound(const ShapeSpectrum& spectrum, double lambda, int epsilon, double H,
                                          double tol = 1e-6);

enum class CurvatureKind { kReal, kImaginary };
enum class SpecialCase { kNone, kNegativeCEps, kPositiveCEps };

std::string to_string(SpecialCase s);

struct TwoCurvatureValues {
  int n = 0;
  int l = 0;
  double c = 0.0;
  int epsilon = 1;
  double lambda = 0.0;
  int branch = 1;
  CurvatureKind kind = CurvatureKind::kReal;
  double H2 = 0.0;
  double mu2 = 0.0;
  double nu2 = 0.0;      ///< NaN when l = n
  double gamma2 = 0.0;   ///< imaginary kind
  double tau2 = 0.0;     ///< imaginary kind
  double feasibility_margin = 0.0;
  SpecialCase special_case = SpecialCase::kNone;
  /// False for a branch excluded at the special value (minimal or mu = nu).
  bool admissible = true;
  std::string note;
};

/**
 * Closed-form values of H^2, mu^2, nu^2 for an isoparametric PMCV hypersurface
 * with two principal curvatures mu (multiplicity l) and nu, or with one complex
 * pair. `branch` is +1 or -1 and selects the sign in front of the square root.
 */
TwoCurvatureValues two_curvature_values(int n, int l, double c, int epsilon, double lambda, int branch,
                                        CurvatureKind kind = CurvatureKind::kReal);

struct SignedCurvatures {
  double mu = 0.0;
  double nu = 0.0;
  double H = 0.0;
};

/// mu = +sqrt(mu^2), nu = -c eps / mu, H = eps (l mu + (n - l) nu) / n.
SignedCurvatures signed_curvatures(const TwoCurvatureValues& v);

double cartan_identity_residual(double mu, double nu, double c, int epsilon);

enum class LorentzianAmbient { kAntiDeSitter, kDeSitter };

struct LorentzianClassification {
  int p = 0;
  /// mu^2 (anti-de Sitter) or cot^2(theta + pi/4) (de Sitter), one entry per branch.
  std::vector<double> parameter_squared;
  std::string parameter_name;
};

LorentzianClassification classify_lorentzian_pmcv(int n, int l, double lambda, LorentzianAmbient ambient, FormTag form);

struct GridRunOptions {
  int threads = 1;
  NormalOrientation orientation = NormalOrientation::kPositiveFrame;
  bool flip_orientation = false;
};

struct PointFailure {
  std::size_t index;
  std::string message;
};

struct PMCVReport {
  int n = 0;
  std::size_t points = 0;
  int epsilon = 1;
  bool minimal = false;
  std::optional<double> lambda_estimate;
  double lambda_spread = 0.0;
  double mean_curvature = 0.0;
  double mean_curvature_spread = 0.0;
  double trace_A2 = 0.0;
  double eq1_residual_max = 0.0;
  double gradH_norm_max = 0.0;
  double laplacian_H_max = 0.0;
  double codazzi_max = 0.0;
  double gauss_max = 0.0;
  double weingarten_max = 0.0;
  double normal_defect_max = 0.0;
  double quadric_max = 0.0;
  double self_adjointness_max = 0.0;
  IsoparametricResult isoparametric;
  std::optional<ShapeSpectrum> spectrum;  ///< at the first grid point
  std::optional<Eigen::MatrixXd> representative_shape;
  std::string spectrum_error;
  std::vector<std::string> form_tags;  ///< distinct tags seen over the grid
  TheoremStatus t33;
  TheoremStatus t35;
  TheoremStatus t45_t46;
  std::vector<CheckResult> checks;
  std::vector<PointFailure> failures;
  /// Per-point (u, H, char poly) rows for CSV output.
  std::vector<Eigen::VectorXd> grid_points;
  std::vector<double> grid_H;
  std::vector<std::vector<double>> grid_char_poly;

  bool passed() const;
};

PMCVReport full_report(const Immersion& imm, const GridSpec& grid, const Tolerances& tol = {},
                       const GridRunOptions& options = {});

}  // namespace pmcv

#endif  // PMCV_ANALYSIS_HPP
