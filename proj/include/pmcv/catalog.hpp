#ifndef PMCV_CATALOG_HPP
#define PMCV_CATALOG_HPP

#include "pmcv/frame.hpp"
#include "pmcv/geometry.hpp"
#include "pmcv/linalg.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pmcv {

/// Simple closed-form coefficient a + b t or a + b sin(omega t).
struct ScalarProfile {
  enum class Kind { kConstant, kAffine, kSine };

  Kind kind = Kind::kConstant;
  double a = 0.0;
  double b = 0.0;
  double omega = 1.0;

  static ScalarProfile constant(double value) { return {Kind::kConstant, value, 0.0, 1.0}; }
  static ScalarProfile affine(double a, double b) { return {Kind::kAffine, a, b, 1.0}; }
  static ScalarProfile sine(double a, double b, double omega) { return {Kind::kSine, a, b, omega}; }

  CoefficientFn function() const;
  double operator()(double t) const;
  bool is_constant() const { return kind == Kind::kConstant || b == 0.0; }
  /// Lower bound of |f| on [t0, t1] (exact for constant/affine, conservative for sine).
  double min_abs(double t0, double t1) const;
};

struct PrincipalCurvature {
  double value;
  int multiplicity;
};

/// Values a construction is designed to realize.
struct ExpectedGeometry {
  std::vector<PrincipalCurvature> principal;
  FormTag form = FormTag::kI;
  double lambda = 0.0;
  double mean_curvature = 0.0;
  int epsilon = 1;
  bool minimal = false;
};

struct CatalogInstance {
  std::string example_id;
  Immersion immersion;
  std::shared_ptr<const FrameField> frame;  ///< null for constructions without a moving frame
  ExpectedGeometry expected;
  GridSpec default_grid;
  /// How unconstrained frame derivatives were completed ("zero" or "n/a").
  std::string closure = "n/a";
};

struct AntiDeSitterParams {
  int n = 4;
  int p = 2;
  double mu = 1.4142135623730951;
  ScalarProfile B = ScalarProfile::constant(1.0);
  double t0 = 0.0;
  double t1 = 1.0;
  StepControl step{};
};

struct CouplingEntry {
  int r;
  int alpha;
  ScalarProfile value;
};

struct DeSitterParams {
  int n = 4;
  int p = 2;
  double theta = 0.0;
  /// B_i by 1-based index; unspecified entries take the construction default.
  std::map<int, ScalarProfile> B;
  /// Nonzero C_{r alpha} entries (1-based frame indices); used by the three-block construction only.
  std::vector<CouplingEntry> C;
  bool include_correction = true;
  double t0 = 0.0;
  double t1 = 1.0;
  StepControl step{};

  /// theta with cot(theta + pi/4) = k, reduced to [0, 2 pi).
  static double theta_from_cot(double k);
};

/// Lorentzian hypersurface of H^{n+1}_1(-1) with one 2x2 Jordan block (principal curvatures mu, 1/mu).
CatalogInstance jordan2_anti_de_sitter(const AntiDeSitterParams& params);
/// Lorentzian hypersurface of H^{n+1}_1(-1) with one 3x3 Jordan block.
CatalogInstance jordan3_anti_de_sitter(const AntiDeSitterParams& params);
/// Lorentzian hypersurface of S^{n+1}_1(1) with one 2x2 Jordan block (cot(theta+pi/4), -tan(theta+pi/4)).
CatalogInstance jordan2_de_sitter(const DeSitterParams& params);
/// Lorentzian hypersurface of S^{n+1}_1(1) with one 3x3 Jordan block.
CatalogInstance jordan3_de_sitter(const DeSitterParams& params);

/**
 * Totally umbilical hypersurface A = mu I of the given space form, cut out by a
 * hyperplane <x, a> = d. `epsilon` selects the causal character of the normal.
 */
CatalogInstance build_umbilical(const SpaceForm& space_form, double mu, int epsilon = 1);

/// x + delta * sin(omega_k . u + phi_k) componentwise, with seeded omega, phi; no reprojection.
Immersion perturbed(const Immersion& base, double delta, std::uint64_t seed);

struct InstanceDescriptor {
  std::string example_id = "4.3";  ///< "4.1" ... "4.4" or "umbilical"
  int n = 4;
  int p = 2;
  double mu_or_theta = 0.0;
  std::map<std::string, ScalarProfile> coefficients;  ///< "B", "B1", ..., "C4_6"
  double t0 = 0.0;
  double t1 = 1.0;
  std::vector<int> grid;  ///< per-axis counts; empty means the instance default
  bool include_correction = true;
  double curvature = 1.0;  ///< umbilical only
  int index = 0;           ///< umbilical only
  int epsilon = 1;         ///< umbilical only
  double perturbation = 0.0;
  std::uint64_t seed = 1;
};

CatalogInstance build_instance(const InstanceDescriptor& descriptor);
/// Grid for a built instance honoring descriptor.grid.
GridSpec instance_grid(const CatalogInstance& instance, const InstanceDescriptor& descriptor);

nlohmann::ordered_json to_json(const InstanceDescriptor& descriptor);
InstanceDescriptor descriptor_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const ScalarProfile& profile);
ScalarProfile profile_from_json(const nlohmann::json& j);

}  // namespace pmcv

#endif  // PMCV_CATALOG_HPP
