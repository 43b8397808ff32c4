#ifndef PMCV_GEOMETRY_HPP
#define PMCV_GEOMETRY_HPP

#include "pmcv/jet.hpp"
#include "pmcv/linalg.hpp"

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace pmcv {

/**
 * N^{n+1}_s(c) realized as the quadric <x,x> = 1/c in E^{n+2} with index s
 * (c > 0) or s + 1 (c < 0). Negative directions come first in the ambient
 * coordinates.
 */
class SpaceForm {
 public:
  SpaceForm(int n, int index, double c);

  int hypersurface_dim() const { return n_; }
  int dim() const { return n_ + 1; }
  int index() const { return index_; }
  double curvature() const { return c_; }
  double radius_squared() const { return 1.0 / std::abs(c_); }
  int ambient_dim() const { return n_ + 2; }
  Signature ambient_signature() const;
  const MetricMatrix& ambient_metric() const { return metric_; }

  /// Short name such as "S^5_1(1)" or "H^5_1(-1)".
  std::string name() const;

 private:
  int n_;
  int index_;
  double c_;
  MetricMatrix metric_;
};

struct ChartBox {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  int dim() const { return static_cast<int>(lower.size()); }
  bool contains(const Eigen::VectorXd& u) const;
  Eigen::VectorXd center() const { return 0.5 * (lower + upper); }
};

/// Tensor grid over a box; points are enumerated with the last axis varying fastest.
struct GridSpec {
  std::vector<int> counts;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  static GridSpec uniform(const ChartBox& box, int count_per_axis, double inset = 0.0);
  int dim() const { return static_cast<int>(counts.size()); }
  std::size_t size() const;
  std::vector<Eigen::VectorXd> points() const;
};

/**
 * Chart map of a hypersurface into a space form, evaluated on jets so that any
 * derivative up to kMaxJetOrder is exact. `map` must return ambient_dim jets on
 * the layout of its inputs and must be safe to call concurrently.
 */
class Immersion {
 public:
  using MapFn = std::function<std::vector<Jet>(std::span<const Jet>)>;

  Immersion(SpaceForm space_form, ChartBox domain, MapFn map, std::string name);

  const SpaceForm& space_form() const { return space_form_; }
  const ChartBox& domain() const { return domain_; }
  int chart_dim() const { return domain_.dim(); }
  const std::string& name() const { return name_; }

  /// Sign applied to the positive-frame normal; lets a construction fix its preferred orientation.
  int orientation_sign() const { return orientation_sign_; }
  void set_orientation_sign(int s) { orientation_sign_ = s >= 0 ? 1 : -1; }

  /// Taylor jet of the map at u; throws DomainError outside the domain box.
  ImmersionJet jet(const Eigen::VectorXd& u, int order) const;
  Eigen::VectorXd position(const Eigen::VectorXd& u) const;
  /// |<x,x> - 1/c| at u.
  double quadric_residual(const Eigen::VectorXd& u) const;

  const MapFn& map() const { return map_; }

 private:
  SpaceForm space_form_;
  ChartBox domain_;
  MapFn map_;
  std::string name_;
  int orientation_sign_ = 1;
};

enum class NormalOrientation {
  kFirstComponent,  ///< first nonzero component of the kernel vector positive
  kPositiveFrame,   ///< det[x, d_1 x, ..., d_n x, xi] > 0, times Immersion::orientation_sign
};

std::string to_string(NormalOrientation o);

struct UnitNormal {
  Eigen::VectorXd xi;
  int epsilon = 1;
};

struct ExtrinsicData {
  Eigen::VectorXd point;
  MetricMatrix metric = MetricMatrix::diagonal({1.0});
  Eigen::VectorXd normal;
  int epsilon = 1;
  Eigen::MatrixXd second_form;     ///< h_ij = eps <d_ij x, xi>
  Eigen::MatrixXd shape_operator;  ///< A with <A d_i, d_j> = <d_ij x, xi>
  double mean_curvature = 0.0;     ///< (1/n) eps tr A
};

/// Christoffel symbols: gamma[k](i, j) = Gamma^k_ij.
using Christoffel = std::vector<Eigen::MatrixXd>;

struct GaussCodazziResiduals {
  double codazzi = 0.0;
  double gauss = 0.0;
};

/// Everything the verification pipeline needs at one chart point.
struct PointGeometry {
  ExtrinsicData extrinsic;
  Christoffel christoffel;
  Eigen::VectorXd dH;       ///< coordinate partials of H
  Eigen::VectorXd grad_H;   ///< g^{ij} d_j H
  double laplacian_H = 0.0;
  GaussCodazziResiduals residuals;
  double weingarten_defect = 0.0;
  double normal_defect = 0.0;  ///< max of |<xi, x>|, |<xi, d_i x>|
  double quadric_residual = 0.0;
};

MetricMatrix first_fundamental_form(const Immersion& imm, const Eigen::VectorXd& u);

UnitNormal unit_normal(const Immersion& imm, const Eigen::VectorXd& u,
                       NormalOrientation orientation = NormalOrientation::kFirstComponent);

Eigen::MatrixXd second_fundamental_form(const Immersion& imm, const Eigen::VectorXd& u,
                                        NormalOrientation orientation = NormalOrientation::kFirstComponent);

Eigen::MatrixXd shape_operator(const Immersion& imm, const Eigen::VectorXd& u,
                               NormalOrientation orientation = NormalOrientation::kFirstComponent);

ExtrinsicData extrinsic_data(const Immersion& imm, const Eigen::VectorXd& u,
                             NormalOrientation orientation = NormalOrientation::kFirstComponent);

Christoffel christoffel(const Immersion& imm, const Eigen::VectorXd& u);

using ScalarField = std::function<double(const Eigen::VectorXd&)>;

/**
 * Delta f = g^{ij}(d_ij f - Gamma^k_ij d_k f) with derivatives of f from
 * 5-point central stencils and one Richardson level. Step h_i = 1e-3 (1 + |u_i|).
 * Throws DomainError if the stencil leaves the domain box.
 */
double laplace_beltrami(const Immersion& imm, const ScalarField& f, const Eigen::VectorXd& u);

struct IndexTriple {
  int i;
  int j;
  int k;
};

/// Residuals over the given coordinate triples (all triples when empty).
GaussCodazziResiduals gauss_codazzi_residuals(const Immersion& imm, const Eigen::VectorXd& u,
                                              std::span<const IndexTriple> basis = {});

/// Single jet pass computing all derived quantities at u (uses order-4 jets).
PointGeometry point_geometry(const Immersion& imm, const Eigen::VectorXd& u,
                             NormalOrientation orientation = NormalOrientation::kPositiveFrame);

/// Unit vector on S^{k} from k hyperspherical angles (cos a1, sin a1 cos a2, ..., sin a1 ... sin ak).
std::vector<Jet> sphere_point(std::span<const Jet> angles);

}  // namespace pmcv

#endif  // PMCV_GEOMETRY_HPP
