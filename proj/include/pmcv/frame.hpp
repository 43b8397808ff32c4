#ifndef PMCV_FRAME_HPP
#define PMCV_FRAME_HPP

#include "pmcv/jet.hpp"

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace pmcv {

/// Scalar coefficient of t, evaluated on univariate jets so that Taylor data is available.
using CoefficientFn = std::function<Jet(const Jet&)>;

/**
 * Linear moving-frame system E' = M(t) E, frame vectors stored as the rows of E.
 * M is assembled from terms "E_row' += scale * f(t) * E_col"; a term without a
 * coefficient name has f = 1. Indices are zero-based.
 */
class FrameODESpec {
 public:
  struct Term {
    int row;
    int col;
    double scale;
    std::string coefficient;
  };

  explicit FrameODESpec(Eigen::MatrixXd gram_target);

  void add_term(int row, int col, double scale, const std::string& coefficient = "");
  void set_coefficient(const std::string& name, CoefficientFn fn);

  int dimension() const { return static_cast<int>(gram_.rows()); }
  const Eigen::MatrixXd& gram_target() const { return gram_; }
  const std::vector<Term>& terms() const { return terms_; }
  bool has_coefficient(const std::string& name) const { return coefficients_.count(name) > 0; }

  Eigen::MatrixXd matrix_at(double t) const;
  /// Taylor coefficients M_k of s -> M(t + s), k = 0..order.
  std::vector<Eigen::MatrixXd> matrix_series(double t, int order) const;

  /**
   * Checks that every coefficient block K = M_f * gram_target is skew. Throws
   * StructuralError naming the first violating (E_a', E_b) pair.
   */
  void validate(double tol = 1e-12) const;

 private:
  Eigen::MatrixXd gram_;
  std::vector<Term> terms_;
  std::map<std::string, CoefficientFn> coefficients_;
};

struct StepControl {
  double step = 1e-3;
  double projection_threshold = 1e-10;
};

class FrameField {
 public:
  FrameField(std::shared_ptr<const FrameODESpec> spec, std::vector<double> t_grid, std::vector<Eigen::MatrixXd> frames,
             double drift, int projections);

  const std::vector<double>& t_grid() const { return t_; }
  const std::vector<Eigen::MatrixXd>& frames() const { return frames_; }
  const Eigen::MatrixXd& gram_target() const { return spec_->gram_target(); }
  const FrameODESpec& spec() const { return *spec_; }
  double t_min() const { return t_.front(); }
  double t_max() const { return t_.back(); }
  /// max over nodes of max_ij |(E eta E^T - gram_target)_ij|
  double drift() const { return drift_; }
  int projections() const { return projections_; }

  /// Dense output: one RK4 step from the nearest node at or below t.
  Eigen::MatrixXd frame_at(double t) const;
  /// Taylor coefficients of s -> E(t + s) up to `order` from the ODE recurrence.
  std::vector<Eigen::MatrixXd> series(double t, int order) const;

 private:
  std::shared_ptr<const FrameODESpec> spec_;
  std::vector<double> t_;
  std::vector<Eigen::MatrixXd> frames_;
  double drift_;
  int projections_;
};

/// Gram matrix E eta E^T of a frame whose ambient inner product is `eta`.
Eigen::MatrixXd frame_gram(const Eigen::MatrixXd& frame, const Eigen::MatrixXd& eta);

/**
 * Classical RK4 on [t0, t1] from `initial` (rows = frame vectors in an ambient
 * space with inner product `eta`). When the Gram drift exceeds
 * control.projection_threshold the frame is pulled back onto the constraint.
 */
FrameField integrate_frame(std::shared_ptr<const FrameODESpec> spec, double t0, double t1, const Eigen::MatrixXd& initial,
                           const Eigen::MatrixXd& eta, StepControl control = {});

}  // namespace pmcv

#endif  // PMCV_FRAME_HPP
