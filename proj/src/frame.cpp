#include "pmcv/frame.hpp"

#include "pmcv/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pmcv {

FrameODESpec::FrameODESpec(Eigen::MatrixXd gram_target) : gram_(std::move(gram_target)) {
  if (gram_.rows() != gram_.cols() || gram_.rows() == 0) throw DimensionError("gram target must be square and non-empty");
}

void FrameODESpec::add_term(int row, int col, double scale, const std::string& coefficient) {
  if (row < 0 || col < 0 || row >= dimension() || col >= dimension()) throw DimensionError("frame term index out of range");
  terms_.push_back({row, col, scale, coefficient});
}

void FrameODESpec::set_coefficient(const std::string& name, CoefficientFn fn) {
  if (name.empty()) throw DomainError("coefficient name must be non-empty");
  coefficients_[name] = std::move(fn);
}

std::vector<Eigen::MatrixXd> FrameODESpec::matrix_series(double t, int order) const {
  const int d = dimension();
  std::vector<Eigen::MatrixXd> out(order + 1, Eigen::MatrixXd::Zero(d, d));
  const Jet tj = Jet::variable(JetLayout::get(1, order), 0, t);
  std::map<std::string, Jet> cache;
  for (const auto& term : terms_) {
    if (term.coefficient.empty()) {
      out[0](term.row, term.col) += term.scale;
      continue;
    }
    auto it = cache.find(term.coefficient);
    if (it == cache.end()) {
      auto fn = coefficients_.find(term.coefficient);
      if (fn == coefficients_.end()) throw DomainError("frame coefficient '" + term.coefficient + "' has no function");
      it = cache.emplace(term.coefficient, fn->second(tj)).first;
    }
    const auto coeffs = it->second.coefficients();
    for (int k = 0; k <= order; ++k) out[k](term.row, term.col) += term.scale * coeffs[k];
  }
  return out;
}

Eigen::MatrixXd FrameODESpec::matrix_at(double t) const { return matrix_series(t, 0).front(); }

void FrameODESpec::validate(double tol) const {
  std::map<std::string, Eigen::MatrixXd> blocks;
  for (const auto& term : terms_) {
    auto& m = blocks.try_emplace(term.coefficient, Eigen::MatrixXd::Zero(dimension(), dimension())).first->second;
    m(term.row, term.col) += term.scale;
  }
  const double scale = std::max(1.0, gram_.cwiseAbs().maxCoeff());
  for (const auto& [name, m] : blocks) {
    const Eigen::MatrixXd k = m * gram_;
    const Eigen::MatrixXd sym = k + k.transpose();
    Eigen::Index a = 0;
    Eigen::Index b = 0;
    const double worst = sym.cwiseAbs().maxCoeff(&a, &b);
    if (worst > tol * scale * std::max(1.0, m.cwiseAbs().maxCoeff())) {
      std::ostringstream os;
      os << "frame ODE does not preserve the Gram matrix: <E_" << a + 1 << "', E_" << b + 1 << "> + <E_" << a + 1
         << ", E_" << b + 1 << "'> = " << sym(a, b) << " for the "
         << (name.empty() ? std::string("constant terms") : "terms with coefficient " + name);
      throw StructuralError(os.str());
    }
  }
}

Eigen::MatrixXd frame_gram(const Eigen::MatrixXd& frame, const Eigen::MatrixXd& eta) {
  return frame * eta * frame.transpose();
}

FrameField::FrameField(std::shared_ptr<const FrameODESpec> spec, std::vector<double> t_grid,
                       std::vector<Eigen::MatrixXd> frames, double drift, int projections)
    : spec_(std::move(spec)), t_(std::move(t_grid)), frames_(std::move(frames)), drift_(drift), projections_(projections) {
  if (t_.empty() || t_.size() != frames_.size()) throw DimensionError("frame field needs one frame per time node");
}

namespace {

Eigen::MatrixXd rk4_step(const FrameODESpec& spec, double t, const Eigen::MatrixXd& e, double h) {
  const Eigen::MatrixXd m0 = spec.matrix_at(t);
  const Eigen::MatrixXd mh = spec.matrix_at(t + 0.5 * h);
  const Eigen::MatrixXd m1 = spec.matrix_at(t + h);
  const Eigen::MatrixXd k1 = m0 * e;
  const Eigen::MatrixXd k2 = mh * (e + 0.5 * h * k1);
  const Eigen::MatrixXd k3 = mh * (e + 0.5 * h * k2);
  const Eigen::MatrixXd k4 = m1 * (e + h * k3);
  return e + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

Eigen::MatrixXd FrameField::frame_at(double t) const {
  const double span = t_.back() - t_.front();
  const double slack = 1e-12 * std::max(1.0, span);
  if (t < t_.front() - slack || t > t_.back() + slack) {
    std::ostringstream os;
    os << "t = " << t << " outside the integrated range [" << t_.front() << ", " << t_.back() << "]";
    throw DomainError(os.str());
  }
  auto it = std::upper_bound(t_.begin(), t_.end(), t);
  std::size_t k = it == t_.begin() ? 0 : static_cast<std::size_t>(it - t_.begin()) - 1;
  const double s = t - t_[k];
  if (s == 0.0) return frames_[k];
  return rk4_step(*spec_, t_[k], frames_[k], s);
}

std::vector<Eigen::MatrixXd> FrameField::series(double t, int order) const {
  std::vector<Eigen::MatrixXd> e(order + 1);
  e[0] = frame_at(t);
  if (order == 0) return e;
  const auto m = spec_->matrix_series(t, order - 1);
  for (int k = 0; k < order; ++k) {
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(e[0].rows(), e[0].cols());
    for (int j = 0; j <= k; ++j) acc += m[j] * e[k - j];
    e[k + 1] = acc / static_cast<double>(k + 1);
  }
  return e;
}

FrameField integrate_frame(std::shared_ptr<const FrameODESpec> spec, double t0, double t1, const Eigen::MatrixXd& initial,
                           const Eigen::MatrixXd& eta, StepControl control) {
  const int d = spec->dimension();
  if (initial.rows() != d || initial.cols() != eta.rows() || eta.rows() != eta.cols()) {
    throw DimensionError("initial frame, ambient metric and spec dimensions disagree");
  }
  if (!(t1 > t0)) throw DomainError("integration range must satisfy t0 < t1");
  if (!(control.step > 0)) throw DomainError("step size must be positive");
  spec->validate();
  const Eigen::MatrixXd& target = spec->gram_target();
  const Eigen::MatrixXd target_inv = target.inverse();
  const double initial_drift = (frame_gram(initial, eta) - target).cwiseAbs().maxCoeff();
  if (initial_drift > 1e-10) {
    std::ostringstream os;
    os << "initial frame violates the Gram target by " << initial_drift;
    throw ContractViolation(os.str());
  }

  const int steps = static_cast<int>(std::ceil((t1 - t0) / control.step - 1e-9));
  const double h = (t1 - t0) / steps;
  std::vector<double> ts{t0};
  std::vector<Eigen::MatrixXd> frames{initial};
  double drift = initial_drift;
  int projections = 0;
  Eigen::MatrixXd e = initial;
  for (int k = 0; k < steps; ++k) {
    const double t = t0 + k * h;
    e = rk4_step(*spec, t, e, h);
    Eigen::MatrixXd delta = frame_gram(e, eta) - target;
    double dev = delta.cwiseAbs().maxCoeff();
    if (dev > control.projection_threshold) {
      ++projections;
      for (int it = 0; it < 20 && dev > 1e-15 * std::max(1.0, target.cwiseAbs().maxCoeff()); ++it) {
        const Eigen::MatrixXd correction = Eigen::MatrixXd::Identity(d, d) - 0.5 * delta * target_inv;
        e = correction * e;
        delta = frame_gram(e, eta) - target;
        const double next = delta.cwiseAbs().maxCoeff();
        if (!(next < dev) && next > control.projection_threshold) {
          throw DegenerateError("Gram projection failed to converge (near-lightlike frame vector)");
        }
        dev = next;
      }
      if (dev > control.projection_threshold) throw DegenerateError("Gram projection failed to converge");
    }
    drift = std::max(drift, dev);
    ts.push_back(k + 1 == steps ? t1 : t0 + (k + 1) * h);
    frames.push_back(e);
  }
  return FrameField(std::move(spec), std::move(ts), std::move(frames), drift, projections);
}

}  // namespace pmcv
