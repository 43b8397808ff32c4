#include "oracles.hpp"
#include "pmcv/errors.hpp"
#include "pmcv/frame.hpp"

#include <doctest.h>

#include <cmath>
#include <memory>

using namespace pmcv;

namespace {

Eigen::MatrixXd lorentz3() { return Eigen::Vector3d(-1, 1, 1).asDiagonal(); }

// Boost in the (E1, E2) plane plus a rotation of (E2, E3) with coefficient f.
std::shared_ptr<FrameODESpec> boost_rotation(CoefficientFn f) {
  auto spec = std::make_shared<FrameODESpec>(lorentz3());
  spec->add_term(0, 1, 1.0);
  spec->add_term(1, 0, 1.0);
  spec->add_term(1, 2, -1.0, "f");
  spec->add_term(2, 1, 1.0, "f");
  spec->set_coefficient("f", std::move(f));
  return spec;
}

}  // namespace

TEST_CASE("constant coefficients match the matrix exponential") {
  auto spec = boost_rotation([](const Jet& t) { return Jet::constant(t.layout(), 0.7); });
  const Eigen::MatrixXd e0 = Eigen::MatrixXd::Identity(3, 3);
  const auto field = integrate_frame(spec, 0.0, 1.0, e0, lorentz3());
  const Eigen::MatrixXd m = spec->matrix_at(0.0);
  double err = 0;
  for (std::size_t k = 0; k < field.t_grid().size(); ++k) {
    err = std::max(err, (field.frames()[k] - oracle::expm(field.t_grid()[k] * m) * e0).cwiseAbs().maxCoeff());
  }
  CHECK(err < 1e-8);
  CHECK(field.drift() < 1e-8);
  CHECK((field.frame_at(0.4567) - oracle::expm(0.4567 * m)).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(field.t_max() == 1.0);
}

TEST_CASE("time dependent coefficients preserve the Gram matrix") {
  auto spec = boost_rotation([](const Jet& t) { return 2.0 * sin(3.0 * t); });
  const auto field = integrate_frame(spec, 0.0, 2.0, Eigen::MatrixXd::Identity(3, 3), lorentz3());
  CHECK(field.drift() < 1e-8);
  for (double t : {0.0, 0.3, 1.2345, 2.0}) {
    CHECK((frame_gram(field.frame_at(t), lorentz3()) - lorentz3()).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("zero coefficients leave the unforced vector constant") {
  auto spec = boost_rotation([](const Jet& t) { return Jet::constant(t.layout(), 0.0); });
  const auto field = integrate_frame(spec, 0.0, 1.0, Eigen::MatrixXd::Identity(3, 3), lorentz3());
  CHECK((field.frame_at(0.8).row(2) - Eigen::RowVector3d(0, 0, 1)).norm() < 1e-14);
}

TEST_CASE("series coefficients agree with differences of the dense output") {
  auto spec = boost_rotation([](const Jet& t) { return 1.0 + 0.5 * cos(t); });
  const auto field = integrate_frame(spec, 0.0, 1.0, Eigen::MatrixXd::Identity(3, 3), lorentz3());
  const double t = 0.55;
  const auto s = field.series(t, 3);
  oracle::VectorFn flat = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    const Eigen::MatrixXd e = field.frame_at(x[0]);
    return Eigen::Map<const Eigen::VectorXd>(e.data(), e.size());
  };
  const Eigen::VectorXd u = Eigen::VectorXd::Constant(1, t);
  const Eigen::VectorXd d1 = oracle::first_derivative(flat, u, 0, 1e-2);
  const Eigen::VectorXd d2 = oracle::second_derivative(flat, u, 0, 0, 1e-2);
  CHECK((Eigen::Map<const Eigen::VectorXd>(s[1].data(), s[1].size()) - d1).cwiseAbs().maxCoeff() < 1e-7);
  CHECK((2.0 * Eigen::Map<const Eigen::VectorXd>(s[2].data(), s[2].size()) - d2).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((s[1] - spec->matrix_at(t) * s[0]).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("fourth-order convergence under step halving") {
  auto spec = boost_rotation([](const Jet& t) { return Jet::constant(t.layout(), 1.3); });
  const Eigen::MatrixXd exact = oracle::expm(2.0 * spec->matrix_at(0.0));
  std::vector<double> errors;
  for (double h : {0.2, 0.1, 0.05}) {
    StepControl c;
    c.step = h;
    c.projection_threshold = 1.0;
    const auto field = integrate_frame(spec, 0.0, 2.0, Eigen::MatrixXd::Identity(3, 3), lorentz3(), c);
    errors.push_back((field.frames().back() - exact).cwiseAbs().maxCoeff());
  }
  for (std::size_t k = 1; k < errors.size(); ++k) {
    const double ratio = errors[k - 1] / errors[k];
    CHECK(ratio > 13.0);
    CHECK(ratio < 19.0);
  }
}

TEST_CASE("projection restores the constraint") {
  auto spec = boost_rotation([](const Jet& t) { return 3.0 * sin(t); });
  StepControl c;
  c.step = 0.05;
  const auto field = integrate_frame(spec, 0.0, 2.0, Eigen::MatrixXd::Identity(3, 3), lorentz3(), c);
  CHECK(field.projections() > 0);
  CHECK(field.drift() < 1e-10);
}

TEST_CASE("structural validation names the violating pair") {
  FrameODESpec spec(lorentz3());
  spec.add_term(0, 1, 1.0);
  spec.add_term(1, 0, -1.0);
  try {
    spec.validate();
    FAIL("expected StructuralError");
  } catch (const StructuralError& e) {
    const std::string msg = e.what();
    CHECK((msg.find("<E_1', E_2> + <E_1, E_2'>") != std::string::npos ||
           msg.find("<E_2', E_1> + <E_2, E_1'>") != std::string::npos));
  }
  auto shared = std::make_shared<FrameODESpec>(spec);
  CHECK_THROWS_AS(integrate_frame(shared, 0, 1, Eigen::MatrixXd::Identity(3, 3), lorentz3()), StructuralError);
}

TEST_CASE("integration preconditions") {
  auto spec = boost_rotation([](const Jet& t) { return Jet::constant(t.layout(), 1.0); });
  Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(3, 3);
  bad(0, 1) = 0.1;
  CHECK_THROWS_AS(integrate_frame(spec, 0, 1, bad, lorentz3()), ContractViolation);
  CHECK_THROWS_AS(integrate_frame(spec, 1, 0, Eigen::MatrixXd::Identity(3, 3), lorentz3()), DomainError);
  CHECK_THROWS_AS(integrate_frame(spec, 0, 1, Eigen::MatrixXd::Identity(2, 2), lorentz3()), DimensionError);
  const auto field = integrate_frame(spec, 0, 1, Eigen::MatrixXd::Identity(3, 3), lorentz3());
  CHECK_THROWS_AS(field.frame_at(1.5), DomainError);
  FrameODESpec missing(lorentz3());
  missing.add_term(0, 1, 1.0, "g");
  missing.add_term(1, 0, 1.0, "g");
  CHECK_THROWS_AS(missing.matrix_at(0.0), DomainError);
}
