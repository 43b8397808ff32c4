#include "oracles.hpp"
#include "pmcv/analysis.hpp"
#include "pmcv/catalog.hpp"
#include "pmcv/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace pmcv;

namespace {

ShapeSpectrum spectrum_of(const Eigen::VectorXd& diag) {
  return eigen_structure(Eigen::MatrixXd(diag.asDiagonal()));
}

}  // namespace

TEST_CASE("two curvature values in the round sphere") {
  const auto v = two_curvature_values(4, 1, 1.0, 1, 4.0, -1);
  CHECK(v.special_case == SpecialCase::kPositiveCEps);
  CHECK(std::abs(v.H2 - 0.25) < 1e-14);
  CHECK(std::abs(v.mu2 - 1.0) < 1e-14);
  CHECK(std::abs(v.nu2 - 1.0) < 1e-14);
  const auto s = signed_curvatures(v);
  CHECK(std::abs(cartan_identity_residual(s.mu, s.nu, 1.0, 1)) < 1e-14);
}

TEST_CASE("two curvature values in hyperbolic space") {
  const auto v = two_curvature_values(3, 1, -1.0, 1, 3.0, 1);
  CHECK(v.special_case == SpecialCase::kNegativeCEps);
  CHECK(std::abs(v.H2 - 8.0 / 9.0) < 1e-14);
  CHECK(std::abs(v.mu2 - 2.0) < 1e-14);
  CHECK(std::abs(v.nu2 - 0.5) < 1e-14);
  const auto w = two_curvature_values(3, 1, -1.0, 1, 3.0, -1);
  CHECK_FALSE(w.admissible);
}

TEST_CASE("feasibility bound") {
  CHECK_THROWS_AS(two_curvature_values(4, 2, 1.0, 1, 3.9, 1), FeasibilityError);
  const auto v = two_curvature_values(4, 2, 1.0, 1, 4.0, 1);
  CHECK(v.feasibility_margin >= -1e-12);
  const auto w = two_curvature_values(4, 2, 1.0, 1, 4.0, -1);
  CHECK(std::abs(v.mu2 - w.mu2) < 1e-12);
  CHECK(std::abs(v.H2 - w.H2) < 1e-12);
}

TEST_CASE("closed forms agree with the bisection oracle") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> nd(2, 8);
  std::uniform_real_distribution<double> ud(0.2, 3.0);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = nd(rng);
    const int l = std::uniform_int_distribution<int>(1, n - 1)(rng);
    const double c = (trial % 2 ? 1.0 : -1.0) * ud(rng);
    const int eps = (trial % 3 == 0) ? -1 : 1;
    const double bound = 2.0 * std::sqrt(double(l) * (n - l)) * std::abs(c);
    const double lambda = eps * bound * (1.05 + ud(rng));
    const auto roots = oracle::solve_two_curvatures(n, l, c, eps, lambda);
    for (int branch : {1, -1}) {
      const auto v = two_curvature_values(n, l, c, eps, lambda, branch);
      double best = 1e300;
      for (const auto& r : roots) best = std::min(best, std::abs(v.mu2 - r.mu2) / (1 + r.mu2) + std::abs(v.H2 - r.H2) / (1 + r.H2));
      CHECK(best < 1e-10);
      ++checked;
    }
  }
  CHECK(checked == 400);
}

TEST_CASE("imaginary principal curvatures") {
  const auto v = two_curvature_values(4, 2, -1.0, 1, 1.0, 1, CurvatureKind::kImaginary);
  CHECK(std::abs(v.H2 - 5.0 / 8.0) < 1e-14);
  CHECK(std::abs(v.gamma2 - 5.0 / 8.0) < 1e-14);
  CHECK(std::abs(v.tau2 - 3.0 / 8.0) < 1e-14);
  CHECK_THROWS_AS(two_curvature_values(5, 2, -1.0, 1, 1.0, 1, CurvatureKind::kImaginary), ParityError);
  CHECK_THROWS_AS(two_curvature_values(4, 2, 1.0, 1, 1.0, 1, CurvatureKind::kImaginary), FeasibilityError);
  CHECK_THROWS_AS(two_curvature_values(4, 2, -1.0, 1, 5.0, 1, CurvatureKind::kImaginary), FeasibilityError);
  for (int n = 3; n <= 15; n += 2) {
    try {
      two_curvature_values(n, n / 2, -1.0, 1, 0.5, 1, CurvatureKind::kImaginary);
      FAIL("expected ParityError");
    } catch (const ParityError& e) {
      CHECK(std::string(e.what()).find("odd n = " + std::to_string(n)) != std::string::npos);
    }
  }
}

TEST_CASE("single principal curvature") {
  const auto v = two_curvature_values(3, 3, 1.0, 1, 6.0, 1);
  CHECK(std::abs(v.mu2 - 2.0) < 1e-14);
  CHECK(std::isnan(v.nu2));
  CHECK_THROWS_AS(two_curvature_values(3, 3, 1.0, 1, -1.0, 1), FeasibilityError);
}

TEST_CASE("Lorentzian classification") {
  const auto a = classify_lorentzian_pmcv(3, 3, 6.0, LorentzianAmbient::kAntiDeSitter, FormTag::kIII);
  REQUIRE(a.parameter_squared.size() == 1);
  CHECK(std::abs(a.parameter_squared[0] - 2.0) < 1e-14);
  const auto b = classify_lorentzian_pmcv(4, 2, 5.0, LorentzianAmbient::kAntiDeSitter, FormTag::kII);
  REQUIRE(b.parameter_squared.size() == 2);
  CHECK(std::abs(std::max(b.parameter_squared[0], b.parameter_squared[1]) - 2.0) < 1e-14);
  CHECK(std::abs(std::min(b.parameter_squared[0], b.parameter_squared[1]) - 0.5) < 1e-14);
  const auto c = classify_lorentzian_pmcv(4, 2, 8.5, LorentzianAmbient::kDeSitter, FormTag::kII);
  CHECK(c.parameter_name == "cot^2(theta+pi/4)");
  CHECK(std::abs(std::max(c.parameter_squared[0], c.parameter_squared[1]) - 4.0) < 1e-12);
  CHECK_THROWS_AS(classify_lorentzian_pmcv(4, 2, 3.0, LorentzianAmbient::kDeSitter, FormTag::kII), FeasibilityError);
  CHECK_THROWS_AS(classify_lorentzian_pmcv(4, 2, 5.0, LorentzianAmbient::kDeSitter, FormTag::kI), DomainError);
  CHECK_THROWS_AS(classify_lorentzian_pmcv(4, 2, 5.0, LorentzianAmbient::kDeSitter, FormTag::kIII), DomainError);
}

TEST_CASE("mean curvature bound") {
  const auto equal = verify_mean_curvature_bound(spectrum_of(Eigen::Vector3d(1, 1, 1)), 3.0, 1, 1.0);
  CHECK(equal.status == Status::kPass);
  CHECK(std::abs(equal.margin) < 1e-12);

  Eigen::VectorXd two(4);
  two << 1, -1, -1, -1;
  const auto strict = verify_mean_curvature_bound(spectrum_of(two), 4.0, 1, 0.5);
  CHECK(strict.status == Status::kPass);
  CHECK(strict.margin > 0.5);

  Eigen::MatrixXd pair = Eigen::MatrixXd::Zero(4, 4);
  pair.block(0, 0, 2, 2) << 1, 1, -1, 1;
  pair.block(2, 2, 2, 2) << 1, 1, -1, 1;
  CHECK(verify_mean_curvature_bound(eigen_structure(pair), 0.0, 1, 1.0).status == Status::kPass);

  CHECK(verify_mean_curvature_bound(spectrum_of(Eigen::Vector4d(2, 2, 2, 2)), 12.0, 1, 2.0).status == Status::kFail);
  CHECK(verify_mean_curvature_bound(spectrum_of(Eigen::Vector4d(1, 1, -1, -1)), 4.0, 1, 0.0).status ==
        Status::kNotApplicable);
  CHECK(verify_mean_curvature_bound(spectrum_of(Eigen::Vector3d(1, 2, 3)), 14.0, 1, 2.0).status ==
        Status::kNotApplicable);
}

TEST_CASE("lambda estimation") {
  const auto minimal = build_umbilical(SpaceForm(3, 0, 1.0), 0.0);
  const auto pts = minimal.default_grid.points();
  const auto m = estimate_lambda(minimal.immersion, pts);
  CHECK(m.minimal);

  const auto round = build_umbilical(SpaceForm(3, 0, 1.0), 1.5);
  const auto l = estimate_lambda(round.immersion, round.default_grid.points());
  CHECK_FALSE(l.minimal);
  CHECK(std::abs(l.lambda - 3 * 1.5 * 1.5) < 1e-8);
  CHECK(l.spread < 1e-8);

  auto mixed_a = point_geometry(minimal.immersion, pts.front());
  auto mixed_b = point_geometry(round.immersion, round.default_grid.points().front());
  CHECK_THROWS_AS(estimate_lambda(std::vector<PointGeometry>{mixed_a, mixed_b}), InconsistencyError);
}

TEST_CASE("isoparametric detection on explicit operators") {
  Eigen::MatrixXd a = Eigen::Vector3d(1, 2, 3).asDiagonal();
  Eigen::MatrixXd b = a;
  CHECK(isoparametric_check(std::vector<Eigen::MatrixXd>{a, b}).isoparametric);
  b(2, 2) = 3.1;
  const auto r = isoparametric_check(std::vector<Eigen::MatrixXd>{a, b});
  CHECK_FALSE(r.isoparametric);
  CHECK(r.coefficient_spread > 1e-3);
}

TEST_CASE("condition one vanishes on catalog instances and detects perturbations") {
  DeSitterParams prm;
  prm.theta = DeSitterParams::theta_from_cot(2.0);
  const auto inst = jordan2_de_sitter(prm);
  const auto u = inst.default_grid.points()[3];
  CHECK(check_pmcv_condition1(inst.immersion, u) < 1e-8);
  const auto bad = perturbed(inst.immersion, 1e-2, 5);
  const auto p = point_geometry(bad, u);
  CHECK(p.residuals.codazzi > 1e-3);
}

TEST_CASE("full report on a flat torus in the round sphere") {
  const double a = 0.6;
  const Immersion imm(SpaceForm(2, 0, 1.0), {Eigen::Vector2d(-1, -1), Eigen::Vector2d(1, 1)},
                      [a](std::span<const Jet> u) {
                        const double ca = std::cos(a);
                        const double sa = std::sin(a);
                        return std::vector<Jet>{ca * cos(u[0] / ca), ca * sin(u[0] / ca), sa * cos(u[1] / sa),
                                                sa * sin(u[1] / sa)};
                      },
                      "flat torus");
  const auto grid = GridSpec::uniform(imm.domain(), 4, 0.05);
  const auto r = full_report(imm, grid);
  CHECK(r.passed());
  CHECK(r.isoparametric.isoparametric);
  REQUIRE(r.lambda_estimate);
  const double k1 = std::tan(a);
  const double k2 = -1 / std::tan(a);
  CHECK(std::abs(*r.lambda_estimate - (k1 * k1 + k2 * k2)) < 1e-6);
  CHECK(r.t35.status == Status::kPass);
  CHECK(r.t45_t46.status == Status::kNotApplicable);
}

TEST_CASE("lambda does not depend on the orientation") {
  AntiDeSitterParams prm;
  const auto inst = jordan2_anti_de_sitter(prm);
  const auto a = full_report(inst.immersion, inst.default_grid);
  GridRunOptions opt;
  opt.flip_orientation = true;
  opt.threads = 3;
  const auto b = full_report(inst.immersion, inst.default_grid, {}, opt);
  REQUIRE(a.lambda_estimate);
  REQUIRE(b.lambda_estimate);
  CHECK(std::abs(*a.lambda_estimate - *b.lambda_estimate) < 1e-10);
  CHECK(std::abs(a.mean_curvature + b.mean_curvature) < 1e-10);
  CHECK(b.passed());
}

TEST_CASE("report is independent of the thread count") {
  DeSitterParams prm;
  prm.theta = DeSitterParams::theta_from_cot(1.5);
  const auto inst = jordan2_de_sitter(prm);
  GridRunOptions one;
  GridRunOptions four;
  four.threads = 4;
  const auto a = full_report(inst.immersion, inst.default_grid, {}, one);
  const auto b = full_report(inst.immersion, inst.default_grid, {}, four);
  CHECK(*a.lambda_estimate == *b.lambda_estimate);
  CHECK(a.codazzi_max == b.codazzi_max);
  CHECK(a.grid_H == b.grid_H);
}
