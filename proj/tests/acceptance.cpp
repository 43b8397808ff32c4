#include "oracles.hpp"
#include "pmcv/analysis.hpp"
#include "pmcv/catalog.hpp"
#include "pmcv/errors.hpp"
#include "pmcv/frame.hpp"
#include "pmcv/linalg.hpp"

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace pmcv;

namespace {

// Pinned tolerances.
constexpr double kSpectrumTol = 1e-6;
constexpr double kLambdaTol = 1e-5;
constexpr double kResidualTol = 1e-6;
constexpr double kOracleTol = 1e-10;
constexpr double kRoundOff = 1e-13;
constexpr double kFrameTol = 1e-8;
constexpr double kJetTol = 1e-6;
constexpr double kCodazziFloor = 1e-3;
constexpr double kRuntime1 = 10.0;
constexpr double kRuntime4 = 5.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [" << what << "]";
    }
  }
};

double lambda_target(int n, int p, double k) { return p * k * k + (n - p) / (k * k); }

Outcome criterion1() {
  Outcome o;
  const auto t0 = Clock::now();
  DeSitterParams prm;
  prm.theta = DeSitterParams::theta_from_cot(2.0);
  const auto inst = jordan2_de_sitter(prm);
  const auto r = full_report(inst.immersion, inst.default_grid);
  const double runtime = seconds_since(t0);
  double worst = 0.0;
  bool shape_ok = true;
  for (const auto& u : inst.default_grid.points()) {
    const auto s = eigen_structure(extrinsic_data(inst.immersion, u, NormalOrientation::kPositiveFrame).shape_operator);
    if (s.real_eigenvalues.size() != 2 || !s.complex_pairs.empty()) {
      shape_ok = false;
      continue;
    }
    const auto& lo = s.real_eigenvalues[0];
    const auto& hi = s.real_eigenvalues[1];
    shape_ok = shape_ok && lo.algebraic == 2 && hi.algebraic == 2;
    worst = std::max({worst, std::abs(lo.value + 0.5), std::abs(hi.value - 2.0)});
  }
  o.require(inst.default_grid.size() == 625, "grid is not 5x5x5x5");
  o.require(shape_ok, "spectrum multiplicities");
  o.require(worst < kSpectrumTol, "principal curvatures");
  o.require(r.lambda_estimate && std::abs(*r.lambda_estimate - 8.5) < kLambdaTol, "lambda");
  o.require(r.lambda_spread < kLambdaTol, "lambda spread");
  o.require(runtime < kRuntime1, "runtime");
  o.detail << " curvature_err=" << worst << " lambda=" << (r.lambda_estimate ? *r.lambda_estimate : NAN)
           << " spread=" << r.lambda_spread << " runtime=" << runtime << "s";
  return o;
}

Outcome criterion2() {
  Outcome o;
  const auto inst = jordan2_anti_de_sitter(AntiDeSitterParams{});
  const auto r = full_report(inst.immersion, inst.default_grid);
  const double mu = std::sqrt(2.0);
  bool mult_ok = true;
  for (const auto& u : inst.default_grid.points()) {
    const auto s = eigen_structure(extrinsic_data(inst.immersion, u, NormalOrientation::kPositiveFrame).shape_operator);
    bool found = false;
    for (const auto& ev : s.real_eigenvalues) {
      if (std::abs(ev.value - mu) < kSpectrumTol) found = ev.geometric == 1 && ev.algebraic == 2;
    }
    mult_ok = mult_ok && found;
  }
  o.require(mult_ok, "geometric multiplicity of mu");
  o.require(r.spectrum && r.spectrum->form_tag == FormTag::kII, "form II");
  o.require(r.lambda_estimate && std::abs(*r.lambda_estimate - 5.0) < kLambdaTol, "lambda");
  o.require(r.gauss_max < kResidualTol && r.codazzi_max < kResidualTol, "gauss/codazzi");
  o.require(r.failures.empty(), "point failures");
  o.detail << " lambda=" << (r.lambda_estimate ? *r.lambda_estimate : NAN) << " gauss=" << r.gauss_max
           << " codazzi=" << r.codazzi_max;
  return o;
}

Outcome criterion3() {
  Outcome o;
  auto check = [&](const CatalogInstance& inst, double k, const std::string& label) {
    const auto r = full_report(inst.immersion, inst.default_grid);
    bool blocks_ok = r.spectrum.has_value();
    if (blocks_ok) {
      bool found = false;
      for (const auto& ev : r.spectrum->real_eigenvalues) {
        if (std::abs(ev.value - k) < kSpectrumTol) found = ev.geometric == ev.algebraic - 2;
      }
      blocks_ok = found;
    }
    const double target = lambda_target(4, 3, k);
    o.require(r.spectrum && r.spectrum->form_tag == FormTag::kIII, label + " form III");
    o.require(blocks_ok, label + " geometric = algebraic - 2");
    o.require(r.lambda_estimate && std::abs(*r.lambda_estimate - target) < kLambdaTol, label + " lambda");
    o.require(r.passed(), label + " checks");
    o.detail << " " << label << ".lambda=" << (r.lambda_estimate ? *r.lambda_estimate : NAN) << "/" << target;
  };
  AntiDeSitterParams a;
  a.p = 3;
  check(jordan3_anti_de_sitter(a), a.mu, "4.2");
  DeSitterParams d;
  d.p = 3;
  d.theta = DeSitterParams::theta_from_cot(2.0);
  check(jordan3_de_sitter(d), 2.0, "4.4");
  return o;
}

Outcome criterion4() {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<int> nd(2, 8);
  std::uniform_real_distribution<double> ud(0.1, 3.0);
  std::uniform_real_distribution<double> slack(0.05, 4.0);
  int tuples = 0;
  int evaluations = 0;
  double worst = 0.0;
  bool range_ok = true;
  for (; tuples < 600; ++tuples) {
    const int n = nd(rng);
    const int l = std::uniform_int_distribution<int>(1, n)(rng);
    const double c = (rng() % 2 ? 1.0 : -1.0) * ud(rng);
    const int eps = rng() % 2 ? 1 : -1;
    double lambda;
    if (l == n) {
      lambda = eps * ud(rng);
    } else {
      lambda = eps * 2.0 * std::sqrt(double(l) * (n - l)) * std::abs(c) * (1.0 + slack(rng));
    }
    for (int branch : {1, -1}) {
      const auto v = two_curvature_values(n, l, c, eps, lambda, branch);
      double err;
      if (l == n) {
        const double mu2 = eps * lambda / n;
        err = std::abs(v.mu2 - mu2) / (1 + mu2) + std::abs(v.H2 - mu2) / (1 + mu2);
      } else {
        err = 1e300;
        for (const auto& s : oracle::solve_two_curvatures(n, l, c, eps, lambda)) {
          err = std::min(err, std::max({std::abs(v.H2 - s.H2) / (1 + s.H2), std::abs(v.mu2 - s.mu2) / (1 + s.mu2),
                                        std::abs(v.nu2 - s.nu2) / (1 + s.nu2)}));
        }
      }
      worst = std::max(worst, err);
      const double cap = eps * lambda / n;
      const bool in_range = v.H2 > 0 && v.H2 <= cap * (1 + kRoundOff);
      const bool equality = std::abs(v.H2 - cap) <= kRoundOff * (1 + cap);
      range_ok = range_ok && in_range && (equality == (l == n));
      ++evaluations;
      if (l == n) break;
    }
  }
  const double runtime = seconds_since(t0);
  o.require(tuples >= 500, "tuple count");
  o.require(worst < kOracleTol, "oracle agreement");
  o.require(range_ok, "H^2 range");
  o.require(runtime < kRuntime4, "runtime");
  o.detail << " tuples=" << tuples << " evaluations=" << evaluations << " max_rel_err=" << worst << " runtime=" << runtime << "s";
  return o;
}

Outcome criterion5() {
  Outcome o;
  int cases = 0;
  double worst = 0.0;
  for (int n = 2; n <= 8; ++n) {
    for (int l = 1; l < n; ++l) {
      for (double c : {-2.0, -1.0, -0.5, 0.5, 1.0, 2.0}) {
        for (int eps : {1, -1}) {
          const double ce = c * eps;
          const double lambda = eps * n * std::abs(c);
          const int sgn = (2 * l - n >= 0 ? 1 : -1) * (ce > 0 ? 1 : -1);
          const auto v = two_curvature_values(n, l, c, eps, lambda, sgn);
          double err;
          if (ce < 0) {
            const double H2 = -4.0 * l * (n - l) * ce / (n * n);
            const double mu2 = -(n - l) * ce / l;
            err = std::max(std::abs(v.H2 - H2) / (1 + H2), std::abs(v.mu2 - mu2) / (1 + mu2));
            o.require(v.special_case == SpecialCase::kNegativeCEps, "special case flag");
          } else {
            const double H2 = (2.0 * l - n) * (2.0 * l - n) * ce / (n * n);
            err = std::max({std::abs(v.H2 - H2) / (1 + H2), std::abs(v.mu2 - ce) / (1 + ce),
                            std::abs(v.nu2 - ce) / (1 + ce)});
            o.require(v.special_case == SpecialCase::kPositiveCEps, "special case flag");
          }
          worst = std::max(worst, err);
          ++cases;
        }
      }
    }
  }
  o.require(worst < kRoundOff, "printed values");
  o.detail << " cases=" << cases << " max_rel_err=" << worst;
  return o;
}

Outcome criterion6() {
  Outcome o;
  int rejected = 0;
  for (int n = 3; n <= 15; n += 2) {
    try {
      two_curvature_values(n, n / 2, -1.0, 1, 0.5, 1, CurvatureKind::kImaginary);
      o.require(false, "n=" + std::to_string(n) + " accepted");
    } catch (const ParityError&) {
      ++rejected;
    }
  }
  o.detail << " rejected=" << rejected << "/7";
  return o;
}

Outcome criterion7() {
  Outcome o;
  DeSitterParams prm;
  prm.theta = DeSitterParams::theta_from_cot(2.0);
  prm.t1 = 2.0;
  prm.step.step = 1e-3;
  const auto inst = jordan2_de_sitter(prm);
  const auto& field = *inst.frame;
  const Eigen::MatrixXd m = field.spec().matrix_at(0.0);
  const Eigen::MatrixXd e0 = field.frames().front();
  double err = 0.0;
  for (std::size_t k = 0; k < field.t_grid().size(); k += 50) {
    err = std::max(err, (field.frames()[k] - oracle::expm(field.t_grid()[k] * m) * e0).cwiseAbs().maxCoeff());
  }
  err = std::max(err, (field.frames().back() - oracle::expm(2.0 * m) * e0).cwiseAbs().maxCoeff());
  bool constant = (field.spec().matrix_at(1.7) - m).cwiseAbs().maxCoeff() == 0.0;

  auto spec = std::make_shared<FrameODESpec>(field.spec());
  const Eigen::MatrixXd eta = inst.immersion.space_form().ambient_metric().entries();
  const Eigen::MatrixXd exact = oracle::expm(2.0 * m) * e0;
  std::vector<double> errors;
  for (double h : {0.2, 0.1, 0.05}) {
    StepControl c;
    c.step = h;
    c.projection_threshold = 1.0;
    const auto f = integrate_frame(spec, 0.0, 2.0, e0, eta, c);
    errors.push_back((f.frames().back() - exact).cwiseAbs().maxCoeff());
  }
  const double r1 = errors[0] / errors[1];
  const double r2 = errors[1] / errors[2];
  o.require(constant, "constant coefficients");
  o.require(err < kFrameTol, "error vs expm");
  o.require(r1 > 13 && r1 < 19 && r2 > 13 && r2 < 19, "fourth-order ratio");
  o.require(field.drift() < kFrameTol, "gram drift");
  o.detail << " err=" << err << " ratios=" << r1 << "," << r2 << " drift=" << field.drift();
  return o;
}

Outcome criterion8() {
  Outcome o;
  std::vector<CatalogInstance> instances;
  instances.push_back(jordan2_anti_de_sitter(AntiDeSitterParams{}));
  AntiDeSitterParams a3;
  a3.p = 3;
  instances.push_back(jordan3_anti_de_sitter(a3));
  DeSitterParams d;
  d.theta = DeSitterParams::theta_from_cot(2.0);
  instances.push_back(jordan2_de_sitter(d));
  d.p = 3;
  instances.push_back(jordan3_de_sitter(d));
  instances.push_back(build_umbilical(SpaceForm(4, 1, 1.0), 0.5));
  instances.push_back(build_umbilical(SpaceForm(4, 1, -1.0), 2.0, -1));
  std::mt19937_64 rng(99);
  const double h = 1e-3;
  double worst = 0.0;
  int points = 0;
  for (const auto& inst : instances) {
    const auto& imm = inst.immersion;
    const int n = imm.chart_dim();
    oracle::VectorFn pos = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return imm.position(x); };
    for (int s = 0; s < 100; ++s) {
      const Eigen::VectorXd u = oracle::random_point(rng, imm.domain(), 2.5 * h);
      const auto jet = imm.jet(u, 2);
      for (int i = 0; i < n; ++i) {
        std::vector<int> alpha(n, 0);
        alpha[i] = 1;
        const Eigen::VectorXd fd1 = oracle::first_derivative(pos, u, i, h);
        const Eigen::VectorXd j1 = jet.coefficient(alpha);
        worst = std::max(worst, ((j1 - fd1).cwiseAbs().array() / fd1.cwiseAbs().array().max(1.0)).maxCoeff());
        for (int k = i; k < n; ++k) {
          std::vector<int> beta(n, 0);
          beta[i] += 1;
          beta[k] += 1;
          const double fact = (i == k) ? 2.0 : 1.0;
          const Eigen::VectorXd fd2 = oracle::second_derivative(pos, u, i, k, h);
          const Eigen::VectorXd j2 = fact * jet.coefficient(beta);
          worst = std::max(worst, ((j2 - fd2).cwiseAbs().array() / fd2.cwiseAbs().array().max(1.0)).maxCoeff());
        }
      }
      ++points;
    }
  }
  o.require(points == 100 * static_cast<int>(instances.size()), "point count");
  o.require(worst < kJetTol, "jet vs finite differences");
  o.detail << " instances=" << instances.size() << " points=" << points << " max_rel_err=" << worst;
  return o;
}

Outcome criterion9() {
  Outcome o;
  DeSitterParams d;
  d.theta = DeSitterParams::theta_from_cot(2.0);
  const auto inst = jordan2_de_sitter(d);
  const Immersion bad = perturbed(inst.immersion, 1e-2, 1);
  const auto r = full_report(bad, inst.default_grid);
  o.require(r.codazzi_max > kCodazziFloor, "codazzi residual");
  o.require(!r.isoparametric.isoparametric, "isoparametric constancy");
  o.require(!r.passed(), "report passes");
  const std::string cmd = std::string("\"") + PMCV_CLI_PATH + "\" verify --example 4.3 --perturb 1e-2 > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  o.require(code == 2, "cli exit code");
  o.detail << " codazzi=" << r.codazzi_max << " char_poly_spread=" << r.isoparametric.coefficient_spread
           << " exit=" << code;
  return o;
}

Outcome criterion10() {
  Outcome o;
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> val(-3.0, 3.0);
  int total = 0;
  int matched = 0;
  for (FormTag tag : {FormTag::kI, FormTag::kII, FormTag::kIII, FormTag::kIV}) {
    for (int draw = 0; draw < 50; ++draw) {
      const int n = std::uniform_int_distribution<int>(tag == FormTag::kIII ? 3 : 2, 6)(rng);
      const int lead = tag == FormTag::kII ? 2 : tag == FormTag::kIII ? 3 : 0;
      CanonicalParams prm;
      // distinct values at least 0.5 apart
      std::vector<double> pool;
      while (static_cast<int>(pool.size()) < n) {
        const double x = val(rng);
        bool far = true;
        for (double y : pool) far = far && std::abs(x - y) > 0.5;
        if (far) pool.push_back(x);
      }
      const int count = tag == FormTag::kIV ? n - 2 : n;
      for (int i = 0; i < count; ++i) prm.diagonal.push_back(i < lead ? pool[0] : pool[i]);
      if (tag == FormTag::kIV) {
        prm.gamma = val(rng);
        prm.tau = (rng() % 2 ? 1.0 : -1.0) * std::uniform_real_distribution<double>(0.5, 2.0)(rng);
      }
      const auto pair = canonical_shape_matrix(tag, prm);
      Eigen::MatrixXd P;
      do {
        P = Eigen::MatrixXd::Identity(n, n) + 0.4 * oracle::random_matrix(rng, n, n);
      } while (std::abs(P.determinant()) < 0.2);
      const Eigen::MatrixXd A = P.inverse() * pair.shape * P;
      Eigen::MatrixXd g = P.transpose() * pair.metric * P;
      g = 0.5 * (g + g.transpose());
      ++total;
      try {
        if (classify_canonical_form(A, MetricMatrix(g)) == tag) ++matched;
      } catch (const Error&) {
      }
    }
  }
  o.require(matched == total, "classification");
  o.detail << " matched=" << matched << "/" << total;
  return o;
}

}  // namespace

int main() {
  const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                       criterion6, criterion7, criterion8, criterion9, criterion10};
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k]();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " exception: " << e.what();
    }
    if (!o.pass) ++failures;
    std::printf("criterion %zu: %s%s\n", k + 1, o.pass ? "PASS" : "FAIL", o.detail.str().c_str());
  }
  std::fflush(stdout);
  return failures == 0 ? 0 : 1;
}
