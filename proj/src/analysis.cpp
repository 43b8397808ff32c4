#include "pmcv/analysis.hpp"

#include "pmcv/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

namespace pmcv {

std::string to_string(Status s) {
  switch (s) {
    case Status::kPass: return "pass";
    case Status::kFail: return "fail";
    case Status::kNotApplicable: return "not_applicable";
  }
  return "not_applicable";
}

std::string to_string(SpecialCase s) {
  switch (s) {
    case SpecialCase::kNone: return "none";
    case SpecialCase::kNegativeCEps: return "c_eps_negative";
    case SpecialCase::kPositiveCEps: return "c_eps_positive";
  }
  return "none";
}

double pmcv_condition1_residual(const PointGeometry& p) {
  const auto& e = p.extrinsic;
  const int n = static_cast<int>(e.shape_operator.rows());
  const Eigen::VectorXd r = e.shape_operator * p.grad_H + (0.5 * n * e.epsilon * e.mean_curvature) * p.grad_H;
  return std::sqrt(std::abs(r.dot(e.metric.entries() * r)));
}

double check_pmcv_condition1(const Immersion& imm, const Eigen::VectorXd& u, NormalOrientation orientation) {
  return pmcv_condition1_residual(point_geometry(imm, u, orientation));
}

LambdaEstimate estimate_lambda(const std::vector<PointGeometry>& points, const Tolerances& tol) {
  if (points.size() < 2) throw DomainError("lambda estimation needs at least two sample points");
  LambdaEstimate out;
  std::size_t small = 0;
  for (const auto& p : points) {
    if (std::abs(p.extrinsic.mean_curvature) < tol.minimal) ++small;
  }
  if (small == points.size()) {
    out.minimal = true;
    return out;
  }
  if (small > 0) {
    std::ostringstream os;
    os << "mean curvature vanishes at " << small << " of " << points.size() << " samples but not at the others";
    throw InconsistencyError(os.str());
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& p : points) {
    const auto& e = p.extrinsic;
    const double tr2 = (e.shape_operator * e.shape_operator).trace();
    const double value = (p.laplacian_H + e.epsilon * e.mean_curvature * tr2) / e.mean_curvature;
    out.pointwise.push_back(value);
    lo = std::min(lo, value);
    hi = std::max(hi, value);
  }
  out.lambda = std::accumulate(out.pointwise.begin(), out.pointwise.end(), 0.0) / static_cast<double>(out.pointwise.size());
  out.spread = hi - lo;
  return out;
}

LambdaEstimate estimate_lambda(const Immersion& imm, const std::vector<Eigen::VectorXd>& samples, const Tolerances& tol,
                               NormalOrientation orientation) {
  std::vector<PointGeometry> points;
  points.reserve(samples.size());
  for (const auto& u : samples) points.push_back(point_geometry(imm, u, orientation));
  return estimate_lambda(points, tol);
}

IsoparametricResult isoparametric_check(const std::vector<Eigen::MatrixXd>& shape_operators, const Tolerances& tol) {
  if (shape_operators.size() < 2) throw DomainError("isoparametric check needs at least two sample points");
  std::vector<std::vector<double>> polys;
  for (const auto& a : shape_operators) polys.push_back(char_poly(a));
  IsoparametricResult out;
  for (std::size_t k = 0; k < polys[0].size(); ++k) {
    double lo = polys[0][k];
    double hi = polys[0][k];
    for (const auto& p : polys) {
      lo = std::min(lo, p[k]);
      hi = std::max(hi, p[k]);
    }
    const double ref = std::max(std::abs(lo), std::abs(hi));
    out.coefficient_spread = std::max(out.coefficient_spread, (hi - lo) / (1.0 + ref));
  }
  out.isoparametric = out.coefficient_spread < tol.isoparametric;
  return out;
}

IsoparametricResult isoparametric_check(const Immersion& imm, const std::vector<Eigen::VectorXd>& samples,
                                        const Tolerances& tol, NormalOrientation orientation) {
  std::vector<Eigen::MatrixXd> ops;
  for (const auto& u : samples) ops.push_back(extrinsic_data(imm, u, orientation).shape_operator);
  return isoparametric_check(ops, tol);
}

TheoremStatus verify_mean_curvature_bound(const ShapeSpectrum& s, double lambda, int epsilon, double H, double tol) {
  TheoremStatus out;
  const int n = s.dim();
  if (std::abs(H) < 1e-8) {
    out.detail = "minimal hypersurface";
    return out;
  }
  const double bound = epsilon * lambda / n;
  const double H2 = H * H;
  std::ostringstream os;
  if (s.complex_pairs.empty() && !s.real_eigenvalues.empty() && s.real_eigenvalues.size() <= 2) {
    const bool single = s.real_eigenvalues.size() == 1;
    out.margin = bound - H2;
    const bool equal = std::abs(out.margin) <= tol * (1.0 + std::abs(bound));
    bool ok = epsilon * lambda > 0;
    if (single) {
      ok = ok && equal;
    } else {
      ok = ok && out.margin > 0 && !equal;
    }
    os << "real case: H^2 = " << H2 << ", eps*lambda/n = " << bound << (single ? " (equality expected)" : " (strict inequality expected)");
    out.status = ok ? Status::kPass : Status::kFail;
  } else if (s.real_eigenvalues.empty() && s.complex_pairs.size() == 1) {
    out.margin = H2 - bound;
    os << "imaginary case: H^2 = " << H2 << " must exceed eps*lambda/n = " << bound;
    out.status = out.margin > tol * (1.0 + std::abs(bound)) ? Status::kPass : Status::kFail;
  } else {
    os << "spectrum has more than two distinct principal curvatures";
    out.status = Status::kNotApplicable;
  }
  out.detail = os.str();
  return out;
}

TwoCurvatureValues two_curvature_values(int n, int l, double c, int epsilon, double lambda, int branch, CurvatureKind kind) {
  if (n < 2) throw DomainError("n must be at least 2");
  if (l < 1 || l > n) throw DomainError("multiplicity l must lie in [1, n]");
  if (c == 0.0) throw DomainError("curvature c must be nonzero");
  if (epsilon != 1 && epsilon != -1) throw DomainError("epsilon must be +1 or -1");
  if (branch != 1 && branch != -1) throw DomainError("branch must be +1 or -1");
  TwoCurvatureValues v;
  v.n = n;
  v.l = l;
  v.c = c;
  v.epsilon = epsilon;
  v.lambda = lambda;
  v.branch = branch;
  v.kind = kind;
  const double el = epsilon * lambda;
  const double ce = c * epsilon;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double scale = std::max(1.0, std::abs(lambda));

  if (kind == CurvatureKind::kImaginary) {
    if (n % 2 != 0) {
      std::ostringstream os;
      os << "imaginary principal curvatures do not exist for odd n = " << n;
      throw ParityError(os.str());
    }
    if (2 * l != n) throw DomainError("imaginary principal curvatures require l = n/2");
    if (ce >= 0) throw FeasibilityError("infeasible: imaginary principal curvatures require cε < 0");
    v.feasibility_margin = -n * ce - std::abs(el);
    if (v.feasibility_margin <= 0) throw FeasibilityError("infeasible: |ελ| ≥ −ncε");
    v.H2 = (el - n * ce) / (2.0 * n);
    v.gamma2 = v.H2;
    v.tau2 = -ce - v.gamma2;
    v.mu2 = v.nu2 = nan;
    return v;
  }

  if (l == n) {
    v.feasibility_margin = el;
    if (el <= 0) throw FeasibilityError("infeasible: ελ must be positive for a single principal curvature");
    v.H2 = v.mu2 = el / n;
    v.nu2 = nan;
    v.note = "single principal curvature";
    return v;
  }

  const double bound = 2.0 * std::sqrt(static_cast<double>(l) * (n - l)) * std::abs(c);
  v.feasibility_margin = el - bound;
  if (v.feasibility_margin < -1e-12 * scale) throw FeasibilityError("infeasible: ελ < 2√(l(n−l))|c|");
  const double disc = std::max(0.0, lambda * lambda - 4.0 * l * (n - l) * c * c);
  const double r = std::sqrt(disc);
  v.H2 = (n * el - 4.0 * l * (n - l) * ce + branch * (2 * l - n) * r) / (2.0 * n * n);
  v.mu2 = (el + branch * r) / (2.0 * l);
  v.nu2 = (el - branch * r) / (2.0 * (n - l));
  if (std::abs(el - n * std::abs(c)) <= 1e-12 * scale) {
    v.special_case = ce < 0 ? SpecialCase::kNegativeCEps : SpecialCase::kPositiveCEps;
  }
  const double tiny = 1e-12 * scale;
  if (v.H2 <= tiny) {
    v.admissible = false;
    v.note = "branch is minimal (H = 0)";
  } else if (ce < 0 && std::abs(v.mu2 - v.nu2) <= tiny) {
    v.admissible = false;
    v.note = "branch has mu = nu (one principal curvature)";
  }
  return v;
}

SignedCurvatures signed_curvatures(const TwoCurvatureValues& v) {
  if (v.kind != CurvatureKind::kReal) throw DomainError("signed curvatures exist only for real principal curvatures");
  SignedCurvatures s;
  s.mu = std::sqrt(v.mu2);
  if (v.l == v.n) {
    s.nu = s.mu;
    s.H = v.epsilon * s.mu;
    return s;
  }
  s.nu = -v.c * v.epsilon / s.mu;
  s.H = v.epsilon * (v.l * s.mu + (v.n - v.l) * s.nu) / v.n;
  return s;
}

double cartan_identity_residual(double mu, double nu, double c, int epsilon) { return c + epsilon * mu * nu; }

LorentzianClassification classify_lorentzian_pmcv(int n, int l, double lambda, LorentzianAmbient ambient, FormTag form) {
  if (n < 3) throw DomainError("classification requires n >= 3");
  if (form != FormTag::kII && form != FormTag::kIII) throw DomainError("classification covers forms II and III only");
  if (form == FormTag::kII && l < 2) throw DomainError("form II requires l >= 2");
  if (form == FormTag::kIII && l < 3) throw DomainError("form III requires l >= 3");
  if (l > n) throw DomainError("l must not exceed n");
  LorentzianClassification out;
  out.parameter_name = ambient == LorentzianAmbient::kAntiDeSitter ? "mu^2" : "cot^2(theta+pi/4)";
  out.p = l;
  if (l == n) {
    if (!(lambda > 0)) throw FeasibilityError("infeasible: λ must be positive for l = n");
    out.parameter_squared = {lambda / n};
    return out;
  }
  const double bound = 2.0 * std::sqrt(static_cast<double>(l) * (n - l));
  if (lambda < bound * (1.0 - 1e-12)) throw FeasibilityError("infeasible: λ < 2√(l(n−l)) for l < n");
  const double r = std::sqrt(std::max(0.0, lambda * lambda - 4.0 * l * (n - l)));
  out.parameter_squared = {(lambda + r) / (2.0 * l), (lambda - r) / (2.0 * l)};
  return out;
}

bool PMCVReport::passed() const {
  return std::none_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.status == Status::kFail; });
}

namespace {

struct PointResult {
  std::optional<PointGeometry> geometry;
  std::string error;
};

std::vector<PointResult> evaluate_grid(const Immersion& imm, const std::vector<Eigen::VectorXd>& pts,
                                       NormalOrientation orientation, int threads) {
  std::vector<PointResult> out(pts.size());
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < pts.size(); i += stride) {
      try {
        out[i].geometry = point_geometry(imm, pts[i], orientation);
      } catch (const std::exception& e) {
        out[i].error = e.what();
      }
    }
  };
  const std::size_t t = static_cast<std::size_t>(std::max(1, threads));
  if (t == 1 || pts.size() < 2) {
    work(0, 1);
    return out;
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < t; ++w) pool.emplace_back(work, w, t);
  for (auto& th : pool) th.join();
  return out;
}

CheckResult bounded(const std::string& name, double value, double threshold) {
  return {name, value <= threshold ? Status::kPass : Status::kFail, threshold - value};
}

TheoremStatus cross_check_two_curvatures(const ShapeSpectrum& s, double c, int epsilon, double lambda, double H,
                                         double tol) {
  TheoremStatus out;
  const int n = s.dim();
  const double H2 = H * H;
  std::vector<TwoCurvatureValues> candidates;
  double mu_measured = 0.0;
  double nu_measured = std::numeric_limits<double>::quiet_NaN();
  int l = 0;
  CurvatureKind kind = CurvatureKind::kReal;
  if (s.complex_pairs.empty() && s.real_eigenvalues.size() == 1) {
    l = n;
    mu_measured = s.real_eigenvalues[0].value;
  } else if (s.complex_pairs.empty() && s.real_eigenvalues.size() == 2) {
    l = s.real_eigenvalues[0].algebraic;
    mu_measured = s.real_eigenvalues[0].value;
    nu_measured = s.real_eigenvalues[1].value;
  } else if (s.real_eigenvalues.empty() && s.complex_pairs.size() == 1 && 2 * s.complex_pairs[0].multiplicity == n) {
    l = n / 2;
    kind = CurvatureKind::kImaginary;
  } else {
    out.detail = "spectrum outside the two-curvature hypothesis";
    return out;
  }
  std::ostringstream os;
  double best = std::numeric_limits<double>::infinity();
  for (int branch : {1, -1}) {
    try {
      const auto v = two_curvature_values(n, l, c, epsilon, lambda, branch, kind);
      double dev = std::abs(v.H2 - H2) / (1.0 + H2);
      if (kind == CurvatureKind::kReal) {
        dev = std::max(dev, std::abs(v.mu2 - mu_measured * mu_measured) / (1.0 + mu_measured * mu_measured));
      }
      best = std::min(best, dev);
    } catch (const Error& e) {
      os << "branch " << branch << ": " << e.what() << "; ";
    }
  }
  double cartan = 0.0;
  if (kind == CurvatureKind::kReal && l < n) {
    cartan = std::abs(cartan_identity_residual(mu_measured, nu_measured, c, epsilon));
    os << "cartan residual " << cartan << "; ";
  }
  if (!std::isfinite(best)) {
    out.status = Status::kFail;
    out.margin = -1.0;
    os << "no feasible closed-form branch";
    out.detail = os.str();
    return out;
  }
  const double worst = std::max(best, cartan);
  out.margin = tol - worst;
  out.status = worst <= tol ? Status::kPass : Status::kFail;
  os << "l = " << l << ", closed form reproduces measured H^2 to " << best;
  out.detail = os.str();
  return out;
}

TheoremStatus lorentzian_classification_check(const ShapeSpectrum& s, const SpaceForm& sf, int epsilon, double lambda,
                                              double tol) {
  TheoremStatus out;
  const int n = s.dim();
  const bool ads = sf.curvature() == -1.0 && sf.index() == 1;
  const bool ds = sf.curvature() == 1.0 && sf.index() == 1;
  if (!(ads || ds) || epsilon != 1 || n < 3 || !(s.form_tag == FormTag::kII || s.form_tag == FormTag::kIII) ||
      !s.complex_pairs.empty() || s.real_eigenvalues.size() > 2) {
    out.detail = "requires a two-curvature form II/III hypersurface in H^{n+1}_1(-1) or S^{n+1}_1(1)";
    return out;
  }
  const int block = s.form_tag == FormTag::kII ? 2 : 3;
  const RealEigenvalue* jordan = nullptr;
  for (const auto& ev : s.real_eigenvalues) {
    if (!ev.jordan_blocks.empty() && ev.jordan_blocks.front() == block) jordan = &ev;
  }
  if (!jordan) {
    out.detail = "no Jordan eigenvalue found";
    return out;
  }
  try {
    const auto cls = classify_lorentzian_pmcv(n, jordan->algebraic, lambda,
                                              ads ? LorentzianAmbient::kAntiDeSitter : LorentzianAmbient::kDeSitter,
                                              s.form_tag);
    const double measured = jordan->value * jordan->value;
    double best = std::numeric_limits<double>::infinity();
    for (double v : cls.parameter_squared) best = std::min(best, std::abs(v - measured) / (1.0 + measured));
    std::ostringstream os;
    os << "p = " << cls.p << ", " << cls.parameter_name << " candidates";
    for (double v : cls.parameter_squared) os << " " << v;
    os << ", measured " << measured;
    out.detail = os.str();
    out.margin = tol - best;
    out.status = best <= tol ? Status::kPass : Status::kFail;
  } catch (const Error& e) {
    out.status = Status::kFail;
    out.margin = -1.0;
    out.detail = e.what();
  }
  return out;
}

}  // namespace

PMCVReport full_report(const Immersion& imm_in, const GridSpec& grid, const Tolerances& tol, const GridRunOptions& options) {
  Immersion imm = imm_in;
  NormalOrientation orientation = options.orientation;
  if (options.flip_orientation) {
    imm.set_orientation_sign(-imm_in.orientation_sign());
    orientation = NormalOrientation::kPositiveFrame;
  }
  if (grid.dim() != imm.chart_dim()) throw DimensionError("grid dimension differs from the chart dimension");
  const auto pts = grid.points();
  if (pts.empty()) throw DomainError("grid is empty");
  for (const auto& u : pts) {
    if (!imm.domain().contains(u)) throw DomainError("grid extends outside the immersion domain");
  }

  PMCVReport rep;
  rep.n = imm.chart_dim();
  rep.points = pts.size();
  const auto results = evaluate_grid(imm, pts, orientation, options.threads);

  std::vector<PointGeometry> good;
  std::vector<Eigen::MatrixXd> shapes;
  std::set<std::string> tags;
  std::set<int> eps_seen;
  double h_lo = std::numeric_limits<double>::infinity();
  double h_hi = -h_lo;
  double tr2_sum = 0.0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    if (!r.geometry) {
      rep.failures.push_back({i, r.error});
      continue;
    }
    const auto& p = *r.geometry;
    const auto& e = p.extrinsic;
    good.push_back(p);
    shapes.push_back(e.shape_operator);
    eps_seen.insert(e.epsilon);
    h_lo = std::min(h_lo, e.mean_curvature);
    h_hi = std::max(h_hi, e.mean_curvature);
    tr2_sum += (e.shape_operator * e.shape_operator).trace();
    rep.eq1_residual_max = std::max(rep.eq1_residual_max, pmcv_condition1_residual(p));
    rep.gradH_norm_max = std::max(rep.gradH_norm_max, p.dH.norm());
    rep.laplacian_H_max = std::max(rep.laplacian_H_max, std::abs(p.laplacian_H));
    rep.codazzi_max = std::max(rep.codazzi_max, p.residuals.codazzi);
    rep.gauss_max = std::max(rep.gauss_max, p.residuals.gauss);
    rep.weingarten_max = std::max(rep.weingarten_max, p.weingarten_defect);
    rep.normal_defect_max = std::max(rep.normal_defect_max, p.normal_defect);
    rep.quadric_max = std::max(rep.quadric_max, p.quadric_residual);
    const Eigen::MatrixXd& g = e.metric.entries();
    const double sa = self_adjointness_defect(e.shape_operator, g) /
                      (g.cwiseAbs().maxCoeff() * std::max(1.0, e.shape_operator.cwiseAbs().maxCoeff()));
    rep.self_adjointness_max = std::max(rep.self_adjointness_max, sa);
    rep.grid_points.push_back(pts[i]);
    rep.grid_H.push_back(e.mean_curvature);
    rep.grid_char_poly.push_back(char_poly(e.shape_operator));
    try {
      ShapeSpectrum s = eigen_structure(e.shape_operator, tol.rank);
      tags.insert(to_string(s.form_tag));
      if (!rep.spectrum) {
        rep.spectrum = s;
        rep.representative_shape = e.shape_operator;
      }
    } catch (const AmbiguityError& err) {
      tags.insert("ambiguous");
      if (rep.spectrum_error.empty()) rep.spectrum_error = err.what();
    }
  }
  rep.form_tags.assign(tags.begin(), tags.end());

  if (!good.empty()) {
    rep.epsilon = good.front().extrinsic.epsilon;
    rep.mean_curvature = 0.5 * (h_lo + h_hi);
    rep.mean_curvature_spread = h_hi - h_lo;
    rep.trace_A2 = tr2_sum / static_cast<double>(good.size());
    rep.minimal = std::max(std::abs(h_lo), std::abs(h_hi)) < tol.minimal;
  }
  if (eps_seen.size() > 1) rep.failures.push_back({0, "normal changes causal character across the grid"});

  bool lambda_ok = false;
  if (good.size() >= 2) {
    try {
      const LambdaEstimate est = estimate_lambda(good, tol);
      if (!est.minimal) {
        rep.lambda_estimate = est.lambda;
        rep.lambda_spread = est.spread;
      }
      lambda_ok = true;
    } catch (const InconsistencyError& e) {
      rep.failures.push_back({0, e.what()});
    }
    rep.isoparametric = isoparametric_check(shapes, tol);
  }

  const double lambda = rep.lambda_estimate.value_or(0.0);
  if (rep.spectrum && rep.lambda_estimate && !rep.minimal) {
    rep.t33 = verify_mean_curvature_bound(*rep.spectrum, lambda, rep.epsilon, rep.mean_curvature, tol.theorem);
    rep.t35 = cross_check_two_curvatures(*rep.spectrum, imm.space_form().curvature(), rep.epsilon, lambda,
                                         rep.mean_curvature, tol.theorem);
    rep.t45_t46 = lorentzian_classification_check(*rep.spectrum, imm.space_form(), rep.epsilon, lambda, tol.theorem);
  } else {
    const std::string why = rep.minimal ? "minimal hypersurface" : "no spectrum or lambda available";
    rep.t33.detail = rep.t35.detail = rep.t45_t46.detail = why;
  }

  rep.checks.push_back({"point_evaluation", rep.failures.empty() ? Status::kPass : Status::kFail,
                        rep.failures.empty() ? 0.0 : -static_cast<double>(rep.failures.size())});
  rep.checks.push_back(bounded("quadric", rep.quadric_max, tol.quadric));
  rep.checks.push_back(bounded("normal_orthogonality", rep.normal_defect_max, 1e-10));
  rep.checks.push_back(bounded("self_adjointness", rep.self_adjointness_max, tol.rank));
  rep.checks.push_back(bounded("weingarten", rep.weingarten_max, tol.residual));
  rep.checks.push_back(bounded("gauss", rep.gauss_max, tol.residual));
  rep.checks.push_back(bounded("codazzi", rep.codazzi_max, tol.residual));
  rep.checks.push_back(bounded("condition1", rep.eq1_residual_max, tol.residual));
  rep.checks.push_back(bounded("grad_H", rep.gradH_norm_max, tol.residual));
  if (rep.lambda_estimate) {
    rep.checks.push_back(bounded("lambda_constancy", rep.lambda_spread, tol.lambda_relative * (1.0 + std::abs(lambda))));
  } else {
    rep.checks.push_back({"lambda_constancy", lambda_ok ? Status::kNotApplicable : Status::kFail, 0.0});
  }
  rep.checks.push_back({"isoparametric", rep.isoparametric.isoparametric ? Status::kPass : Status::kFail,
                        tol.isoparametric - rep.isoparametric.coefficient_spread});
  rep.checks.push_back({"spectrum", rep.spectrum_error.empty() && rep.spectrum ? Status::kPass : Status::kFail, 0.0});
  rep.checks.push_back({"t33", rep.t33.status, rep.t33.margin});
  rep.checks.push_back({"t35", rep.t35.status, rep.t35.margin});
  rep.checks.push_back({"t45_t46", rep.t45_t46.status, rep.t45_t46.margin});
  return rep;
}

}  // namespace pmcv
