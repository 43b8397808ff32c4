#include "pmcv/analysis.hpp"
#include "pmcv/catalog.hpp"
#include "pmcv/errors.hpp"
#include "pmcv/report.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace {

using nlohmann::ordered_json;

constexpr int kExitPass = 0;
constexpr int kExitUsage = 1;
constexpr int kExitFailure = 2;

struct InstanceOptions {
  std::string example;
  bool umbilical = false;
  std::string config;
  int n = 4;
  int p = 2;
  std::optional<double> mu;
  std::optional<double> cot;
  std::optional<double> theta;
  std::vector<std::string> coefficients;
  std::vector<int> grid;
  double t0 = 0.0;
  double t1 = 1.0;
  double curvature = 1.0;
  int index = 0;
  int epsilon = 1;
  double perturb = 0.0;
  std::uint64_t seed = 1;
  bool no_correction = false;
  pmcv::Tolerances tol;
  bool flip = false;
};

void add_instance_options(CLI::App* cmd, InstanceOptions& o) {
  cmd->add_option("--example", o.example, "catalog construction: 4.1, 4.2, 4.3 or 4.4");
  cmd->add_flag("--umbilical", o.umbilical, "totally umbilical hypersurface A = mu I");
  cmd->add_option("--config", o.config, "instance descriptor JSON file");
  cmd->add_option("--n", o.n, "hypersurface dimension")->capture_default_str();
  cmd->add_option("--p", o.p, "block multiplicity parameter p")->capture_default_str();
  cmd->add_option("--mu", o.mu, "mu (4.1, 4.2, umbilical)");
  cmd->add_option("--cot", o.cot, "cot(theta + pi/4) (4.3, 4.4)");
  cmd->add_option("--theta", o.theta, "theta (4.3, 4.4)");
  cmd->add_option("--coef", o.coefficients,
                  "coefficient NAME=VALUE, NAME=a+bt (affine) or NAME=a+b*sin(w t); names B, B1.., C4_6..");
  cmd->add_option("--grid", o.grid, "grid points per axis (one value or one per axis)");
  cmd->add_option("--t0", o.t0, "frame parameter start")->capture_default_str();
  cmd->add_option("--t1", o.t1, "frame parameter end")->capture_default_str();
  cmd->add_option("--curvature", o.curvature, "space-form curvature c (umbilical)")->capture_default_str();
  cmd->add_option("--index", o.index, "space-form index s (umbilical)")->capture_default_str();
  cmd->add_option("--epsilon", o.epsilon, "causal character of the normal (umbilical)")->capture_default_str();
  cmd->add_option("--perturb", o.perturb, "add a seeded perturbation of this amplitude")->capture_default_str();
  cmd->add_option("--seed", o.seed, "perturbation seed")->capture_default_str();
  cmd->add_flag("--no-correction", o.no_correction, "drop the correction term of the 4.4 construction");
  cmd->add_flag("--flip-orientation", o.flip, "use the opposite unit normal");
  cmd->add_option("--rank-tol", o.tol.rank, "eigenstructure rank tolerance")->capture_default_str();
  cmd->add_option("--lambda-tol", o.tol.lambda_relative, "relative lambda spread tolerance")->capture_default_str();
  cmd->add_option("--minimal-tol", o.tol.minimal, "|H| below this counts as minimal")->capture_default_str();
  cmd->add_option("--iso-tol", o.tol.isoparametric, "char-poly spread tolerance")->capture_default_str();
  cmd->add_option("--residual-tol", o.tol.residual, "Gauss/Codazzi/condition residual tolerance")->capture_default_str();
  cmd->add_option("--quadric-tol", o.tol.quadric, "quadric residual tolerance")->capture_default_str();
  cmd->add_option("--theorem-tol", o.tol.theorem, "closed-form cross-check tolerance")->capture_default_str();
}

pmcv::ScalarProfile parse_profile(const std::string& text) {
  double a = 0.0;
  double b = 0.0;
  double w = 0.0;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%lf%lf*sin(%lf t%c", &a, &b, &w, &tail) == 4 && tail == ')') {
    return pmcv::ScalarProfile::sine(a, b, w);
  }
  if (std::sscanf(text.c_str(), "%lf%lft%c", &a, &b, &tail) == 2) return pmcv::ScalarProfile::affine(a, b);
  std::size_t used = 0;
  try {
    a = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw pmcv::DomainError("cannot parse coefficient value '" + text + "'");
  return pmcv::ScalarProfile::constant(a);
}

pmcv::InstanceDescriptor make_descriptor(const InstanceOptions& o) {
  pmcv::InstanceDescriptor d;
  if (!o.config.empty()) {
    std::ifstream in(o.config);
    if (!in) throw pmcv::DomainError("cannot open config file " + o.config);
    d = pmcv::descriptor_from_json(nlohmann::json::parse(in));
  } else {
    if (o.umbilical == !o.example.empty()) throw pmcv::DomainError("give exactly one of --example, --umbilical, --config");
    d.example_id = o.umbilical ? "umbilical" : o.example;
    d.n = o.n;
    d.p = o.p;
    d.t0 = o.t0;
    d.t1 = o.t1;
    d.include_correction = !o.no_correction;
    if (d.example_id == "4.1" || d.example_id == "4.2") {
      d.mu_or_theta = o.mu.value_or(std::sqrt(2.0));
    } else if (d.example_id == "4.3" || d.example_id == "4.4") {
      if (o.cot && o.theta) throw pmcv::DomainError("give at most one of --cot and --theta");
      d.mu_or_theta = o.theta ? *o.theta : pmcv::DeSitterParams::theta_from_cot(o.cot.value_or(1.0));
    } else if (d.example_id == "umbilical") {
      d.mu_or_theta = o.mu.value_or(0.0);
      d.curvature = o.curvature;
      d.index = o.index;
      d.epsilon = o.epsilon;
    } else {
      throw pmcv::DomainError("unknown example '" + d.example_id + "'");
    }
    for (const auto& c : o.coefficients) {
      const auto eq = c.find('=');
      if (eq == std::string::npos || eq == 0) throw pmcv::DomainError("coefficient must be NAME=VALUE, got '" + c + "'");
      d.coefficients[c.substr(0, eq)] = parse_profile(c.substr(eq + 1));
    }
  }
  if (!o.grid.empty()) d.grid = o.grid;
  if (o.perturb != 0.0) {
    d.perturbation = o.perturb;
    d.seed = o.seed;
  }
  for (int c : d.grid) {
    if (c < 2) throw pmcv::DomainError("grid counts must be at least 2 per axis");
  }
  const auto& t = o.tol;
  for (double v : {t.rank, t.lambda_relative, t.minimal, t.isoparametric, t.residual, t.quadric, t.theorem}) {
    if (!(v > 0)) throw pmcv::DomainError("tolerances must be positive");
  }
  return d;
}

int thread_count() {
  if (const char* env = std::getenv("PMCV_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) throw pmcv::DomainError("PMCV_THREADS must be a positive integer");
    return static_cast<int>(v);
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw pmcv::DomainError("cannot write " + path);
  out << text;
}

struct Run {
  pmcv::InstanceDescriptor descriptor;
  pmcv::CatalogInstance instance;
  pmcv::GridSpec grid;
  pmcv::PMCVReport report;
};

Run run_report(const InstanceOptions& o) {
  pmcv::InstanceDescriptor d = make_descriptor(o);
  pmcv::CatalogInstance inst = pmcv::build_instance(d);
  pmcv::GridSpec grid = pmcv::instance_grid(inst, d);
  pmcv::GridRunOptions run;
  run.threads = thread_count();
  run.flip_orientation = o.flip;
  pmcv::PMCVReport rep = pmcv::full_report(inst.immersion, grid, o.tol, run);
  return {std::move(d), std::move(inst), std::move(grid), std::move(rep)};
}

int cmd_verify(const InstanceOptions& o, const std::string& output) {
  const Run r = run_report(o);
  emit(pmcv::dump_deterministic(pmcv::report_to_json(r.report, r.descriptor, r.instance, r.grid)) + "\n", output);
  if (!r.report.passed()) {
    for (const auto& c : r.report.checks) {
      if (c.status == pmcv::Status::kFail) std::cerr << "check failed: " << c.name << " (margin " << c.margin << ")\n";
    }
    return kExitFailure;
  }
  return kExitPass;
}

int cmd_report(const InstanceOptions& o, const std::string& output) {
  const Run r = run_report(o);
  std::ostringstream os;
  pmcv::write_grid_csv(os, r.report);
  emit(os.str(), output);
  return kExitPass;
}

struct Theorem35Options {
  int n = 0;
  int l = 0;
  double c = 0.0;
  int eps = 1;
  double lambda = 0.0;
  std::string kind = "real";
};

int cmd_theorem35(const Theorem35Options& o, const std::string& output) {
  pmcv::CurvatureKind kind;
  if (o.kind == "real") {
    kind = pmcv::CurvatureKind::kReal;
  } else if (o.kind == "imaginary") {
    kind = pmcv::CurvatureKind::kImaginary;
  } else {
    throw pmcv::DomainError("--kind must be real or imaginary");
  }
  const int l = kind == pmcv::CurvatureKind::kImaginary && o.l == 0 ? o.n / 2 : o.l;
  ordered_json out;
  out["n"] = o.n;
  out["l"] = l;
  out["c"] = o.c;
  out["eps"] = o.eps;
  out["lambda"] = o.lambda;
  out["kind"] = o.kind;
  ordered_json branches = ordered_json::array();
  for (int b : {1, -1}) {
    const auto v = pmcv::two_curvature_values(o.n, l, o.c, o.eps, o.lambda, b, kind);
    ordered_json j = pmcv::to_json(v);
    if (kind == pmcv::CurvatureKind::kReal) {
      const auto s = pmcv::signed_curvatures(v);
      j["mu"] = s.mu;
      if (l < o.n) {
        j["nu"] = s.nu;
        j["cartan_residual"] = pmcv::cartan_identity_residual(s.mu, s.nu, o.c, o.eps);
      }
      j["H"] = s.H;
    }
    branches.push_back(j);
    if (l == o.n || kind == pmcv::CurvatureKind::kImaginary) break;
  }
  out["branches"] = branches;
  emit(pmcv::dump_deterministic(out) + "\n", output);
  return kExitPass;
}

struct ClassifyOptions {
  int n = 0;
  int l = 0;
  double lambda = 0.0;
  std::string ambient = "ads";
  std::string form = "II";
};

int cmd_classify(const ClassifyOptions& o, const std::string& output) {
  pmcv::LorentzianAmbient ambient;
  if (o.ambient == "ads") {
    ambient = pmcv::LorentzianAmbient::kAntiDeSitter;
  } else if (o.ambient == "ds") {
    ambient = pmcv::LorentzianAmbient::kDeSitter;
  } else {
    throw pmcv::DomainError("--ambient must be ads or ds");
  }
  const auto cls = pmcv::classify_lorentzian_pmcv(o.n, o.l, o.lambda, ambient, pmcv::form_tag_from_string(o.form));
  ordered_json out;
  out["n"] = o.n;
  out["l"] = o.l;
  out["lambda"] = o.lambda;
  out["ambient"] = o.ambient;
  out["form"] = o.form;
  out["p"] = cls.p;
  out["parameter"] = cls.parameter_name;
  out["values"] = cls.parameter_squared;
  emit(pmcv::dump_deterministic(out) + "\n", output);
  return kExitPass;
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw pmcv::DomainError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw pmcv::DomainError(path + ": " + e.what());
  }
}

int cmd_spectrum(const std::string& matrix_path, const std::string& metric_path, double tol, const std::string& output) {
  const Eigen::MatrixXd a = pmcv::matrix_from_json(read_json_file(matrix_path));
  const Eigen::MatrixXd gm = pmcv::matrix_from_json(read_json_file(metric_path));
  if (a.rows() != a.cols() || gm.rows() != a.rows() || gm.cols() != a.cols()) {
    throw pmcv::DimensionError("matrix and metric must be square of equal size");
  }
  const pmcv::MetricMatrix g(gm, tol);
  const pmcv::FormTag tag = pmcv::classify_canonical_form(a, g, tol);
  ordered_json out = pmcv::to_json(pmcv::eigen_structure(a, tol));
  out["form"] = pmcv::to_string(tag);
  emit(pmcv::dump_deterministic(out) + "\n", output);
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical verification of proper mean curvature vector hypersurfaces in pseudo-Riemannian space forms"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string output;
  app.add_option("-o,--output", output, "output file (default stdout)");

  InstanceOptions verify_opts;
  auto* verify = app.add_subcommand("verify", "run the full verification pipeline and write a JSON report");
  add_instance_options(verify, verify_opts);

  InstanceOptions report_opts;
  auto* report = app.add_subcommand("report", "dump per-point u, H and char-poly coefficients as CSV");
  add_instance_options(report, report_opts);

  Theorem35Options t35;
  auto* theorem35 = app.add_subcommand("theorem35", "closed-form H^2, mu^2, nu^2 for two principal curvatures");
  theorem35->add_option("--n", t35.n, "dimension")->required();
  theorem35->add_option("--l", t35.l, "multiplicity of mu (defaults to n/2 for imaginary)");
  theorem35->add_option("--c", t35.c, "space-form curvature")->required();
  theorem35->add_option("--eps", t35.eps, "causal character of the normal")->capture_default_str();
  theorem35->add_option("--lambda", t35.lambda, "PMCV constant")->required();
  theorem35->add_option("--kind", t35.kind, "real or imaginary")->capture_default_str();

  ClassifyOptions cls;
  auto* classify = app.add_subcommand("classify", "Lorentzian form II/III classification lookup");
  classify->add_option("--n", cls.n, "dimension")->required();
  classify->add_option("--l", cls.l, "multiplicity of the Jordan eigenvalue")->required();
  classify->add_option("--lambda", cls.lambda, "PMCV constant")->required();
  classify->add_option("--ambient", cls.ambient, "ads (H^{n+1}_1(-1)) or ds (S^{n+1}_1(1))")->capture_default_str();
  classify->add_option("--form", cls.form, "II or III")->capture_default_str();

  std::string matrix_path;
  std::string metric_path;
  double spectrum_tol = pmcv::kDefaultTolerance;
  auto* spectrum = app.add_subcommand("spectrum", "eigenstructure and canonical form of a shape operator");
  spectrum->add_option("--matrix", matrix_path, "JSON file with the shape operator (row-major)")->required();
  spectrum->add_option("--metric", metric_path, "JSON file with the Lorentzian metric")->required();
  spectrum->add_option("--tol", spectrum_tol, "rank tolerance")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  try {
    if (*verify) return cmd_verify(verify_opts, output);
    if (*report) return cmd_report(report_opts, output);
    if (*theorem35) return cmd_theorem35(t35, output);
    if (*classify) return cmd_classify(cls, output);
    if (*spectrum) return cmd_spectrum(matrix_path, metric_path, spectrum_tol, output);
  } catch (const pmcv::AmbiguityError& e) {
    std::cerr << "error: " << e.what() << '\n';
    for (const auto& c : e.candidates()) std::cerr << "  candidate: " << c.description << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
