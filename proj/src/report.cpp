#include "pmcv/report.hpp"

#include "pmcv/errors.hpp"

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>

namespace pmcv {

namespace {

using ojson = nlohmann::ordered_json;

std::string format_number(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write(std::ostringstream& os, const ojson& j, int indent, int depth) {
  const std::string pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
  const std::string close_pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case ojson::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << '{' << nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ',' << nl;
        first = false;
        os << pad << ojson(it.key()).dump() << (indent > 0 ? ": " : ":");
        write(os, it.value(), indent, depth + 1);
      }
      os << nl << close_pad << '}';
      return;
    }
    case ojson::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      os << '[' << nl;
      bool first = true;
      for (const auto& v : j) {
        if (!first) os << ',' << nl;
        first = false;
        os << pad;
        write(os, v, indent, depth + 1);
      }
      os << nl << close_pad << ']';
      return;
    }
    case ojson::value_t::number_float:
      os << format_number(j.get<double>());
      return;
    default:
      os << j.dump();
  }
}

ojson number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

ojson vector_to_json(const Eigen::VectorXd& v) {
  ojson a = ojson::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v(i)));
  return a;
}

}  // namespace

std::string dump_deterministic(const ojson& j, int indent) {
  std::ostringstream os;
  write(os, j, indent, 0);
  return os.str();
}

ojson matrix_to_json(const Eigen::MatrixXd& m) {
  ojson rows = ojson::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ojson row = ojson::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(number(m(i, k)));
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw DomainError("matrix must be a non-empty array of rows");
  const std::size_t cols = j.front().is_array() ? j.front().size() : 0;
  if (cols == 0) throw DomainError("matrix rows must be non-empty arrays");
  Eigen::MatrixXd m(j.size(), cols);
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != cols) throw DomainError("matrix rows must all have the same length");
    for (std::size_t k = 0; k < cols; ++k) {
      if (!j[i][k].is_number()) throw DomainError("matrix entries must be numbers");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = j[i][k].get<double>();
    }
  }
  return m;
}

ojson to_json(const ShapeSpectrum& s) {
  ojson out;
  out["form"] = to_string(s.form_tag);
  ojson reals = ojson::array();
  for (const auto& ev : s.real_eigenvalues) {
    ojson e;
    e["value"] = number(ev.value);
    e["algebraic"] = ev.algebraic;
    e["geometric"] = ev.geometric;
    e["jordan_blocks"] = ev.jordan_blocks;
    reals.push_back(e);
  }
  out["real"] = reals;
  ojson pairs = ojson::array();
  for (const auto& p : s.complex_pairs) {
    ojson e;
    e["gamma"] = number(p.gamma);
    e["tau"] = number(p.tau);
    e["multiplicity"] = p.multiplicity;
    pairs.push_back(e);
  }
  out["complex"] = pairs;
  ojson cp = ojson::array();
  for (double c : s.char_poly) cp.push_back(number(c));
  out["char_poly"] = cp;
  out["jordan_consistent"] = s.jordan_consistent;
  return out;
}

ojson to_json(const TwoCurvatureValues& v) {
  ojson out;
  out["branch"] = v.branch;
  out["kind"] = v.kind == CurvatureKind::kReal ? "real" : "imaginary";
  out["H2"] = number(v.H2);
  if (v.kind == CurvatureKind::kReal) {
    out["mu2"] = number(v.mu2);
    out["nu2"] = number(v.nu2);
  } else {
    out["gamma2"] = number(v.gamma2);
    out["tau2"] = number(v.tau2);
  }
  out["feasibility_margin"] = number(v.feasibility_margin);
  out["special_case"] = to_string(v.special_case);
  out["admissible"] = v.admissible;
  if (!v.note.empty()) out["note"] = v.note;
  return out;
}

ojson to_json(const TheoremStatus& t) {
  ojson out;
  out["status"] = to_string(t.status);
  out["margin"] = number(t.margin);
  out["detail"] = t.detail;
  return out;
}

ojson to_json(const GridSpec& g) {
  ojson out;
  out["counts"] = g.counts;
  out["lower"] = vector_to_json(g.lower);
  out["upper"] = vector_to_json(g.upper);
  return out;
}

ojson report_to_json(const PMCVReport& r, const InstanceDescriptor& d, const CatalogInstance& inst, const GridSpec& grid) {
  ojson out;
  ojson instance = to_json(d);
  instance["name"] = inst.immersion.name();
  instance["ambient"] = inst.immersion.space_form().name();
  instance["closure"] = inst.closure;
  if (inst.frame) {
    instance["frame_drift"] = number(inst.frame->drift());
    instance["frame_projections"] = inst.frame->projections();
  }
  out["instance"] = instance;
  ojson g = to_json(grid);
  g["points"] = r.points;
  out["grid"] = g;

  ojson ext;
  ext["epsilon"] = r.epsilon;
  ext["mean_curvature"] = number(r.mean_curvature);
  ext["mean_curvature_spread"] = number(r.mean_curvature_spread);
  ext["trace_A2"] = number(r.trace_A2);
  ext["minimal"] = r.minimal;
  ext["isoparametric"] = r.isoparametric.isoparametric;
  ext["char_poly_spread"] = number(r.isoparametric.coefficient_spread);
  ext["form_tags"] = r.form_tags;
  out["extrinsic_summary"] = ext;

  if (r.spectrum) {
    ojson s = to_json(*r.spectrum);
    if (r.representative_shape) s["shape_operator"] = matrix_to_json(*r.representative_shape);
    if (!r.spectrum_error.empty()) s["error"] = r.spectrum_error;
    out["spectrum"] = s;
  } else {
    ojson s;
    s["error"] = r.spectrum_error;
    out["spectrum"] = s;
  }

  ojson pm;
  pm["lambda"] = r.lambda_estimate ? number(*r.lambda_estimate) : ojson(nullptr);
  pm["spread"] = number(r.lambda_spread);
  pm["minimal"] = r.minimal;
  ojson res;
  res["condition1"] = number(r.eq1_residual_max);
  res["grad_H"] = number(r.gradH_norm_max);
  res["laplacian_H"] = number(r.laplacian_H_max);
  res["gauss"] = number(r.gauss_max);
  res["codazzi"] = number(r.codazzi_max);
  res["weingarten"] = number(r.weingarten_max);
  res["normal"] = number(r.normal_defect_max);
  res["quadric"] = number(r.quadric_max);
  res["self_adjointness"] = number(r.self_adjointness_max);
  pm["residuals"] = res;
  out["pmcv"] = pm;

  ojson th;
  th["t33"] = to_json(r.t33);
  th["t35"] = to_json(r.t35);
  th["t45_t46"] = to_json(r.t45_t46);
  out["theorems"] = th;

  ojson checks = ojson::array();
  for (const auto& c : r.checks) {
    ojson e;
    e["name"] = c.name;
    e["status"] = to_string(c.status);
    e["margin"] = number(c.margin);
    checks.push_back(e);
  }
  out["checks"] = checks;
  if (!r.failures.empty()) {
    ojson f = ojson::array();
    for (const auto& p : r.failures) {
      ojson e;
      e["index"] = p.index;
      e["message"] = p.message;
      f.push_back(e);
    }
    out["failures"] = f;
  }
  return out;
}

void write_grid_csv(std::ostream& out, const PMCVReport& r) {
  if (r.grid_points.empty()) return;
  const auto n = r.grid_points.front().size();
  for (Eigen::Index i = 0; i < n; ++i) out << 'u' << i + 1 << ',';
  out << 'H';
  for (std::size_t k = 0; k < r.grid_char_poly.front().size(); ++k) out << ",c" << k;
  out << '\n';
  for (std::size_t p = 0; p < r.grid_points.size(); ++p) {
    for (Eigen::Index i = 0; i < n; ++i) out << format_number(r.grid_points[p](i)) << ',';
    out << format_number(r.grid_H[p]);
    for (double c : r.grid_char_poly[p]) out << ',' << format_number(c);
    out << '\n';
  }
}

}  // namespace pmcv
