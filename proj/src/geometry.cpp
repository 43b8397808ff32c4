#include "pmcv/geometry.hpp"

#include "pmcv/errors.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pmcv {

SpaceForm::SpaceForm(int n, int index, double c)
    : n_(n),
      index_(index),
      c_(c),
      metric_(MetricMatrix::pseudo_euclidean(Signature(n + 2, c > 0 ? index : index + 1))) {
  if (n < 1) throw DimensionError("space form needs hypersurface dimension n >= 1");
  if (c == 0.0) throw DomainError("space form curvature must be nonzero");
  if (index < 0 || index > n + 1) throw DimensionError("space form index must lie in [0, n+1]");
}

Signature SpaceForm::ambient_signature() const { return metric_.signature(); }

std::string SpaceForm::name() const {
  std::ostringstream os;
  os << (c_ > 0 ? "S^" : "H^") << dim() << "_" << index_ << "(" << c_ << ")";
  return os.str();
}

bool ChartBox::contains(const Eigen::VectorXd& u) const {
  if (u.size() != lower.size()) return false;
  return (u.array() >= lower.array()).all() && (u.array() <= upper.array()).all();
}

GridSpec GridSpec::uniform(const ChartBox& box, int count_per_axis, double inset) {
  GridSpec g;
  g.counts.assign(box.dim(), count_per_axis);
  const Eigen::VectorXd pad = inset * (box.upper - box.lower);
  g.lower = box.lower + pad;
  g.upper = box.upper - pad;
  return g;
}

std::size_t GridSpec::size() const {
  std::size_t s = 1;
  for (int c : counts) s *= static_cast<std::size_t>(c);
  return counts.empty() ? 0 : s;
}

std::vector<Eigen::VectorXd> GridSpec::points() const {
  if (static_cast<int>(lower.size()) != dim() || static_cast<int>(upper.size()) != dim()) {
    throw DimensionError("grid bounds do not match the number of axis counts");
  }
  for (int c : counts) {
    if (c < 1) throw DomainError("grid counts must be positive");
  }
  std::vector<Eigen::VectorXd> out;
  out.reserve(size());
  std::vector<int> idx(dim(), 0);
  for (std::size_t k = 0; k < size(); ++k) {
    Eigen::VectorXd u(dim());
    for (int a = 0; a < dim(); ++a) {
      u[a] = counts[a] == 1 ? 0.5 * (lower[a] + upper[a])
                            : lower[a] + (upper[a] - lower[a]) * idx[a] / (counts[a] - 1);
    }
    out.push_back(std::move(u));
    for (int a = dim() - 1; a >= 0; --a) {
      if (++idx[a] < counts[a]) break;
      idx[a] = 0;
    }
  }
  return out;
}

Immersion::Immersion(SpaceForm space_form, ChartBox domain, MapFn map, std::string name)
    : space_form_(std::move(space_form)), domain_(std::move(domain)), map_(std::move(map)), name_(std::move(name)) {
  if (domain_.lower.size() != domain_.upper.size()) throw DimensionError("domain bounds differ in length");
  if (domain_.dim() != space_form_.hypersurface_dim()) throw DimensionError("chart dimension must equal the hypersurface dimension");
  if ((domain_.lower.array() > domain_.upper.array()).any()) throw DomainError("domain lower bound exceeds upper bound");
}

ImmersionJet Immersion::jet(const Eigen::VectorXd& u, int order) const {
  if (u.size() != chart_dim()) throw DimensionError("chart point has wrong dimension");
  if (!domain_.contains(u)) {
    std::ostringstream os;
    os << "chart point (" << u.transpose() << ") lies outside the domain of " << name_;
    throw DomainError(os.str());
  }
  auto vars = Jet::variables(order, std::span<const double>(u.data(), static_cast<std::size_t>(u.size())));
  ImmersionJet out{u, map_(vars)};
  if (out.ambient_dim() != space_form_.ambient_dim()) throw DimensionError("immersion map returned the wrong number of components");
  return out;
}

Eigen::VectorXd Immersion::position(const Eigen::VectorXd& u) const { return jet(u, 0).value(); }

double Immersion::quadric_residual(const Eigen::VectorXd& u) const {
  const Eigen::VectorXd x = position(u);
  return std::abs(indefinite_inner(x, x, space_form_.ambient_metric()) - 1.0 / space_form_.curvature());
}

std::string to_string(NormalOrientation o) {
  return o == NormalOrientation::kFirstComponent ? "first_component" : "positive_frame";
}

namespace {

using JetVec = std::vector<Jet>;

/// Solves M X = R for square jet matrices (row-major m x m and m x k) by
/// elimination with partial pivoting on the constant terms.
JetVec solve_jets(JetVec m, JetVec r, int dim, int rhs_cols) {
  for (int col = 0; col < dim; ++col) {
    int piv = col;
    for (int i = col + 1; i < dim; ++i) {
      if (std::abs(m[i * dim + col].value()) > std::abs(m[piv * dim + col].value())) piv = i;
    }
    if (m[piv * dim + col].value() == 0.0) throw DegenerateError("singular jet system");
    if (piv != col) {
      for (int j = 0; j < dim; ++j) std::swap(m[piv * dim + j], m[col * dim + j]);
      for (int j = 0; j < rhs_cols; ++j) std::swap(r[piv * rhs_cols + j], r[col * rhs_cols + j]);
    }
    const Jet inv = reciprocal(m[col * dim + col]);
    for (int i = col + 1; i < dim; ++i) {
      const Jet f = m[i * dim + col] * inv;
      for (int j = col + 1; j < dim; ++j) m[i * dim + j] -= f * m[col * dim + j];
      for (int j = 0; j < rhs_cols; ++j) r[i * rhs_cols + j] -= f * r[col * rhs_cols + j];
    }
  }
  JetVec x(r.size());
  for (int i = dim - 1; i >= 0; --i) {
    const Jet inv = reciprocal(m[i * dim + i]);
    for (int j = 0; j < rhs_cols; ++j) {
      Jet acc = r[i * rhs_cols + j];
      for (int k = i + 1; k < dim; ++k) acc -= m[i * dim + k] * x[k * rhs_cols + j];
      x[i * rhs_cols + j] = acc * inv;
    }
  }
  return x;
}

Eigen::MatrixXd values(const JetVec& v, int rows, int cols) {
  Eigen::MatrixXd out(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) out(i, j) = v[i * cols + j].value();
  return out;
}

std::vector<int> unit_index(int vars, int i) {
  std::vector<int> e(vars, 0);
  e[i] = 1;
  return e;
}

/// Jets of the induced structure truncated to `order`; the immersion jet must have order + 2.
struct DerivedJets {
  int n = 0;
  int ambient = 0;
  int order = 0;
  JetVec position;   // N
  JetVec tangents;   // n x N
  JetVec hessian;    // (n*n) x N, entry (i*n+j)*N + a
  JetVec metric;     // n x n
  JetVec normal;     // N
  int epsilon = 1;
  JetVec b;          // n x n, <d_ij x, xi>
  JetVec shape;      // n x n, A^k_j at [k*n + j]
  Jet mean_curvature;
};

DerivedJets derive(const Immersion& imm, const ImmersionJet& x, int order, NormalOrientation orientation) {
  DerivedJets d;
  d.n = x.chart_dim();
  d.ambient = x.ambient_dim();
  d.order = order;
  const int n = d.n;
  const int N = d.ambient;
  if (x.order() < order + 2) throw DimensionError("immersion jet order too low for the requested derived order");
  const Eigen::VectorXd eta = imm.space_form().ambient_metric().entries().diagonal();

  d.position.reserve(N);
  for (const auto& c : x.components) d.position.push_back(c.truncated(order));
  d.tangents.reserve(n * N);
  std::vector<JetVec> first(n);
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < N; ++a) {
      Jet p = x.components[a].partial(i);
      d.tangents.push_back(p.truncated(order));
      first[i].push_back(std::move(p));
    }
  }
  d.hessian.resize(static_cast<std::size_t>(n * n * N));
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      for (int a = 0; a < N; ++a) {
        Jet s = first[i][a].partial(j).truncated(order);
        d.hessian[(j * n + i) * N + a] = s;
        d.hessian[(i * n + j) * N + a] = std::move(s);
      }
    }
  }

  const auto layout = d.position.front().layout();
  d.metric.assign(n * n, Jet(layout));
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      Jet g = Jet::constant(layout, 0.0);
      for (int a = 0; a < N; ++a) g += eta[a] * (d.tangents[i * N + a] * d.tangents[j * N + a]);
      d.metric[j * n + i] = g;
      d.metric[i * n + j] = std::move(g);
    }
  }
  const Eigen::MatrixXd g0 = values(d.metric, n, n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ges(g0, Eigen::EigenvaluesOnly);
  const double gscale = std::max(1.0, ges.eigenvalues().cwiseAbs().maxCoeff());
  if (ges.eigenvalues().cwiseAbs().minCoeff() <= 1e-10 * gscale) {
    std::ostringstream os;
    os << "degenerate induced metric at u = (" << x.base_point.transpose() << ")";
    throw DegenerateError(os.str());
  }

  // Normal: rows <., x> and <., d_i x>, completed by the base-point kernel direction.
  Eigen::MatrixXd rows0(n + 1, N);
  for (int a = 0; a < N; ++a) {
    rows0(0, a) = eta[a] * d.position[a].value();
    for (int i = 0; i < n; ++i) rows0(i + 1, a) = eta[a] * d.tangents[i * N + a].value();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(rows0, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv[sv.size() - 1] <= 1e-12 * std::max(1.0, sv[0])) {
    throw DegenerateError("position and tangent vectors are linearly dependent");
  }
  Eigen::VectorXd kernel = svd.matrixV().col(N - 1);
  JetVec sys;
  sys.reserve(N * N);
  for (int a = 0; a < N; ++a) sys.push_back(eta[a] * d.position[a]);
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < N; ++a) sys.push_back(eta[a] * d.tangents[i * N + a]);
  for (int a = 0; a < N; ++a) sys.push_back(Jet::constant(layout, kernel[a]));
  JetVec rhs(N, Jet::constant(layout, 0.0));
  rhs[N - 1] = Jet::constant(layout, 1.0);
  JetVec raw = solve_jets(std::move(sys), std::move(rhs), N, 1);

  Jet q = Jet::constant(layout, 0.0);
  for (int a = 0; a < N; ++a) q += eta[a] * (raw[a] * raw[a]);
  double raw_norm2 = 0.0;
  for (int a = 0; a < N; ++a) raw_norm2 += raw[a].value() * raw[a].value();
  if (std::abs(q.value()) <= 1e-8 * raw_norm2) {
    std::ostringstream os;
    os << "lightlike normal direction at u = (" << x.base_point.transpose() << ")";
    throw DegenerateError(os.str());
  }
  d.epsilon = q.value() > 0 ? 1 : -1;

  double sign = 1.0;
  if (orientation == NormalOrientation::kFirstComponent) {
    double big = 0.0;
    for (int a = 0; a < N; ++a) big = std::max(big, std::abs(raw[a].value()));
    for (int a = 0; a < N; ++a) {
      if (std::abs(raw[a].value()) > 1e-10 * big) {
        sign = raw[a].value() > 0 ? 1.0 : -1.0;
        break;
      }
    }
  } else {
    Eigen::MatrixXd frame(N, N);
    for (int a = 0; a < N; ++a) {
      frame(a, 0) = d.position[a].value();
      for (int i = 0; i < n; ++i) frame(a, i + 1) = d.tangents[i * N + a].value();
      frame(a, N - 1) = raw[a].value();
    }
    sign = (frame.determinant() > 0 ? 1.0 : -1.0) * imm.orientation_sign();
  }
  const Jet scale = pow(d.epsilon * q, -0.5) * sign;
  d.normal.reserve(N);
  for (int a = 0; a < N; ++a) d.normal.push_back(raw[a] * scale);

  d.b.assign(n * n, Jet(layout));
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      Jet s = Jet::constant(layout, 0.0);
      for (int a = 0; a < N; ++a) s += eta[a] * (d.hessian[(i * n + j) * N + a] * d.normal[a]);
      d.b[j * n + i] = s;
      d.b[i * n + j] = std::move(s);
    }
  }
  d.shape = solve_jets(d.metric, d.b, n, n);
  Jet trace = Jet::constant(layout, 0.0);
  for (int i = 0; i < n; ++i) trace += d.shape[i * n + i];
  d.mean_curvature = trace * (static_cast<double>(d.epsilon) / n);
  return d;
}

ExtrinsicData to_extrinsic(const DerivedJets& d, const Eigen::VectorXd& u) {
  const int n = d.n;
  ExtrinsicData e{u, MetricMatrix(values(d.metric, n, n), 1e-12), Eigen::VectorXd(d.ambient), d.epsilon,
                  Eigen::MatrixXd(), Eigen::MatrixXd(), 0.0};
  for (int a = 0; a < d.ambient; ++a) e.normal[a] = d.normal[a].value();
  e.shape_operator = values(d.shape, n, n);
  e.second_form = d.epsilon * values(d.b, n, n);
  e.mean_curvature = d.mean_curvature.value();
  return e;
}

/// Gamma^k_ij as jets one order below the metric jets.
std::vector<JetVec> christoffel_jets(const DerivedJets& d) {
  const int n = d.n;
  const auto lower_layout = JetLayout::get(n, d.order - 1);
  JetVec metric_low;
  for (const auto& g : d.metric) metric_low.push_back(g.truncated(d.order - 1));
  JetVec ident(n * n, Jet::constant(lower_layout, 0.0));
  for (int i = 0; i < n; ++i) ident[i * n + i] = Jet::constant(lower_layout, 1.0);
  const JetVec inv = solve_jets(metric_low, ident, n, n);
  // dg[l][i*n+j] = d_l g_ij
  std::vector<JetVec> dg(n);
  for (int l = 0; l < n; ++l)
    for (const auto& g : d.metric) dg[l].push_back(g.partial(l));
  std::vector<JetVec> gamma(n, JetVec(n * n));
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      JetVec lowered(n);
      for (int l = 0; l < n; ++l) lowered[l] = 0.5 * (dg[i][j * n + l] + dg[j][i * n + l] - dg[l][i * n + j]);
      for (int k = 0; k < n; ++k) {
        Jet s = Jet::constant(lower_layout, 0.0);
        for (int l = 0; l < n; ++l) s += inv[k * n + l] * lowered[l];
        gamma[k][j * n + i] = s;
        gamma[k][i * n + j] = std::move(s);
      }
    }
  }
  return gamma;
}

Christoffel christoffel_values(const std::vector<JetVec>& gamma, int n) {
  Christoffel out;
  for (const auto& g : gamma) out.push_back(values(g, n, n));
  return out;
}

GaussCodazziResiduals curvature_residuals(const DerivedJets& d, const std::vector<JetVec>& gamma,
                                          double c, std::span<const IndexTriple> basis) {
  const int n = d.n;
  const Christoffel G0 = christoffel_values(gamma, n);
  // dG[m][k](i,j) = d_m Gamma^k_ij
  std::vector<Christoffel> dG(n, Christoffel(n, Eigen::MatrixXd(n, n)));
  for (int m = 0; m < n; ++m) {
    const auto e = unit_index(n, m);
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) dG[m][k](i, j) = gamma[k][i * n + j].derivative(e);
  }
  const Eigen::MatrixXd g = values(d.metric, n, n);
  const Eigen::MatrixXd A = values(d.shape, n, n);
  const Eigen::MatrixXd b = values(d.b, n, n);
  std::vector<Eigen::MatrixXd> dA(n, Eigen::MatrixXd(n, n));
  for (int m = 0; m < n; ++m) {
    const auto e = unit_index(n, m);
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j) dA[m](k, j) = d.shape[k * n + j].derivative(e);
  }
  // nablaA[i](k, j) = (nabla_i A)^k_j
  std::vector<Eigen::MatrixXd> nablaA(n, Eigen::MatrixXd(n, n));
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      for (int j = 0; j < n; ++j) {
        double s = dA[i](k, j);
        for (int l = 0; l < n; ++l) s += G0[k](i, l) * A(l, j) - G0[l](i, j) * A(k, l);
        nablaA[i](k, j) = s;
      }
    }
  }

  std::vector<IndexTriple> all;
  if (basis.empty()) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) all.push_back({i, j, k});
    basis = all;
  }
  GaussCodazziResiduals out;
  for (const auto& t : basis) {
    const int i = t.i;
    const int j = t.j;
    const int k = t.k;
    if (i < 0 || j < 0 || k < 0 || i >= n || j >= n || k >= n) throw DimensionError("basis index out of range");
    double cod = 0.0;
    for (int m = 0; m < n; ++m) cod += g(k, m) * (nablaA[i](m, j) - nablaA[j](m, i));
    out.codazzi = std::max(out.codazzi, std::abs(cod));
    for (int l = 0; l < n; ++l) {
      double r = dG[i][l](j, k) - dG[j][l](i, k);
      for (int m = 0; m < n; ++m) r += G0[l](i, m) * G0[m](j, k) - G0[l](j, m) * G0[m](i, k);
      const double dij = (l == i ? 1.0 : 0.0);
      const double dji = (l == j ? 1.0 : 0.0);
      const double rhs = c * (g(j, k) * dij - g(i, k) * dji) + d.epsilon * (b(j, k) * A(l, i) - b(i, k) * A(l, j));
      out.gauss = std::max(out.gauss, std::abs(r - rhs));
    }
  }
  return out;
}

}  // namespace

MetricMatrix first_fundamental_form(const Immersion& imm, const Eigen::VectorXd& u) {
  const ImmersionJet x = imm.jet(u, 1);
  const int n = x.chart_dim();
  const auto& eta = imm.space_form().ambient_metric();
  Eigen::MatrixXd t(x.ambient_dim(), n);
  for (int i = 0; i < n; ++i) t.col(i) = x.coefficient(unit_index(n, i));
  Eigen::MatrixXd g = t.transpose() * eta.entries() * t;
  try {
    return MetricMatrix(g, 1e-10);
  } catch (const DegenerateError&) {
    std::ostringstream os;
    os << "degenerate induced metric at u = (" << u.transpose() << ")";
    throw DegenerateError(os.str());
  }
}

UnitNormal unit_normal(const Immersion& imm, const Eigen::VectorXd& u, NormalOrientation orientation) {
  const DerivedJets d = derive(imm, imm.jet(u, 2), 0, orientation);
  UnitNormal out{Eigen::VectorXd(d.ambient), d.epsilon};
  for (int a = 0; a < d.ambient; ++a) out.xi[a] = d.normal[a].value();
  return out;
}

ExtrinsicData extrinsic_data(const Immersion& imm, const Eigen::VectorXd& u, NormalOrientation orientation) {
  return to_extrinsic(derive(imm, imm.jet(u, 2), 0, orientation), u);
}

Eigen::MatrixXd second_fundamental_form(const Immersion& imm, const Eigen::VectorXd& u, NormalOrientation orientation) {
  return extrinsic_data(imm, u, orientation).second_form;
}

Eigen::MatrixXd shape_operator(const Immersion& imm, const Eigen::VectorXd& u, NormalOrientation orientation) {
  return extrinsic_data(imm, u, orientation).shape_operator;
}

Christoffel christoffel(const Immersion& imm, const Eigen::VectorXd& u) {
  const DerivedJets d = derive(imm, imm.jet(u, 3), 1, NormalOrientation::kFirstComponent);
  return christoffel_values(christoffel_jets(d), d.n);
}

GaussCodazziResiduals gauss_codazzi_residuals(const Immersion& imm, const Eigen::VectorXd& u,
                                              std::span<const IndexTriple> basis) {
  const DerivedJets d = derive(imm, imm.jet(u, 4), 2, NormalOrientation::kFirstComponent);
  return curvature_residuals(d, christoffel_jets(d), imm.space_form().curvature(), basis);
}

double laplace_beltrami(const Immersion& imm, const ScalarField& f, const Eigen::VectorXd& u) {
  const int n = imm.chart_dim();
  Eigen::VectorXd h(n);
  for (int i = 0; i < n; ++i) h[i] = 1e-3 * (1.0 + std::abs(u[i]));
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd lo = u;
    Eigen::VectorXd hi = u;
    lo[i] -= 2.0 * h[i];
    hi[i] += 2.0 * h[i];
    if (!imm.domain().contains(lo) || !imm.domain().contains(hi)) {
      throw DomainError("finite-difference stencil leaves the domain box");
    }
  }
  static constexpr double kFirst[5] = {1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12};
  static constexpr double kSecond[5] = {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12};
  const double f0 = f(u);
  auto shifted = [&](int i, double di, int j, double dj) {
    Eigen::VectorXd v = u;
    v[i] += di;
    if (j >= 0) v[j] += dj;
    return f(v);
  };
  auto first = [&](int i, double step) {
    double s = 0.0;
    for (int a = 0; a < 5; ++a) {
      if (a != 2) s += kFirst[a] * shifted(i, (a - 2) * step, -1, 0.0);
    }
    return s / step;
  };
  auto second = [&](int i, double step) {
    double s = kSecond[2] * f0;
    for (int a = 0; a < 5; ++a) {
      if (a != 2) s += kSecond[a] * shifted(i, (a - 2) * step, -1, 0.0);
    }
    return s / (step * step);
  };
  auto mixed = [&](int i, int j, double si, double sj) {
    double s = 0.0;
    for (int a = 0; a < 5; ++a) {
      if (a == 2) continue;
      for (int b = 0; b < 5; ++b) {
        if (b != 2) s += kFirst[a] * kFirst[b] * shifted(i, (a - 2) * si, j, (b - 2) * sj);
      }
    }
    return s / (si * sj);
  };
  auto richardson = [](double coarse, double fine) { return (16.0 * fine - coarse) / 15.0; };

  Eigen::VectorXd df(n);
  Eigen::MatrixXd hess(n, n);
  for (int i = 0; i < n; ++i) {
    df[i] = richardson(first(i, h[i]), first(i, 0.5 * h[i]));
    hess(i, i) = richardson(second(i, h[i]), second(i, 0.5 * h[i]));
    for (int j = 0; j < i; ++j) {
      hess(i, j) = hess(j, i) = richardson(mixed(i, j, h[i], h[j]), mixed(i, j, 0.5 * h[i], 0.5 * h[j]));
    }
  }
  const Christoffel gamma = christoffel(imm, u);
  const Eigen::MatrixXd ginv = first_fundamental_form(imm, u).entries().inverse();
  double out = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double s = hess(i, j);
      for (int k = 0; k < n; ++k) s -= gamma[k](i, j) * df[k];
      out += ginv(i, j) * s;
    }
  }
  return out;
}

PointGeometry point_geometry(const Immersion& imm, const Eigen::VectorXd& u, NormalOrientation orientation) {
  const ImmersionJet x = imm.jet(u, 4);
  const DerivedJets d = derive(imm, x, 2, orientation);
  const int n = d.n;
  const int N = d.ambient;
  PointGeometry p;
  p.extrinsic = to_extrinsic(d, u);
  const auto gamma = christoffel_jets(d);
  p.christoffel = christoffel_values(gamma, n);
  p.residuals = curvature_residuals(d, gamma, imm.space_form().curvature(), {});

  const Eigen::MatrixXd& g = p.extrinsic.metric.entries();
  const Eigen::MatrixXd ginv = g.inverse();
  p.dH.resize(n);
  Eigen::MatrixXd ddH(n, n);
  for (int i = 0; i < n; ++i) {
    p.dH[i] = d.mean_curvature.derivative(unit_index(n, i));
    for (int j = 0; j < n; ++j) {
      auto e = unit_index(n, i);
      e[j] += 1;
      ddH(i, j) = d.mean_curvature.derivative(e);
    }
  }
  p.grad_H = ginv * p.dH;
  double lap = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double s = ddH(i, j);
      for (int k = 0; k < n; ++k) s -= p.christoffel[k](i, j) * p.dH[k];
      lap += ginv(i, j) * s;
    }
  }
  p.laplacian_H = lap;

  const Eigen::VectorXd eta = imm.space_form().ambient_metric().entries().diagonal();
  Eigen::MatrixXd tangents(N, n);
  Eigen::VectorXd xi(N);
  Eigen::VectorXd pos(N);
  for (int a = 0; a < N; ++a) {
    xi[a] = d.normal[a].value();
    pos[a] = d.position[a].value();
    for (int i = 0; i < n; ++i) tangents(a, i) = d.tangents[i * N + a].value();
  }
  const Eigen::VectorXd eta_xi = eta.cwiseProduct(xi);
  p.normal_defect = std::max(std::abs(eta_xi.dot(pos)), (tangents.transpose() * eta_xi).cwiseAbs().maxCoeff());
  p.quadric_residual = std::abs(pos.dot(eta.cwiseProduct(pos)) - 1.0 / imm.space_form().curvature());

  // Tangential part of d_i xi must equal -A d_i.
  const Eigen::MatrixXd A = p.extrinsic.shape_operator;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd dxi(N);
    for (int a = 0; a < N; ++a) dxi[a] = d.normal[a].derivative(unit_index(n, i));
    const Eigen::VectorXd coords = ginv * (tangents.transpose() * eta.cwiseProduct(dxi));
    p.weingarten_defect = std::max(p.weingarten_defect, (coords + A.col(i)).cwiseAbs().maxCoeff());
  }
  return p;
}

std::vector<Jet> sphere_point(std::span<const Jet> angles) {
  if (angles.empty()) throw DimensionError("sphere_point needs at least one angle");
  std::vector<Jet> out;
  out.reserve(angles.size() + 1);
  Jet s = Jet::constant(angles.front().layout(), 1.0);
  for (const auto& a : angles) {
    out.push_back(s * cos(a));
    s = s * sin(a);
  }
  out.push_back(std::move(s));
  return out;
}

}  // namespace pmcv
