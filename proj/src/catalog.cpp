#include "pmcv/catalog.hpp"

#include "pmcv/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace pmcv {

namespace {

using JetVector = std::vector<Jet>;

constexpr double kSqrt2 = std::numbers::sqrt2;

void axpy(JetVector& acc, const Jet& coef, const JetVector& v) {
  for (std::size_t a = 0; a < acc.size(); ++a) acc[a] += coef * v[a];
}

void axpy(JetVector& acc, double coef, const JetVector& v) {
  for (std::size_t a = 0; a < acc.size(); ++a) acc[a] += coef * v[a];
}

JetVector zeros(const std::shared_ptr<const JetLayout>& layout, int dim) {
  return JetVector(dim, Jet::constant(layout, 0.0));
}

/// Frame rows E_1..E_N (index 0..N-1) as ambient jet vectors around t = t_jet.value().
std::vector<JetVector> frame_jets(const FrameField& frame, const Jet& t_jet) {
  const auto series = frame.series(t_jet.value(), t_jet.order());
  const Jet dt = t_jet.increment();
  const int rows = static_cast<int>(series[0].rows());
  const int cols = static_cast<int>(series[0].cols());
  std::vector<JetVector> out(rows, JetVector(cols));
  std::vector<double> coeffs(series.size());
  for (int i = 0; i < rows; ++i) {
    for (int a = 0; a < cols; ++a) {
      for (std::size_t k = 0; k < series.size(); ++k) coeffs[k] = series[k](i, a);
      out[i][a] = power_series(dt, coeffs);
    }
  }
  return out;
}

Eigen::MatrixXd null_pair_rows(int dim, int first, int second, int time_axis, int space_axis) {
  // Rows `first`, `second` become (e_time + e_space)/sqrt2 and (-e_time + e_space)/sqrt2.
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(dim, dim);
  e(first, time_axis) = e(first, space_axis) = 1.0 / kSqrt2;
  e(second, time_axis) = -1.0 / kSqrt2;
  e(second, space_axis) = 1.0 / kSqrt2;
  return e;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw DomainError(message);
}

void align_orientation(CatalogInstance& inst) {
  double expected_trace = 0.0;
  for (const auto& pc : inst.expected.principal) expected_trace += pc.value * pc.multiplicity;
  if (std::abs(expected_trace) < 1e-12) return;
  const Eigen::VectorXd u = inst.default_grid.lower + 0.5 * (inst.default_grid.upper - inst.default_grid.lower);
  const ExtrinsicData e = extrinsic_data(inst.immersion, u, NormalOrientation::kPositiveFrame);
  if (e.shape_operator.trace() * expected_trace < 0) inst.immersion.set_orientation_sign(-1);
}

GridSpec default_grid(const ChartBox& box) { return GridSpec::uniform(box, 5, 0.02); }

ExpectedGeometry two_curvature_expectation(int n, int p, double k1, double k2, FormTag form) {
  ExpectedGeometry e;
  if (p == n || k1 == k2) {
    e.principal = {{k1, n}};
  } else {
    e.principal = {{k1, p}, {k2, n - p}};
  }
  e.form = form;
  e.epsilon = 1;
  e.lambda = p * k1 * k1 + (n - p) * k2 * k2;
  e.mean_curvature = (p * k1 + (n - p) * k2) / n;
  return e;
}

CatalogInstance anti_de_sitter_instance(const AntiDeSitterParams& prm, bool three_block) {
  const int n = prm.n;
  const int p = prm.p;
  const int min_p = three_block ? 3 : 2;
  require(p >= min_p && p <= n, three_block ? "multiplicity p must satisfy 3 <= p <= n" : "multiplicity p must satisfy 2 <= p <= n");
  require(prm.mu != 0.0, "mu must be nonzero");
  require(prm.t1 > prm.t0, "t range must be increasing");
  require(prm.B.min_abs(prm.t0, prm.t1) > 0.0, "coefficient B must not vanish on the t range");
  const int N = n + 2;
  const double mu = prm.mu;
  const double m2 = mu * mu;

  // Frame indices below are 1-based in comments, 0-based in code.
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(N, N);
  Eigen::MatrixXd initial;
  const int partner = three_block ? 2 : 1;  // null partner of E1
  gram(0, partner) = gram(partner, 0) = 1.0;
  if (three_block) gram(1, 1) = 1.0;
  for (int i = 3; i < N - 1; ++i) gram(i, i) = 1.0;
  if (!three_block) gram(2, 2) = 1.0;
  gram(N - 1, N - 1) = -1.0;
  initial = null_pair_rows(N, 0, partner, 0, 2);
  if (three_block) {
    initial(1, 3) = 1.0;
    for (int i = 3; i < N - 1; ++i) initial(i, i + 1) = 1.0;
  } else {
    for (int i = 2; i < N - 1; ++i) initial(i, i + 1) = 1.0;
  }
  initial(N - 1, 1) = 1.0;

  auto spec = std::make_shared<FrameODESpec>(gram);
  spec->set_coefficient("B", prm.B.function());
  const int e1 = 0;
  const int e2 = three_block ? 1 : -1;
  const int ebar = partner;  // E2 for the two-block case, E3 for the three-block case
  const int en1 = N - 2;
  const int en2 = N - 1;
  if (three_block) {
    spec->add_term(e2, en1, -1.0, "B");   // E2' = -B E_{n+1}
  } else {
    spec->add_term(e1, en1, -1.0, "B");   // E1' = -B E_{n+1}
  }
  spec->add_term(ebar, en1, -mu);
  spec->add_term(ebar, en2, 1.0);
  spec->add_term(en1, e1, mu);
  spec->add_term(en1, three_block ? e2 : ebar, 1.0, "B");
  spec->add_term(en2, e1, 1.0);

  const MetricMatrix eta = MetricMatrix::pseudo_euclidean(Signature(N, 2));
  auto frame = std::make_shared<const FrameField>(integrate_frame(spec, prm.t0, prm.t1, initial, eta.entries(), prm.step));

  // y-box half width keeping the square roots real.
  int constrained = 0;
  double limit = 0.0;
  if (m2 > 1.0) {
    constrained = three_block ? 1 + std::max(0, p - 3) : p - 2;
    limit = 1.0 / (m2 - 1.0);
  } else if (m2 < 1.0) {
    constrained = n - p;
    limit = m2 / (1.0 - m2);
  }
  double w = 0.4;
  if (constrained > 0) w = std::min(w, std::sqrt(0.5 * limit / constrained));

  ChartBox box{Eigen::VectorXd::Constant(n, -w), Eigen::VectorXd::Constant(n, w)};
  box.lower[0] = prm.t0;
  box.upper[0] = prm.t1;

  Immersion::MapFn map = [frame, n, p, mu, m2, three_block](std::span<const Jet> u) {
    const auto E = frame_jets(*frame, u[0]);
    const int N = n + 2;
    const auto layout = u[0].layout();
    auto y = [&](int j) -> const Jet& { return u[j - 1]; };  // y_j, j = 2..n
    JetVector x = zeros(layout, N);
    for (int j = 2; j <= n; ++j) axpy(x, y(j), E[j - 1]);
    if (std::abs(m2 - 1.0) < 1e-14) {
      Jet s = Jet::constant(layout, 0.0);
      if (three_block) {
        s += y(2) * y(2);
        for (int i = 4; i <= n; ++i) s += y(i) * y(i);
      } else {
        for (int i = 3; i <= n; ++i) s += y(i) * y(i);
      }
      axpy(x, 1.0 + 0.5 * s, E[N - 1]);
      axpy(x, -0.5 * s, E[N - 2]);
      return x;
    }
    Jet r1 = Jet::constant(layout, 1.0 / ((m2 - 1.0) * (m2 - 1.0)));
    if (three_block) {
      r1 -= y(2) * y(2) / (m2 - 1.0);
      for (int i = 4; i <= p; ++i) r1 -= y(i) * y(i) / (m2 - 1.0);
    } else {
      for (int i = 3; i <= p; ++i) r1 -= y(i) * y(i) / (m2 - 1.0);
    }
    Jet r2 = Jet::constant(layout, m2 / ((m2 - 1.0) * (m2 - 1.0)));
    for (int a = p + 1; a <= n; ++a) r2 += y(a) * y(a) / (m2 - 1.0);
    r1 = sqrt(r1);
    r2 = sqrt(r2);
    JetVector U = E[N - 1];
    axpy(U, -mu, E[N - 2]);
    JetVector V = E[N - 2];
    axpy(V, -mu, E[N - 1]);
    const double s1 = (1.0 - m2) > 0 ? 1.0 : -1.0;
    const double s2 = mu * (1.0 - m2) > 0 ? 1.0 : -1.0;
    axpy(x, s1 * r1, U);
    axpy(x, s2 * r2, V);
    return x;
  };

  std::ostringstream name;
  name << (three_block ? "jordan3" : "jordan2") << "_anti_de_sitter(n=" << n << ", p=" << p << ", mu=" << mu << ")";
  CatalogInstance inst{three_block ? "4.2" : "4.1",
                       Immersion(SpaceForm(n, 1, -1.0), box, std::move(map), name.str()),
                       frame,
                       two_curvature_expectation(n, p, mu, 1.0 / mu, three_block ? FormTag::kIII : FormTag::kII),
                       default_grid(box),
                       "zero"};
  align_orientation(inst);
  return inst;
}

JetVector sphere_or_pole(std::span<const Jet> angles, const std::shared_ptr<const JetLayout>& layout) {
  if (angles.empty()) return {Jet::constant(layout, 1.0)};
  return sphere_point(angles);
}

}  // namespace

CoefficientFn ScalarProfile::function() const {
  const ScalarProfile p = *this;
  return [p](const Jet& t) -> Jet {
    switch (p.kind) {
      case Kind::kConstant: return Jet::constant(t.layout(), p.a);
      case Kind::kAffine: return p.a + p.b * t;
      case Kind::kSine: return p.a + p.b * sin(p.omega * t);
    }
    return Jet::constant(t.layout(), p.a);
  };
}

double ScalarProfile::operator()(double t) const {
  switch (kind) {
    case Kind::kConstant: return a;
    case Kind::kAffine: return a + b * t;
    case Kind::kSine: return a + b * std::sin(omega * t);
  }
  return a;
}

double ScalarProfile::min_abs(double t0, double t1) const {
  switch (kind) {
    case Kind::kConstant: return std::abs(a);
    case Kind::kAffine: {
      const double f0 = (*this)(t0);
      const double f1 = (*this)(t1);
      return f0 * f1 <= 0 ? 0.0 : std::min(std::abs(f0), std::abs(f1));
    }
    case Kind::kSine: return std::max(0.0, std::abs(a) - std::abs(b));
  }
  return 0.0;
}

double DeSitterParams::theta_from_cot(double k) {
  double theta = std::atan2(1.0, k) - std::numbers::pi / 4;
  if (theta < 0) theta += 2 * std::numbers::pi;
  return theta;
}

CatalogInstance jordan2_anti_de_sitter(const AntiDeSitterParams& params) { return anti_de_sitter_instance(params, false); }

CatalogInstance jordan3_anti_de_sitter(const AntiDeSitterParams& params) { return anti_de_sitter_instance(params, true); }


namespace {

void check_theta(double theta) {
  for (int k : {1, 3, 5, 7}) {
    if (std::abs(std::remainder(theta - k * std::numbers::pi / 4, 2 * std::numbers::pi)) < 1e-9) {
      throw DomainError("theta must avoid odd multiples of pi/4 (cot(theta + pi/4) is 0 or undefined)");
    }
  }
}

CatalogInstance de_sitter_instance(const DeSitterParams& prm, bool three_block) {
  const int n = prm.n;
  const int p = prm.p;
  const int N = n + 2;
  require(p >= (three_block ? 3 : 2) && p <= n,
          three_block ? "multiplicity p must satisfy 3 <= p <= n" : "multiplicity p must satisfy 2 <= p <= n");
  require(prm.t1 > prm.t0, "t range must be increasing");
  check_theta(prm.theta);
  const int b_count = three_block ? n + 1 : n;
  for (const auto& [i, f] : prm.B) {
    require(i >= 1 && i <= b_count, "coefficient index B_" + std::to_string(i) + " out of range");
  }
  auto b_profile = [&](int i) {
    auto it = prm.B.find(i);
    if (it != prm.B.end()) return it->second;
    if (three_block) return ScalarProfile::constant(0.0);
    return ScalarProfile::constant(i >= p ? 1.0 : 0.0);
  };
  if (!three_block) {
    double best = 0.0;
    for (int i = p; i <= n; ++i) best = std::max(best, b_profile(i).min_abs(prm.t0, prm.t1));
    require(best > 0.0, "sum of B_i^2 over i >= p must stay positive on the t range");
  }

  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(N, N);
  const int partner = three_block ? 2 : 1;
  gram(0, partner) = gram(partner, 0) = 1.0;
  for (int i = 0; i < N; ++i) {
    if (i != 0 && i != partner) gram(i, i) = 1.0;
  }
  Eigen::MatrixXd initial = null_pair_rows(N, 0, partner, 0, 1);
  int axis = 2;
  for (int i = 1; i < N; ++i) {
    if (i != partner) initial(i, axis++) = 1.0;
  }

  auto spec = std::make_shared<FrameODESpec>(gram);
  for (int i = 1; i <= b_count; ++i) spec->set_coefficient("B" + std::to_string(i), b_profile(i).function());
  auto B = [](int i) { return "B" + std::to_string(i); };
  std::vector<CouplingEntry> couplings = prm.C;
  if (three_block) {
    if (couplings.empty()) couplings.push_back({4, p + 2, ScalarProfile::constant(1.0)});
    bool nonzero = false;
    for (const auto& c : couplings) {
      require(c.r >= 4 && c.r <= p + 1 && c.alpha >= p + 2 && c.alpha <= n + 2,
              "coupling C_{r alpha} needs 4 <= r <= p+1 and p+2 <= alpha <= n+2");
      nonzero = nonzero || c.value.min_abs(prm.t0, prm.t1) > 0.0 || !c.value.is_constant();
      spec->set_coefficient("C" + std::to_string(c.r) + "_" + std::to_string(c.alpha), c.value.function());
    }
    require(nonzero, "coupling matrix C must not vanish identically");
    // E1' = B1 E2 + sum_{i>=4} B_{i-1} E_i, E2' = -E1 - B1 E3, E3' = E2
    spec->add_term(0, 1, 1.0, B(1));
    for (int i = 4; i <= N; ++i) spec->add_term(0, i - 1, 1.0, B(i - 1));
    spec->add_term(1, 0, -1.0);
    spec->add_term(1, 2, -1.0, B(1));
    spec->add_term(2, 1, 1.0);
    for (int r = 4; r <= N; ++r) spec->add_term(r - 1, 2, -1.0, B(r - 1));
    for (const auto& c : couplings) {
      const std::string name = "C" + std::to_string(c.r) + "_" + std::to_string(c.alpha);
      spec->add_term(c.r - 1, c.alpha - 1, 1.0, name);
      spec->add_term(c.alpha - 1, c.r - 1, -1.0, name);
    }
  } else {
    // E1' = sum_{i>=3} B_{i-2} E_i, E2' = -E3, E3' = E1 - B1 E2, E_k' = -B_{k-2} E2
    for (int i = 3; i <= N; ++i) spec->add_term(0, i - 1, 1.0, B(i - 2));
    spec->add_term(1, 2, -1.0);
    spec->add_term(2, 0, 1.0);
    spec->add_term(2, 1, -1.0, B(1));
    for (int k = 4; k <= N; ++k) spec->add_term(k - 1, 1, -1.0, B(k - 2));
  }

  const MetricMatrix eta = MetricMatrix::pseudo_euclidean(Signature(N, 1));
  auto frame = std::make_shared<const FrameField>(integrate_frame(spec, prm.t0, prm.t1, initial, eta.entries(), prm.step));

  const int y_angles = p - 2;
  const int z_angles = n - p;
  ChartBox box{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  box.lower[0] = prm.t0;
  box.upper[0] = prm.t1;
  box.lower[1] = -0.5;
  box.upper[1] = 0.5;
  for (int k = 2; k < n; ++k) {
    box.lower[k] = (three_block && k == 2) ? 0.2 : 0.3;
    box.upper[k] = 1.2;
  }

  const double theta = prm.theta;
  const double a = theta - std::numbers::pi / 4;
  const bool correction = prm.include_correction;
  Immersion::MapFn map = [frame, n, p, N, y_angles, z_angles, theta, a, couplings, three_block,
                          correction](std::span<const Jet> u) {
    const auto E = frame_jets(*frame, u[0]);
    const auto layout = u[0].layout();
    const Jet& v = u[1];
    const JetVector y = sphere_or_pole(u.subspan(2, y_angles), layout);
    const JetVector z = sphere_or_pole(u.subspan(2 + y_angles, z_angles), layout);
    JetVector P = zeros(layout, N);
    JetVector Q = zeros(layout, N);
    for (std::size_t j = 0; j < z.size(); ++j) axpy(Q, z[j], E[p + 1 + j]);  // z_alpha E_alpha, alpha = p+2..n+2
    if (three_block) {
      // P = v E3 + y3 E2 + sum_{r=4}^{p+1} y_r E_r
      axpy(P, v, E[2]);
      axpy(P, y[0], E[1]);
      for (int r = 4; r <= p + 1; ++r) axpy(P, y[r - 3], E[r - 1]);
    } else {
      // P = v E2 + sum_{i=3}^{p+1} y_i E_i
      axpy(P, v, E[1]);
      for (std::size_t i = 0; i < y.size(); ++i) axpy(P, y[i], E[2 + i]);
    }
    JetVector x = zeros(layout, N);
    axpy(x, std::cos(a), P);
    axpy(x, -std::sin(a), Q);
    if (three_block && correction) {
      Jet psi = Jet::constant(layout, 0.0);
      for (const auto& c : couplings) psi += y[c.r - 3] * z[c.alpha - p - 2] * c.value.function()(u[0]);
      axpy(x, -kSqrt2 * std::sin(theta) * (psi / y[0]), E[2]);
    }
    return x;
  };

  const double k = 1.0 / std::tan(theta + std::numbers::pi / 4);
  std::ostringstream name;
  name << (three_block ? "jordan3" : "jordan2") << "_de_sitter(n=" << n << ", p=" << p << ", theta=" << theta << ")";
  CatalogInstance inst{three_block ? "4.4" : "4.3",
                       Immersion(SpaceForm(n, 1, 1.0), box, std::move(map), name.str()),
                       frame,
                       two_curvature_expectation(n, p, k, -1.0 / k, three_block ? FormTag::kIII : FormTag::kII),
                       default_grid(box),
                       "n/a"};
  align_orientation(inst);
  return inst;
}

}  // namespace

CatalogInstance jordan2_de_sitter(const DeSitterParams& params) { return de_sitter_instance(params, false); }

CatalogInstance jordan3_de_sitter(const DeSitterParams& params) { return de_sitter_instance(params, true); }

CatalogInstance build_umbilical(const SpaceForm& sf, double mu, int epsilon) {
  if (epsilon != 1 && epsilon != -1) throw DomainError("epsilon must be +1 or -1");
  const int n = sf.hypersurface_dim();
  const int N = sf.ambient_dim();
  const double c = sf.curvature();
  const int amb_index = sf.ambient_signature().index;

  double sigma = epsilon;
  double d = 0.0;
  if (mu != 0.0) {
    const double k = c * mu * mu + epsilon * c * c;
    if (std::abs(k) < 1e-14) throw DegenerateError("umbilical slice would be cut by a lightlike hyperplane");
    sigma = k > 0 ? 1.0 : -1.0;
    d = (mu * c > 0 ? 1.0 : -1.0) * std::sqrt(sigma * mu * mu / k);
  }
  int a_axis = 0;
  if (sigma > 0) {
    if (amb_index == N) throw DegenerateError("no spacelike hyperplane normal available");
    a_axis = N - 1;
  } else {
    if (amb_index == 0) throw DegenerateError("no timelike hyperplane normal available in a Riemannian ambient space");
    a_axis = 0;
  }
  const double rho = 1.0 / c - sigma * d * d;
  if (std::abs(rho) < 1e-12) throw DegenerateError("umbilical slice degenerates to a light cone");
  const double rho_sign = rho > 0 ? 1.0 : -1.0;
  std::vector<int> sphere_axes;
  std::vector<int> flat_axes;
  for (int ax = 0; ax < N; ++ax) {
    if (ax == a_axis) continue;
    const double s = ax < amb_index ? -1.0 : 1.0;
    (s == rho_sign ? sphere_axes : flat_axes).push_back(ax);
  }
  if (sphere_axes.empty()) throw DegenerateError("no directions of the required causal character for the umbilical slice");
  const int n_angles = static_cast<int>(sphere_axes.size()) - 1;

  ChartBox box{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (int k = 0; k < n; ++k) {
    box.lower[k] = k < n_angles ? 0.3 : -0.5;
    box.upper[k] = k < n_angles ? 1.2 : 0.5;
  }
  const double offset = d / sigma;
  Immersion::MapFn map = [=](std::span<const Jet> u) {
    const auto layout = u[0].layout();
    JetVector x = zeros(layout, N);
    x[a_axis] += offset;
    Jet r2 = Jet::constant(layout, std::abs(rho));
    for (std::size_t j = 0; j < flat_axes.size(); ++j) {
      const Jet& q = u[n_angles + j];
      r2 += q * q;
      x[flat_axes[j]] += q;
    }
    const Jet r = sqrt(r2);
    const JetVector s = sphere_or_pole(u.subspan(0, n_angles), layout);
    for (std::size_t j = 0; j < sphere_axes.size(); ++j) x[sphere_axes[j]] += r * s[j];
    return x;
  };

  std::ostringstream name;
  name << "umbilical(" << sf.name() << ", mu=" << mu << ", eps=" << epsilon << ")";
  ExpectedGeometry e;
  e.principal = {{mu, n}};
  e.form = FormTag::kI;
  e.epsilon = epsilon;
  e.lambda = epsilon * n * mu * mu;
  e.mean_curvature = epsilon * mu;
  e.minimal = mu == 0.0;
  CatalogInstance inst{"umbilical", Immersion(sf, box, std::move(map), name.str()), nullptr, e, default_grid(box), "n/a"};
  align_orientation(inst);
  return inst;
}

Immersion perturbed(const Immersion& base, double delta, std::uint64_t seed) {
  const int n = base.chart_dim();
  const int N = base.space_form().ambient_dim();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> freq(0.5, 2.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  Eigen::MatrixXd omega(N, n);
  Eigen::VectorXd phi(N);
  for (int a = 0; a < N; ++a) {
    for (int i = 0; i < n; ++i) omega(a, i) = freq(rng);
    phi[a] = phase(rng);
  }
  Immersion::MapFn inner = base.map();
  Immersion::MapFn map = [inner, omega, phi, delta, n, N](std::span<const Jet> u) {
    JetVector x = inner(u);
    for (int a = 0; a < N; ++a) {
      Jet arg = Jet::constant(u[0].layout(), phi[a]);
      for (int i = 0; i < n; ++i) arg += omega(a, i) * u[i];
      x[a] += delta * sin(arg);
    }
    return x;
  };
  std::ostringstream name;
  name << base.name() << " + " << delta << " noise(seed " << seed << ")";
  Immersion out(base.space_form(), base.domain(), std::move(map), name.str());
  out.set_orientation_sign(base.orientation_sign());
  return out;
}

CatalogInstance build_instance(const InstanceDescriptor& desc) {
  auto profile = [&](const std::string& key, ScalarProfile fallback) {
    auto it = desc.coefficients.find(key);
    return it == desc.coefficients.end() ? fallback : it->second;
  };
  CatalogInstance inst = [&]() {
    if (desc.example_id == "4.1" || desc.example_id == "4.2") {
      AntiDeSitterParams prm;
      prm.n = desc.n;
      prm.p = desc.p;
      prm.mu = desc.mu_or_theta;
      prm.B = profile("B", ScalarProfile::constant(1.0));
      prm.t0 = desc.t0;
      prm.t1 = desc.t1;
      return desc.example_id == "4.1" ? jordan2_anti_de_sitter(prm) : jordan3_anti_de_sitter(prm);
    }
    if (desc.example_id == "4.3" || desc.example_id == "4.4") {
      DeSitterParams prm;
      prm.n = desc.n;
      prm.p = desc.p;
      prm.theta = desc.mu_or_theta;
      prm.t0 = desc.t0;
      prm.t1 = desc.t1;
      prm.include_correction = desc.include_correction;
      for (const auto& [key, value] : desc.coefficients) {
        if (key.size() > 1 && key[0] == 'B') {
          prm.B[std::stoi(key.substr(1))] = value;
        } else if (key.size() > 1 && key[0] == 'C') {
          const auto sep = key.find('_');
          if (sep == std::string::npos) throw DomainError("coupling key must look like C<r>_<alpha>");
          prm.C.push_back({std::stoi(key.substr(1, sep - 1)), std::stoi(key.substr(sep + 1)), value});
        } else {
          throw DomainError("unknown coefficient '" + key + "'");
        }
      }
      return desc.example_id == "4.3" ? jordan2_de_sitter(prm) : jordan3_de_sitter(prm);
    }
    if (desc.example_id == "umbilical") {
      return build_umbilical(SpaceForm(desc.n, desc.index, desc.curvature), desc.mu_or_theta, desc.epsilon);
    }
    throw DomainError("unknown example id '" + desc.example_id + "'");
  }();
  if (desc.perturbation != 0.0) inst.immersion = perturbed(inst.immersion, desc.perturbation, desc.seed);
  return inst;
}

GridSpec instance_grid(const CatalogInstance& instance, const InstanceDescriptor& desc) {
  GridSpec g = instance.default_grid;
  if (desc.grid.empty()) return g;
  if (desc.grid.size() == 1) {
    g.counts.assign(g.dim(), desc.grid[0]);
  } else if (static_cast<int>(desc.grid.size()) == g.dim()) {
    g.counts = desc.grid;
  } else {
    throw DimensionError("grid needs one count per chart axis (or a single count)");
  }
  for (int c : g.counts) {
    if (c < 1) throw DomainError("grid counts must be positive");
  }
  return g;
}

nlohmann::ordered_json to_json(const ScalarProfile& p) {
  nlohmann::ordered_json j;
  switch (p.kind) {
    case ScalarProfile::Kind::kConstant:
      j["kind"] = "constant";
      j["value"] = p.a;
      break;
    case ScalarProfile::Kind::kAffine:
      j["kind"] = "affine";
      j["a"] = p.a;
      j["b"] = p.b;
      break;
    case ScalarProfile::Kind::kSine:
      j["kind"] = "sine";
      j["a"] = p.a;
      j["b"] = p.b;
      j["omega"] = p.omega;
      break;
  }
  return j;
}

ScalarProfile profile_from_json(const nlohmann::json& j) {
  if (j.is_number()) return ScalarProfile::constant(j.get<double>());
  const std::string kind = j.value("kind", "constant");
  if (kind == "constant") return ScalarProfile::constant(j.at("value").get<double>());
  if (kind == "affine") return ScalarProfile::affine(j.at("a").get<double>(), j.at("b").get<double>());
  if (kind == "sine") return ScalarProfile::sine(j.at("a").get<double>(), j.at("b").get<double>(), j.value("omega", 1.0));
  throw DomainError("unknown coefficient profile kind '" + kind + "'");
}

nlohmann::ordered_json to_json(const InstanceDescriptor& d) {
  nlohmann::ordered_json j;
  j["example_id"] = d.example_id;
  j["n"] = d.n;
  j["p"] = d.p;
  j["mu_or_theta"] = d.mu_or_theta;
  nlohmann::ordered_json coeffs = nlohmann::ordered_json::object();
  for (const auto& [k, v] : d.coefficients) coeffs[k] = to_json(v);
  j["coefficient_spec"] = coeffs;
  j["t_range"] = {d.t0, d.t1};
  j["grid"] = d.grid;
  if (d.example_id == "4.4") j["include_correction"] = d.include_correction;
  if (d.example_id == "umbilical") j["space_form"] = {{"curvature", d.curvature}, {"index", d.index}, {"epsilon", d.epsilon}};
  if (d.perturbation != 0.0) j["perturbation"] = {{"delta", d.perturbation}, {"seed", d.seed}};
  return j;
}

InstanceDescriptor descriptor_from_json(const nlohmann::json& j) {
  InstanceDescriptor d;
  try {
    d.example_id = j.at("example_id").get<std::string>();
    d.n = j.value("n", d.n);
    d.p = j.value("p", d.p);
    d.mu_or_theta = j.value("mu_or_theta", d.mu_or_theta);
    if (j.contains("coefficient_spec")) {
      for (const auto& [k, v] : j.at("coefficient_spec").items()) d.coefficients[k] = profile_from_json(v);
    }
    if (j.contains("t_range")) {
      d.t0 = j.at("t_range").at(0).get<double>();
      d.t1 = j.at("t_range").at(1).get<double>();
    }
    if (j.contains("grid")) d.grid = j.at("grid").get<std::vector<int>>();
    d.include_correction = j.value("include_correction", true);
    if (j.contains("space_form")) {
      const auto& s = j.at("space_form");
      d.curvature = s.value("curvature", d.curvature);
      d.index = s.value("index", d.index);
      d.epsilon = s.value("epsilon", d.epsilon);
    }
    if (j.contains("perturbation")) {
      d.perturbation = j.at("perturbation").value("delta", 0.0);
      d.seed = j.at("perturbation").value("seed", std::uint64_t{1});
    }
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("malformed instance descriptor: ") + e.what());
  }
  return d;
}

}  // namespace pmcv
