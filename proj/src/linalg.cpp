#include "pmcv/linalg.hpp"

#include "pmcv/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace pmcv {

Signature::Signature(int d, int i) : dim(d), index(i) {
  if (d <= 0) throw DimensionError("signature dimension must be positive");
  if (i < 0 || i > d) throw DimensionError("signature index must lie in [0, dim]");
}

Signature signature_of(const Eigen::MatrixXd& g, double tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double scale = std::max(ev.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  int negatives = 0;
  for (int i = 0; i < ev.size(); ++i) {
    if (std::abs(ev[i]) <= tol * scale) {
      std::ostringstream os;
      os << "degenerate metric: eigenvalue " << ev[i] << " within " << tol << " of zero (relative)";
      throw DegenerateError(os.str());
    }
    if (ev[i] < 0) ++negatives;
  }
  return {static_cast<int>(g.rows()), negatives};
}

MetricMatrix::MetricMatrix(Eigen::MatrixXd entries, double tolerance)
    : entries_(std::move(entries)), tolerance_(tolerance) {
  if (entries_.rows() != entries_.cols() || entries_.rows() == 0) throw DimensionError("metric matrix must be square and non-empty");
  if (tolerance_ < 0) throw DomainError("metric tolerance must be nonnegative");
  const double scale = std::max(1.0, entries_.cwiseAbs().maxCoeff());
  if ((entries_ - entries_.transpose()).cwiseAbs().maxCoeff() > tolerance_ * scale) {
    throw ContractViolation("metric matrix is not symmetric");
  }
  entries_ = 0.5 * (entries_ + entries_.transpose()).eval();
  signature_ = signature_of(entries_, tolerance_);
}

MetricMatrix MetricMatrix::pseudo_euclidean(Signature sig) {
  Eigen::VectorXd d = Eigen::VectorXd::Ones(sig.dim);
  d.head(sig.index).setConstant(-1.0);
  return MetricMatrix(d.asDiagonal().toDenseMatrix());
}

MetricMatrix MetricMatrix::diagonal(std::initializer_list<double> entries) {
  Eigen::VectorXd d(static_cast<Eigen::Index>(entries.size()));
  std::copy(entries.begin(), entries.end(), d.data());
  return MetricMatrix(d.asDiagonal().toDenseMatrix());
}

double indefinite_inner(const Eigen::VectorXd& u, const Eigen::VectorXd& v, const MetricMatrix& g) {
  if (u.size() != g.dim() || v.size() != g.dim()) throw DimensionError("vector and metric dimensions differ");
  return u.dot(g.entries() * v);
}

std::string to_string(CausalCharacter c) {
  switch (c) {
    case CausalCharacter::kTimelike: return "timelike";
    case CausalCharacter::kSpacelike: return "spacelike";
    case CausalCharacter::kLightlike: return "lightlike";
  }
  return "unknown";
}

CausalCharacter causal_character(const Eigen::VectorXd& v, const MetricMatrix& g, double tol) {
  const double norm2 = v.squaredNorm();
  if (norm2 == 0.0) throw DomainError("causal character of the zero vector is undefined");
  const double q = indefinite_inner(v, v, g);
  if (q < -tol * norm2) return CausalCharacter::kTimelike;
  if (q > tol * norm2) return CausalCharacter::kSpacelike;
  return CausalCharacter::kLightlike;
}

std::vector<double> char_poly(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw DimensionError("characteristic polynomial needs a square matrix");
  const int n = static_cast<int>(a.rows());
  if (n == 0) return {1.0};
  Eigen::MatrixXd h = n > 2 ? Eigen::HessenbergDecomposition<Eigen::MatrixXd>(a).matrixH() : a;
  // p[k] holds det(tI - H[0:k,0:k]) with coefficients lowest degree first.
  std::vector<std::vector<double>> p(n + 1);
  p[0] = {1.0};
  for (int k = 1; k <= n; ++k) {
    std::vector<double> next(k + 1, 0.0);
    const auto& prev = p[k - 1];
    for (int d = 0; d < k; ++d) {
      next[d + 1] += prev[d];
      next[d] -= h(k - 1, k - 1) * prev[d];
    }
    double sub = 1.0;
    for (int i = k - 1; i >= 1; --i) {
      sub *= h(i, i - 1);
      const double w = h(i - 1, k - 1) * sub;
      if (w == 0.0) continue;
      for (std::size_t d = 0; d < p[i - 1].size(); ++d) next[d] -= w * p[i - 1][d];
    }
    p[k] = std::move(next);
  }
  std::vector<double> out(p[n].rbegin(), p[n].rend());
  return out;
}

std::vector<std::complex<double>> polynomial_roots(std::span<const double> monic) {
  if (monic.empty() || monic[0] != 1.0) throw DomainError("polynomial must be monic (leading coefficient 1)");
  const int n = static_cast<int>(monic.size()) - 1;
  if (n == 0) return {};
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) companion(0, j) = -monic[j + 1];
  for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
  const auto& ev = es.eigenvalues();
  return {ev.data(), ev.data() + n};
}

RankDecision numerical_rank(const Eigen::MatrixXd& m, double threshold) {
  Eigen::MatrixXd w = m;
  const int rows = static_cast<int>(w.rows());
  const int cols = static_cast<int>(w.cols());
  RankDecision out;
  out.smallest_kept = std::numeric_limits<double>::infinity();
  for (int k = 0; k < std::min(rows, cols); ++k) {
    Eigen::Index pi = 0;
    Eigen::Index pj = 0;
    const double piv = w.bottomRightCorner(rows - k, cols - k).cwiseAbs().maxCoeff(&pi, &pj);
    if (piv <= threshold) {
      out.largest_dropped = piv;
      return out;
    }
    w.row(k).swap(w.row(k + pi));
    w.col(k).swap(w.col(k + pj));
    for (int i = k + 1; i < rows; ++i) {
      const double f = w(i, k) / w(k, k);
      w.row(i).tail(cols - k) -= f * w.row(k).tail(cols - k);
    }
    out.smallest_kept = std::min(out.smallest_kept, piv);
    ++out.rank;
  }
  return out;
}

std::string to_string(FormTag tag) {
  switch (tag) {
    case FormTag::kI: return "I";
    case FormTag::kII: return "II";
    case FormTag::kIII: return "III";
    case FormTag::kIV: return "IV";
    case FormTag::kOther: return "Other";
  }
  return "Other";
}

FormTag form_tag_from_string(const std::string& s) {
  if (s == "I") return FormTag::kI;
  if (s == "II") return FormTag::kII;
  if (s == "III") return FormTag::kIII;
  if (s == "IV") return FormTag::kIV;
  if (s == "Other") return FormTag::kOther;
  throw DomainError("unknown form tag '" + s + "'");
}

int ShapeSpectrum::dim() const {
  int n = 0;
  for (const auto& r : real_eigenvalues) n += r.algebraic;
  for (const auto& c : complex_pairs) n += 2 * c.multiplicity;
  return n;
}

double ShapeSpectrum::root_residual() const {
  // Expand prod (t - lambda)^m prod (t^2 - 2 gamma t + gamma^2 + tau^2)^m, highest degree first.
  std::vector<double> p{1.0};
  auto multiply = [&p](std::span<const double> f) {
    std::vector<double> out(p.size() + f.size() - 1, 0.0);
    for (std::size_t i = 0; i < p.size(); ++i)
      for (std::size_t j = 0; j < f.size(); ++j) out[i + j] += p[i] * f[j];
    p = std::move(out);
  };
  for (const auto& r : real_eigenvalues) {
    const double f[2] = {1.0, -r.value};
    for (int k = 0; k < r.algebraic; ++k) multiply(f);
  }
  for (const auto& c : complex_pairs) {
    const double f[3] = {1.0, -2.0 * c.gamma, c.gamma * c.gamma + c.tau * c.tau};
    for (int k = 0; k < c.multiplicity; ++k) multiply(f);
  }
  if (p.size() != char_poly.size()) return std::numeric_limits<double>::infinity();
  double scale = 1.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    scale = std::max(scale, std::abs(char_poly[i]));
    worst = std::max(worst, std::abs(p[i] - char_poly[i]));
  }
  return worst / scale;
}

namespace {

struct RadiusScale {
  double root_scale;    // max(1, max |root|)
  double matrix_scale;  // max(1, ||A||_inf)
  double tol;

  // An m-fold root splits by about scale * tol^(1/m); the second term bounds the
  // round-off splitting of a Jordan block with large off-diagonal entries.
  double operator()(std::size_t m) const {
    const double inv = 1.0 / static_cast<double>(m);
    return std::max(root_scale * std::pow(tol, inv),
                    matrix_scale * std::pow(1e3 * std::numeric_limits<double>::epsilon(), inv));
  }
};

struct Cluster {
  std::vector<int> members;
  std::complex<double> centroid;
  double ratio = 0.0;  // max member deviation / acceptance radius
};

Cluster make_cluster(const std::vector<std::complex<double>>& roots, std::vector<int> members, const RadiusScale& radius_of) {
  Cluster c;
  c.members = std::move(members);
  std::complex<double> sum = 0.0;
  for (int i : c.members) sum += roots[i];
  c.centroid = sum / static_cast<double>(c.members.size());
  double dev = 0.0;
  for (int i : c.members) dev = std::max(dev, std::abs(roots[i] - c.centroid));
  c.ratio = dev / radius_of(c.members.size());
  return c;
}

std::string describe(const std::vector<std::complex<double>>& roots, const std::vector<int>& members) {
  std::ostringstream os;
  os << "{";
  for (std::size_t k = 0; k < members.size(); ++k) {
    if (k) os << ", ";
    os << roots[members[k]];
  }
  os << "}";
  return os.str();
}

// Greedy clustering: repeatedly accept the largest admissible group formed by a
// seed root and its nearest unassigned neighbours.
std::vector<Cluster> cluster_roots(const std::vector<std::complex<double>>& roots, const RadiusScale& radius_of) {
  std::vector<int> open(roots.size());
  std::iota(open.begin(), open.end(), 0);
  std::vector<Cluster> out;
  while (!open.empty()) {
    Cluster best;
    bool have_best = false;
    Cluster near_miss;
    bool have_near_miss = false;
    for (int seed : open) {
      std::vector<int> by_distance = open;
      std::sort(by_distance.begin(), by_distance.end(), [&](int a, int b) {
        return std::abs(roots[a] - roots[seed]) < std::abs(roots[b] - roots[seed]);
      });
      for (std::size_t m = 1; m <= by_distance.size(); ++m) {
        std::vector<int> members(by_distance.begin(), by_distance.begin() + static_cast<std::ptrdiff_t>(m));
        std::sort(members.begin(), members.end());
        Cluster c = make_cluster(roots, members, radius_of);
        if (c.ratio <= 1.0) {
          const bool larger = !have_best || c.members.size() > best.members.size();
          const bool tighter = have_best && c.members.size() == best.members.size() && c.ratio < best.ratio;
          if (larger || tighter) {
            best = c;
            have_best = true;
          }
        } else if (c.ratio <= 2.0 && m > 1) {
          if (!have_near_miss || c.members.size() > near_miss.members.size()) {
            near_miss = c;
            have_near_miss = true;
          }
        }
      }
    }
    if (have_near_miss && near_miss.members.size() > best.members.size()) {
      throw AmbiguityError("eigenvalue clustering is ambiguous: a merged cluster lies within twice the acceptance radius",
                           {{"merged " + describe(roots, near_miss.members)}, {"separate, keeping " + describe(roots, best.members)}});
    }
    if (best.members.size() > 1 && best.ratio > 0.5) {
      std::vector<AmbiguityError::Candidate> cands{{"merged " + describe(roots, best.members)}};
      for (int i : best.members) cands.push_back({"separate " + describe(roots, {i})});
      throw AmbiguityError("eigenvalue clustering is ambiguous: accepted cluster is near the acceptance radius", cands);
    }
    for (int i : best.members) open.erase(std::find(open.begin(), open.end(), i));
    out.push_back(std::move(best));
  }
  return out;
}

}  // namespace

ShapeSpectrum eigen_structure(const Eigen::MatrixXd& a, double tol) {
  if (a.rows() != a.cols()) throw DimensionError("eigen_structure needs a square matrix");
  if (!(tol > 0)) throw DomainError("tolerance must be positive");
  const int n = static_cast<int>(a.rows());
  ShapeSpectrum out;
  out.char_poly = char_poly(a);
  const auto roots = polynomial_roots(out.char_poly);
  const double scale = std::max(1.0, a.cwiseAbs().rowwise().sum().maxCoeff());
  double root_scale = 1.0;
  for (const auto& r : roots) root_scale = std::max(root_scale, std::abs(r));
  const RadiusScale radius_of{root_scale, scale, tol};
  const auto clusters = cluster_roots(roots, radius_of);

  std::vector<const Cluster*> upper;
  for (const auto& c : clusters) {
    if (std::abs(c.centroid.imag()) <= radius_of(c.members.size())) {
      RealEigenvalue ev;
      ev.value = c.centroid.real();
      ev.algebraic = static_cast<int>(c.members.size());
      out.real_eigenvalues.push_back(ev);
    } else if (c.centroid.imag() > 0) {
      upper.push_back(&c);
    }
  }
  for (const Cluster* c : upper) {
    out.complex_pairs.push_back({c->centroid.real(), c->centroid.imag(), static_cast<int>(c->members.size())});
  }
  std::sort(out.real_eigenvalues.begin(), out.real_eigenvalues.end(),
            [](const auto& x, const auto& y) { return x.value < y.value; });
  std::sort(out.complex_pairs.begin(), out.complex_pairs.end(),
            [](const auto& x, const auto& y) { return x.gamma < y.gamma || (x.gamma == y.gamma && x.tau < y.tau); });

  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  for (auto& ev : out.real_eigenvalues) {
    const Eigen::MatrixXd shifted = a - ev.value * id;
    const int m = ev.algebraic;
    std::vector<int> nullity(m + 2, 0);
    Eigen::MatrixXd power = id;
    for (int k = 1; k <= m + 1; ++k) {
      power = power * shifted;
      nullity[k] = n - numerical_rank(power, tol * std::pow(scale, k)).rank;
    }
    ev.geometric = nullity[1];
    // blocks of size >= k: nullity[k] - nullity[k-1]
    for (int k = 1; k <= m; ++k) {
      const int at_least_k = nullity[k] - nullity[k - 1];
      const int at_least_next = nullity[k + 1] - nullity[k];
      for (int b = 0; b < at_least_k - at_least_next; ++b) ev.jordan_blocks.push_back(k);
    }
    std::sort(ev.jordan_blocks.rbegin(), ev.jordan_blocks.rend());
    const int block_total = std::accumulate(ev.jordan_blocks.begin(), ev.jordan_blocks.end(), 0);
    if (nullity[m] != m || nullity[m + 1] != m || block_total != m || ev.geometric > m) {
      out.jordan_consistent = false;
    }
  }
  out.form_tag = form_from_pattern(out);
  return out;
}

FormTag form_from_pattern(const ShapeSpectrum& s) {
  if (!s.jordan_consistent) return FormTag::kOther;
  int twos = 0;
  int threes = 0;
  int larger = 0;
  for (const auto& ev : s.real_eigenvalues) {
    for (int b : ev.jordan_blocks) {
      if (b == 2) ++twos;
      else if (b == 3) ++threes;
      else if (b > 3) ++larger;
    }
  }
  if (larger > 0) return FormTag::kOther;
  if (s.complex_pairs.empty()) {
    if (twos == 0 && threes == 0) return FormTag::kI;
    if (twos == 1 && threes == 0) return FormTag::kII;
    if (twos == 0 && threes == 1) return FormTag::kIII;
    return FormTag::kOther;
  }
  if (s.complex_pairs.size() == 1 && s.complex_pairs[0].multiplicity == 1 && twos == 0 && threes == 0) return FormTag::kIV;
  return FormTag::kOther;
}

double self_adjointness_defect(const Eigen::MatrixXd& a, const Eigen::MatrixXd& g) {
  return (g * a - a.transpose() * g).cwiseAbs().maxCoeff();
}

FormTag classify_canonical_form(const Eigen::MatrixXd& a, const MetricMatrix& g, double tol) {
  if (a.rows() != a.cols() || a.rows() != g.dim()) throw DimensionError("shape operator and metric dimensions differ");
  if (!g.is_lorentzian()) {
    std::ostringstream os;
    os << "metric not Lorentzian (index " << g.signature().index << ", expected 1)";
    throw ContractViolation(os.str());
  }
  const double bound = tol * std::max(1.0, g.entries().cwiseAbs().maxCoeff()) * std::max(1.0, a.cwiseAbs().maxCoeff());
  const double defect = self_adjointness_defect(a, g.entries());
  if (defect > bound) {
    std::ostringstream os;
    os << "operator is not self-adjoint for the metric: |gA - A^T g| = " << defect << " > " << bound;
    throw ContractViolation(os.str());
  }
  const ShapeSpectrum s = eigen_structure(a, tol);
  if (!s.jordan_consistent) {
    throw AmbiguityError("rank decisions for the Jordan structure are inconsistent with the algebraic multiplicities",
                         {{"Jordan pattern from nullity sequence"}, {"algebraic multiplicities from root clustering"}});
  }
  return s.form_tag;
}

CanonicalPair canonical_shape_matrix(FormTag tag, const CanonicalParams& params) {
  std::vector<double> diag;
  if (!params.multiplicities.empty()) {
    if (params.multiplicities.size() != params.diagonal.size()) throw DomainError("inconsistent multiplicities: one count per eigenvalue required");
    for (std::size_t i = 0; i < params.diagonal.size(); ++i) {
      if (params.multiplicities[i] < 1) throw DomainError("inconsistent multiplicities: counts must be positive");
      diag.insert(diag.end(), params.multiplicities[i], params.diagonal[i]);
    }
  } else {
    diag = params.diagonal;
  }

  const int lead = tag == FormTag::kII ? 2 : tag == FormTag::kIII ? 3 : 1;
  const int n = tag == FormTag::kIV ? static_cast<int>(diag.size()) + 2 : static_cast<int>(diag.size());
  if (tag == FormTag::kOther) throw DomainError("no canonical matrix for form Other");
  if (n < lead || n < 1) throw DomainError("inconsistent multiplicities: too few eigenvalues for the form");
  if (tag == FormTag::kII || tag == FormTag::kIII) {
    for (int i = 1; i < lead; ++i) {
      if (diag[i] != diag[0]) throw DomainError("inconsistent multiplicities: Jordan block entries must repeat the leading eigenvalue");
    }
  }
  if (tag == FormTag::kIV && params.tau == 0.0) throw DomainError("form IV requires tau != 0");

  CanonicalPair out{Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n)};
  auto& a = out.shape;
  auto& g = out.metric;
  switch (tag) {
    case FormTag::kI:
      for (int i = 0; i < n; ++i) a(i, i) = diag[i];
      g.diagonal().setOnes();
      g(n - 1, n - 1) = -1.0;
      break;
    case FormTag::kII:
      for (int i = 0; i < n; ++i) a(i, i) = diag[i];
      a(1, 0) = 1.0;
      g(0, 1) = g(1, 0) = 1.0;
      for (int i = 2; i < n; ++i) g(i, i) = 1.0;
      break;
    case FormTag::kIII:
      for (int i = 0; i < n; ++i) a(i, i) = diag[i];
      a(1, 0) = a(2, 1) = 1.0;
      g(0, 2) = g(2, 0) = g(1, 1) = 1.0;
      for (int i = 3; i < n; ++i) g(i, i) = 1.0;
      break;
    case FormTag::kIV:
      for (int i = 0; i < n - 2; ++i) a(i, i) = diag[i];
      a(n - 2, n - 2) = a(n - 1, n - 1) = params.gamma;
      a(n - 2, n - 1) = params.tau;
      a(n - 1, n - 2) = -params.tau;
      g.diagonal().setOnes();
      g(n - 1, n - 1) = -1.0;
      break;
    case FormTag::kOther:
      break;
  }
  return out;
}

}  // namespace pmcv
