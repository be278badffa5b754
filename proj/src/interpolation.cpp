#include "gbd/interpolation.hpp"

#include "gbd/parallel.hpp"
#include "gbd/quadrature.hpp"
#include "gbd/random.hpp"
#include "gbd/text.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>

namespace gbd {

CubeVertexData::CubeVertexData(int dim) : d(dim), values(static_cast<std::size_t>(vertex_count(dim)), zeros(dim)) {
  if (dim < 2 || dim > kMaxDim) throw std::invalid_argument("CubeVertexData: dimension must be in [2, 4]");
}

Vec CubeVertexData::vertex(int dim, int index) {
  Vec w(dim);
  for (int i = 0; i < dim; ++i) w(i) = (index >> i) & 1;
  return w;
}

CubeVertexData CubeVertexData::from_flat(int dim, const DynVec& flat) {
  CubeVertexData data(dim);
  if (flat.size() != dim * vertex_count(dim)) throw std::invalid_argument("CubeVertexData: flat size mismatch");
  for (int w = 0; w < vertex_count(dim); ++w) data.values[w] = flat.segment(w * dim, dim);
  return data;
}

DynVec CubeVertexData::flat() const {
  DynVec out(d * vertex_count(d));
  for (int w = 0; w < vertex_count(d); ++w) out.segment(w * d, d) = values[w];
  return out;
}

namespace {

double blend_weight(int w, const Vec& x, int skip = -1) {
  double phi = 1.0;
  for (int i = 0; i < x.size(); ++i) {
    if (i == skip) continue;
    phi *= ((w >> i) & 1) ? x(i) : 1.0 - x(i);
  }
  return phi;
}

// Rows a·d + b map flat vertex data to e(v)_{ab} at x.
DynMat strain_operator(int d, const Vec& x) {
  const int nv = CubeVertexData::vertex_count(d);
  DynMat B = DynMat::Zero(d * d, d * nv);
  for (int w = 0; w < nv; ++w)
    for (int k = 0; k < d; ++k) {
      const double dphi = (((w >> k) & 1) ? 1.0 : -1.0) * blend_weight(w, x, k);
      for (int a = 0; a < d; ++a) {
        // ∂_k v_a contributes to e_{ak} and e_{ka}
        B(a * d + k, w * d + a) += 0.5 * dphi;
        B(k * d + a, w * d + a) += 0.5 * dphi;
      }
    }
  return B;
}

struct TensorRule {
  std::vector<Vec> points;
  std::vector<double> weights;
};

TensorRule tensor_rule(int d, int q, const Vec& lo, const Vec& hi) {
  const GaussRule& g = gauss_legendre(q);
  TensorRule rule;
  double vol = 1.0;
  for (int i = 0; i < d; ++i) vol *= hi(i) - lo(i);
  std::vector<int> idx(d, 0);
  int total = 1;
  for (int i = 0; i < d; ++i) total *= q;
  for (int t = 0; t < total; ++t) {
    Vec x(d);
    double w = vol;
    for (int i = 0; i < d; ++i) {
      x(i) = lo(i) + (hi(i) - lo(i)) * g.nodes[idx[i]];
      w *= g.weights[idx[i]];
    }
    rule.points.push_back(x);
    rule.weights.push_back(w);
    for (int i = 0; i < d && ++idx[i] == q; ++i) idx[i] = 0;
  }
  return rule;
}

void check_unit_cube(const Vec& x) {
  for (int i = 0; i < x.size(); ++i)
    if (!(x(i) >= 0.0 && x(i) <= 1.0)) throw std::out_of_range("point outside the unit cube");
}

}  // namespace

Vec interpolate(const CubeVertexData& data, const Vec& x) {
  check_unit_cube(x);
  Vec v = zeros(data.d);
  for (int w = 0; w < CubeVertexData::vertex_count(data.d); ++w) v += blend_weight(w, x) * data.values[w];
  return v;
}

Mat gradient(const CubeVertexData& data, const Vec& x) {
  Mat g = Mat::Zero(data.d, data.d);
  for (int w = 0; w < CubeVertexData::vertex_count(data.d); ++w)
    for (int k = 0; k < data.d; ++k) {
      const double dphi = (((w >> k) & 1) ? 1.0 : -1.0) * blend_weight(w, x, k);
      g.col(k) += dphi * data.values[w];
    }
  return g;
}

Mat sym_gradient(const CubeVertexData& data, const Vec& x) {
  const Mat g = gradient(data, x);
  return 0.5 * (g + g.transpose());
}

Vec MultilinearPatch::value(const Vec& x) const { return interpolate(data, local(x)); }

Mat MultilinearPatch::sym_gradient(const Vec& x) const { return gbd::sym_gradient(data, local(x)) / side; }

std::vector<std::pair<int, int>> vertex_pairs(int d, const Vec& coeffs) {
  std::vector<std::pair<int, int>> out;
  const int nv = CubeVertexData::vertex_count(d);
  for (int a = 0; a < nv; ++a)
    for (int b = 0; b < nv; ++b) {
      const Vec diff = CubeVertexData::vertex(d, b) - CubeVertexData::vertex(d, a);
      if (diff == coeffs) out.emplace_back(a, b);
    }
  return out;
}

std::vector<Vec> lattice_directions(int d, std::span<const int> pair_signs) {
  const int npairs = d * (d - 1) / 2;
  if (!pair_signs.empty() && static_cast<int>(pair_signs.size()) != npairs)
    throw std::invalid_argument("lattice_directions: need one sign per pair");
  std::vector<Vec> dirs;
  for (int i = 0; i < d; ++i) dirs.push_back(unit(d, i));
  int k = 0;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j, ++k) {
      const int s = pair_signs.empty() ? 1 : pair_signs[k];
      if (s != 1 && s != -1) throw std::invalid_argument("lattice_directions: signs must be ±1");
      dirs.push_back(unit(d, i) + s * unit(d, j));
    }
  return dirs;
}

DynMat compatibility_operator(int d, std::span<const int> pair_signs) {
  std::vector<DynVec> rows;
  for (const Vec& xi : lattice_directions(d, pair_signs))
    for (const auto& [a, b] : vertex_pairs(d, xi)) {
      DynVec row = DynVec::Zero(d * CubeVertexData::vertex_count(d));
      row.segment(b * d, d) += xi;
      row.segment(a * d, d) -= xi;
      rows.push_back(row);
    }
  DynMat C(static_cast<Eigen::Index>(rows.size()), d * CubeVertexData::vertex_count(d));
  for (std::size_t r = 0; r < rows.size(); ++r) C.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
  return C;
}

double rigidity_defect(const CubeVertexData& data, std::span<const int> pair_signs) {
  const DynVec r = compatibility_operator(data.d, pair_signs) * data.flat();
  return r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
}

double fd_rhs(const CubeVertexData& data, double p, std::span<const int> pair_signs) {
  const DynVec r = compatibility_operator(data.d, pair_signs) * data.flat();
  double total = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) total += std::pow(std::abs(r(i)), p);
  return total;
}

int default_quadrature_order(int d, double p) { return p == 2.0 ? std::max(2, d) : 8; }

double cube_energy_clipped(const CubeVertexData& data, double p, const Vec& lo, const Vec& hi, int q) {
  if (!(p >= 1.0)) throw std::invalid_argument("cube_energy: p must be at least 1");
  if (q == 0) q = default_quadrature_order(data.d, p);
  if (q < 2) throw std::invalid_argument("cube_energy: need at least 2 points per axis");
  for (int i = 0; i < data.d; ++i)
    if (!(hi(i) > lo(i))) return 0.0;
  const TensorRule rule = tensor_rule(data.d, q, lo, hi);
  double total = 0.0;
  for (std::size_t k = 0; k < rule.points.size(); ++k) {
    const double n = sym_gradient(data, rule.points[k]).norm();
    if (n > 0.0) total += rule.weights[k] * (p == 2.0 ? n * n : std::pow(n, p));
  }
  return total;
}

double cube_energy(const CubeVertexData& data, double p, int q) {
  return cube_energy_clipped(data, p, Vec::Zero(data.d), Vec::Ones(data.d), q);
}

DynMat rigid_vertex_basis(int d) {
  const int nv = CubeVertexData::vertex_count(d);
  const int r = d * (d + 1) / 2;
  DynMat R(d * nv, r);
  int col = 0;
  for (int k = 0; k < d; ++k, ++col)
    for (int w = 0; w < nv; ++w) R.block(w * d, col, d, 1) = unit(d, k);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j, ++col) {
      Mat A = Mat::Zero(d, d);
      A(i, j) = 1.0;
      A(j, i) = -1.0;
      for (int w = 0; w < nv; ++w) R.block(w * d, col, d, 1) = A * CubeVertexData::vertex(d, w);
    }
  Eigen::HouseholderQR<DynMat> qr(R);
  return DynMat(qr.householderQ()).leftCols(r);
}

DynMat rigid_complement(int d) {
  const int n = d * CubeVertexData::vertex_count(d);
  const int r = d * (d + 1) / 2;
  const DynMat R = rigid_vertex_basis(d);
  Eigen::HouseholderQR<DynMat> qr(R);
  return DynMat(qr.householderQ()).rightCols(n - r);
}

CubeVertexData project_compatible(const CubeVertexData& data, std::span<const int> pair_signs) {
  const DynMat C = compatibility_operator(data.d, pair_signs);
  Eigen::JacobiSVD<DynMat> svd(C, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double tol = 1e-10 * s(0);
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > tol) ++rank;
  const DynMat N = svd.matrixV().rightCols(C.cols() - rank);
  const DynVec v = data.flat();
  return CubeVertexData::from_flat(data.d, N * (N.transpose() * v));
}

std::string to_string(KornMethod method) { return method == KornMethod::Eig ? "eig" : "search"; }

KornMethod parse_korn_method(const std::string& name) {
  if (name == "eig") return KornMethod::Eig;
  if (name == "search") return KornMethod::Search;
  throw std::invalid_argument("unknown Korn method '" + name + "' (expected eig or search)");
}

namespace {

struct KornForms {
  int d;
  double p;
  DynMat Z;                 // complement basis
  std::vector<DynMat> BZ;   // strain operators times Z
  std::vector<double> w;    // quadrature weights
  DynMat CZ;                // compatibility operator times Z

  KornForms(int dim, double pp) : d(dim), p(pp), Z(rigid_complement(dim)) {
    const int q = p == 2.0 ? d + 1 : default_quadrature_order(d, p);
    const TensorRule rule = tensor_rule(d, q, Vec::Zero(d), Vec::Ones(d));
    for (std::size_t k = 0; k < rule.points.size(); ++k) {
      BZ.push_back(strain_operator(d, rule.points[k]) * Z);
      w.push_back(rule.weights[k]);
    }
    CZ = compatibility_operator(d) * Z;
  }

  // Ratio and its gradient with respect to the complement coordinates c.
  double ratio(const DynVec& c, DynVec* grad) const {
    double E = 0.0, F = 0.0;
    DynVec gE = DynVec::Zero(c.size()), gF = DynVec::Zero(c.size());
    for (std::size_t k = 0; k < BZ.size(); ++k) {
      const DynVec e = BZ[k] * c;
      const double n = e.norm();
      if (n == 0.0) continue;
      E += w[k] * std::pow(n, p);
      if (grad) gE += w[k] * p * std::pow(n, p - 2.0) * (BZ[k].transpose() * e);
    }
    const DynVec r = CZ * c;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
      const double a = std::abs(r(i));
      if (a == 0.0) continue;
      F += std::pow(a, p);
      if (grad) gF += p * std::pow(a, p - 2.0) * r(i) * CZ.row(i).transpose();
    }
    if (F == 0.0) throw std::logic_error("korn_constant: fd_rhs vanishes on a non-rigid direction");
    if (grad) *grad = (gE * F - E * gF) / (F * F);
    return E / F;
  }
};

double eig_constant(int d, KornEstimate& out) {
  const DynMat Z = rigid_complement(d);
  const int q = std::max(2, d) + 1;
  const TensorRule rule = tensor_rule(d, q, Vec::Zero(d), Vec::Ones(d));
  DynMat K = DynMat::Zero(Z.cols(), Z.cols());
  for (std::size_t k = 0; k < rule.points.size(); ++k) {
    const DynMat BZ = strain_operator(d, rule.points[k]) * Z;
    K += rule.weights[k] * BZ.transpose() * BZ;
  }
  const DynMat CZ = compatibility_operator(d) * Z;
  const DynMat F = CZ.transpose() * CZ;
  Eigen::SelfAdjointEigenSolver<DynMat> fe(F, Eigen::EigenvaluesOnly);
  if (fe.eigenvalues()(0) <= 1e-10 * fe.eigenvalues().maxCoeff())
    throw std::logic_error("korn_constant: fd_rhs vanishes on a non-rigid direction");
  Eigen::GeneralizedSelfAdjointEigenSolver<DynMat> ges(K, F);
  const double lambda = ges.eigenvalues().maxCoeff();
  out.lower_bound = lambda;
  return lambda;
}

double search_constant(int d, double p, std::uint64_t seed, int starts, KornEstimate& out) {
  const KornForms forms(d, p);
  const auto m = forms.Z.cols();
  const auto best = parallel_map<double>(static_cast<std::size_t>(starts), [&](std::size_t s) {
    Rng rng = make_rng(seed, s);
    std::normal_distribution<double> normal;
    DynVec c(m);
    for (Eigen::Index i = 0; i < m; ++i) c(i) = normal(rng);
    c.normalize();
    DynVec g;
    double value = forms.ratio(c, &g);
    double step = 1.0;
    for (int it = 0; it < 400 && step > 1e-12; ++it) {
      g -= g.dot(c) * c;
      if (g.norm() <= 1e-14 * std::max(1.0, value)) break;
      DynVec g_next;
      for (;;) {
        DynVec trial = (c + step * g).normalized();
        const double v = forms.ratio(trial, &g_next);
        if (v > value) {
          const bool stalled = v - value <= 1e-13 * v;
          c = trial;
          value = v;
          g = g_next;
          step *= 1.5;
          if (stalled) step = 0.0;
          break;
        }
        step *= 0.5;
        if (step <= 1e-12) break;
      }
    }
    return value;
  });
  // Every value is attained by an explicit dataset, so the best one is both
  // the estimate and a certified lower bound.
  out.lower_bound = *std::max_element(best.begin(), best.end());
  return out.lower_bound;
}

}  // namespace

KornEstimate korn_constant(int d, double p, KornMethod method, std::uint64_t seed, int starts) {
  if (d < 2 || d > 3) throw std::invalid_argument("korn_constant: d must be 2 or 3");
  if (!(p >= 1.0)) throw std::invalid_argument("korn_constant: p must be at least 1");
  KornEstimate out;
  out.d = d;
  out.p = p;
  out.method = method;
  out.seed = seed;
  out.quotient_dim = d * CubeVertexData::vertex_count(d) - d * (d + 1) / 2;
  if (method == KornMethod::Eig) {
    if (p != 2.0) throw std::invalid_argument("korn_constant: eig method requires p = 2");
    out.constant = eig_constant(d, out);
  } else {
    if (starts < 1) throw std::invalid_argument("korn_constant: need at least one start");
    out.starts = starts;
    out.constant = search_constant(d, p, seed, starts, out);
  }
  return out;
}

double korn_upper_bound(int d, double p) {
  if (!(p >= 1.0 && p <= 2.0)) throw std::invalid_argument("korn_upper_bound: needs 1 ≤ p ≤ 2");
  static std::mutex mu;
  static std::map<int, double> c2;
  std::lock_guard lock(mu);
  auto it = c2.find(d);
  if (it == c2.end()) it = c2.emplace(d, korn_constant(d, 2.0, KornMethod::Eig).constant).first;
  return std::pow(it->second, p / 2.0);
}

KornCache KornCache::load(const std::string& path) {
  KornCache cache;
  std::ifstream in(path);
  if (!in) return cache;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto t = split_ws(line);
    if (t.empty()) continue;
    if (t.size() != 8) throw std::invalid_argument(path + ":" + std::to_string(n) + ": expected 8 columns");
    KornEstimate e;
    e.d = static_cast<int>(parse_double(t[0]));
    e.p = parse_double(t[1]);
    e.method = parse_korn_method(t[2]);
    e.seed = std::stoull(t[3]);
    e.constant = parse_double(t[4]);
    e.lower_bound = parse_double(t[5]);
    e.quotient_dim = static_cast<int>(parse_double(t[6]));
    e.starts = static_cast<int>(parse_double(t[7]));
    cache.store(e);
  }
  return cache;
}

void KornCache::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write Korn cache '" + path + "'");
  out << "# d p method seed constant lower_bound quotient_dim starts\n";
  for (const auto& [key, e] : rows_)
    out << e.d << ' ' << format_double(e.p) << ' ' << to_string(e.method) << ' ' << e.seed << ' '
        << format_double(e.constant) << ' ' << format_double(e.lower_bound) << ' ' << e.quotient_dim << ' '
        << e.starts << '\n';
}

std::optional<KornEstimate> KornCache::find(int d, double p, KornMethod method, std::uint64_t seed) const {
  auto it = rows_.find({d, p, to_string(method), seed});
  if (it == rows_.end()) return std::nullopt;
  return it->second;
}

void KornCache::store(const KornEstimate& e) { rows_[{e.d, e.p, to_string(e.method), e.seed}] = e; }

}  // namespace gbd
