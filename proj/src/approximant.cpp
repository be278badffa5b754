#include "gbd/approximant.hpp"

#include "gbd/parallel.hpp"
#include "gbd/random.hpp"
#include "gbd/text.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace gbd {

char class_code(CubeClass c) {
  switch (c) {
    case CubeClass::Outside: return 'O';
    case CubeClass::Bad: return 'B';
    case CubeClass::Good: return 'G';
  }
  return '?';
}

namespace {

void check_lattice_direction(const Vec& coeffs) {
  int nonzero = 0;
  bool ok = true;
  for (int i = 0; i < coeffs.size(); ++i) {
    const double c = coeffs(i);
    if (c == 0.0) continue;
    ++nonzero;
    ok = ok && (c == 1.0 || c == -1.0);
  }
  int first = 0;
  while (first < coeffs.size() && coeffs(first) == 0.0) ++first;
  ok = ok && (nonzero == 1 || nonzero == 2) && first < coeffs.size() && coeffs(first) == 1.0;
  if (!ok) throw std::invalid_argument("edge_pairs: direction must be e_k or e_k ± e_l");
}

IVec to_index(const Vec& w) {
  IVec j(w.size());
  for (int i = 0; i < w.size(); ++i) j(i) = std::lround(w(i));
  return j;
}

}  // namespace

std::vector<Vec> edge_pairs(const IVec& cube, const Vec& coeffs, double eps) {
  check_lattice_direction(coeffs);
  const int d = static_cast<int>(cube.size());
  std::vector<Vec> out;
  for (const auto& [a, b] : vertex_pairs(d, coeffs)) {
    (void)b;
    out.push_back(eps * (cube.cast<double>() + CubeVertexData::vertex(d, a)));
  }
  return out;
}

CubeLattice::CubeLattice(const VectorField& field, double eps, Vec y, DirectionSet dirs)
    : eps_(eps),
      y_(std::move(y)),
      dirs_(std::move(dirs)),
      domain_(field.domain()),
      cubes_(covering_window(eps, y_, field.domain().lower(), field.domain().upper())),
      vertices_(field, [&] {
        LatticeWindow w = cubes_;
        w.count.array() += 1;
        return w;
      }()) {
  const int d = dim();
  if (!dirs_.is_canonical()) throw std::invalid_argument("classify: cube lattices need the canonical basis");
  if (dirs_.dim() != d) throw std::invalid_argument("classify: direction set dimension mismatch");
  for (int i = 0; i < d; ++i)
    if (!(y_(i) >= 0.0 && y_(i) < 1.0)) throw std::invalid_argument("classify: anchor must lie in [0,1)^d");

  struct Test {
    Vec xi;
    double beta;
    std::vector<std::pair<int, int>> pairs;
  };
  std::vector<Test> tests;
  for (const Direction& dir : dirs_) tests.push_back({dir.xi, dir.threshold, vertex_pairs(d, dir.coeffs)});

  classes_ = parallel_map<CubeClass>(cubes_.size(), [&](std::size_t k) {
    const IVec i = cubes_.index(k);
    const Vec lo = origin(i);
    if (!domain_.contains_closed_box(lo, lo + Vec::Constant(d, eps_))) return CubeClass::Outside;
    const CubeVertexData data = vertex_data(i);
    for (const Test& t : tests)
      for (const auto& [a, b] : t.pairs)
        if (std::abs(t.xi.dot(data.values[b] - data.values[a])) > t.beta) return CubeClass::Bad;
    return CubeClass::Good;
  });
  for (CubeClass c : classes_) {
    bad_ += c == CubeClass::Bad;
    good_ += c == CubeClass::Good;
  }
}

CubeClass CubeLattice::cls(const IVec& i) const {
  return cubes_.contains(i) ? classes_[cubes_.flat(i)] : CubeClass::Outside;
}

IVec CubeLattice::cube_of(const Vec& x) const {
  IVec i(dim());
  for (int k = 0; k < dim(); ++k) i(k) = static_cast<long>(std::floor(x(k) / eps_ - y_(k)));
  return i;
}

CubeVertexData CubeLattice::vertex_data(const IVec& i) const {
  const int d = dim();
  CubeVertexData data(d);
  for (int w = 0; w < CubeVertexData::vertex_count(d); ++w)
    data.values[w] = vertices_.value(i + to_index(CubeVertexData::vertex(d, w)));
  return data;
}

CubeLattice classify(const VectorField& field, double eps, const Vec& y, const DirectionSet& dirs) {
  return CubeLattice(field, eps, y, dirs);
}

Vec Approximant::operator()(const Vec& x) const {
  const IVec i = lattice_.cube_of(x);
  if (lattice_.cls(i) != CubeClass::Good) return zeros(lattice_.dim());
  const Vec t = ((x - lattice_.origin(i)) / lattice_.eps()).cwiseMax(0.0).cwiseMin(1.0);
  return interpolate(lattice_.vertex_data(i), t);
}

MultilinearPatch Approximant::patch(const IVec& i) const {
  return MultilinearPatch{lattice_.vertex_data(i), lattice_.origin(i), lattice_.eps()};
}

Approximant build(const VectorField& field, double eps, const Vec& y, const DirectionSet& dirs) {
  return Approximant(classify(field, eps, y, dirs));
}

namespace {

bool numerically_rigid(const CubeVertexData& data, std::span<const int> signs) {
  double scale = 0.0;
  for (const Vec& v : data.values) scale = std::max(scale, v.norm());
  return rigidity_defect(data, signs) <= roundoff_floor(4.0 * scale);
}

std::vector<int> pair_signs(const DirectionSet& dirs) {
  std::vector<int> signs;
  for (const Direction& dir : dirs)
    if (dir.is_pair()) signs.push_back(dir.coeffs(dir.second) > 0 ? 1 : -1);
  return signs;
}

}  // namespace

EnergyReport energy_report(const Approximant& appr, double p, const DirectionalEnergy& energy) {
  const CubeLattice& lat = appr.lattice();
  const int d = lat.dim();
  const double eps = lat.eps();
  const BoxDomain inner = lat.domain().inner_region(eps);
  const LatticeWindow& win = lat.cubes();
  const std::vector<int> signs = pair_signs(lat.directions());

  EnergyReport r;
  r.eps = eps;
  r.p = p;
  r.bad_count = lat.bad_count();
  r.good_count = lat.good_count();
  r.bad_volume = static_cast<double>(r.bad_count) * std::pow(eps, d);
  r.lambda = p == 1.0 ? energy.lambda_V : energy.lambda_pV;
  r.M = p == 1.0 ? energy.M : energy.M_p;

  const double scale = std::pow(eps, d - p);
  std::vector<double> cube_energy_terms(win.size(), 0.0), face_full(win.size(), 0.0), face_inner(win.size(), 0.0);
  parallel_for(win.size(), [&](std::size_t k) {
    const CubeClass c = lat.cls_flat(k);
    const IVec i = win.index(k);
    const Vec lo = lat.origin(i);
    const Vec hi = lo + Vec::Constant(d, eps);
    if (c == CubeClass::Good && !inner.is_empty()) {
      const Vec clo = lo.cwiseMax(inner.lower());
      const Vec chi = hi.cwiseMin(inner.upper());
      if ((chi - clo).minCoeff() > 0.0) {
        const CubeVertexData data = lat.vertex_data(i);
        if (!numerically_rigid(data, signs)) {
          const bool full = (clo - lo).cwiseAbs().maxCoeff() == 0.0 && (chi - hi).cwiseAbs().maxCoeff() == 0.0;
          cube_energy_terms[k] = scale * (full ? cube_energy(data, p)
                                               : cube_energy_clipped(data, p, (clo - lo) / eps, (chi - lo) / eps, 16));
        }
      }
    }
    if (c != CubeClass::Bad) return;
    for (int axis = 0; axis < d; ++axis)
      for (int side = 0; side < 2; ++side) {
        IVec nb = i;
        nb(axis) += side ? 1 : -1;
        if (lat.cls(nb) == CubeClass::Bad) continue;
        face_full[k] += std::pow(eps, d - 1);
        if (inner.is_empty()) continue;
        const double plane = side ? hi(axis) : lo(axis);
        if (!(plane > inner.lower()(axis) && plane < inner.upper()(axis))) continue;
        double area = 1.0;
        for (int m = 0; m < d; ++m) {
          if (m == axis) continue;
          area *= std::max(0.0, std::min(hi(m), inner.upper()(m)) - std::max(lo(m), inner.lower()(m)));
        }
        face_inner[k] += area;
      }
  });
  r.energy = pairwise_sum(cube_energy_terms);
  r.perimeter = pairwise_sum(face_full);
  r.perimeter_inner = pairwise_sum(face_inner);

  const double numerator = r.energy + r.perimeter_inner;
  if (r.lambda > 0.0) {
    r.ratio = numerator / r.lambda;
  } else if (numerator == 0.0) {
    r.ratio = 0.0;
  } else {
    r.ratio = std::numeric_limits<double>::infinity();
    r.ratio_infinite = true;
  }
  return r;
}

KornCheck check_cube_korn(const Approximant& appr, double p, double constant) {
  const CubeLattice& lat = appr.lattice();
  const LatticeWindow& win = lat.cubes();
  const std::vector<int> signs = pair_signs(lat.directions());
  const double scale = std::pow(lat.eps(), lat.dim() - p);
  struct Item {
    bool good = false;
    bool violated = false;
    double ratio = 0.0;
  };
  const auto items = parallel_map<Item>(win.size(), [&](std::size_t k) {
    Item it;
    if (lat.cls_flat(k) != CubeClass::Good) return it;
    it.good = true;
    const CubeVertexData data = lat.vertex_data(win.index(k));
    if (numerically_rigid(data, signs)) return it;
    const double lhs = scale * cube_energy(data, p);
    const double rhs = scale * fd_rhs(data, p, signs);
    it.ratio = rhs > 0.0 ? lhs / rhs : std::numeric_limits<double>::infinity();
    it.violated = lhs > constant * rhs * (1.0 + 1e-9);
    return it;
  });
  KornCheck check;
  check.constant = constant;
  for (const Item& it : items) {
    if (!it.good) continue;
    ++check.cubes;
    check.violations += it.violated;
    check.max_ratio = std::max(check.max_ratio, it.ratio);
  }
  return check;
}

SweepResult convergence_sweep(const VectorField& field, const DirectionSet& dirs, const SweepOptions& options) {
  if (options.eps.empty()) throw std::invalid_argument("convergence_sweep: empty eps list");
  for (std::size_t k = 0; k < options.eps.size(); ++k) {
    if (!(options.eps[k] > 0.0)) throw std::invalid_argument("convergence_sweep: eps must be positive");
    if (k > 0 && !(options.eps[k] < options.eps[k - 1]))
      throw std::invalid_argument("convergence_sweep: eps list must be strictly decreasing");
  }
  SweepResult result;
  result.energy = lambda_V(field, dirs, options.quad, options.p);
  const double M = options.p == 1.0 ? result.energy.M : result.energy.M_p;
  const int d = field.dim();

  std::optional<double> korn_c;
  if (options.korn_check && d <= 3) {
    if (options.p == 2.0)
      korn_c = korn_constant(d, 2.0, KornMethod::Eig).constant;
    else if (options.p >= 1.0 && options.p < 2.0)
      korn_c = korn_upper_bound(d, options.p);
  }

  const BoxDomain& dom = field.domain();
  for (std::size_t k = 0; k < options.eps.size(); ++k) {
    const double eps = options.eps[k];
    SweepRow row;
    row.eps = eps;
    PhiOptions phi;
    phi.probe_step = options.probe_step;
    const AnchorSelection sel = select_anchor(field, eps, dirs, M, options.n_candidates,
                                              split_seed(options.seed, k), options.p, phi);
    row.anchor = sel.chosen;
    row.feasible_fraction = sel.feasible_fraction;
    const Approximant appr = build(field, eps, sel.y, dirs);
    row.report = energy_report(appr, options.p, result.energy);
    row.probe_step = options.probe_step > 0.0 ? options.probe_step : eps / 8.0;
    const PointMap u = [&](const Vec& x) { return field(x); };
    const PointMap v = [&](const Vec& x) { return appr(x); };
    row.discrepancy = measure_discrepancy(u, v, dom, options.R, options.eta, row.probe_step);
    row.discrepancy_inner = measure_discrepancy(u, v, dom.inner_region(eps), options.R, options.eta, row.probe_step);
    if (korn_c) row.korn = check_cube_korn(appr, options.p, *korn_c);
    result.rows.push_back(std::move(row));
  }
  return result;
}

void write_approximant(std::ostream& out, const Approximant& appr) {
  const CubeLattice& lat = appr.lattice();
  const LatticeWindow& win = lat.cubes();
  const int d = lat.dim();
  out << "# gbd approximant v1\n";
  out << "dim " << d << "\n";
  out << "eps " << format_double(lat.eps()) << "\n";
  out << "anchor " << format_vec(lat.anchor()) << "\n";
  out << "cube_lo";
  for (int i = 0; i < d; ++i) out << ' ' << win.lo(i);
  out << "\ncube_count";
  for (int i = 0; i < d; ++i) out << ' ' << win.count(i);
  out << "\nbad " << lat.bad_count() << "\ngood " << lat.good_count() << "\n";
  out << "classes ";
  for (std::size_t k = 0; k < win.size(); ++k) out << class_code(lat.cls_flat(k));
  out << "\n";
  const LatticeWindow& vw = lat.vertices().window();
  std::vector<char> needed(vw.size(), 0);
  for (std::size_t k = 0; k < win.size(); ++k) {
    if (lat.cls_flat(k) == CubeClass::Outside) continue;
    const IVec i = win.index(k);
    for (int w = 0; w < CubeVertexData::vertex_count(d); ++w)
      needed[vw.flat(i + to_index(CubeVertexData::vertex(d, w)))] = 1;
  }
  for (std::size_t k = 0; k < vw.size(); ++k) {
    if (!needed[k]) continue;
    const IVec j = vw.index(k);
    out << "vertex";
    for (int i = 0; i < d; ++i) out << ' ' << j(i);
    out << ' ' << format_vec(lat.vertices().value(j)) << "\n";
  }
}

}  // namespace gbd
