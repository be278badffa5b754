#include "gbd/field_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace gbd {

BoxDomain::BoxDomain(Vec lower, Vec upper) : BoxDomain(std::move(lower), std::move(upper), false) {
  if (lower_.size() != upper_.size()) throw std::invalid_argument("BoxDomain: corner dimensions differ");
  if (dim() < 2 || dim() > kMaxDim)
    throw std::invalid_argument("BoxDomain: dimension must be in [2, " + std::to_string(kMaxDim) + "]");
  for (int i = 0; i < dim(); ++i)
    if (!(lower_(i) < upper_(i))) throw std::invalid_argument("BoxDomain: lower must be < upper on every axis");
}

BoxDomain::BoxDomain(Vec lower, Vec upper, bool empty)
    : lower_(std::move(lower)), upper_(std::move(upper)), empty_(empty) {}

BoxDomain BoxDomain::unit(int d) { return BoxDomain(Vec::Zero(d), Vec::Ones(d)); }

BoxDomain BoxDomain::empty(int d) { return BoxDomain(Vec::Zero(d), Vec::Zero(d), true); }

double BoxDomain::volume() const {
  if (empty_) return 0.0;
  double v = 1.0;
  for (int i = 0; i < dim(); ++i) v *= side(i);
  return v;
}

bool BoxDomain::contains(const Vec& x) const {
  if (empty_) return false;
  for (int i = 0; i < dim(); ++i)
    if (!(x(i) > lower_(i) && x(i) < upper_(i))) return false;
  return true;
}

bool BoxDomain::contains_closed(const Vec& x) const {
  if (empty_) return false;
  for (int i = 0; i < dim(); ++i)
    if (!(x(i) >= lower_(i) && x(i) <= upper_(i))) return false;
  return true;
}

Vec BoxDomain::clamp(const Vec& x) const {
  Vec y = x;
  for (int i = 0; i < dim(); ++i) y(i) = std::clamp(x(i), lower_(i), upper_(i));
  return y;
}

BoxDomain BoxDomain::inner_region(double eps) const {
  if (eps < 0.0) throw std::invalid_argument("inner_region: eps must be non-negative");
  if (empty_) return *this;
  const double shrink = std::sqrt(static_cast<double>(dim())) * eps;
  Vec lo = lower_.array() + shrink;
  Vec hi = upper_.array() - shrink;
  for (int i = 0; i < dim(); ++i)
    if (!(lo(i) < hi(i))) return empty(dim());
  return BoxDomain(lo, hi, false);
}

BoxDomain BoxDomain::intersect(const BoxDomain& other) const {
  if (empty_ || other.empty_) return empty(dim());
  Vec lo = lower_.cwiseMax(other.lower_);
  Vec hi = upper_.cwiseMin(other.upper_);
  for (int i = 0; i < dim(); ++i)
    if (!(lo(i) < hi(i))) return empty(dim());
  return BoxDomain(lo, hi, false);
}

bool BoxDomain::contains_closed_box(const Vec& lo, const Vec& hi) const {
  if (empty_) return false;
  for (int i = 0; i < dim(); ++i)
    if (!(lo(i) > lower_(i) && hi(i) < upper_(i))) return false;
  return true;
}

std::vector<Vec> BoxDomain::corners() const {
  std::vector<Vec> out;
  const int d = dim();
  for (int mask = 0; mask < (1 << d); ++mask) {
    Vec c(d);
    for (int i = 0; i < d; ++i) c(i) = (mask >> i & 1) ? upper_(i) : lower_(i);
    out.push_back(c);
  }
  return out;
}

double BoxDomain::max_norm() const {
  double r = 0.0;
  for (const Vec& c : corners()) r = std::max(r, c.norm());
  return r;
}

std::optional<std::pair<double, double>> BoxDomain::line_interval(const Vec& z, const Vec& xi) const {
  if (empty_) return std::nullopt;
  double s0 = -std::numeric_limits<double>::infinity();
  double s1 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < dim(); ++i) {
    if (xi(i) == 0.0) {
      if (!(z(i) > lower_(i) && z(i) < upper_(i))) return std::nullopt;
      continue;
    }
    double a = (lower_(i) - z(i)) / xi(i);
    double b = (upper_(i) - z(i)) / xi(i);
    if (a > b) std::swap(a, b);
    s0 = std::max(s0, a);
    s1 = std::min(s1, b);
  }
  if (!(s0 < s1)) return std::nullopt;
  return std::make_pair(s0, s1);
}

BoxDomain inner_region(const BoxDomain& dom, double eps) { return dom.inner_region(eps); }

Vec ExactStructure::value(const Vec& x) const {
  Vec u = gradient * x + offset;
  for (const Step& s : steps)
    if (x.dot(s.normal) > s.level) u += s.slope * x + s.jump;
  return u;
}

bool ExactStructure::is_rigid(double tol) const {
  if (!steps.empty()) return false;
  return (gradient + gradient.transpose()).cwiseAbs().maxCoeff() <= tol;
}

VectorField::VectorField(BoxDomain domain, FieldFormula formula, std::optional<ExactStructure> exact)
    : domain_(std::move(domain)),
      formula_(std::make_shared<const FieldFormula>(std::move(formula))),
      exact_(std::move(exact)) {
  if (domain_.is_empty()) throw std::invalid_argument("VectorField: empty domain");
  if (exact_ && exact_->dim() != domain_.dim())
    throw std::invalid_argument("VectorField: metadata dimension does not match the domain");
}

VectorField VectorField::from_exact(BoxDomain domain, ExactStructure exact) {
  auto formula = [exact](const Vec& x) { return exact.value(x); };
  return VectorField(std::move(domain), formula, std::move(exact));
}

Vec VectorField::operator()(const Vec& x) const {
  if (!domain_.contains_closed(x)) return Vec::Zero(dim());
  return (*formula_)(x);
}

namespace {

double condition_number(const Mat& A) {
  const DynMat dense = A;
  Eigen::JacobiSVD<DynMat> svd(dense);
  const auto& s = svd.singularValues();
  if (s(s.size() - 1) <= 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / s(s.size() - 1);
}

}  // namespace

BasisTransform transform_basis(const VectorField& field, const Mat& A) {
  const int d = field.dim();
  if (A.rows() != d || A.cols() != d) throw std::invalid_argument("transform_basis: A must be d x d");
  const double cond = condition_number(A);
  if (!std::isfinite(cond) || cond > 1e12) throw std::domain_error("transform_basis: matrix is singular");

  const Mat Ainv = A.inverse();
  const Mat AinvT = Ainv.transpose();

  Vec lo = Vec::Constant(d, std::numeric_limits<double>::infinity());
  Vec hi = -lo;
  for (const Vec& c : field.domain().corners()) {
    const Vec y = A * c;
    lo = lo.cwiseMin(y);
    hi = hi.cwiseMax(y);
  }
  BoxDomain image(lo, hi);

  std::optional<ExactStructure> exact;
  if (field.exact()) {
    const ExactStructure& src = *field.exact();
    ExactStructure dst;
    dst.gradient = AinvT * src.gradient * Ainv;
    dst.offset = AinvT * src.offset;
    for (const Step& s : src.steps) {
      Vec n = AinvT * s.normal;
      const double len = n.norm();
      dst.steps.push_back(Step{n / len, s.level / len, AinvT * s.slope * Ainv, AinvT * s.jump});
    }
    exact = std::move(dst);
  }

  auto formula = [field, Ainv, AinvT](const Vec& x) -> Vec { return AinvT * field.formula(Ainv * x); };
  return BasisTransform{VectorField(image, formula, std::move(exact)), cond};
}

double pullback_weight(const Mat& A, const Vec& xi) {
  return std::abs(A.determinant()) * xi.norm() / (A * xi).norm();
}

DirectionSet::DirectionSet(Mat basis, std::vector<Direction> directions)
    : basis_(std::move(basis)), dirs_(std::move(directions)) {}

bool DirectionSet::is_canonical() const { return basis_.isIdentity(0.0); }

double DirectionSet::min_threshold() const {
  double m = std::numeric_limits<double>::infinity();
  for (const Direction& d : dirs_) m = std::min(m, d.threshold);
  return m;
}

DirectionSet make_direction_set(const Mat& basis, std::span<const int> pair_signs,
                                std::span<const double> thresholds) {
  const int d = static_cast<int>(basis.rows());
  if (basis.cols() != d || d < 2 || d > kMaxDim) throw std::invalid_argument("make_direction_set: basis must be square, 2 <= d <= 4");
  const std::size_t n_pairs = static_cast<std::size_t>(d * (d - 1) / 2);
  const std::size_t n_dirs = static_cast<std::size_t>(d * (d + 1) / 2);
  if (!pair_signs.empty() && pair_signs.size() != n_pairs)
    throw std::invalid_argument("make_direction_set: need one sign per pair (i<j)");
  if (!thresholds.empty() && thresholds.size() != n_dirs)
    throw std::invalid_argument("make_direction_set: need one threshold per direction");

  double scale = 1.0;
  for (int j = 0; j < d; ++j) {
    const double n = basis.col(j).norm();
    if (!(n > 0.0)) throw std::invalid_argument("make_direction_set: degenerate basis (zero column)");
    scale *= n;
  }
  if (std::abs(basis.determinant()) <= 1e-12 * scale)
    throw std::invalid_argument("make_direction_set: degenerate basis (columns dependent)");

  std::vector<Direction> dirs;
  for (int i = 0; i < d; ++i) {
    Direction dir;
    dir.coeffs = unit(d, i);
    dir.xi = basis.col(i);
    dir.first = i;
    dirs.push_back(dir);
  }
  std::size_t pair = 0;
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j, ++pair) {
      const int sign = pair_signs.empty() ? 1 : pair_signs[pair];
      if (sign != 1 && sign != -1) throw std::invalid_argument("make_direction_set: pair signs must be +1 or -1");
      Direction dir;
      dir.coeffs = unit(d, i) + sign * unit(d, j);
      dir.xi = basis * dir.coeffs;
      dir.first = i;
      dir.second = j;
      dirs.push_back(dir);
    }
  }
  for (std::size_t k = 0; k < dirs.size(); ++k) {
    if (!thresholds.empty()) {
      if (!(thresholds[k] > 0.0)) throw std::invalid_argument("make_direction_set: thresholds must be positive");
      dirs[k].threshold = thresholds[k];
    }
  }
  return DirectionSet(basis, std::move(dirs));
}

DirectionSet canonical_directions(int d) { return make_direction_set(Mat::Identity(d, d)); }

}  // namespace gbd
