#include "gbd/generators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gbd {

std::string to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::Rigid: return "rigid";
    case GeneratorKind::Linear: return "linear";
    case GeneratorKind::PiecewiseRigid: return "piecewise_rigid";
    case GeneratorKind::ScalarJump: return "scalar_jump";
    case GeneratorKind::Sum: return "custom-sum";
  }
  return "unknown";
}

namespace {

void check_vec(const Vec& v, int d, const char* what) {
  if (v.size() != d) throw std::invalid_argument(std::string(what) + ": wrong dimension");
}

void check_mat(const Mat& m, int d, const char* what) {
  if (m.rows() != d || m.cols() != d) throw std::invalid_argument(std::string(what) + ": wrong dimension");
}

void check_skew(const Mat& a, const char* what) {
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a + a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument(std::string(what) + ": matrix is not skew-symmetric");
}

Vec unit_normal(const Vec& n, const char* what) {
  const double len = n.norm();
  if (!(len > 0.0)) throw std::invalid_argument(std::string(what) + ": zero normal");
  return n / len;
}

bool plane_meets(const BoxDomain& box, const Vec& unit_n, double level) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const Vec& c : box.corners()) {
    lo = std::min(lo, c.dot(unit_n));
    hi = std::max(hi, c.dot(unit_n));
  }
  return lo < level && level < hi;
}

struct Accumulator {
  const BoxDomain& domain;
  ExactStructure out;

  void add(const RigidMotion& r) {
    check_mat(r.skew, domain.dim(), "rigid skew");
    check_vec(r.offset, domain.dim(), "rigid offset");
    check_skew(r.skew, "rigid");
    out.gradient += r.skew;
    out.offset += r.offset;
  }
  void add(const LinearMap& l) {
    check_mat(l.gradient, domain.dim(), "linear gradient");
    check_vec(l.offset, domain.dim(), "linear offset");
    out.gradient += l.gradient;
    out.offset += l.offset;
  }
  void add(const PiecewiseRigid& pr) {
    add(pr.base);
    for (const Cut& c : pr.cuts) {
      check_vec(c.normal, domain.dim(), "cut normal");
      check_mat(c.skew, domain.dim(), "cut skew");
      check_vec(c.offset, domain.dim(), "cut offset");
      check_skew(c.skew, "cut increment");
      const double len = c.normal.norm();
      const Vec n = unit_normal(c.normal, "cut");
      if (!plane_meets(domain, n, c.level / len)) throw std::invalid_argument("cut plane does not cross the domain");
      out.steps.push_back(Step{n, c.level / len, c.skew, c.offset});
    }
  }
  void add(const ScalarJump& s) {
    check_vec(s.normal, domain.dim(), "jump normal");
    check_vec(s.jump, domain.dim(), "jump vector");
    const double len = s.normal.norm();
    const Vec n = unit_normal(s.normal, "scalar_jump");
    out.steps.push_back(Step{n, s.level / len, Mat::Zero(domain.dim(), domain.dim()), s.jump});
  }
  void add(const Sum& s) {
    if (s.terms.empty()) throw std::invalid_argument("sum field without terms");
    for (const Component& c : s.terms) std::visit([this](const auto& x) { add(x); }, c);
  }
};

}  // namespace

ExactStructure exact_structure(const GeneratorSpec& spec) {
  const int d = spec.dim();
  Accumulator acc{spec.domain, ExactStructure{Mat::Zero(d, d), Vec::Zero(d), {}}};
  std::visit([&acc](const auto& x) { acc.add(x); }, spec.shape);
  return acc.out;
}

VectorField build_field(const GeneratorSpec& spec) {
  return VectorField::from_exact(spec.domain, exact_structure(spec));
}

double facet_measure(const BoxDomain& box, const Vec& normal, double level) {
  const int d = box.dim();
  std::vector<int> active;
  double factor = 1.0;
  for (int k = 0; k < d; ++k) {
    if (std::abs(normal(k)) <= 1e-15 * normal.norm())
      factor *= box.side(k);
    else
      active.push_back(k);
  }
  if (active.empty()) throw std::invalid_argument("facet_measure: zero normal");
  if (active.size() == 1) {
    const int a = active[0];
    const double x = level / normal(a);
    return (x > box.lower()(a) && x < box.upper()(a)) ? factor : 0.0;
  }
  if (active.size() > 2) throw std::domain_error("facet_measure: only planes tilted in at most two axes are supported");
  const int a = active[0];
  const int b = active[1];
  Vec n2(2);
  n2 << normal(a), normal(b);
  const double len = n2.norm();
  n2 /= len;
  Vec lo(2), hi(2);
  lo << box.lower()(a), box.lower()(b);
  hi << box.upper()(a), box.upper()(b);
  const BoxDomain rect(lo, hi);
  Vec tangent(2);
  tangent << -n2(1), n2(0);
  const auto iv = rect.line_interval(n2 * (level / len), tangent);
  if (!iv) return 0.0;
  return factor * (iv->second - iv->first);
}

double integral_truncated_abs(double a, double b, double beta, double length) {
  if (length <= 0.0) return 0.0;
  std::vector<double> ts{0.0, length};
  if (b != 0.0) {
    for (double t : {-a / b, (beta - a) / b, (-beta - a) / b})
      if (t > 0.0 && t < length) ts.push_back(t);
  }
  std::sort(ts.begin(), ts.end());
  auto g = [&](double t) { return std::min(std::abs(a + b * t), beta); };
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) total += 0.5 * (g(ts[i]) + g(ts[i + 1])) * (ts[i + 1] - ts[i]);
  return total;
}

SliceEnergy exact_lambda(const GeneratorSpec& spec, const Vec& xi, double beta, double p) {
  if (!(beta > 0.0)) throw std::invalid_argument("exact_lambda: beta must be positive");
  if (!(p >= 1.0)) throw std::invalid_argument("exact_lambda: p must be >= 1");
  const ExactStructure ex = exact_structure(spec);
  const int d = spec.dim();
  check_vec(xi, d, "direction");
  const double xn = xi.norm();
  if (!(xn > 0.0)) throw std::invalid_argument("exact_lambda: zero direction");

  const double slope_scale = std::max(1.0, ex.gradient.cwiseAbs().maxCoeff()) * xn * xn;
  for (const Step& s : ex.steps)
    if (std::abs(xi.dot(s.slope * xi)) > 1e-12 * slope_scale)
      throw std::domain_error("exact_lambda: slice slope changes across a step");

  // Along z + sξ the slice derivative is ξ·Gξ; ∫_{ξ⊥}|Ω^ξ_z| dz = |Ω|/|ξ|.
  const double sigma = std::abs(xi.dot(ex.gradient * xi));
  const double vol = spec.domain.volume();
  SliceEnergy out;
  out.lambda = sigma * vol / xn;
  out.lambda_p = std::pow(sigma, p) * vol / xn;

  for (const Step& s : ex.steps) {
    const double cosine = std::abs(s.normal.dot(xi)) / xn;
    if (cosine <= 1e-15) continue;
    const Vec g = s.slope.transpose() * xi;
    const Vec g_tan = g - g.dot(s.normal) * s.normal;
    if (g_tan.norm() <= 1e-14 * (1.0 + g.norm())) {
      const Vec x0 = s.level * s.normal;
      const double f = std::abs(xi.dot(s.slope * x0 + s.jump));
      const double area = facet_measure(spec.domain, s.normal, s.level);
      out.lambda += std::min(f, beta) * area * cosine;
      if (f > 0.0) out.lambda_p += area * cosine;
      continue;
    }
    if (d != 2) throw std::domain_error("exact_lambda: jump varies over a facet (closed form only for d = 2)");
    Vec tangent(2);
    tangent << -s.normal(1), s.normal(0);
    const auto iv = spec.domain.line_interval(s.level * s.normal, tangent);
    if (!iv) continue;
    const Vec start = s.level * s.normal + iv->first * tangent;
    const double length = iv->second - iv->first;
    const double a = xi.dot(s.slope * start + s.jump);
    const double b = xi.dot(s.slope * tangent);
    out.lambda += cosine * integral_truncated_abs(a, b, beta, length);
    out.lambda_p += cosine * length;
  }
  return out;
}

namespace {

Mat mat2(double a, double b, double c, double d) {
  Mat m(2, 2);
  m << a, b, c, d;
  return m;
}

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

}  // namespace

std::vector<GeneratorSpec> corpus() {
  const BoxDomain box = BoxDomain::unit(2);
  std::vector<GeneratorSpec> out;
  out.push_back({"rigid_rotation", box, RigidMotion{mat2(0, 1, -1, 0), vec2(0, 0)}});
  out.push_back({"rigid_translated", box, RigidMotion{mat2(0, -0.5, 0.5, 0), vec2(0.3, -0.2)}});
  out.push_back({"linear_identity", box, LinearMap{mat2(1, 0, 0, 1), vec2(0, 0)}});
  out.push_back({"linear_shear", box, LinearMap{mat2(0.2, 0.5, 0.1, -0.3), vec2(0.1, 0)}});
  out.push_back({"crack_vertical", box, ScalarJump{vec2(1, 0), 0.5, vec2(2, 0)}});
  out.push_back({"crack_tilted", box, ScalarJump{vec2(2, 1), 1.5, vec2(1.5, 0.6)}});
  out.push_back({"piecewise_rigid", box,
                 PiecewiseRigid{RigidMotion{mat2(0, 0, 0, 0), vec2(0, 0)},
                                {Cut{vec2(0, 1), 0.4, mat2(0, 0.8, -0.8, 0), vec2(0.3, 1.2)}}}});
  out.push_back({"sum_strain_crack", box,
                 Sum{{LinearMap{mat2(0.15, 0.1, 0, -0.1), vec2(0, 0)}, ScalarJump{vec2(0, 1), 0.55, vec2(0.4, 1.6)}}}});
  return out;
}

GeneratorSpec corpus_field(const std::string& name) {
  for (GeneratorSpec& s : corpus())
    if (s.name == name) return s;
  throw std::invalid_argument("no corpus field named '" + name + "'");
}

}  // namespace gbd
