#include "gbd/slicing.hpp"

#include "gbd/parallel.hpp"
#include "gbd/random.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gbd {

SliceDescriptor extract_slice(const VectorField& field, const Vec& xi, const Vec& z, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("extract_slice: step must be positive");
  if (xi.norm() == 0.0) throw std::invalid_argument("extract_slice: direction must be nonzero");
  SliceDescriptor desc{xi, z, field.domain().line_interval(z, xi), h, {}, {}, 0.0};
  if (!desc.interval) return desc;
  const auto [s0, s1] = *desc.interval;
  const double L = s1 - s0;
  const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(L / h)));
  desc.h = L / static_cast<double>(n);
  desc.s.resize(n + 1);
  desc.values.resize(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    const double s = k == n ? s1 : s0 + static_cast<double>(k) * desc.h;
    desc.s[k] = s;
    const Vec u = field.at_closure(z + s * xi);
    desc.values[k] = xi.dot(u);
    desc.magnitude = std::max(desc.magnitude, xi.norm() * u.norm());
  }
  return desc;
}

double default_jump_threshold(const SliceDescriptor& desc, double beta) {
  std::vector<double> inc;
  inc.reserve(desc.values.size());
  for (std::size_t k = 0; k + 1 < desc.values.size(); ++k) inc.push_back(std::abs(desc.values[k + 1] - desc.values[k]));
  double median = 0.0;
  if (!inc.empty()) {
    auto mid = inc.begin() + static_cast<std::ptrdiff_t>(inc.size() / 2);
    std::nth_element(inc.begin(), mid, inc.end());
    median = *mid;
  }
  return std::max(10.0 * median, beta / 10.0);
}

SliceMeasure analyze_slice(const SliceDescriptor& desc, double tau_jump, double beta, double p) {
  if (desc.s.size() < 2) throw std::invalid_argument("analyze_slice: need at least 2 samples");
  if (tau_jump <= 0.0) tau_jump = default_jump_threshold(desc, beta);
  double scale = desc.magnitude;
  for (double v : desc.values) scale = std::max(scale, std::abs(v));
  const double floor = roundoff_floor(scale);
  SliceMeasure m;
  for (std::size_t k = 0; k + 1 < desc.s.size(); ++k) {
    const double step = desc.s[k + 1] - desc.s[k];
    double delta = desc.values[k + 1] - desc.values[k];
    if (std::abs(delta) <= floor) delta = 0.0;
    if (std::abs(delta) > tau_jump) {
      m.jumps.push_back({0.5 * (desc.s[k] + desc.s[k + 1]), delta});
      m.truncated_jump_mass += std::min(std::abs(delta), beta);
    } else if (delta != 0.0) {
      m.ac_mass += std::abs(delta);
      m.p_ac_mass += std::pow(std::abs(delta) / step, p) * step;
    }
  }
  return m;
}

SliceMeasure analyze_slice_exact(const VectorField& field, const Vec& xi, const Vec& z, double beta, double p) {
  if (!field.exact()) throw std::invalid_argument("analyze_slice_exact: field has no exact metadata; use the sampled path");
  const ExactStructure& ex = *field.exact();
  SliceMeasure m;
  const auto interval = field.domain().line_interval(z, xi);
  if (!interval) return m;
  const auto [s0, s1] = *interval;

  std::vector<std::pair<double, std::size_t>> crossings;
  for (std::size_t k = 0; k < ex.steps.size(); ++k) {
    const Step& st = ex.steps[k];
    const double rate = xi.dot(st.normal);
    if (rate == 0.0) continue;
    const double s = (st.level - z.dot(st.normal)) / rate;
    if (s > s0 && s < s1) crossings.emplace_back(s, k);
  }
  std::sort(crossings.begin(), crossings.end());

  auto slope_at = [&](double s) {
    const Vec x = z + s * xi;
    Mat g = ex.gradient;
    for (const Step& st : ex.steps)
      if (x.dot(st.normal) > st.level) g += st.slope;
    const Mat sym = 0.5 * (g + g.transpose());
    return xi.dot(sym * xi);
  };
  auto add_ac = [&](double a, double b) {
    if (!(b > a)) return;
    const double sigma = std::abs(slope_at(0.5 * (a + b)));
    if (sigma == 0.0) return;
    m.ac_mass += sigma * (b - a);
    m.p_ac_mass += std::pow(sigma, p) * (b - a);
  };

  double prev = s0;
  for (const auto& [s, k] : crossings) {
    add_ac(prev, s);
    prev = s;
    const Step& st = ex.steps[k];
    const Vec x = z + s * xi;
    const double f = xi.dot(st.slope * x + st.jump);
    const double size = xi.dot(st.normal) > 0.0 ? f : -f;
    const double scale = xi.norm() * (st.jump.norm() + st.slope.norm() * x.norm());
    if (std::abs(size) <= 1e-14 * scale) continue;
    m.jumps.push_back({s, size});
    m.truncated_jump_mass += std::min(std::abs(size), beta);
  }
  add_ac(prev, s1);
  return m;
}

std::vector<Vec> orthogonal_frame(const Vec& xi) {
  const int d = static_cast<int>(xi.size());
  std::vector<Vec> basis{xi.normalized()};
  for (int k = 0; k < d && static_cast<int>(basis.size()) < d; ++k) {
    Vec v = unit(d, k);
    for (const Vec& b : basis) v -= v.dot(b) * b;
    for (const Vec& b : basis) v -= v.dot(b) * b;
    if (v.norm() > 1e-8) basis.push_back(v.normalized());
  }
  return {basis.begin() + 1, basis.end()};
}

HyperplaneGrid hyperplane_grid(const BoxDomain& domain, const Vec& xi, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("hyperplane_grid: step must be positive");
  HyperplaneGrid grid;
  if (domain.is_empty()) return grid;
  const auto frame = orthogonal_frame(xi);
  const int m = static_cast<int>(frame.size());
  std::vector<double> lo(m, std::numeric_limits<double>::infinity()), hi(m, -std::numeric_limits<double>::infinity());
  for (const Vec& c : domain.corners())
    for (int k = 0; k < m; ++k) {
      lo[k] = std::min(lo[k], c.dot(frame[k]));
      hi[k] = std::max(hi[k], c.dot(frame[k]));
    }
  std::vector<int> n(m);
  std::vector<double> step(m);
  grid.weight = 1.0;
  std::size_t total = 1;
  for (int k = 0; k < m; ++k) {
    n[k] = std::max(1, static_cast<int>(std::ceil((hi[k] - lo[k]) / delta)));
    step[k] = (hi[k] - lo[k]) / n[k];
    grid.weight *= step[k];
    total *= static_cast<std::size_t>(n[k]);
  }
  grid.nodes.reserve(total);
  std::vector<int> idx(m, 0);
  for (std::size_t t = 0; t < total; ++t) {
    Vec z = zeros(static_cast<int>(xi.size()));
    for (int k = 0; k < m; ++k) z += (lo[k] + (idx[k] + 0.5) * step[k]) * frame[k];
    grid.nodes.push_back(z);
    for (int k = 0; k < m && ++idx[k] == n[k]; ++k) idx[k] = 0;
  }
  return grid;
}

SliceEnergy lambda_xi(const VectorField& field, const Vec& xi, const SliceQuadrature& quad, double beta, double p) {
  if (!(quad.h > 0.0)) throw std::invalid_argument("lambda_xi: slice step must be positive");
  const bool exact = quad.mode == SliceMode::Exact || (quad.mode == SliceMode::Auto && field.exact().has_value());
  if (quad.mode == SliceMode::Exact && !field.exact())
    throw std::invalid_argument("lambda_xi: exact mode requested for a field without metadata");
  const HyperplaneGrid grid = hyperplane_grid(field.domain(), xi, quad.delta);
  const std::size_t n = grid.nodes.size();
  std::vector<double> lam(n, 0.0), lam_p(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    const Vec& z = grid.nodes[i];
    const auto interval = field.domain().line_interval(z, xi);
    if (!interval || interval->second - interval->first < 2.0 * quad.h) return;
    const SliceMeasure sm = exact ? analyze_slice_exact(field, xi, z, beta, p)
                                  : analyze_slice(extract_slice(field, xi, z, quad.h), quad.tau_jump, beta, p);
    lam[i] = sm.lambda();
    lam_p[i] = sm.lambda_p();
  });
  return {grid.weight * pairwise_sum(lam), grid.weight * pairwise_sum(lam_p)};
}

DirectionalEnergy lambda_V(const VectorField& field, const DirectionSet& dirs, const SliceQuadrature& quad, double p) {
  DirectionalEnergy e;
  e.p = p;
  e.quad = quad;
  for (const Direction& dir : dirs) {
    const SliceEnergy s = lambda_xi(field, dir.xi, quad, dir.threshold, p);
    e.xi.push_back(dir.xi);
    e.beta.push_back(dir.threshold);
    e.lambda.push_back(s.lambda);
    e.lambda_p.push_back(s.lambda_p);
    e.lambda_V += s.lambda;
    e.lambda_pV += s.lambda_p;
    e.M += dir.weight() * s.lambda;
    e.M_p += dir.weight() * s.lambda_p;
  }
  return e;
}

RotationChoice select_rotation(const VectorField& field, int n_samples, std::uint64_t seed,
                               const SliceQuadrature& quad) {
  if (n_samples < 2) throw std::invalid_argument("select_rotation: need at least 2 samples");
  const int d = field.dim();
  std::vector<Vec> unit_dirs;
  for (int i = 0; i < d; ++i) unit_dirs.push_back(unit(d, i));
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) unit_dirs.push_back((unit(d, i) + unit(d, j)) / std::sqrt(2.0));

  RotationChoice choice;
  std::vector<Mat> rotations;
  for (int r = 0; r < n_samples; ++r) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(r));
    rotations.push_back(haar_rotation(rng, d));
  }
  for (const Mat& R : rotations) {
    double total = 0.0;
    for (const Vec& v : unit_dirs) total += lambda_xi(field, R * v, quad).lambda;
    choice.samples.push_back(total);
  }
  const auto best = std::min_element(choice.samples.begin(), choice.samples.end()) - choice.samples.begin();
  choice.rotation = rotations[static_cast<std::size_t>(best)];
  choice.value = choice.samples[static_cast<std::size_t>(best)];
  choice.mean = pairwise_sum(choice.samples) / n_samples;
  return choice;
}

}  // namespace gbd
