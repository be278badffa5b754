#include "gbd/lattice.hpp"

#include <cmath>
#include <stdexcept>

namespace gbd {

std::size_t LatticeWindow::size() const {
  std::size_t n = 1;
  for (int i = 0; i < dim(); ++i) n *= static_cast<std::size_t>(count(i));
  return n;
}

Vec LatticeWindow::point(const IVec& j) const { return eps * (y + j.cast<double>()); }

bool LatticeWindow::contains(const IVec& j) const {
  for (int i = 0; i < dim(); ++i)
    if (j(i) < lo(i) || j(i) >= lo(i) + count(i)) return false;
  return true;
}

std::size_t LatticeWindow::flat(const IVec& j) const {
  std::size_t k = 0;
  for (int i = dim() - 1; i >= 0; --i) k = k * static_cast<std::size_t>(count(i)) + static_cast<std::size_t>(j(i) - lo(i));
  return k;
}

IVec LatticeWindow::index(std::size_t k) const {
  IVec j(dim());
  for (int i = 0; i < dim(); ++i) {
    const auto c = static_cast<std::size_t>(count(i));
    j(i) = lo(i) + static_cast<long>(k % c);
    k /= c;
  }
  return j;
}

LatticeWindow covering_window(double eps, const Vec& y, const Vec& lower, const Vec& upper) {
  if (!(eps > 0.0)) throw std::invalid_argument("lattice: eps must be positive");
  const int d = static_cast<int>(y.size());
  LatticeWindow w{eps, y, IVec(d), IVec(d)};
  for (int i = 0; i < d; ++i) {
    const long a = static_cast<long>(std::floor(lower(i) / eps - y(i))) - 1;
    const long b = static_cast<long>(std::ceil(upper(i) / eps - y(i))) + 1;
    w.lo(i) = a;
    w.count(i) = b - a + 1;
  }
  return w;
}

LatticeSamples::LatticeSamples(const VectorField& field, LatticeWindow window) : window_(std::move(window)) {
  const std::size_t n = window_.size();
  const int d = dim();
  values_.resize(n * static_cast<std::size_t>(d));
  inside_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Vec x = window_.point(window_.index(k));
    const Vec u = field(x);
    for (int i = 0; i < d; ++i) values_[k * static_cast<std::size_t>(d) + static_cast<std::size_t>(i)] = u(i);
    inside_[k] = field.domain().contains(x) ? 1 : 0;
    max_norm_ = std::max(max_norm_, u.norm());
  }
}

Vec LatticeSamples::value(const IVec& j) const {
  const double* p = at(window_.flat(j));
  return Eigen::Map<const Eigen::VectorXd>(p, dim());
}

ProbeGrid probe_grid(const Vec& lower, const Vec& upper, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("probe grid: step must be positive");
  const int d = static_cast<int>(lower.size());
  ProbeGrid grid;
  std::vector<long> n(d);
  std::vector<double> step(d);
  std::size_t total = 1;
  grid.cell_volume = 1.0;
  for (int i = 0; i < d; ++i) {
    const double side = upper(i) - lower(i);
    if (!(side > 0.0)) return grid;
    n[i] = std::max(1L, static_cast<long>(std::ceil(side / h - 1e-9)));
    step[i] = side / static_cast<double>(n[i]);
    grid.cell_volume *= step[i];
    grid.step = std::max(grid.step, step[i]);
    total *= static_cast<std::size_t>(n[i]);
  }
  grid.points.reserve(total);
  std::vector<long> idx(d, 0);
  for (std::size_t t = 0; t < total; ++t) {
    Vec x(d);
    for (int i = 0; i < d; ++i) x(i) = lower(i) + (static_cast<double>(idx[i]) + 0.5) * step[i];
    grid.points.push_back(x);
    for (int i = 0; i < d && ++idx[i] == n[i]; ++i) idx[i] = 0;
  }
  return grid;
}

}  // namespace gbd
