#pragma once

#include "gbd/field_model.hpp"

#include <cstddef>
#include <vector>

namespace gbd {

/// A rectangular block of the anchored lattice εy + εZ^d.
struct LatticeWindow {
  double eps = 1.0;
  Vec y;
  IVec lo;     // first index per axis
  IVec count;  // points per axis

  int dim() const { return static_cast<int>(y.size()); }
  std::size_t size() const;
  Vec point(const IVec& j) const;
  bool contains(const IVec& j) const;
  std::size_t flat(const IVec& j) const;
  IVec index(std::size_t flat) const;
};

/// Smallest window whose points cover [lower, upper] with one extra layer on
/// each side.
LatticeWindow covering_window(double eps, const Vec& y, const Vec& lower, const Vec& upper);

/// Field values (zero-extended) at every point of a window.
class LatticeSamples {
 public:
  LatticeSamples(const VectorField& field, LatticeWindow window);

  const LatticeWindow& window() const { return window_; }
  int dim() const { return window_.dim(); }
  /// Pointer to the d components stored for flat index k.
  const double* at(std::size_t k) const { return values_.data() + k * static_cast<std::size_t>(dim()); }
  Vec value(const IVec& j) const;
  bool in_domain(std::size_t k) const { return inside_[k] != 0; }
  double max_norm() const { return max_norm_; }

 private:
  LatticeWindow window_;
  std::vector<double> values_;
  std::vector<char> inside_;  // point in the open domain
  double max_norm_ = 0.0;
};

/// Midpoint probe grid over a box with per-axis step ≤ h.
struct ProbeGrid {
  std::vector<Vec> points;
  double cell_volume = 0.0;
  double step = 0.0;  // largest per-axis step
};

ProbeGrid probe_grid(const Vec& lower, const Vec& upper, double h);

}  // namespace gbd
