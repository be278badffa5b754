#pragma once

#include "gbd/types.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace gbd {

/// Axis-aligned open box Ω = Π (lower_i, upper_i). May be flagged empty, which
/// is how shrunken regions that collapse are represented.
class BoxDomain {
 public:
  BoxDomain(Vec lower, Vec upper);

  static BoxDomain unit(int d);
  static BoxDomain empty(int d);

  int dim() const { return static_cast<int>(lower_.size()); }
  bool is_empty() const { return empty_; }
  const Vec& lower() const { return lower_; }
  const Vec& upper() const { return upper_; }
  double side(int k) const { return empty_ ? 0.0 : upper_(k) - lower_(k); }
  double volume() const;

  bool contains(const Vec& x) const;         // open box
  bool contains_closed(const Vec& x) const;  // closure
  Vec clamp(const Vec& x) const;

  /// {x : dist(x, ∂Ω) > √d·ε}: every side shrinks by √d·ε.
  BoxDomain inner_region(double eps) const;
  BoxDomain intersect(const BoxDomain& other) const;
  /// Closed box [lo, hi] lies inside this open box.
  bool contains_closed_box(const Vec& lo, const Vec& hi) const;

  std::vector<Vec> corners() const;
  /// Largest |x| over the closure.
  double max_norm() const;

  /// Parameter interval {s : z + sξ ∈ Ω}, if non-empty.
  std::optional<std::pair<double, double>> line_interval(const Vec& z, const Vec& xi) const;

 private:
  BoxDomain(Vec lower, Vec upper, bool empty);

  Vec lower_;
  Vec upper_;
  bool empty_ = false;
};

BoxDomain inner_region(const BoxDomain& dom, double eps);

/// Additive discontinuity (slope·x + jump)·1{x·normal > level}.
struct Step {
  Vec normal;  // unit
  double level = 0.0;
  Mat slope;
  Vec jump;
};

/// Exact description u(x) = gradient·x + offset + Σ steps. Every generator
/// field carries one; it lets slices be analysed without sampling.
struct ExactStructure {
  Mat gradient;
  Vec offset;
  std::vector<Step> steps;

  int dim() const { return static_cast<int>(offset.size()); }
  Vec value(const Vec& x) const;
  bool is_rigid(double tol = 1e-12) const;
};

using FieldFormula = std::function<Vec(const Vec&)>;

/// Displacement field on a box. operator() extends by zero outside the closed
/// box; formula() is the natural extension used by basis changes.
class VectorField {
 public:
  VectorField(BoxDomain domain, FieldFormula formula, std::optional<ExactStructure> exact = std::nullopt);

  static VectorField from_exact(BoxDomain domain, ExactStructure exact);

  const BoxDomain& domain() const { return domain_; }
  int dim() const { return domain_.dim(); }
  const std::optional<ExactStructure>& exact() const { return exact_; }

  Vec operator()(const Vec& x) const;
  Vec formula(const Vec& x) const { return (*formula_)(x); }
  /// For points known to lie in the closure up to roundoff.
  Vec at_closure(const Vec& x) const { return (*formula_)(domain_.clamp(x)); }

 private:
  BoxDomain domain_;
  std::shared_ptr<const FieldFormula> formula_;
  std::optional<ExactStructure> exact_;
};

struct BasisTransform {
  VectorField field;
  double condition = 1.0;
};

/// v(x) = A^{-T} u(A^{-1} x) on the bounding box of A(Ω). Throws
/// std::domain_error for (numerically) singular A.
BasisTransform transform_basis(const VectorField& field, const Mat& A);

/// Factor w with Λ^{Aξ}_v = w·Λ^ξ_u for v = transform_basis(u, A): slices
/// coincide, only the hyperplane measure changes (|det A|·|ξ|/|Aξ|).
double pullback_weight(const Mat& A, const Vec& xi);

struct Direction {
  Vec xi;
  Vec coeffs;  // coordinates of ξ in the basis, entries in {0, ±1}
  double threshold = 1.0;
  int first = 0;
  int second = -1;  // -1 for basis directions

  double weight() const { return xi.norm(); }
  bool is_pair() const { return second >= 0; }
};

/// The d(d+1)/2 slicing directions {e_i} ∪ {e_i ± e_j}.
class DirectionSet {
 public:
  DirectionSet(Mat basis, std::vector<Direction> directions);

  int dim() const { return static_cast<int>(basis_.rows()); }
  const Mat& basis() const { return basis_; }
  std::size_t size() const { return dirs_.size(); }
  const Direction& operator[](std::size_t i) const { return dirs_[i]; }
  auto begin() const { return dirs_.begin(); }
  auto end() const { return dirs_.end(); }

  bool is_canonical() const;
  double min_threshold() const;

 private:
  Mat basis_;
  std::vector<Direction> dirs_;
};

/// pair_signs: one ±1 per pair (i<j, lexicographic), empty for all +1.
/// thresholds: one β_ξ > 0 per direction, empty for all 1.
DirectionSet make_direction_set(const Mat& basis, std::span<const int> pair_signs = {},
                                std::span<const double> thresholds = {});

DirectionSet canonical_directions(int d);

}  // namespace gbd

namespace gbd {

/// Λ^ξ and its p-variant Λ^{p,ξ} for one direction.
struct SliceEnergy {
  double lambda = 0.0;
  double lambda_p = 0.0;
};

}  // namespace gbd
