#pragma once

#include "gbd/anchor.hpp"
#include "gbd/field_model.hpp"
#include "gbd/interpolation.hpp"
#include "gbd/lattice.hpp"
#include "gbd/slicing.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace gbd {

enum class CubeClass : std::uint8_t { Outside, Bad, Good };

char class_code(CubeClass c);  // 'O', 'B', 'G'

/// Lowest endpoints j ∈ εZ^d (relative to εy) of the edges or face diagonals
/// of cube `cube` parallel to ξ, given by its coefficients in {0, ±1}.
/// Throws std::invalid_argument unless ξ = e_k or e_k ± e_l.
std::vector<Vec> edge_pairs(const IVec& cube, const Vec& coeffs, double eps);

/// Cubes Q^i = εy + εi + ε[0,1)^d around the domain, classified against the
/// direction thresholds.
class CubeLattice {
 public:
  CubeLattice(const VectorField& field, double eps, Vec y, DirectionSet dirs);

  int dim() const { return static_cast<int>(y_.size()); }
  double eps() const { return eps_; }
  const Vec& anchor() const { return y_; }
  const DirectionSet& directions() const { return dirs_; }
  const BoxDomain& domain() const { return domain_; }

  /// Cube index range (a window over cube indices, one margin layer).
  const LatticeWindow& cubes() const { return cubes_; }
  CubeClass cls(const IVec& i) const;
  CubeClass cls_flat(std::size_t k) const { return classes_[k]; }

  std::size_t bad_count() const { return bad_; }
  std::size_t good_count() const { return good_; }

  Vec origin(const IVec& i) const { return eps_ * (y_ + i.cast<double>()); }
  IVec cube_of(const Vec& x) const;
  CubeVertexData vertex_data(const IVec& i) const;
  const LatticeSamples& vertices() const { return vertices_; }

 private:
  double eps_;
  Vec y_;
  DirectionSet dirs_;
  BoxDomain domain_;
  LatticeWindow cubes_;
  LatticeSamples vertices_;
  std::vector<CubeClass> classes_;
  std::size_t bad_ = 0;
  std::size_t good_ = 0;
};

/// Requires the canonical basis; transform the field first otherwise.
CubeLattice classify(const VectorField& field, double eps, const Vec& y, const DirectionSet& dirs);

/// Multilinear patch on GOOD cubes, zero elsewhere.
class Approximant {
 public:
  explicit Approximant(CubeLattice lattice) : lattice_(std::move(lattice)) {}

  const CubeLattice& lattice() const { return lattice_; }
  Vec operator()(const Vec& x) const;
  MultilinearPatch patch(const IVec& i) const;

 private:
  CubeLattice lattice_;
};

Approximant build(const VectorField& field, double eps, const Vec& y, const DirectionSet& dirs);

struct EnergyReport {
  double eps = 0.0;
  double p = 1.0;
  double energy = 0.0;           // ∫_{Ω_ε} |e(u^ε)|^p
  double perimeter_inner = 0.0;  // H^{d-1}(∂B^ε ∩ Ω_ε)
  double perimeter = 0.0;        // H^{d-1}(∂B^ε)
  double bad_volume = 0.0;       // |B^ε|
  std::size_t bad_count = 0;
  std::size_t good_count = 0;
  double lambda = 0.0;  // Λ^V, or Λ^{p,V} when p ≠ 1
  double M = 0.0;       // Σ|ξ|Λ^ξ (or the p-variant)
  double ratio = 0.0;   // (energy + perimeter_inner) / lambda, 0/0 = 0
  bool ratio_infinite = false;
};

EnergyReport energy_report(const Approximant& appr, double p, const DirectionalEnergy& energy);

/// GOOD-cube check of ∫_Q |e(u^ε)|^p ≤ C ε^{d-p} Σ_ξ Σ_j |ξ·Δu|^p.
struct KornCheck {
  double constant = 0.0;
  std::size_t cubes = 0;
  std::size_t violations = 0;
  double max_ratio = 0.0;  // largest energy / (ε^{d-p}·fd_rhs)
};

KornCheck check_cube_korn(const Approximant& appr, double p, double constant);

struct SweepOptions {
  std::vector<double> eps{1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64};
  double p = 1.0;
  double eta = 0.01;
  double R = std::numeric_limits<double>::infinity();
  int n_candidates = 16;
  std::uint64_t seed = 0;
  double probe_step = 0.0;  // ≤ 0: ε/8
  SliceQuadrature quad;
  bool korn_check = true;
};

struct SweepRow {
  double eps = 0.0;
  AnchorDiagnostics anchor;
  double feasible_fraction = 0.0;
  EnergyReport report;
  double discrepancy = 0.0;        // over Ω ∩ B_R
  double discrepancy_inner = 0.0;  // over Ω_ε ∩ B_R
  double probe_step = 0.0;
  std::optional<KornCheck> korn;
};

struct SweepResult {
  DirectionalEnergy energy;
  std::vector<SweepRow> rows;
};

/// Anchor selection, classification, build and report for each ε. The
/// anchor seed for the k-th ε is split from options.seed.
SweepResult convergence_sweep(const VectorField& field, const DirectionSet& dirs, const SweepOptions& options);

/// Structured-text dump: lattice parameters, per-cube classes and vertex values.
void write_approximant(std::ostream& out, const Approximant& appr);

}  // namespace gbd
