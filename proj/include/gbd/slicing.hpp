#pragma once

#include "gbd/field_model.hpp"

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace gbd {

/// Samples of u^ξ_z(s) = ξ·u(z + sξ) over Ω^ξ_z.
struct SliceDescriptor {
  Vec xi;
  Vec z;
  std::optional<std::pair<double, double>> interval;
  double h = 0.0;  // actual spacing, ≤ the requested one
  std::vector<double> s;
  std::vector<double> values;
  double magnitude = 0.0;  // max |ξ||u| over the samples, sets the roundoff scale

  bool empty() const { return s.empty(); }
  double length() const { return interval ? interval->second - interval->first : 0.0; }
};

struct Jump {
  double location = 0.0;
  double size = 0.0;  // signed
};

struct SliceMeasure {
  double ac_mass = 0.0;
  double cantor_mass = 0.0;  // never populated; see README
  double p_ac_mass = 0.0;
  double truncated_jump_mass = 0.0;
  std::vector<Jump> jumps;

  int jump_count() const { return static_cast<int>(jumps.size()); }
  double lambda() const { return ac_mass + cantor_mass + truncated_jump_mass; }
  double lambda_p() const { return p_ac_mass + jump_count(); }
};

/// Uniform samples s_k = s_0 + k·L/n, n = ⌈L/h⌉, both endpoints included.
/// A line missing Ω yields an empty descriptor.
SliceDescriptor extract_slice(const VectorField& field, const Vec& xi, const Vec& z, double h);

/// max(10·median|Δ_k|, β/10).
double default_jump_threshold(const SliceDescriptor& desc, double beta);

/// Increments above tau_jump are jumps, the rest is absolutely continuous.
/// tau_jump ≤ 0 selects default_jump_threshold.
SliceMeasure analyze_slice(const SliceDescriptor& desc, double tau_jump, double beta, double p);

/// Slice measure from exact metadata. Throws std::invalid_argument when the
/// field has none.
SliceMeasure analyze_slice_exact(const VectorField& field, const Vec& xi, const Vec& z, double beta, double p);

enum class SliceMode { Auto, Sampled, Exact };

struct SliceQuadrature {
  double h = 1e-3;      // slice step
  double delta = 1e-2;  // hyperplane grid step
  SliceMode mode = SliceMode::Auto;
  double tau_jump = 0.0;  // ≤ 0: default rule
};

/// Orthonormal frame of ξ⊥ by Gram-Schmidt against the standard basis.
std::vector<Vec> orthogonal_frame(const Vec& xi);

/// Midpoint-rule nodes of ξ⊥ covering the projection of the domain, with
/// their common weight δ_1⋯δ_{d-1}.
struct HyperplaneGrid {
  std::vector<Vec> nodes;
  double weight = 0.0;
};
HyperplaneGrid hyperplane_grid(const BoxDomain& domain, const Vec& xi, double delta);

/// Λ^ξ and Λ^{p,ξ} by midpoint quadrature over ξ⊥.
SliceEnergy lambda_xi(const VectorField& field, const Vec& xi, const SliceQuadrature& quad, double beta = 1.0,
                      double p = 1.0);

struct DirectionalEnergy {
  std::vector<Vec> xi;
  std::vector<double> beta;
  std::vector<double> lambda;
  std::vector<double> lambda_p;
  double lambda_V = 0.0;
  double lambda_pV = 0.0;
  double M = 0.0;    // Σ|ξ|Λ^ξ
  double M_p = 0.0;  // Σ|ξ|Λ^{p,ξ}
  double p = 1.0;
  SliceQuadrature quad;
};

DirectionalEnergy lambda_V(const VectorField& field, const DirectionSet& dirs, const SliceQuadrature& quad,
                           double p = 1.0);

struct RotationChoice {
  Mat rotation;
  double value = 0.0;  // Σ_{ξ∈RV̂} Λ^ξ for the chosen R
  double mean = 0.0;
  std::vector<double> samples;
};

/// Draws n Haar rotations and returns the one minimising Σ_{ξ∈RV̂} Λ^ξ, where
/// V̂ holds the unit vectors e_i and (e_i+e_j)/√2.
RotationChoice select_rotation(const VectorField& field, int n_samples, std::uint64_t seed,
                               const SliceQuadrature& quad);

}  // namespace gbd
