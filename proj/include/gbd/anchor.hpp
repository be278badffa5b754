#pragma once

#include "gbd/field_model.hpp"
#include "gbd/lattice.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace gbd {

/// T_k(t) = t·min(1, k/|t|).
Vec truncate(const Vec& t, double k);

enum class Kernel { Indicator, Hat };

std::string to_string(Kernel kernel);

/// χ of [-1/2, 1/2)^d and Π(1 − |x_i|)⁺.
double indicator_kernel(const Vec& x);
double hat_kernel(const Vec& x);

/// u^ε_y(x) = Σ_{x̄ ∈ εy + εZ^d} T_ℓ(u(x̄))·kernel((x − x̄)/ε), with u extended
/// by zero and ℓ = ∞ unless a truncation level is given.
class KernelDiscretization {
 public:
  KernelDiscretization(VectorField field, double eps, Vec y, Kernel kernel,
                       double level = std::numeric_limits<double>::infinity());

  Vec operator()(const Vec& x) const;
  /// Lattice points x̄ with nonzero kernel weight at x (1 for INDICATOR, at
  /// most 2^d for HAT).
  std::vector<Vec> support(const Vec& x) const;

  double eps() const { return eps_; }
  const Vec& anchor() const { return y_; }
  Kernel kernel() const { return kernel_; }

 private:
  VectorField field_;
  double eps_;
  Vec y_;
  Kernel kernel_;
  double level_;
};

struct PhiOptions {
  double probe_step = 0.0;  // ≤ 0: ε/8
  int extra_terms = 4;
};

struct PhiValue {
  double value = 0.0;
  double tail_bound = 0.0;  // bound on the omitted terms k > K_max + extra
  int k_max = 0;
  int terms = 0;
  double probe_step = 0.0;
};

/// Φ_ε(y) = Σ_k 2^{-k} ∫_{B_k} |Σ T_k(u(x̄))Q(·) − T_k(u)| + |Σ T_k(u(x̄))Δ(·) − T_k(u)|,
/// truncated after K_max + extra terms where B_{K_max} ⊇ Ω. Probe values of u
/// are computed once and shared by every anchor.
class PhiEvaluator {
 public:
  PhiEvaluator(VectorField field, double eps, PhiOptions options = {});

  PhiValue operator()(const Vec& y) const;
  double eps() const { return eps_; }

 private:
  VectorField field_;
  double eps_;
  PhiOptions options_;
  ProbeGrid probes_;
  std::vector<double> u_;     // d values per probe
  std::vector<double> norm_;  // |x| per probe
  double u_max_ = 0.0;
  double radius_ = 0.0;
  int k_max_ = 1;
};

PhiValue phi_epsilon(const VectorField& field, double eps, const Vec& y, PhiOptions options = {});

/// ε^{d-1} Σ_{ξ∈V} Σ_j (|ξ·(u(x_j + εξ) − u(x_j))| ∧ β_ξ) over lattice points
/// with both ends in Ω. For p ≠ 1 each term is |·|^p ∧ 1.
double energy_avg(const VectorField& field, double eps, const Vec& y, const DirectionSet& dirs, double p = 1.0);
double energy_avg(const LatticeSamples& samples, const DirectionSet& dirs, double p = 1.0);

struct AnchorDiagnostics {
  Vec y;
  double phi = 0.0;
  double phi_tail = 0.0;
  double phi_mean = 0.0;
  double phi_threshold = 0.0;  // √(mean Φ)
  bool in_Q_eps = false;
  double energy_avg = 0.0;
  double energy_bound = 0.0;  // 2M
  bool in_Q_upper = false;

  bool feasible() const { return in_Q_eps && in_Q_upper; }
};

struct AnchorSelection {
  Vec y;
  AnchorDiagnostics chosen;
  std::vector<AnchorDiagnostics> candidates;
  double feasible_fraction = 0.0;
};

/// Candidate anchors are uniform in [0,1)^d, drawn from (seed, index) streams.
std::vector<Vec> anchor_candidates(int d, int n, std::uint64_t seed);

/// Evaluates every candidate, estimates ∫_Q Φ_ε by their mean and returns the
/// first candidate with Φ_ε(y) ≤ √mean and energy_avg(y) ≤ 2M. Throws
/// std::runtime_error with the diagnostics when none qualifies.
AnchorSelection select_anchor(const VectorField& field, double eps, const DirectionSet& dirs, double M,
                              int n_candidates, std::uint64_t seed, double p = 1.0, PhiOptions options = {});

/// Diagnostics for every candidate, without selecting.
std::vector<AnchorDiagnostics> anchor_diagnostics(const VectorField& field, double eps, const DirectionSet& dirs,
                                                  double M, const std::vector<Vec>& ys, double p = 1.0,
                                                  PhiOptions options = {});

using PointMap = std::function<Vec(const Vec&)>;

/// |{x ∈ region ∩ B_R : |u(x) − v(x)| > η}| by midpoint cell counting.
double measure_discrepancy(const PointMap& u, const PointMap& v, const BoxDomain& region, double R, double eta,
                           double probe_step);

}  // namespace gbd
