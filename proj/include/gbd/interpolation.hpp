#pragma once

#include "gbd/types.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace gbd {

/// Vertex displacements of the unit cube. Vertex w ∈ {0,1}^d is stored at
/// index Σ w_i 2^i.
struct CubeVertexData {
  int d = 2;
  std::vector<Vec> values;

  explicit CubeVertexData(int dim);

  static int vertex_count(int dim) { return 1 << dim; }
  static Vec vertex(int dim, int index);

  /// Flat layout: component a of vertex w at w·d + a.
  static CubeVertexData from_flat(int dim, const DynVec& flat);
  DynVec flat() const;

  template <class F>
  static CubeVertexData sample(int dim, F&& f) {
    CubeVertexData data(dim);
    for (int w = 0; w < vertex_count(dim); ++w) data.values[w] = f(vertex(dim, w));
    return data;
  }
};

/// Multilinear blend of vertex values; x must lie in [0,1]^d.
Vec interpolate(const CubeVertexData& data, const Vec& x);

/// ∇v and e(v) = (∇v + ∇vᵀ)/2 on the unit cube.
Mat gradient(const CubeVertexData& data, const Vec& x);
Mat sym_gradient(const CubeVertexData& data, const Vec& x);

/// The patch on origin + side·[0,1]^d.
struct MultilinearPatch {
  CubeVertexData data;
  Vec origin;
  double side = 1.0;

  Vec local(const Vec& x) const { return (x - origin) / side; }
  Vec value(const Vec& x) const;
  Mat sym_gradient(const Vec& x) const;
};

/// Vertex pairs (a, b) of the unit cube with b − a = coeffs, lowest endpoint
/// first. coeffs has entries in {0, ±1}.
std::vector<std::pair<int, int>> vertex_pairs(int d, const Vec& coeffs);

/// Direction coefficients {e_i} then {e_i ± e_j}, i<j lexicographic.
std::vector<Vec> lattice_directions(int d, std::span<const int> pair_signs = {});

/// One row per compatibility relation: ξ·(v(b) − v(a)) over all ξ and
/// vertex pairs, acting on flat data.
DynMat compatibility_operator(int d, std::span<const int> pair_signs = {});

double rigidity_defect(const CubeVertexData& data, std::span<const int> pair_signs = {});

/// Σ over relations of |ξ·(v(b) − v(a))|^p.
double fd_rhs(const CubeVertexData& data, double p, std::span<const int> pair_signs = {});

/// Default per-axis Gauss points: max(2, d) for p = 2, 8 otherwise.
int default_quadrature_order(int d, double p);

/// ∫_{[0,1]^d} |e(v)|^p with Frobenius norm, q Gauss points per axis (0: default).
double cube_energy(const CubeVertexData& data, double p, int q = 0);

/// ∫ over the sub-box [lo, hi] ⊂ [0,1]^d of the unit-cube integrand.
double cube_energy_clipped(const CubeVertexData& data, double p, const Vec& lo, const Vec& hi, int q);

/// Orthonormal basis (columns) of vertex restrictions of rigid motions, and of
/// its orthogonal complement.
DynMat rigid_vertex_basis(int d);
DynMat rigid_complement(int d);

/// Orthogonal projection onto the kernel of the compatibility operator.
CubeVertexData project_compatible(const CubeVertexData& data, std::span<const int> pair_signs = {});

enum class KornMethod { Eig, Search };

std::string to_string(KornMethod method);
KornMethod parse_korn_method(const std::string& name);

struct KornEstimate {
  int d = 2;
  double p = 2.0;
  KornMethod method = KornMethod::Eig;
  std::uint64_t seed = 0;
  double constant = 0.0;     // estimate of sup cube_energy / fd_rhs
  double lower_bound = 0.0;  // ratio attained by an explicit dataset
  int quotient_dim = 0;
  int starts = 0;
};

/// Optimal constant of ∫_Q|e(v)|^p ≤ C·fd_rhs(v, p) over data modulo rigid
/// motions. Eig requires p = 2. Throws std::logic_error if fd_rhs vanishes on
/// a non-rigid direction.
KornEstimate korn_constant(int d, double p, KornMethod method, std::uint64_t seed = 0, int starts = 200);

/// Certified constant for p ≤ 2: C_2^{p/2} (Jensen on the unit cube and
/// ℓ^p ⊇ ℓ^2 on the right).
double korn_upper_bound(int d, double p);

/// Small text table of Korn estimates keyed by (d, p, method, seed).
class KornCache {
 public:
  using Key = std::tuple<int, double, std::string, std::uint64_t>;

  static KornCache load(const std::string& path);  // missing file: empty
  void save(const std::string& path) const;

  std::optional<KornEstimate> find(int d, double p, KornMethod method, std::uint64_t seed) const;
  void store(const KornEstimate& e);
  std::size_t size() const { return rows_.size(); }

 private:
  std::map<Key, KornEstimate> rows_;
};

}  // namespace gbd
