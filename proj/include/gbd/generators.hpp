#pragma once

#include "gbd/field_model.hpp"

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace gbd {

struct RigidMotion {
  Mat skew;  // A with A + Aᵀ = 0
  Vec offset;
};

struct LinearMap {
  Mat gradient;
  Vec offset;
};

/// Hyperplane {x·normal = level}; the rigid increment skew·x + offset is added
/// on the positive side.
struct Cut {
  Vec normal;
  double level = 0.0;
  Mat skew;
  Vec offset;
};

/// Base rigid motion; each cell of the cut arrangement is rigid.
struct PiecewiseRigid {
  RigidMotion base;
  std::vector<Cut> cuts;
};

/// Constant jump vector across {x·normal = level}.
struct ScalarJump {
  Vec normal;
  double level = 0.0;
  Vec jump;
};

using Component = std::variant<RigidMotion, LinearMap, PiecewiseRigid, ScalarJump>;

struct Sum {
  std::vector<Component> terms;
};

enum class GeneratorKind { Rigid, Linear, PiecewiseRigid, ScalarJump, Sum };

struct GeneratorSpec {
  std::string name;
  BoxDomain domain;
  std::variant<RigidMotion, LinearMap, PiecewiseRigid, ScalarJump, Sum> shape;

  GeneratorKind kind() const { return static_cast<GeneratorKind>(shape.index()); }
  int dim() const { return domain.dim(); }
};

std::string to_string(GeneratorKind kind);

/// Validates the spec and returns its exact metadata (normals normalised).
/// Throws std::invalid_argument on non-skew rigid parts, zero normals or
/// cuts that miss the domain.
ExactStructure exact_structure(const GeneratorSpec& spec);

VectorField build_field(const GeneratorSpec& spec);

/// Closed-form Λ^ξ (jump threshold β) and Λ^{p,ξ}. Throws std::domain_error for
/// configurations without a closed form (slope changes across steps, or
/// jumps varying over a facet when d > 2).
SliceEnergy exact_lambda(const GeneratorSpec& spec, const Vec& xi, double beta = 1.0, double p = 1.0);

/// H^{d-1}({x·normal = level} ∩ box) for planes tilted in at most two axes.
double facet_measure(const BoxDomain& box, const Vec& normal, double level);

/// ∫_0^L min(|a + b t|, β) dt.
double integral_truncated_abs(double a, double b, double beta, double length);

/// Named test fields on (0,1)^2.
std::vector<GeneratorSpec> corpus();
GeneratorSpec corpus_field(const std::string& name);

/// Structured-text field descriptors.
GeneratorSpec parse_field_spec(std::istream& in);
GeneratorSpec read_field_spec(const std::string& path);
void write_field_spec(std::ostream& out, const GeneratorSpec& spec);
std::string format_field_spec(const GeneratorSpec& spec);

}  // namespace gbd
