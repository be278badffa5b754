#pragma once

#include <vector>

namespace gbd {

struct GaussRule {
  std::vector<double> nodes;    // on [0,1]
  std::vector<double> weights;  // sum to 1
};

/// q-point Gauss-Legendre rule mapped to [0,1]. Rules are cached per q.
const GaussRule& gauss_legendre(int q);

}  // namespace gbd
