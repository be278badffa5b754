#include "gbd/quadrature.hpp"

#include <Eigen/Dense>

#include <map>
#include <mutex>
#include <stdexcept>

namespace gbd {

namespace {

// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix of the Legendre
// recurrence, weights come from the first eigenvector components.
GaussRule build_rule(int q) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(q, q);
  for (int k = 1; k < q; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = b;
    jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  GaussRule rule;
  rule.nodes.resize(q);
  rule.weights.resize(q);
  for (int k = 0; k < q; ++k) {
    const double v = eig.eigenvectors()(0, k);
    rule.nodes[k] = 0.5 * (eig.eigenvalues()(k) + 1.0);
    rule.weights[k] = v * v;  // 2 v^2 on [-1,1], halved for [0,1]
  }
  return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int q) {
  if (q < 1 || q > 64) throw std::invalid_argument("gauss_legendre: q must be in [1, 64]");
  static std::mutex mutex;
  static std::map<int, GaussRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(q);
  if (it == cache.end()) it = cache.emplace(q, build_rule(q)).first;
  return it->second;
}

}  // namespace gbd
