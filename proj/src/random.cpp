#include "gbd/random.hpp"

namespace gbd {

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Vec uniform_in_unit_cube(Rng& rng, int d) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vec y(d);
  for (int i = 0; i < d; ++i) y(i) = unif(rng);
  return y;
}

Mat haar_rotation(Rng& rng, int d) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  DynMat g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = gauss(rng);
  Eigen::HouseholderQR<DynMat> qr(g);
  DynMat q = qr.householderQ();
  const DynMat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j)
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  if (q.determinant() < 0.0) q.col(0) *= -1.0;
  return q;
}

}  // namespace gbd
