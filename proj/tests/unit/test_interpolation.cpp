#include <doctest.h>

#include "gbd/interpolation.hpp"
#include "gbd/random.hpp"
#include "oracles.hpp"

#include <cmath>
#include <filesystem>

using namespace gbd;

namespace {

CubeVertexData random_vertices(Rng& rng, int d) {
  std::normal_distribution<double> N(0.0, 1.0);
  return CubeVertexData::sample(d, [&](const Vec&) {
    Vec v(d);
    for (int a = 0; a < d; ++a) v(a) = N(rng);
    return v;
  });
}

Mat random_skew(Rng& rng, int d) {
  std::normal_distribution<double> N(0.0, 1.0);
  Mat A = Mat::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      A(i, j) = N(rng);
      A(j, i) = -A(i, j);
    }
  return A;
}

CubeVertexData corner_example() {
  CubeVertexData data(2);
  for (auto& v : data.values) v = Vec::Zero(2);
  data.values[3] = Vec{{1.0, 0.0}};
  return data;
}

double max_sym_on_grid(const CubeVertexData& data, int n) {
  const int d = data.d;
  double worst = 0.0;
  std::vector<int> idx(d, 0);
  while (true) {
    Vec x(d);
    for (int a = 0; a < d; ++a) x(a) = idx[a] / double(n - 1);
    worst = std::max(worst, sym_gradient(data, x).norm());
    int a = 0;
    while (a < d && ++idx[a] == n) idx[a++] = 0;
    if (a == d) return worst;
  }
}

}  // namespace

TEST_CASE("vertex layout") {
  CHECK(CubeVertexData::vertex(3, 5).isApprox(Vec{{1.0, 0.0, 1.0}}));
  auto rng = make_rng(1);
  const CubeVertexData data = random_vertices(rng, 3);
  const CubeVertexData back = CubeVertexData::from_flat(3, data.flat());
  for (int w = 0; w < 8; ++w) CHECK(back.values[w] == data.values[w]);
  CHECK(data.flat()(5 * 3 + 2) == data.values[5](2));
}

TEST_CASE("interpolation reproduces vertices and affine data") {
  auto rng = make_rng(2);
  for (int d = 2; d <= 3; ++d) {
    const CubeVertexData data = random_vertices(rng, d);
    for (int w = 0; w < CubeVertexData::vertex_count(d); ++w)
      CHECK((interpolate(data, CubeVertexData::vertex(d, w)) - data.values[w]).norm() < 1e-15);
  }
  const CubeVertexData lin = CubeVertexData::sample(2, [](const Vec& w) { return w; });
  CHECK(interpolate(lin, Vec{{0.5, 0.5}}).isApprox(Vec{{0.5, 0.5}}));
  CHECK(interpolate(corner_example(), Vec{{0.5, 0.5}}).isApprox(Vec{{0.25, 0.0}}));
  CHECK_THROWS_AS(interpolate(lin, Vec{{1.5, 0.5}}), std::out_of_range);
}

TEST_CASE("interpolation matches the explicit bilinear formula") {
  auto rng = make_rng(3);
  const CubeVertexData data = random_vertices(rng, 2);
  const oracle::Bilinear b{data.values[0], data.values[1], data.values[2], data.values[3]};
  for (int i = 0; i < 100; ++i) {
    const Vec x = uniform_in_unit_cube(rng, 2);
    CHECK((interpolate(data, x) - b.value(x(0), x(1))).norm() < 1e-14);
    CHECK((gradient(data, x) - b.grad(x(0), x(1))).norm() < 1e-13);
  }
}

TEST_CASE("symmetric gradient of rigid and linear data") {
  auto rng = make_rng(4);
  for (int d = 2; d <= 3; ++d) {
    const Mat A = random_skew(rng, d);
    const Vec b = uniform_in_unit_cube(rng, d);
    const CubeVertexData rigid = CubeVertexData::sample(d, [&](const Vec& w) { return Vec(A * w + b); });
    for (int i = 0; i < 100; ++i) CHECK(sym_gradient(rigid, uniform_in_unit_cube(rng, d)).norm() <= 1e-12);
    const CubeVertexData lin = CubeVertexData::sample(d, [](const Vec& w) { return w; });
    CHECK(sym_gradient(lin, uniform_in_unit_cube(rng, d)).isApprox(Mat::Identity(d, d)));
  }
}

TEST_CASE("symmetric gradient against central differences") {
  auto rng = make_rng(5);
  const CubeVertexData ex = corner_example();
  const Vec mid{{0.5, 0.5}};
  Mat e(2, 2);
  e << 0.5, 0.25, 0.25, 0.0;
  CHECK((sym_gradient(ex, mid) - e).norm() < 1e-8);
  for (int d = 2; d <= 3; ++d) {
    const CubeVertexData data = random_vertices(rng, d);
    for (int i = 0; i < 100; ++i) {
      const Vec x = 0.1 * Vec::Ones(d) + 0.8 * uniform_in_unit_cube(rng, d);
      Mat g(d, d);
      const double h = 1e-6;
      for (int a = 0; a < d; ++a) g.col(a) = (interpolate(data, x + h * unit(d, a)) - interpolate(data, x - h * unit(d, a))) / (2 * h);
      CHECK((sym_gradient(data, x) - 0.5 * (g + g.transpose())).norm() <= 1e-6);
    }
  }
}

TEST_CASE("patch scaling") {
  auto rng = make_rng(6);
  const CubeVertexData data = random_vertices(rng, 2);
  const MultilinearPatch patch{data, Vec{{1.0, 2.0}}, 0.25};
  const Vec x{{1.1, 2.2}};
  CHECK((patch.value(x) - interpolate(data, patch.local(x))).norm() < 1e-15);
  CHECK((patch.sym_gradient(x) - sym_gradient(data, patch.local(x)) / 0.25).norm() < 1e-12);
}

TEST_CASE("vertex pairs and compatibility relations") {
  CHECK(vertex_pairs(2, Vec{{1.0, 0.0}}).size() == 2);
  CHECK(vertex_pairs(2, Vec{{1.0, 1.0}}).size() == 1);
  CHECK(vertex_pairs(3, Vec{{1.0, 0.0, 0.0}}).size() == 4);
  CHECK(vertex_pairs(3, Vec{{1.0, 1.0, 0.0}}).size() == 2);
  const auto minus = vertex_pairs(2, Vec{{1.0, -1.0}});
  REQUIRE(minus.size() == 1);
  CHECK((CubeVertexData::vertex(2, minus[0].second) - CubeVertexData::vertex(2, minus[0].first)).isApprox(Vec{{1.0, -1.0}}));

  CHECK(lattice_directions(3).size() == 6);
  CHECK(compatibility_operator(2).rows() == 5);
  CHECK(compatibility_operator(2).cols() == 8);
  CHECK(compatibility_operator(3).rows() == 3 * 4 + 3 * 2);
}

TEST_CASE("rigidity defect and the finite-difference right-hand side") {
  auto rng = make_rng(7);
  const Mat A = random_skew(rng, 3);
  const CubeVertexData rigid = CubeVertexData::sample(3, [&](const Vec& w) { return Vec(A * w + Vec::Ones(3)); });
  CHECK(rigidity_defect(rigid) < 1e-14);
  CHECK(fd_rhs(rigid, 1.0) < 1e-13);

  // Edge relations give 1, the diagonal relation (1,1)·(1,1) gives 2.
  const CubeVertexData lin = CubeVertexData::sample(2, [](const Vec& w) { return w; });
  CHECK(rigidity_defect(lin) == doctest::Approx(2.0));
  for (double p : {1.0, 1.5, 2.0}) CHECK(fd_rhs(lin, p) == doctest::Approx(4.0 + std::pow(2.0, p)));
}

TEST_CASE("projected data is rigid") {
  auto rng = make_rng(8);
  for (int d = 2; d <= 3; ++d)
    for (int trial = 0; trial < 100; ++trial) {
      const CubeVertexData v = project_compatible(random_vertices(rng, d));
      CHECK(rigidity_defect(v) < 1e-12);
      CHECK(fd_rhs(v, 1.0) < 1e-11);
      CHECK(max_sym_on_grid(v, 5) <= 1e-10);
    }
}

TEST_CASE("rigid subspace dimensions") {
  for (int d = 2; d <= 3; ++d) {
    const DynMat R = rigid_vertex_basis(d), Z = rigid_complement(d);
    CHECK(R.cols() == d * (d + 1) / 2);
    CHECK(Z.cols() == d * (1 << d) - d * (d + 1) / 2);
    CHECK((R.transpose() * Z).norm() < 1e-12);
    CHECK((compatibility_operator(d) * R).norm() < 1e-12);
  }
}

TEST_CASE("cube energy values") {
  auto rng = make_rng(9);
  const Mat A = random_skew(rng, 2);
  CHECK(cube_energy(CubeVertexData::sample(2, [&](const Vec& w) { return Vec(A * w); }), 1.0) < 1e-14);
  for (int d = 2; d <= 3; ++d)
    for (double p : {1.0, 1.5, 2.0}) {
      const CubeVertexData lin = CubeVertexData::sample(d, [](const Vec& w) { return w; });
      CHECK(cube_energy(lin, p) == doctest::Approx(std::pow(d, p / 2)));
    }
  // ∫∫ y² + x²/2 = 1/2 for v = (x₁x₂, 0); also checked on a 1000² midpoint grid.
  const CubeVertexData ex = corner_example();
  const oracle::Bilinear b{ex.values[0], ex.values[1], ex.values[2], ex.values[3]};
  const int n = 1000;
  double mc = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double s = b.sym_norm((i + 0.5) / n, (j + 0.5) / n);
      mc += s * s;
    }
  mc /= double(n) * n;
  CHECK(std::abs(cube_energy(ex, 2.0) - mc) <= 1e-4);
  CHECK(cube_energy(ex, 2.0) == doctest::Approx(0.5));
}

TEST_CASE("cube energy scales like eps^(d-p)") {
  auto rng = make_rng(10);
  for (int d = 2; d <= 3; ++d) {
    const CubeVertexData data = random_vertices(rng, d);
    for (double p : {1.0, 2.0}) {
      const double unit_energy = cube_energy(data, p, 6);
      for (double eps : {0.5, 0.25}) {
        // Integrate |e|^p of the side-eps patch over its cube by Gauss points.
        const MultilinearPatch patch{data, Vec::Zero(d), eps};
        double sum = 0.0;
        const int m = 40;
        std::vector<int> idx(d, 0);
        while (true) {
          Vec x(d);
          for (int a = 0; a < d; ++a) x(a) = eps * (idx[a] + 0.5) / m;
          sum += std::pow(patch.sym_gradient(x).norm(), p);
          int a = 0;
          while (a < d && ++idx[a] == m) idx[a++] = 0;
          if (a == d) break;
        }
        sum *= std::pow(eps / m, d);
        CHECK(sum == doctest::Approx(std::pow(eps, d - p) * unit_energy).epsilon(2e-3));
      }
    }
  }
}

TEST_CASE("clipped energy is additive") {
  auto rng = make_rng(11);
  const CubeVertexData data = random_vertices(rng, 2);
  const double full = cube_energy_clipped(data, 2.0, Vec::Zero(2), Vec::Ones(2), 4);
  CHECK(full == doctest::Approx(cube_energy(data, 2.0, 4)));
  const double left = cube_energy_clipped(data, 2.0, Vec::Zero(2), Vec{{0.3, 1.0}}, 4);
  const double right = cube_energy_clipped(data, 2.0, Vec{{0.3, 0.0}}, Vec::Ones(2), 4);
  CHECK(left + right == doctest::Approx(full));
}

TEST_CASE("Korn constant, d = 2, p = 2") {
  const KornEstimate eig = korn_constant(2, 2.0, KornMethod::Eig);
  const KornEstimate search = korn_constant(2, 2.0, KornMethod::Search, 1, 60);
  CHECK(eig.quotient_dim == 5);
  CHECK(eig.constant > 0.0);
  CHECK(std::abs(search.constant - eig.constant) <= 0.05 * eig.constant);
  CHECK(search.constant <= eig.constant * (1 + 1e-9));
  CHECK(eig.lower_bound == doctest::Approx(eig.constant));

  auto rng = make_rng(12);
  int violations = 0;
  for (int i = 0; i < 10000; ++i) {
    const CubeVertexData v = random_vertices(rng, 2);
    if (cube_energy(v, 2.0) > eig.constant * fd_rhs(v, 2.0) * (1 + 1e-12)) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("Korn constants in other settings") {
  const KornEstimate e3 = korn_constant(3, 2.0, KornMethod::Eig);
  CHECK(e3.quotient_dim == 18);
  CHECK_THROWS(korn_constant(2, 1.0, KornMethod::Eig));

  const KornEstimate s1 = korn_constant(2, 1.0, KornMethod::Search, 2, 20);
  CHECK(s1.constant <= korn_upper_bound(2, 1.0));
  CHECK(korn_upper_bound(2, 1.0) == doctest::Approx(std::sqrt(korn_constant(2, 2.0, KornMethod::Eig).constant)));

  auto rng = make_rng(13);
  for (int i = 0; i < 2000; ++i) {
    const CubeVertexData v = random_vertices(rng, 2);
    CHECK(cube_energy(v, 1.0) <= korn_upper_bound(2, 1.0) * fd_rhs(v, 1.0));
  }
  CHECK(parse_korn_method("search") == KornMethod::Search);
  CHECK(to_string(KornMethod::Eig) == "eig");
  CHECK_THROWS(parse_korn_method("guess"));
}

TEST_CASE("Korn cache round trip") {
  const auto path = std::filesystem::temp_directory_path() / "gbd_korn_cache_test.txt";
  std::filesystem::remove(path);
  KornCache empty = KornCache::load(path.string());
  CHECK(empty.size() == 0);
  KornEstimate e = korn_constant(2, 2.0, KornMethod::Eig);
  empty.store(e);
  empty.save(path.string());
  const KornCache back = KornCache::load(path.string());
  const auto hit = back.find(2, 2.0, KornMethod::Eig, 0);
  REQUIRE(hit);
  CHECK(hit->constant == e.constant);
  CHECK(hit->quotient_dim == e.quotient_dim);
  CHECK_FALSE(back.find(3, 2.0, KornMethod::Eig, 0));
  std::filesystem::remove(path);
}
