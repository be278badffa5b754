#include <doctest.h>

#include "gbd/generators.hpp"
#include "gbd/random.hpp"
#include "gbd/slicing.hpp"
#include "oracles.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

using namespace gbd;

namespace {

GeneratorSpec crack(double c) {
  return GeneratorSpec{"crack", BoxDomain::unit(2), ScalarJump{Vec{{1.0, 0.0}}, 0.5, Vec{{c, 0.0}}}};
}

GeneratorSpec linear(const Mat& G) { return GeneratorSpec{"lin", BoxDomain::unit(2), LinearMap{G, Vec::Zero(2)}}; }

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("build_field on the basic kinds") {
  Mat A(2, 2);
  A << 0, 1, -1, 0;
  const VectorField r = build_field(GeneratorSpec{"r", BoxDomain::unit(2), RigidMotion{A, Vec::Zero(2)}});
  CHECK(r(Vec{{0.2, 0.7}}).isApprox(Vec{{0.7, -0.2}}));

  const VectorField id = build_field(linear(Mat::Identity(2, 2)));
  CHECK(id(Vec{{0.2, 0.7}}).isApprox(Vec{{0.2, 0.7}}));

  PiecewiseRigid pr{RigidMotion{Mat::Zero(2, 2), Vec::Zero(2)}, {Cut{Vec{{1.0, 0.0}}, 0.5, Mat::Zero(2, 2), Vec{{3.0, 0.0}}}}};
  const VectorField step = build_field(GeneratorSpec{"s", BoxDomain::unit(2), pr});
  CHECK(step(Vec{{0.2, 0.5}}).isZero());
  CHECK(step(Vec{{0.8, 0.5}}).isApprox(Vec{{3.0, 0.0}}));
}

TEST_CASE("invalid specs are rejected") {
  Mat A(2, 2);
  A << 0, 1, 1, 0;
  CHECK_THROWS_AS(exact_structure(GeneratorSpec{"r", BoxDomain::unit(2), RigidMotion{A, Vec::Zero(2)}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(exact_structure(GeneratorSpec{"j", BoxDomain::unit(2), ScalarJump{Vec::Zero(2), 0.5, Vec::Ones(2)}}),
                  std::invalid_argument);
  PiecewiseRigid miss{RigidMotion{Mat::Zero(2, 2), Vec::Zero(2)}, {Cut{Vec{{1.0, 0.0}}, 3.0, Mat::Zero(2, 2), Vec::Ones(2)}}};
  CHECK_THROWS_AS(exact_structure(GeneratorSpec{"m", BoxDomain::unit(2), miss}), std::invalid_argument);
}

TEST_CASE("closed-form energies of the reference fields") {
  const Vec e1{{1.0, 0.0}}, e2{{0.0, 1.0}}, d{{1.0, 1.0}};
  const GeneratorSpec id = linear(Mat::Identity(2, 2));
  CHECK(exact_lambda(id, e1).lambda == doctest::Approx(1.0));
  CHECK(exact_lambda(id, e2).lambda == doctest::Approx(1.0));
  // |ξ·Gξ| times the ξ⊥-integral of slice lengths, computed by quadrature.
  CHECK(exact_lambda(id, d).lambda == doctest::Approx(oracle::affine_lambda_2d(Mat::Identity(2, 2), Vec::Zero(2), Vec::Ones(2), d)));
  CHECK(exact_lambda(id, d).lambda == doctest::Approx(std::sqrt(2.0)));

  const GeneratorSpec c = crack(2.0);
  CHECK(exact_lambda(c, e1).lambda == doctest::Approx(1.0));
  CHECK(exact_lambda(c, e2).lambda == doctest::Approx(0.0));
  CHECK(exact_lambda(c, d).lambda == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(exact_lambda(c, e1, 1.0, 2.0).lambda_p == doctest::Approx(1.0));

  Mat A(2, 2);
  A << 0, 0.4, -0.4, 0;
  const GeneratorSpec r{"r", BoxDomain::unit(2), RigidMotion{A, Vec{{1.0, 2.0}}}};
  for (const Vec& xi : {e1, e2, d}) CHECK(exact_lambda(r, xi).lambda == 0.0);
}

TEST_CASE("affine closed form matches the slice-length quadrature") {
  auto rng = make_rng(21);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const Vec lower{{-0.5, 0.25}}, upper{{1.0, 2.0}};
  for (int trial = 0; trial < 20; ++trial) {
    Mat G(2, 2);
    G << U(rng), U(rng), U(rng), U(rng);
    const Vec xi{{U(rng), U(rng)}};
    const GeneratorSpec s{"g", BoxDomain(lower, upper), LinearMap{G, Vec::Zero(2)}};
    CHECK(exact_lambda(s, xi).lambda == doctest::Approx(oracle::affine_lambda_2d(G, lower, upper, xi)).epsilon(1e-6));
  }
}

TEST_CASE("jump contributions scale linearly below the threshold") {
  const Vec e1{{1.0, 0.0}};
  for (double c : {0.1, 0.2, 0.45}) {
    const double one = exact_lambda(crack(c), e1).lambda;
    const double two = exact_lambda(crack(2 * c), e1).lambda;
    CHECK(two == doctest::Approx(2 * one));
  }
}

TEST_CASE("energies of isotropic fields are rotation invariant") {
  auto rng = make_rng(4);
  const GeneratorSpec s = linear(0.7 * Mat::Identity(2, 2));
  for (int i = 0; i < 10; ++i) {
    const Mat R = haar_rotation(rng, 2);
    const Vec xi{{1.0, 0.3}};
    CHECK(exact_lambda(s, R * xi).lambda == doctest::Approx(exact_lambda(s, xi).lambda));
  }
}

TEST_CASE("facet measures and truncated integrals") {
  const BoxDomain u = BoxDomain::unit(2);
  CHECK(facet_measure(u, Vec{{1.0, 0.0}}, 0.5) == doctest::Approx(1.0));
  const Vec n = Vec{{1.0, 1.0}} / std::sqrt(2.0);
  CHECK(facet_measure(u, n, 1.0 / std::sqrt(2.0)) == doctest::Approx(std::sqrt(2.0)));
  CHECK(facet_measure(u, Vec{{1.0, 0.0}}, 1.5) == 0.0);
  const BoxDomain c = BoxDomain::unit(3);
  CHECK(facet_measure(c, Vec{{0.0, 0.0, 1.0}}, 0.3) == doctest::Approx(1.0));

  auto rng = make_rng(8);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (int i = 0; i < 50; ++i) {
    const double a = U(rng), b = U(rng), beta = std::abs(U(rng)) + 0.1, L = std::abs(U(rng)) + 0.1;
    const double num = oracle::midpoint([&](double t) { return std::min(std::abs(a + b * t), beta); }, 0.0, L, 200000);
    CHECK(integral_truncated_abs(a, b, beta, L) == doctest::Approx(num).epsilon(1e-6));
  }
}

TEST_CASE("corpus composition") {
  const auto c = corpus();
  REQUIRE(c.size() == 8);
  std::set<std::string> names;
  std::map<GeneratorKind, int> kinds;
  for (const auto& s : c) {
    names.insert(s.name);
    ++kinds[s.kind()];
    CHECK(s.dim() == 2);
    CHECK_NOTHROW(exact_structure(s));
  }
  CHECK(names.size() == 8);
  CHECK(kinds[GeneratorKind::Rigid] == 2);
  CHECK(kinds[GeneratorKind::Linear] == 2);
  CHECK(kinds[GeneratorKind::ScalarJump] + kinds[GeneratorKind::PiecewiseRigid] == 3);
  CHECK(kinds[GeneratorKind::Sum] == 1);
  CHECK_THROWS(corpus_field("no_such_field"));
}

TEST_CASE("committed descriptors reproduce the corpus") {
  for (const auto& s : corpus()) {
    const std::string path = std::string(GBD_DATA_DIR) + "/corpus/" + s.name + ".field";
    CAPTURE(path);
    CHECK(read_file(path) == format_field_spec(s));
    const GeneratorSpec parsed = read_field_spec(path);
    CHECK(format_field_spec(parsed) == format_field_spec(s));
    const VectorField a = build_field(s), b = build_field(parsed);
    auto rng = make_rng(1);
    for (int i = 0; i < 50; ++i) {
      const Vec x = uniform_in_unit_cube(rng, 2);
      CHECK((a(x) - b(x)).norm() == 0.0);
    }
  }
}

TEST_CASE("descriptor parse errors") {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return parse_field_spec(in);
  };
  CHECK_NOTHROW(parse("dim 2\nlower 0 0\nupper 1 1\nkind linear\ngradient 1 0 0 1\n"));
  CHECK_THROWS(parse("dim 2\nlower 0 0\nupper 1 1\nkind linear\ngradient 1 0 0 1\ncolour red\n"));
  CHECK_THROWS(parse("dim 2\ndim 2\nlower 0 0\nupper 1 1\nkind linear\ngradient 1 0 0 1\n"));
  CHECK_THROWS(parse("dim 2\nlower 0 0\nupper 1 1\nkind piecewise_rigid\nskew 0 0 0 0\ncut\nnormal 1 0\nlevel 0.5\n"));
  CHECK_THROWS(parse("dim 2\nlower 0 0\nupper 1 1\nkind rigid\nskew 0 1 1 0\n"));
  CHECK_THROWS(parse("dim 2\nlower 0 0\nupper 1 1\nkind linear\ngradient 1 0 0\n"));
  CHECK_THROWS(read_field_spec("/nonexistent/field.txt"));
}

TEST_CASE("sampled and exact energies agree on the corpus") {
  SliceQuadrature q;
  q.mode = SliceMode::Sampled;
  for (const auto& s : corpus()) {
    const VectorField f = build_field(s);
    for (const Direction& dir : canonical_directions(2)) {
      const double ex = exact_lambda(s, dir.xi).lambda;
      const double sm = lambda_xi(f, dir.xi, q).lambda;
      CAPTURE(s.name);
      CAPTURE(dir.xi.transpose());
      if (ex == 0.0) CHECK(std::abs(sm) < 1e-9);
      else CHECK(std::abs(sm - ex) <= 0.02 * ex);
    }
  }
}
