#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "pomdpcs/errors.hpp"
#include "pomdpcs/grid.hpp"
#include "pomdpcs/mesh.hpp"
#include "support.hpp"

using namespace pomdpcs;
using testing::vec;

TEST_CASE("grid examples") {
  const auto g = SimplexGrid::build(2, 4);
  REQUIRE(g->size() == 5);
  for (std::size_t k = 0; k < 5; ++k) {
    CHECK(g->point(k)(0) == 1.0 - k / 4.0);
    CHECK(g->point(k)(1) == k / 4.0);
  }
  CHECK(SimplexGrid::build(3, 2)->size() == 6);
  CHECK_THROWS_AS(SimplexGrid::build(3, 2000), ResourceLimit);
  CHECK_THROWS_AS(SimplexGrid::build(1, 4), std::invalid_argument);
  CHECK_THROWS_AS(SimplexGrid::build(7, 4), std::invalid_argument);
  CHECK_THROWS_AS(SimplexGrid::build(2, 0), std::invalid_argument);
}

TEST_CASE("point counts are binomial") {
  CHECK(SimplexGrid::point_count(2, 1000) == 1001);
  CHECK(SimplexGrid::point_count(3, 100) == 5151);
  CHECK(SimplexGrid::point_count(4, 30) == 5456);
  CHECK(SimplexGrid::point_count(6, 10) == 3003);
  for (int X = 2; X <= 5; ++X)
    for (int M = 1; M <= 8; ++M)
      CHECK(SimplexGrid::build(X, M)->size() == SimplexGrid::point_count(X, M));
}

TEST_CASE("lattice coordinates round-trip") {
  const auto g = SimplexGrid::build(4, 6);
  for (std::size_t i = 0; i < g->size(); ++i) {
    const auto k = g->lattice(i);
    int sum = 0;
    for (int j = 0; j < 4; ++j) {
      sum += k[j];
      CHECK(g->point(i)(j) == k[j] / 6.0);
    }
    CHECK(sum == 6);
    CHECK(g->index_of(k) == i);
    CHECK(g->nearest(g->point(i)) == i);
  }
  const int off[] = {1, 1, 1, 1};
  CHECK_FALSE(g->index_of(off).has_value());
}

TEST_CASE("stencils are exact at grid points and reproduce affine functions") {
  Rng rng(8);
  for (int X = 2; X <= 6; ++X) {
    const auto g = SimplexGrid::build(X, X <= 3 ? 17 : 5);
    for (std::size_t i = 0; i < g->size(); ++i) {
      const auto s = g->locate(g->point(i));
      double w = 0.0;
      for (int j = 0; j < s.count; ++j)
        if (s.index[j] == i) w += s.weight[j];
      CHECK(w == 1.0);
    }
    const Eigen::VectorXd a = Eigen::VectorXd::NullaryExpr(X, [&] { return rng.uniform(-1, 1); });
    std::vector<double> values(g->size());
    for (std::size_t i = 0; i < g->size(); ++i) values[i] = a.dot(g->point(i));
    const ValueFunction V(g, values);
    for (int t = 0; t < 200; ++t) {
      const Eigen::VectorXd pi = rng.simplex_point(X);
      const auto s = g->locate(pi);
      double total = 0.0;
      Eigen::VectorXd back = Eigen::VectorXd::Zero(X);
      for (int j = 0; j < s.count; ++j) {
        CHECK(s.weight[j] >= 0.0);
        total += s.weight[j];
        back += s.weight[j] * g->point(s.index[j]);
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
      CHECK((back - pi).cwiseAbs().maxCoeff() < 1e-12);
      CHECK(V(pi) == doctest::Approx(a.dot(pi)).epsilon(1e-12));
    }
  }
}

TEST_CASE("interpolation error shrinks with resolution") {
  // Entropy is smooth inside the simplex; the max error at random points
  // should fall as the grid is refined.
  auto entropy = [](const Eigen::VectorXd& p) {
    double h = 0.0;
    for (double x : p) h -= x > 0 ? x * std::log2(x) : 0.0;
    return h;
  };
  double prev = 1e9;
  for (int M : {10, 20, 40}) {
    const auto g = SimplexGrid::build(3, M);
    std::vector<double> v(g->size());
    for (std::size_t i = 0; i < g->size(); ++i) v[i] = entropy(g->point(i));
    const ValueFunction V(g, v);
    Rng rng(1);
    double err = 0.0;
    for (int t = 0; t < 500; ++t) {
      const Eigen::VectorXd pi = rng.simplex_point(3);
      err = std::max(err, std::abs(V(pi) - entropy(pi)));
      CHECK(V(pi) <= entropy(pi) + 1e-12);
    }
    CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("relaxed extension is homogeneous") {
  const auto g = SimplexGrid::build(3, 12);
  std::vector<double> v(g->size());
  for (std::size_t i = 0; i < g->size(); ++i) v[i] = 1.0 + g->point(i)(0) * g->point(i)(2);
  const RelaxedValueFunction W(ValueFunction(g, v));
  Rng rng(2);
  for (int t = 0; t < 100; ++t) {
    const Eigen::VectorXd pi = rng.simplex_point(3);
    for (double k : {0.001, 2.0, 7.3})
      CHECK(W(k * pi) == doctest::Approx(k * W.on_simplex()(pi)).epsilon(1e-12));
  }
  CHECK(W(Eigen::VectorXd::Zero(3)) == 0.0);
}

TEST_CASE("policy lookup and threshold") {
  const auto g = SimplexGrid::build(2, 4);
  const Policy p(g, {1, 1, 2, 2, 2}, 0.375);
  CHECK(p(vec({0.9, 0.1})) == 1);
  CHECK(p(vec({0.2, 0.8})) == 2);
  CHECK(*p.threshold() == 0.375);
}

TEST_CASE("concave mesh") {
  const auto g = SimplexGrid::build(3, 20);
  SUBCASE("requires three states") {
    CHECK_THROWS_AS(LatticeMesh(SimplexGrid::build(4, 3)), std::invalid_argument);
  }
  SUBCASE("starts as the Freudenthal triangulation") {
    LatticeMesh mesh(g);
    CHECK(mesh.triangle_count() == 400);
    Rng rng(3);
    std::vector<double> v(g->size());
    for (auto& x : v) x = rng.uniform();
    const ValueFunction a(g, v);
    const ValueFunction b(g, v, std::make_shared<const LatticeMesh>(g));
    for (int t = 0; t < 200; ++t) {
      const Eigen::VectorXd pi = rng.simplex_point(3);
      CHECK(a(pi) == doctest::Approx(b(pi)).epsilon(1e-12));
    }
  }
  SUBCASE("concave data needs no flips") {
    std::vector<double> v(g->size());
    for (std::size_t i = 0; i < g->size(); ++i) v[i] = 1.0 - g->point(i).squaredNorm();
    LatticeMesh mesh(g);
    CHECK(mesh.nonconcave_edges(v, 1e-12) == 0);
    CHECK(mesh.make_concave(v, 1e-12) == 0);
  }
  SUBCASE("flipping yields a concave interpolant above the Freudenthal one") {
    // min of affine functions sampled on the grid is concave, but the fixed
    // triangulation does not follow its creases.
    const Eigen::Vector3d a(0.3, 1.0, 0.1), b(1.0, 0.2, 0.7), c(0.6, 0.5, 1.2);
    std::vector<double> v(g->size());
    for (std::size_t i = 0; i < g->size(); ++i) {
      const Eigen::Vector3d p = g->point(i);
      v[i] = std::min({a.dot(p), b.dot(p), c.dot(p)});
    }
    auto mesh = std::make_shared<LatticeMesh>(g);
    mesh->make_concave(v, 1e-13);
    CHECK(mesh->nonconcave_edges(v, 1e-12) == 0);
    const ValueFunction plain(g, v);
    const ValueFunction flipped(g, v, mesh);
    Rng rng(6);
    for (int t = 0; t < 300; ++t) {
      const Eigen::VectorXd p1 = rng.simplex_point(3), p2 = rng.simplex_point(3);
      const double lambda = rng.uniform();
      const Eigen::VectorXd mid = lambda * p1 + (1 - lambda) * p2;
      CHECK(flipped(mid) >= lambda * flipped(p1) + (1 - lambda) * flipped(p2) - 1e-12);
      CHECK(flipped(p1) >= plain(p1) - 1e-12);
      CHECK(flipped(p1) <= std::min({a.dot(p1), b.dot(p1), c.dot(p1)}) + 1e-12);
    }
    for (std::size_t i = 0; i < g->size(); ++i)
      CHECK(flipped(g->point(i)) == doctest::Approx(v[i]).epsilon(1e-13));
  }
  SUBCASE("a mesh from another grid is rejected") {
    std::vector<double> v(g->size(), 0.0);
    CHECK_THROWS(ValueFunction(g, v, std::make_shared<LatticeMesh>(SimplexGrid::build(3, 10))));
  }
}
