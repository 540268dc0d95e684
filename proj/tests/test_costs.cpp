#include <doctest.h>

#include <cmath>

#include "pomdpcs/costs.hpp"
#include "pomdpcs/errors.hpp"
#include "support.hpp"

using namespace pomdpcs;
using testing::mat;
using testing::vec;

namespace {

NonlinearCostSpec spec_of(CostFamily f, int X) {
  NonlinearCostSpec s;
  s.family = f;
  s.weight = Eigen::MatrixXd::Identity(X, X);
  s.epsilon = 0.25;
  return s;
}

// Direct sums over vertices, without the closed forms used by the library.
double vertex_sum(const Eigen::VectorXd& pi, bool inf_norm) {
  const auto X = pi.size();
  double total = 0.0;
  for (Eigen::Index i = 0; i < X; ++i) {
    const Eigen::VectorXd d = Eigen::VectorXd::Unit(X, i) - pi;
    total += (inf_norm ? d.cwiseAbs().maxCoeff() : d.cwiseAbs().sum()) * pi(i);
  }
  return total;
}

double mean_square_sum(const Eigen::MatrixXd& M, const Eigen::VectorXd& pi) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < pi.size(); ++i) {
    const Eigen::VectorXd d = Eigen::VectorXd::Unit(pi.size(), i) - pi;
    total += d.dot(M * d) * pi(i);
  }
  return total;
}

}  // namespace

TEST_CASE("loss examples") {
  CHECK(performance_loss(spec_of(CostFamily::entropy, 2), vec({1, 0}), 1) == 0.0);
  CHECK(performance_loss(spec_of(CostFamily::mean_square, 2), vec({0.5, 0.5}), 1) ==
        doctest::Approx(0.5).epsilon(1e-15));
  CHECK(performance_loss(spec_of(CostFamily::l1, 2), vec({0.3, 0.7}), 1) ==
        doctest::Approx(0.84).epsilon(1e-14));
  CHECK(performance_loss(spec_of(CostFamily::entropy, 4), Eigen::VectorXd::Constant(4, 0.25), 1) ==
        doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("closed forms agree with vertex sums") {
  Rng rng(2);
  for (int t = 0; t < 200; ++t) {
    const int X = 2 + rng.index(5);
    const Eigen::VectorXd pi = rng.simplex_point(X);
    CHECK(performance_loss(spec_of(CostFamily::l1, X), pi, 1) ==
          doctest::Approx(vertex_sum(pi, false)).epsilon(1e-12));
    CHECK(performance_loss(spec_of(CostFamily::linf, X), pi, 1) ==
          doctest::Approx(vertex_sum(pi, true)).epsilon(1e-12));
    CHECK(performance_loss(spec_of(CostFamily::linf, X), pi, 1) ==
          doctest::Approx(0.5 * performance_loss(spec_of(CostFamily::l1, X), pi, 1)));

    Eigen::MatrixXd A = testing::random_stochastic(rng, X, X);
    auto s = spec_of(CostFamily::mean_square, X);
    s.weight = A * A.transpose();
    CHECK(performance_loss(s, pi, 1) == doctest::Approx(mean_square_sum(s.weight, pi)).epsilon(1e-12));
  }
}

TEST_CASE("alpha and beta scale and shift the loss") {
  auto s = spec_of(CostFamily::entropy, 2);
  s.alpha = {1.0, 0.5};
  s.beta = {0.0, 0.25};
  CHECK(performance_loss(s, vec({0.5, 0.5}), 2) == doctest::Approx(0.75));
  CHECK(performance_loss(s, vec({1, 0}), 2) == doctest::Approx(0.25));
  CHECK_FALSE(s.vanishes_for(2));
  s.alpha[1] = 0.0;
  s.beta[1] = 0.0;
  CHECK(s.vanishes_for(2));
  CHECK(spec_of(CostFamily::none, 2).vanishes_for(1));
}

TEST_CASE("instantaneous cost examples") {
  auto m = testing::model({Eigen::Matrix2d::Identity(), Eigen::Matrix2d::Identity()},
                          {Eigen::Matrix2d::Identity(), Eigen::Matrix2d::Identity()},
                          {vec({0, 0}), vec({1, 0})}, 0.5);
  const Eigen::VectorXd pi = vec({0.3, 0.7});
  CHECK(instantaneous_cost(m, pi, 2) == 0.3);
  m.nonlinear_cost = spec_of(CostFamily::entropy, 2);
  m.nonlinear_cost.alpha = {1.0, 0.5};
  const double h = -(0.3 * std::log2(0.3) + 0.7 * std::log2(0.7));
  CHECK(instantaneous_cost(m, pi, 1) == doctest::Approx(h));
  CHECK(instantaneous_cost(m, vec({0.5, 0.5}), 2) == doctest::Approx(1.0));
}

TEST_CASE("vertices carry zero loss and the centroid the largest") {
  Rng rng(4);
  for (auto f : {CostFamily::piecewise_linear, CostFamily::mean_square, CostFamily::l1,
                 CostFamily::linf, CostFamily::entropy}) {
    for (int X = 2; X <= 5; ++X) {
      const auto s = spec_of(f, X);
      for (int i = 1; i <= X; ++i)
        CHECK(performance_loss(s, unit_belief(i, X).probs(), 1) == 0.0);
      if (f == CostFamily::piecewise_linear) continue;
      const double top = performance_loss(s, uniform_belief(X).probs(), 1);
      for (int t = 0; t < 200; ++t)
        CHECK(performance_loss(s, rng.simplex_point(X), 1) <= top + 1e-12);
      CHECK(top <= performance_loss_bound(s, X, 1) + 1e-12);
    }
  }
}

TEST_CASE("piecewise-linear bands include both breakpoints in the middle band") {
  const auto s = spec_of(CostFamily::piecewise_linear, 2);
  // Distances 0.25 and 0.75 sit exactly on the breakpoints eps and 1 - eps.
  CHECK(performance_loss(s, vec({0.75, 0.25}), 1) == 0.25);
  CHECK(performance_loss(s, vec({0.875, 0.125}), 1) == 0.125 * 1.0);
  CHECK(performance_loss(s, vec({0.5, 0.5}), 1) == 0.25);
  auto zero = spec_of(CostFamily::piecewise_linear, 2);
  zero.epsilon = 0.0;
  CHECK(performance_loss(zero, vec({0.5, 0.5}), 1) == 0.0);
}

TEST_CASE("concavity probe") {
  CHECK(concavity_probe(spec_of(CostFamily::entropy, 3), 3, 1, 2000, 1e-12).concave);
  CHECK(concavity_probe(spec_of(CostFamily::l1, 4), 4, 1, 2000, 1e-12).concave);
  CHECK(concavity_probe(spec_of(CostFamily::piecewise_linear, 2), 2, 1, 2000, 1e-12).concave);

  auto psd = spec_of(CostFamily::mean_square, 3);
  psd.weight = mat({{2, 1, 0}, {1, 2, 0}, {0, 0, 1}});
  CHECK(concavity_probe(psd, 3, 1, 2000, 1e-12).concave);

  // With two states diag(1, -1) gives D = 0 identically; a third state with
  // zero weight exposes the positive curvature.
  auto flat = spec_of(CostFamily::mean_square, 2);
  flat.weight = mat({{1, 0}, {0, -1}});
  CHECK(concavity_probe(flat, 2, 1, 2000, 1e-12).worst_violation <= 1e-15);
  auto indefinite = spec_of(CostFamily::mean_square, 3);
  indefinite.weight = mat({{1, 0, 0}, {0, -1, 0}, {0, 0, 0}});
  const auto r = concavity_probe(indefinite, 3, 1, 2000, 1e-12);
  CHECK_FALSE(r.concave);
  CHECK(r.worst_violation > 0.0);
  const Eigen::VectorXd mid =
      r.witness_lambda * r.witness_first + (1.0 - r.witness_lambda) * r.witness_second;
  const double gap = r.witness_lambda * performance_loss(indefinite, r.witness_first, 1) +
                     (1.0 - r.witness_lambda) * performance_loss(indefinite, r.witness_second, 1) -
                     performance_loss(indefinite, mid, 1);
  CHECK(gap == doctest::Approx(r.worst_violation));

  // With three states the band structure breaks concavity.
  CHECK_FALSE(concavity_probe(spec_of(CostFamily::piecewise_linear, 3), 3, 1, 20000, 1e-12).concave);
  CHECK_THROWS_AS(concavity_probe(psd, 3, 1, 0, 1e-12), PreconditionFailed);
}

TEST_CASE("cost validation") {
  CHECK(validate_cost_spec(spec_of(CostFamily::entropy, 2), 2, 2).empty());
  auto bad = spec_of(CostFamily::mean_square, 2);
  bad.weight = mat({{1, 0}, {0, -1}});
  CHECK(validate_cost_spec(bad, 2, 2).size() == 1);
  bad.weight = mat({{1, 0.5}, {0, 1}});
  CHECK(validate_cost_spec(bad, 2, 2).size() == 1);
  bad.weight = Eigen::MatrixXd::Identity(3, 3);
  CHECK(validate_cost_spec(bad, 2, 2).size() == 1);
  auto eps = spec_of(CostFamily::piecewise_linear, 2);
  eps.epsilon = 0.6;
  CHECK(validate_cost_spec(eps, 2, 2).size() == 1);
  auto w = spec_of(CostFamily::entropy, 2);
  w.alpha = {1.0, -0.1};
  w.beta = {0.0};
  CHECK(validate_cost_spec(w, 2, 2).size() == 2);
  CHECK(cost_family_from_string("linf") == CostFamily::linf);
  CHECK_THROWS_AS(cost_family_from_string("l2"), InvalidModel);
}

TEST_CASE("piecewise-linear breakpoints survive rounding") {
  auto s = spec_of(CostFamily::piecewise_linear, 2);
  s.epsilon = 0.2;
  // 1 - 0.8 evaluates to slightly less than 0.2.
  CHECK(performance_loss(s, vec({0.8, 0.2}), 1) == doctest::Approx(0.2));
  CHECK(performance_loss(s, vec({0.2, 0.8}), 1) == doctest::Approx(0.2));
  CHECK(performance_loss(s, vec({0.9, 0.1}), 1) == doctest::Approx(0.1));
}
