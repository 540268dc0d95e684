#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pomdpcs/model.hpp"
#include "pomdpcs/model_io.hpp"
#include "pomdpcs/rng.hpp"

namespace testing {

using Rows = std::initializer_list<std::initializer_list<double>>;

inline Eigen::MatrixXd mat(Rows rows) {
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = static_cast<Eigen::Index>(rows.begin()->size());
  Eigen::MatrixXd m(r, c);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

inline Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

inline pomdpcs::PomdpModel model(std::vector<Eigen::MatrixXd> P, std::vector<Eigen::MatrixXd> B,
                                 std::vector<Eigen::VectorXd> c, double discount,
                                 pomdpcs::ModelKind kind = pomdpcs::ModelKind::general_discounted) {
  pomdpcs::PomdpModel m;
  m.name = "test";
  m.kind = kind;
  m.discount = discount;
  m.transition = std::move(P);
  m.observation = std::move(B);
  m.linear_cost = std::move(c);
  return m;
}

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(POMDPCS_FIXTURE_DIR) / name;
}

inline pomdpcs::PomdpModel load_fixture(const std::string& name) {
  return pomdpcs::load_model(fixture(name));
}

inline Eigen::MatrixXd random_stochastic(pomdpcs::Rng& rng, int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) m.row(i) = rng.simplex_point(cols).transpose();
  return m;
}

// A random valid discounted model with X states, U actions and up to Ymax
// observations per action.
inline pomdpcs::PomdpModel random_model(pomdpcs::Rng& rng, int X, int U, int Ymax) {
  std::vector<Eigen::MatrixXd> P, B;
  std::vector<Eigen::VectorXd> c;
  for (int u = 0; u < U; ++u) {
    P.push_back(random_stochastic(rng, X, X));
    B.push_back(random_stochastic(rng, X, 2 + rng.index(Ymax - 1)));
    c.push_back(Eigen::VectorXd::NullaryExpr(X, [&] { return rng.uniform(); }));
  }
  return model(P, B, c, 0.9);
}

}  // namespace testing
