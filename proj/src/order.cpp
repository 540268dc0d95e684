#include "pomdpcs/order.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pomdpcs/errors.hpp"
#include "pomdpcs/rng.hpp"

namespace pomdpcs {

OrderCheckReport is_tp2(const Eigen::MatrixXd& a, double tolerance) {
  OrderCheckReport r;
  r.predicate = "tp2";
  r.tolerance = tolerance;
  r.worst_violation = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = i + 1; j < a.rows(); ++j)
      for (Eigen::Index k = 0; k < a.cols(); ++k)
        for (Eigen::Index l = k + 1; l < a.cols(); ++l) {
          const double minor = a(i, k) * a(j, l) - a(i, l) * a(j, k);
          ++r.samples;
          if (-minor > r.worst_violation) {
            r.worst_violation = -minor;
            r.witness.indices = {i + 1, j + 1, k + 1, l + 1};
          }
        }
  if (r.samples == 0) r.worst_violation = 0.0;
  r.holds = r.worst_violation <= tolerance;
  if (!r.witness.indices.empty())
    r.witness.note = "rows (i, j), columns (k, l) of the most negative 2x2 minor";
  return r;
}

Eigen::MatrixXd permute_columns(const Eigen::MatrixXd& B, const std::vector<int>& perm) {
  Eigen::MatrixXd out(B.rows(), B.cols());
  for (std::size_t j = 0; j < perm.size(); ++j) out.col(j) = B.col(perm[j]);
  return out;
}

std::optional<std::vector<int>> tp2_column_permutation(const Eigen::MatrixXd& B) {
  const int Y = static_cast<int>(B.cols());
  const int last = static_cast<int>(B.rows()) - 1;
  std::vector<int> perm(Y);
  std::iota(perm.begin(), perm.end(), 0);
  // Compare B(last, a) / B(0, a) < B(last, b) / B(0, b) without dividing.
  std::stable_sort(perm.begin(), perm.end(), [&](int a, int b) {
    return B(last, a) * B(0, b) < B(last, b) * B(0, a);
  });
  if (is_tp2(permute_columns(B, perm)).holds) return perm;
  if (Y > 8) return std::nullopt;
  std::sort(perm.begin(), perm.end());
  do {
    if (is_tp2(permute_columns(B, perm)).holds) return perm;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::nullopt;
}

bool mlr_geq(const Eigen::VectorXd& pi1, const Eigen::VectorXd& pi2, double tolerance) {
  if (pi1.size() != pi2.size()) throw DimensionMismatch("mlr_geq: beliefs differ in size");
  for (Eigen::Index i = 0; i < pi1.size(); ++i)
    for (Eigen::Index j = i + 1; j < pi1.size(); ++j)
      if (pi1(i) * pi2(j) > pi2(i) * pi1(j) + tolerance) return false;
  return true;
}

bool fosd_geq(const Eigen::VectorXd& pi1, const Eigen::VectorXd& pi2, double tolerance) {
  if (pi1.size() != pi2.size()) throw DimensionMismatch("fosd_geq: beliefs differ in size");
  double t1 = 0.0, t2 = 0.0;
  for (Eigen::Index i = pi1.size() - 1; i >= 1; --i) {
    t1 += pi1(i);
    t2 += pi2(i);
    if (t1 < t2 - tolerance) return false;
  }
  return true;
}

OrderCheckReport fosd_decreasing_cost(const PomdpModel& model, int u, int samples,
                                      double tolerance, std::uint64_t seed) {
  OrderCheckReport r;
  r.predicate = "fosd_decreasing_cost";
  r.tolerance = tolerance;
  r.worst_violation = -std::numeric_limits<double>::infinity();
  const int X = model.num_states();
  auto record = [&](const Eigen::VectorXd& low, const Eigen::VectorXd& high) {
    const double gap = instantaneous_cost(model, high, u) - instantaneous_cost(model, low, u);
    ++r.samples;
    if (gap > r.worst_violation) {
      r.worst_violation = gap;
      r.witness.beliefs = {high, low};
      r.witness.note = "C(first, u) exceeds C(second, u) although first dominates";
    }
  };
  for (int i = 0; i < X; ++i)
    for (int j = i + 1; j < X; ++j)
      record(Eigen::VectorXd::Unit(X, i), Eigen::VectorXd::Unit(X, j));

  Rng rng(seed);
  for (int s = 0; s < samples; ++s) {
    const Eigen::VectorXd low = rng.simplex_point(X);
    Eigen::VectorXd high = low;
    const int moves = 1 + rng.index(3);
    for (int m = 0; m < moves; ++m) {
      int i = rng.index(X), j = rng.index(X);
      if (i == j) continue;
      if (i > j) std::swap(i, j);
      const double delta = rng.uniform() * high(i);
      high(i) -= delta;
      high(j) += delta;
    }
    record(low, high);
  }
  r.holds = r.worst_violation <= tolerance;
  r.witness.indices = {u};
  return r;
}

OrderCheckReport is_ultrametric(const Eigen::MatrixXd& B, double tolerance) {
  OrderCheckReport r;
  r.predicate = "ultrametric";
  r.tolerance = tolerance;
  r.worst_violation = -std::numeric_limits<double>::infinity();
  auto note = [&](double v, std::vector<long long> idx, const std::string& what) {
    ++r.samples;
    if (v > r.worst_violation) {
      r.worst_violation = v;
      r.witness.indices = std::move(idx);
      r.witness.note = what;
    }
  };
  const Eigen::Index n = B.rows();
  if (B.cols() != n) {
    r.holds = false;
    r.worst_violation = std::numeric_limits<double>::infinity();
    r.witness.note = "matrix is not square";
    return r;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    note(std::abs(B.row(i).sum() - 1.0), {i + 1}, "row sum differs from 1");
    for (Eigen::Index j = 0; j < n; ++j) {
      note(-B(i, j), {i + 1, j + 1}, "negative entry");
      note(std::abs(B(i, j) - B(j, i)), {i + 1, j + 1}, "not symmetric");
      for (Eigen::Index k = 0; k < n; ++k)
        note(std::min(B(i, k), B(k, j)) - B(i, j), {i + 1, j + 1, k + 1},
             "B_ij < min(B_ik, B_kj)");
    }
    for (Eigen::Index k = 0; k < n; ++k) {
      if (k == i) continue;
      // Strict dominance: equality is a violation, so shift by the tolerance.
      note(B(i, k) - B(i, i) + 2.0 * tolerance, {i + 1, k + 1},
           "diagonal entry does not strictly dominate its row");
    }
  }
  r.holds = r.worst_violation <= tolerance;
  return r;
}

Eigen::MatrixXd matrix_root(const Eigen::MatrixXd& B, int degree) {
  if (degree < 1) throw PreconditionFailed("matrix_root: degree must be >= 1");
  const auto check = is_ultrametric(B);
  if (!check.holds)
    throw PreconditionFailed("matrix_root: matrix is not symmetric stochastic ultrametric (" +
                             check.witness.note + ")");
  if (degree == 1) return B;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(B);
  Eigen::VectorXd lambda = eig.eigenvalues();
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) < -1e-10)
      throw NegativeEigenvalue("matrix_root: eigenvalue " + std::to_string(lambda(i)));
    lambda(i) = std::pow(std::max(lambda(i), 0.0), 1.0 / degree);
  }
  const Eigen::MatrixXd& Q = eig.eigenvectors();
  Eigen::MatrixXd root = Q * lambda.asDiagonal() * Q.transpose();
  root = 0.5 * (root + root.transpose());

  const double row_defect = (root.rowwise().sum().array() - 1.0).abs().maxCoeff();
  if (row_defect > 1e-10)
    throw PostconditionFailed("matrix_root: row sums off by " + std::to_string(row_defect));
  if (root.minCoeff() < -1e-10)
    throw PostconditionFailed("matrix_root: negative entry " + std::to_string(root.minCoeff()));
  Eigen::MatrixXd power = root;
  for (int i = 1; i < degree; ++i) power = power * root;
  const double power_defect = (power - B).cwiseAbs().maxCoeff();
  if (power_defect > 1e-8)
    throw PostconditionFailed("matrix_root: root^U differs from B by " +
                              std::to_string(power_defect));
  return root;
}

Eigen::MatrixXd matrix_fractional_power(const Eigen::MatrixXd& B, int k, int degree) {
  if (k < 0) throw PreconditionFailed("matrix_fractional_power: negative exponent");
  const Eigen::MatrixXd root = matrix_root(B, degree);
  Eigen::MatrixXd out = Eigen::MatrixXd::Identity(B.rows(), B.cols());
  for (int i = 0; i < k; ++i) out = out * root;
  return out;
}

}  // namespace pomdpcs
