#include "pomdpcs/blackwell.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "pomdpcs/errors.hpp"

namespace pomdpcs {

Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v) {
  const Eigen::Index n = v.size();
  std::vector<double> s(v.data(), v.data() + n);
  std::sort(s.begin(), s.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    cumulative += s[i];
    const double t = (cumulative - 1.0) / static_cast<double>(i + 1);
    if (s[i] - t > 0.0) theta = t;
  }
  Eigen::VectorXd out = (v.array() - theta).max(0.0).matrix();
  const double total = out.sum();
  if (total > 0.0) out /= total;
  return out;
}

namespace {

void project_rows(Eigen::MatrixXd& R) {
  for (Eigen::Index i = 0; i < R.rows(); ++i)
    R.row(i) = project_to_simplex(R.row(i).transpose()).transpose();
}

}  // namespace

BlackwellFactorization blackwell_factorize(const Eigen::MatrixXd& B1, const Eigen::MatrixXd& B2,
                                           int max_iters, double tolerance) {
  if (B1.rows() != B2.rows())
    throw DimensionMismatch("blackwell_factorize: B1 has " + std::to_string(B1.rows()) +
                            " rows, B2 has " + std::to_string(B2.rows()));
  const Eigen::Index y2 = B2.cols();
  const Eigen::Index y1 = B1.cols();
  const Eigen::MatrixXd gram = B2.transpose() * B2;
  const Eigen::MatrixXd cross = B2.transpose() * B1;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  const double lipschitz = std::max(eig.eigenvalues().maxCoeff(), 1e-12);
  const double step = 1.0 / lipschitz;

  auto residual_of = [&](const Eigen::MatrixXd& R) { return (B2 * R - B1).norm(); };

  BlackwellFactorization best;
  best.tolerance = tolerance;
  best.R = Eigen::MatrixXd::Constant(y2, y1, 1.0 / static_cast<double>(y1));
  best.residual = residual_of(best.R);

  // FISTA with function-value restart.
  Eigen::MatrixXd R = best.R;
  Eigen::MatrixXd Z = R;
  double t = 1.0;
  double previous = best.residual;
  int it = 0;
  for (; it < max_iters && best.residual > 1e-14; ++it) {
    Eigen::MatrixXd next = Z - step * (gram * Z - cross);
    project_rows(next);
    const double res = residual_of(next);
    if (res > previous) {
      // Momentum overshot: restart from the current iterate.
      t = 1.0;
      Z = R;
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    Z = next + ((t - 1.0) / t_next) * (next - R);
    R = std::move(next);
    t = t_next;
    previous = res;
    if (res < best.residual) {
      best.residual = res;
      best.R = R;
    }
  }
  best.iterations = it;
  best.dominates = best.residual <= tolerance;
  return best;
}

}  // namespace pomdpcs
