#pragma once

#include <Eigen/Dense>

namespace pomdpcs {

inline constexpr double kBlackwellResidualTolerance = 1e-6;

/// Garbling R with B1 ~ B2 R; B2 Blackwell-dominates B1 when the residual
/// ||B2 R - B1||_F is at most `tolerance`.
struct BlackwellFactorization {
  Eigen::MatrixXd R;  // Y2 x Y1, row-stochastic
  double residual = 0.0;
  double tolerance = kBlackwellResidualTolerance;
  bool dominates = false;
  int iterations = 0;
};

/// Least squares over row-stochastic R by accelerated projected gradient with
/// per-row projection onto the simplex. B1 is X x Y1 and B2 is X x Y2.
/// Throws DimensionMismatch when the row counts differ.
BlackwellFactorization blackwell_factorize(const Eigen::MatrixXd& B1, const Eigen::MatrixXd& B2,
                                           int max_iters = 100'000,
                                           double tolerance = kBlackwellResidualTolerance);

/// Euclidean projection of a vector onto the probability simplex.
Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v);

}  // namespace pomdpcs
