#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pomdpcs/model.hpp"

namespace pomdpcs {

/// Where a check failed (or came closest to failing).
struct Witness {
  std::vector<long long> indices;  // 1-based where they name matrix entries
  std::vector<Eigen::VectorXd> beliefs;
  std::string note;
};

/// Outcome of a structural check: `holds` iff worst_violation <= tolerance.
/// A negative worst_violation is the smallest margin seen.
struct OrderCheckReport {
  std::string predicate;
  bool holds = true;
  double worst_violation = 0.0;
  double tolerance = 0.0;
  std::size_t samples = 0;
  Witness witness;
};

/// All 2x2 minors a_ik a_jl - a_il a_jk (i < j, k < l) are >= -tolerance.
/// The witness names the most negative minor.
OrderCheckReport is_tp2(const Eigen::MatrixXd& matrix, double tolerance = 1e-12);

/// Column permutation (0-based, new column j = old column perm[j]) making B
/// TP2, or nullopt if none was found. Sorting by the likelihood ratio of the
/// last to the first row is tried first, then, for at most 8 columns, all
/// permutations.
std::optional<std::vector<int>> tp2_column_permutation(const Eigen::MatrixXd& B);

Eigen::MatrixXd permute_columns(const Eigen::MatrixXd& B, const std::vector<int>& perm);

/// pi1 >=_r pi2: pi1(i) pi2(j) <= pi2(i) pi1(j) for all i < j.
bool mlr_geq(const Eigen::VectorXd& pi1, const Eigen::VectorXd& pi2, double tolerance = 1e-12);

/// First-order dominance: every upper tail sum of pi1 is >= that of pi2.
bool fosd_geq(const Eigen::VectorXd& pi1, const Eigen::VectorXd& pi2, double tolerance = 1e-12);

/// Samples first-order comparable pairs (mass moved from lower to higher
/// states) and checks C(pi_high, u) <= C(pi_low, u) + tolerance.
OrderCheckReport fosd_decreasing_cost(const PomdpModel& model, int u, int samples,
                                      double tolerance = 1e-12, std::uint64_t seed = 1);

/// Symmetric, stochastic, B_ij >= min(B_ik, B_kj) and B_ii > B_ik for k != i.
OrderCheckReport is_ultrametric(const Eigen::MatrixXd& B, double tolerance = 1e-12);

/// B^{1/U} via the spectral decomposition of a symmetric ultrametric B.
/// Throws PreconditionFailed if B is not ultrametric, NegativeEigenvalue for
/// an eigenvalue below -1e-10, and PostconditionFailed when the root is not
/// stochastic and nonnegative within 1e-10 or its U-th power misses B by
/// more than 1e-8.
Eigen::MatrixXd matrix_root(const Eigen::MatrixXd& B, int degree);

/// B^{k/U} = (B^{1/U})^k.
Eigen::MatrixXd matrix_fractional_power(const Eigen::MatrixXd& B, int k, int degree);

}  // namespace pomdpcs
