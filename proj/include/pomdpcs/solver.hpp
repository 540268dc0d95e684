#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pomdpcs/grid.hpp"
#include "pomdpcs/model.hpp"

namespace pomdpcs {

/// How grid values are interpolated between lattice points. `automatic`
/// uses the concave mesh for three-state grids and Freudenthal cells
/// otherwise.
enum class Interpolation { automatic, freudenthal, concave_mesh };

struct SolverOptions {
  double tol = 1e-8;
  int max_iters = 100'000;
  int workers = 1;
  /// Negative controls switch this off to solve deliberately invalid models
  /// (for example a convex cost with negative weight).
  bool validate = true;
  Interpolation interpolation = Interpolation::automatic;
};

struct BackupResult {
  std::vector<double> q;  // q[u - 1] = Q(pi, u)
  double value = 0.0;
  int action = 1;
};

/// One Bellman backup at an arbitrary belief, with V interpolated on its
/// grid. Stopping-time models use Q(pi, 1) = c_1' pi. Observations with zero
/// likelihood contribute nothing. Ties go to the smallest action.
BackupResult bellman_backup(const PomdpModel& model, const ValueFunction& V, const Belief& pi);

struct SolveResult {
  ValueFunction value;
  Policy policy;              // greedy with respect to `value`
  std::vector<double> q;      // Q(point i, u) at q[i * U + u - 1], greedy backup of `value`
  std::vector<double> changes;  // sup-norm change per iteration
  int num_actions = 0;
  int iterations = 0;
  bool converged = false;
  double final_change = 0.0;

  double q_at(std::size_t i, int u) const { return q[i * num_actions + u - 1]; }
};

/// Value iteration from V = 0 for a general discounted model (discount < 1).
/// A run that hits max_iters is returned with converged = false.
SolveResult solve_discounted(const PomdpModel& model, const GridPtr& grid,
                             const SolverOptions& opts = {});

/// Value iteration for a stopping-time model (discount <= 1). For two-state
/// models the policy carries a threshold when it has a single switch.
SolveResult solve_stopping(const PomdpModel& model, const GridPtr& grid,
                           const SolverOptions& opts = {});

/// Dispatches on model.kind.
SolveResult solve(const PomdpModel& model, const GridPtr& grid, const SolverOptions& opts = {});

struct RelaxedSolveResult {
  RelaxedValueFunction value;
  Policy policy;
  std::vector<double> changes;
  int iterations = 0;
  bool converged = false;
  double final_change = 0.0;
};

/// Value iteration on the positive orthant for linear-cost models, backing up
/// Q(alpha, u) = c_u' alpha + rho sum_y W(B_y(u) P(u)' alpha) with W the
/// homogeneous extension of the grid values. Throws PreconditionFailed for
/// models with a nonlinear cost.
RelaxedSolveResult solve_relaxed(const PomdpModel& model, const GridPtr& grid,
                                 const SolverOptions& opts = {});

/// Relaxed backup at an arbitrary nonnegative vector.
BackupResult relaxed_backup(const PomdpModel& model, const RelaxedValueFunction& W,
                            const Eigen::VectorXd& alpha);

struct ThresholdExtraction {
  std::optional<double> threshold;
  int switches = 0;
  std::string diagnostic;
};

/// For a two-state policy read along pi(2) in [0, 1]: the midpoint between
/// the last stop point and the first continue point when the actions switch
/// exactly once, from 1 to 2.
ThresholdExtraction extract_threshold(const Policy& policy);

}  // namespace pomdpcs
