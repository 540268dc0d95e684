#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pomdpcs {

struct PomdpModel;

enum class CostFamily { none, piecewise_linear, mean_square, l1, linf, entropy };

std::string to_string(CostFamily family);
CostFamily cost_family_from_string(const std::string& name);

/// Belief-dependent performance loss D(pi, u).
///
/// `alpha` and `beta` hold one weight per action (0-based storage, action u
/// lives at u - 1). `weight` is the matrix of the mean-square family and is
/// ignored by the others; `epsilon` is used by piecewise_linear only.
struct NonlinearCostSpec {
  CostFamily family = CostFamily::none;
  double epsilon = 0.0;
  Eigen::MatrixXd weight;
  std::vector<double> alpha;
  std::vector<double> beta;

  /// True when D(., u) is identically zero.
  bool vanishes_for(int u) const;
};

/// Invariant violations for a model with `num_states` states and
/// `num_actions` actions. Empty when valid.
std::vector<std::string> validate_cost_spec(const NonlinearCostSpec& spec, int num_states,
                                            int num_actions);

/// D(pi, u) for a 1-based action u. `pi` must be a probability vector.
double performance_loss(const NonlinearCostSpec& spec, const Eigen::VectorXd& pi, int u);

/// Upper bound on D(., u) over the simplex.
double performance_loss_bound(const NonlinearCostSpec& spec, int num_states, int u);

/// C(pi, u) = c_u' pi + D(pi, u).
double instantaneous_cost(const PomdpModel& model, const Eigen::VectorXd& pi, int u);

/// max over actions and beliefs of |C(pi, u)|.
double instantaneous_cost_bound(const PomdpModel& model);

struct ConcavityProbeReport {
  bool concave = true;
  double worst_violation = 0.0;
  double tolerance = 0.0;
  int trials = 0;
  Eigen::VectorXd witness_first;
  Eigen::VectorXd witness_second;
  double witness_lambda = 0.0;
};

/// Samples random (pi1, pi2, lambda) triples and reports the largest value of
/// lambda D(pi1) + (1 - lambda) D(pi2) - D(lambda pi1 + (1 - lambda) pi2).
ConcavityProbeReport concavity_probe(const NonlinearCostSpec& spec, int num_states, int u,
                                     int num_trials, double tolerance,
                                     std::uint64_t seed = 1);

}  // namespace pomdpcs
