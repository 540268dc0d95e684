#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "pomdpcs/model.hpp"
#include "pomdpcs/rng.hpp"
#include "pomdpcs/solver.hpp"

namespace pomdpcs {

/// Bayesian quickest detection of a geometric change time.
///
/// State 2 is "no change yet", state 1 the absorbing post-change state. The
/// optional `continue_cost` is an extra concave delay cost; its alpha/beta,
/// when given, hold a single entry for the continue action.
struct QdSpec {
  double p22 = 0.9;
  double delay_weight = 0.05;
  Eigen::MatrixXd observation;  // 2 x Y
  NonlinearCostSpec continue_cost;
};

/// Stopping-time model: P = [[1, 0], [1 - P22, P22]], c_1 = [0, 1],
/// c_2 = [d, 0], discount 1, initial belief [0, 1]. Throws InvalidModel for
/// d <= 0, P22 outside [0, 1) or a bad observation matrix.
PomdpModel build_qd_model(const QdSpec& spec);

/// Recovers the spec from a model built by build_qd_model (or a file with the
/// same structure). Throws InvalidModel otherwise.
QdSpec qd_spec_from_model(const PomdpModel& model);

struct QdThresholdResult {
  double threshold = 0.0;       // stop iff pi(2) < threshold
  double value_at_prior = 0.0;  // V([0, 1])
  SolveResult solution;
};

/// Solves the stopping problem on a two-state grid and extracts the
/// threshold. Throws StructureViolation when the policy is not a single
/// stop-then-continue switch or does not stop at pi(2) = 0.
QdThresholdResult qd_threshold(const QdSpec& spec, int resolution, const SolverOptions& opts = {});

struct KsOptions {
  int num_paths = 100'000;
  int horizon_cap = 10'000;
  std::uint64_t seed = 1;
  int workers = 1;
};

struct KsEstimate {
  double threshold = 0.0;
  double delay_term = 0.0;  // d E(tau - tau0)^+
  double delay_se = 0.0;
  double false_alarm = 0.0;  // P(tau < tau0)
  double false_alarm_se = 0.0;
  double nonlinear_term = 0.0;  // E sum of the extra continue cost, 0 without one
  double ks_cost = 0.0;         // delay_term + false_alarm
  double total_cost = 0.0;      // ks_cost + nonlinear_term
  double total_se = 0.0;
  double ci_low = 0.0;  // 95% normal interval on total_cost
  double ci_high = 0.0;
  int num_paths = 0;
  int cap_hits = 0;
  std::uint64_t seed = 0;
};

/// Simulates the change, observations and filter, announcing at the first k
/// with pi_k(2) < threshold.
KsEstimate ks_cost_estimate(const QdSpec& spec, double threshold, const KsOptions& opts = {});

/// Draws tau0 = inf{k : x_k = 1} for a chain started in state 2.
int sample_change_time(const QdSpec& spec, Rng& rng, int cap = 1'000'000);

}  // namespace pomdpcs
