#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "pomdpcs/grid.hpp"
#include "pomdpcs/model.hpp"

namespace pomdpcs {

/// Belief -> 1-based action.
using PolicyFn = std::function<int(const Eigen::VectorXd&)>;

PolicyFn grid_policy(const Policy& policy);
PolicyFn constant_policy(int u);
/// Two-action myopic rule: action 2 where C(pi, 2) < C(pi, 1), else 1.
PolicyFn myopic_policy(const PomdpModel& model);

struct EvalOptions {
  int num_paths = 10'000;
  double tolerance = 1e-3;  // bound on the discounted tail beyond the horizon
  int horizon_cap = 10'000;
  std::uint64_t seed = 1;
  int workers = 1;
};

struct EvalResult {
  double mean = 0.0;
  double standard_error = 0.0;
  int num_paths = 0;
  int horizon = 0;
  double truncation_bound = 0.0;  // rho^H max|C| / (1 - rho); 0 for undiscounted stopping
  int cap_hits = 0;               // undiscounted stopping paths cut at the horizon
};

/// Monte Carlo estimate of E sum_k rho^k C(pi_k, u_k) under `policy` from pi0.
/// Discounted runs pick the horizon H so the truncation bound is at most
/// `tolerance`. Undiscounted stopping runs stop at action 1 or at
/// horizon_cap. Throws HorizonUnbounded for an undiscounted model whose
/// policy never stops.
EvalResult evaluate_policy(const PomdpModel& model, const PolicyFn& policy,
                           const Eigen::VectorXd& pi0, const EvalOptions& opts = {});

struct ComparisonRow {
  Eigen::VectorXd pi0;
  EvalResult a;
  EvalResult b;
  double mean_difference = 0.0;  // A - B, paired path by path
  double difference_se = 0.0;
  bool a_not_worse = false;      // mean_difference <= 3 * difference_se
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;
  int a_not_worse_count = 0;
};

/// Paired comparison with common random numbers: path p from the j-th
/// initial belief consumes the same uniforms under both policies.
ComparisonTable compare_policies(const PomdpModel& model, const PolicyFn& a, const PolicyFn& b,
                                 const std::vector<Eigen::VectorXd>& initial_beliefs,
                                 const EvalOptions& opts = {});

/// Horizon H used for a discounted model (1 when rho = 0).
int discounted_horizon(const PomdpModel& model, double tolerance, int cap);

}  // namespace pomdpcs
