#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "pomdpcs/blackwell.hpp"
#include "pomdpcs/grid.hpp"
#include "pomdpcs/order.hpp"
#include "pomdpcs/rng.hpp"
#include "pomdpcs/solver.hpp"

namespace pomdpcs {

/// Pair sweeps enumerate every pair up to this many and sample beyond it.
inline constexpr std::size_t kMaxPairs = 1'000'000;

/// Midpoint concavity on the grid: for point pairs whose midpoint is itself
/// a grid point, V(mid) >= (V(a) + V(b)) / 2 - tolerance.
OrderCheckReport verify_concavity(const ValueFunction& V, std::size_t num_trials,
                                  double tolerance, std::uint64_t seed = 1);

/// Every pair of stop points (action 1) whose midpoint is a grid point must
/// have a stop midpoint. worst_violation counts the offending pairs.
OrderCheckReport verify_stopping_set_convex(const Policy& policy);

/// |W(k alpha) - k W(alpha)| <= 1e-10 max(1, k |W|) for the homogeneous
/// extension and for one relaxed backup, over sampled alpha and each k in
/// `kappas`. |W| is the grid sup-norm scaled by |alpha|_1.
OrderCheckReport verify_homogeneity(const PomdpModel& model, const RelaxedSolveResult& solved,
                                    const std::vector<double>& kappas, int samples = 200,
                                    std::uint64_t seed = 1);

/// Solves the relaxed problem on `grid` first.
OrderCheckReport verify_homogeneity(const PomdpModel& model, const GridPtr& grid,
                                    const std::vector<double>& kappas,
                                    const SolverOptions& opts = {}, int samples = 200,
                                    std::uint64_t seed = 1);

/// Over MLR-comparable grid pairs, pi1 >=_r pi2 implies V(pi1) <= V(pi2) + tolerance.
OrderCheckReport verify_mlr_monotone_value(const ValueFunction& V, double tolerance,
                                           std::size_t pair_cap = kMaxPairs,
                                           std::uint64_t seed = 1);

/// A1 (FOSD-decreasing costs, every action), A2 (TP2 transitions) and A3
/// (TP2 observations), in that order.
std::vector<OrderCheckReport> monotone_assumptions(const PomdpModel& model, int samples = 2000,
                                                   std::uint64_t seed = 1);

using ModelGenerator = std::function<PomdpModel(Rng&)>;

/// Two-state, two-action discounted model with TP2 transitions, decreasing
/// linear costs and an observation matrix that is not TP2 as labelled.
PomdpModel random_conjecture_model(Rng& rng);

struct ConjectureProbeSummary {
  int models_checked = 0;
  int first_counterexample = -1;  // 0-based model index, -1 if none
  std::optional<PomdpModel> counterexample;
  std::vector<OrderCheckReport> reports;
  std::string summary;
};

/// Solves each generated model and tests MLR monotonicity of its value
/// function with tolerance `relative_tolerance` * max|V|. Throws
/// PreconditionFailed if a generated model violates A1 or A2.
ConjectureProbeSummary conjecture_probe(const ModelGenerator& generator, int num_models,
                                        int resolution, const SolverOptions& opts = {},
                                        double relative_tolerance = 1e-6,
                                        std::uint64_t seed = 1);

struct MyopicBoundOptions {
  double jensen_relative_tolerance = 1e-8;  // times max|V|
  double q_tolerance = 1e-9;
  double strictness_margin = 1e-9;
};

struct MyopicBoundReport {
  BlackwellFactorization factorization;
  OrderCheckReport jensen;        // sum_y1 V(T) sigma >= sum_y2 V(T) sigma at grid points
  OrderCheckReport q_form;        // Q(pi, 2) <= Q(pi, 1) + tol on the strict region
  OrderCheckReport policy_order;  // mu*(pi) >= myopic(pi) with Q-value tie handling
  std::size_t strict_region_points = 0;
  bool holds = false;
};

/// Checks the myopic lower bound for a two-sensor model where sensor 2
/// Blackwell-dominates sensor 1. Requires U = 2, a shared transition matrix
/// and dominance; throws PreconditionFailed otherwise.
MyopicBoundReport verify_myopic_bound(const PomdpModel& model, const SolveResult& solved,
                                      const MyopicBoundOptions& opts = {});

MyopicBoundReport verify_myopic_bound(const PomdpModel& model, const GridPtr& grid,
                                      const SolverOptions& solver = {},
                                      const MyopicBoundOptions& opts = {});

/// sum_y V(T(pi, y, u)) sigma(pi, y, u) with V interpolated.
double expected_continuation(const PomdpModel& model, const ValueFunction& V,
                             const Eigen::VectorXd& pi, int u);

}  // namespace pomdpcs
