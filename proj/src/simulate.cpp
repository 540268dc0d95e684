#include "pomdpcs/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "pomdpcs/errors.hpp"
#include "pomdpcs/filter.hpp"
#include "pomdpcs/parallel.hpp"
#include "pomdpcs/rng.hpp"

namespace pomdpcs {

PolicyFn grid_policy(const Policy& policy) {
  return [policy](const Eigen::VectorXd& pi) { return policy(pi); };
}

PolicyFn constant_policy(int u) {
  return [u](const Eigen::VectorXd&) { return u; };
}

PolicyFn myopic_policy(const PomdpModel& model) {
  return [model](const Eigen::VectorXd& pi) {
    return instantaneous_cost(model, pi, 2) < instantaneous_cost(model, pi, 1) ? 2 : 1;
  };
}

int discounted_horizon(const PomdpModel& model, double tolerance, int cap) {
  const double rho = model.discount;
  const double bound = instantaneous_cost_bound(model);
  if (rho <= 0.0 || bound <= 0.0) return 1;
  // Smallest H with rho^H * bound / (1 - rho) <= tolerance.
  const double h = std::log(tolerance * (1.0 - rho) / bound) / std::log(rho);
  return std::clamp(static_cast<int>(std::ceil(std::max(h, 1.0))), 1, cap);
}

namespace {

struct PathResult {
  double cost = 0.0;
  bool capped = false;
};

PathResult simulate_path(const PomdpModel& model, const PolicyFn& policy,
                         const Eigen::VectorXd& pi0, int horizon, bool stops, Rng& rng) {
  PathResult r;
  int x = rng.categorical(pi0);
  Eigen::VectorXd pi = pi0;
  double weight = 1.0;
  for (int k = 0; k < horizon; ++k) {
    const int u = policy(pi);
    if (u < 1 || u > model.num_actions())
      throw std::out_of_range("policy returned action " + std::to_string(u));
    r.cost += weight * instantaneous_cost(model, pi, u);
    // Both uniforms are drawn on every step whatever the action, which keeps
    // streams aligned under common random numbers.
    const double ux = rng.uniform();
    const double uy = rng.uniform();
    if (stops && u == 1) return r;
    const auto& P = model.P(u);
    const auto& B = model.B(u);
    double acc = 0.0;
    int next = model.num_states() - 1;
    for (int j = 0; j < model.num_states(); ++j) {
      acc += P(x, j);
      if (ux < acc) {
        next = j;
        break;
      }
    }
    x = next;
    acc = 0.0;
    int y = static_cast<int>(B.cols()) - 1;
    for (int j = 0; j < B.cols(); ++j) {
      acc += B(x, j);
      if (uy < acc) {
        y = j;
        break;
      }
    }
    const Eigen::VectorXd w = unnormalized_update(model, pi, y + 1, u);
    const double sigma = w.sum();
    if (sigma > kZeroLikelihood) pi = w / sigma;
    weight *= model.discount;
  }
  r.capped = stops;
  return r;
}

struct Plan {
  int horizon = 1;
  bool stops = false;
  double truncation = 0.0;
};

Plan plan_for(const PomdpModel& model, const PolicyFn& policy, const EvalOptions& opts) {
  require_valid(model);
  Plan plan;
  plan.stops = model.kind == ModelKind::stopping_time;
  if (model.discount < 1.0) {
    plan.horizon = discounted_horizon(model, opts.tolerance, opts.horizon_cap);
    plan.truncation = std::pow(model.discount, plan.horizon) * instantaneous_cost_bound(model) /
                      (1.0 - model.discount);
    return plan;
  }
  if (!plan.stops)
    throw HorizonUnbounded("evaluate_policy: discount 1 requires a stopping-time model");
  // An undiscounted policy must stop somewhere; probe a coarse grid.
  const auto probe = SimplexGrid::build(model.num_states(),
                                        model.num_states() <= 3 ? 50 : 10);
  bool any_stop = false;
  for (std::size_t i = 0; i < probe->size() && !any_stop; ++i)
    any_stop = policy(Eigen::VectorXd(probe->point(i))) == 1;
  if (!any_stop) throw HorizonUnbounded("evaluate_policy: policy never stops");
  plan.horizon = opts.horizon_cap;
  return plan;
}

EvalResult summarize(const std::vector<PathResult>& paths, const Plan& plan) {
  EvalResult r;
  r.num_paths = static_cast<int>(paths.size());
  r.horizon = plan.horizon;
  r.truncation_bound = plan.truncation;
  const double n = static_cast<double>(paths.size());
  double s = 0.0;
  for (const auto& p : paths) {
    s += p.cost;
    r.cap_hits += p.capped ? 1 : 0;
  }
  r.mean = s / n;
  double ss = 0.0;
  for (const auto& p : paths) ss += (p.cost - r.mean) * (p.cost - r.mean);
  r.standard_error = paths.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  return r;
}

std::vector<PathResult> run_paths(const PomdpModel& model, const PolicyFn& policy,
                                  const Eigen::VectorXd& pi0, const Plan& plan,
                                  std::uint64_t stream_seed, const EvalOptions& opts) {
  if (opts.num_paths < 1) throw PreconditionFailed("evaluate_policy: num_paths must be >= 1");
  std::vector<PathResult> paths(opts.num_paths);
  parallel_for(paths.size(), opts.workers, [&](std::size_t b, std::size_t e) {
    for (std::size_t p = b; p < e; ++p) {
      Rng rng(derive_seed(stream_seed, p));
      paths[p] = simulate_path(model, policy, pi0, plan.horizon, plan.stops, rng);
    }
  });
  return paths;
}

}  // namespace

EvalResult evaluate_policy(const PomdpModel& model, const PolicyFn& policy,
                           const Eigen::VectorXd& pi0, const EvalOptions& opts) {
  const Belief start(pi0);
  const Plan plan = plan_for(model, policy, opts);
  return summarize(run_paths(model, policy, start.probs(), plan, opts.seed, opts), plan);
}

ComparisonTable compare_policies(const PomdpModel& model, const PolicyFn& a, const PolicyFn& b,
                                 const std::vector<Eigen::VectorXd>& initial_beliefs,
                                 const EvalOptions& opts) {
  const Plan plan_a = plan_for(model, a, opts);
  const Plan plan_b = plan_for(model, b, opts);
  ComparisonTable table;
  for (std::size_t j = 0; j < initial_beliefs.size(); ++j) {
    const Belief start(initial_beliefs[j]);
    const std::uint64_t stream = derive_seed(opts.seed, j);
    const auto pa = run_paths(model, a, start.probs(), plan_a, stream, opts);
    const auto pb = run_paths(model, b, start.probs(), plan_b, stream, opts);
    ComparisonRow row;
    row.pi0 = start.probs();
    row.a = summarize(pa, plan_a);
    row.b = summarize(pb, plan_b);
    const double n = static_cast<double>(pa.size());
    double s = 0.0;
    for (std::size_t p = 0; p < pa.size(); ++p) s += pa[p].cost - pb[p].cost;
    row.mean_difference = s / n;
    double ss = 0.0;
    for (std::size_t p = 0; p < pa.size(); ++p) {
      const double d = pa[p].cost - pb[p].cost - row.mean_difference;
      ss += d * d;
    }
    row.difference_se = pa.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    row.a_not_worse = row.mean_difference <= 3.0 * row.difference_se;
    table.a_not_worse_count += row.a_not_worse ? 1 : 0;
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace pomdpcs
