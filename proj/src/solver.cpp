#include "pomdpcs/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pomdpcs/errors.hpp"
#include "pomdpcs/filter.hpp"
#include "pomdpcs/mesh.hpp"
#include "pomdpcs/parallel.hpp"

namespace pomdpcs {

namespace {

bool stop_action(const PomdpModel& model, int u) {
  return model.kind == ModelKind::stopping_time && u == 1;
}

double stage_cost(const PomdpModel& model, const Eigen::VectorXd& pi, int u) {
  return stop_action(model, u) ? model.c(1).dot(pi) : instantaneous_cost(model, pi, u);
}

// The interpolated Bellman operator on a fixed grid is a sparse affine map:
// Q(i, u) = cost(i, u) + rho * sum_e coef_e V[index_e]. The successor beliefs
// and their masses are kept so the map can be rebound when the mesh changes.
struct BackupOperator {
  std::size_t points = 0;
  int actions = 0;
  int dim = 0;
  double discount = 0.0;
  std::vector<double> cost;
  std::vector<std::size_t> query_offset;  // per slot, into mass / belief
  std::vector<double> mass;
  std::vector<double> belief;  // dim entries per query
  std::vector<std::size_t> offset;
  std::vector<std::size_t> index;
  std::vector<double> coef;

  template <class Locate>
  void bind(Locate&& locate) {
    offset.assign(1, 0);
    index.clear();
    coef.clear();
    for (std::size_t slot = 0; slot + 1 < query_offset.size(); ++slot) {
      for (std::size_t k = query_offset[slot]; k < query_offset[slot + 1]; ++k) {
        const Stencil st = locate(Eigen::Map<const Eigen::VectorXd>(belief.data() + k * dim, dim));
        for (int j = 0; j < st.count; ++j) {
          if (st.weight[j] == 0.0) continue;
          index.push_back(st.index[j]);
          coef.push_back(mass[k] * st.weight[j]);
        }
      }
      offset.push_back(index.size());
    }
  }

  double q(std::size_t slot, const std::vector<double>& V) const {
    double acc = 0.0;
    for (std::size_t e = offset[slot]; e < offset[slot + 1]; ++e) acc += coef[e] * V[index[e]];
    return cost[slot] + discount * acc;
  }

  // Writes min_u Q into out and, when requested, the argmin and all Q values.
  void apply(const std::vector<double>& V, std::vector<double>& out, std::vector<int>* argmin,
             std::vector<double>* qs, int workers) const {
    parallel_for(points, workers, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        double best = std::numeric_limits<double>::infinity();
        int best_u = 1;
        for (int u = 1; u <= actions; ++u) {
          const std::size_t slot = i * actions + u - 1;
          const double val = q(slot, V);
          if (qs) (*qs)[slot] = val;
          if (val < best) {
            best = val;
            best_u = u;
          }
        }
        out[i] = best;
        if (argmin) (*argmin)[i] = best_u;
      }
    });
  }
};

// `relaxed` selects the orthant route: the continuation term is evaluated as
// W(B_y P' pi) = |B_y P' pi|_1 V(normalized) without forming T and sigma
// separately. Both routes produce the same operator up to round-off.
BackupOperator build_operator(const PomdpModel& model, const SimplexGrid& grid, bool relaxed) {
  BackupOperator op;
  op.points = grid.size();
  op.actions = model.num_actions();
  op.dim = grid.num_states();
  op.discount = model.discount;
  op.cost.resize(op.points * op.actions);
  op.query_offset.reserve(op.points * op.actions + 1);
  op.query_offset.push_back(0);
  const auto add = [&](double m, const Eigen::VectorXd& next) {
    op.mass.push_back(m);
    op.belief.insert(op.belief.end(), next.data(), next.data() + next.size());
  };
  for (std::size_t i = 0; i < op.points; ++i) {
    const Eigen::VectorXd pi = grid.point(i);
    for (int u = 1; u <= op.actions; ++u) {
      op.cost[i * op.actions + u - 1] = stage_cost(model, pi, u);
      if (!stop_action(model, u)) {
        for (int y = 1; y <= model.num_observations(u); ++y) {
          if (relaxed) {
            const RelaxedBelief next = relaxed_update(model, RelaxedBelief(pi), y, u);
            const double m = next.mass();
            if (m > 0.0) add(m, next.weights() / m);
          } else {
            const Eigen::VectorXd w = unnormalized_update(model, pi, y, u);
            const double m = w.sum();
            if (m > kZeroLikelihood) add(m, w / m);
          }
        }
      }
      op.query_offset.push_back(op.mass.size());
    }
  }
  op.bind([&](const auto& b) { return grid.locate(b); });
  return op;
}

bool use_mesh(const SolverOptions& opts, const SimplexGrid& grid) {
  switch (opts.interpolation) {
    case Interpolation::freudenthal: return false;
    case Interpolation::concave_mesh:
      if (grid.num_states() != 3)
        throw PreconditionFailed("concave mesh interpolation needs a three-state grid");
      return true;
    default: return grid.num_states() == 3;
  }
}

double flip_tolerance(const std::vector<double>& V) {
  double m = 1.0;
  for (double v : V) m = std::max(m, std::abs(v));
  return 1e-13 * m;
}

// Brings the mesh in line with V and rebinds the operator when it changed.
void refresh(BackupOperator& op, LatticeMesh* mesh, const std::vector<double>& V) {
  if (!mesh) return;
  if (mesh->make_concave(V, flip_tolerance(V)) > 0)
    op.bind([&](const auto& b) { return mesh->locate(b); });
}

struct IterationOutcome {
  std::vector<double> values;
  std::vector<double> changes;
  int iterations = 0;
  bool converged = false;
  double final_change = 0.0;
};

IterationOutcome iterate(BackupOperator& op, LatticeMesh* mesh, const SolverOptions& opts) {
  IterationOutcome r;
  std::vector<double> V(op.points, 0.0);
  std::vector<double> next(op.points, 0.0);
  const double rho = op.discount;
  for (int it = 1; it <= opts.max_iters; ++it) {
    refresh(op, mesh, V);
    op.apply(V, next, nullptr, nullptr, opts.workers);
    double change = 0.0;
    for (std::size_t i = 0; i < op.points; ++i) change = std::max(change, std::abs(next[i] - V[i]));
    V.swap(next);
    r.changes.push_back(change);
    r.iterations = it;
    r.final_change = change;
    // For rho < 1 the remaining error is at most rho * change / (1 - rho),
    // which also certifies the myopic case rho = 0 after one sweep.
    if (change < opts.tol || (rho < 1.0 && rho * change < opts.tol * (1.0 - rho))) {
      r.converged = true;
      break;
    }
  }
  r.values = std::move(V);
  refresh(op, mesh, r.values);
  return r;
}

std::optional<double> threshold_if_single_switch(const Policy& policy) {
  if (policy.grid().num_states() != 2) return std::nullopt;
  return extract_threshold(policy).threshold;
}

SolveResult finish(const PomdpModel& model, const GridPtr& grid, const BackupOperator& op,
                   IterationOutcome&& run, MeshPtr mesh, const SolverOptions& opts) {
  std::vector<double> scratch(op.points);
  std::vector<int> actions(op.points);
  std::vector<double> q(op.points * op.actions);
  op.apply(run.values, scratch, &actions, &q, opts.workers);

  Policy policy(grid, actions);
  if (model.kind == ModelKind::stopping_time) {
    if (auto t = threshold_if_single_switch(policy)) policy = Policy(grid, actions, t);
  }
  SolveResult out{ValueFunction(grid, std::move(run.values), std::move(mesh)),
                  std::move(policy),
                  std::move(q),
                  std::move(run.changes),
                  op.actions,
                  run.iterations,
                  run.converged,
                  run.final_change};
  return out;
}

SolveResult run_solver(const PomdpModel& model, const GridPtr& grid, const SolverOptions& opts) {
  BackupOperator op = build_operator(model, *grid, false);
  std::shared_ptr<LatticeMesh> mesh;
  if (use_mesh(opts, *grid)) mesh = std::make_shared<LatticeMesh>(grid);
  IterationOutcome run = iterate(op, mesh.get(), opts);
  return finish(model, grid, op, std::move(run), mesh, opts);
}

void check_grid(const PomdpModel& model, const GridPtr& grid) {
  if (!grid || grid->num_states() != model.num_states())
    throw DimensionMismatch("grid dimension does not match the model's number of states");
}

}  // namespace

BackupResult bellman_backup(const PomdpModel& model, const ValueFunction& V, const Belief& pi) {
  BackupResult r;
  const int U = model.num_actions();
  r.q.resize(U);
  r.value = std::numeric_limits<double>::infinity();
  for (int u = 1; u <= U; ++u) {
    double q = stage_cost(model, pi.probs(), u);
    if (!stop_action(model, u)) {
      double continuation = 0.0;
      for (int y = 1; y <= model.num_observations(u); ++y) {
        const Eigen::VectorXd w = unnormalized_update(model, pi.probs(), y, u);
        const double sigma = w.sum();
        if (!(sigma > kZeroLikelihood)) continue;
        continuation += V(w / sigma) * sigma;
      }
      q += model.discount * continuation;
    }
    r.q[u - 1] = q;
    if (q < r.value) {
      r.value = q;
      r.action = u;
    }
  }
  return r;
}

SolveResult solve_discounted(const PomdpModel& model, const GridPtr& grid,
                             const SolverOptions& opts) {
  if (opts.validate) require_valid(model);
  check_grid(model, grid);
  if (model.kind != ModelKind::general_discounted)
    throw PreconditionFailed("solve_discounted: model is not general_discounted");
  if (!(model.discount < 1.0)) throw PreconditionFailed("solve_discounted: discount must be < 1");
  return run_solver(model, grid, opts);
}

SolveResult solve_stopping(const PomdpModel& model, const GridPtr& grid,
                           const SolverOptions& opts) {
  if (opts.validate) require_valid(model);
  check_grid(model, grid);
  if (model.kind != ModelKind::stopping_time)
    throw PreconditionFailed("solve_stopping: model is not stopping_time");
  return run_solver(model, grid, opts);
}

SolveResult solve(const PomdpModel& model, const GridPtr& grid, const SolverOptions& opts) {
  return model.kind == ModelKind::stopping_time ? solve_stopping(model, grid, opts)
                                                : solve_discounted(model, grid, opts);
}

RelaxedSolveResult solve_relaxed(const PomdpModel& model, const GridPtr& grid,
                                 const SolverOptions& opts) {
  if (opts.validate) require_valid(model);
  check_grid(model, grid);
  if (model.nonlinear_cost.family != CostFamily::none)
    throw PreconditionFailed("solve_relaxed: only linear-cost models are supported (family is " +
                             to_string(model.nonlinear_cost.family) + ")");
  if (model.kind == ModelKind::general_discounted && !(model.discount < 1.0))
    throw PreconditionFailed("solve_relaxed: discount must be < 1");
  BackupOperator op = build_operator(model, *grid, true);
  std::shared_ptr<LatticeMesh> mesh;
  if (use_mesh(opts, *grid)) mesh = std::make_shared<LatticeMesh>(grid);
  IterationOutcome run = iterate(op, mesh.get(), opts);

  std::vector<double> scratch(op.points);
  std::vector<int> actions(op.points);
  op.apply(run.values, scratch, &actions, nullptr, opts.workers);
  return RelaxedSolveResult{RelaxedValueFunction(ValueFunction(grid, std::move(run.values), mesh)),
                            Policy(grid, std::move(actions)),
                            std::move(run.changes),
                            run.iterations,
                            run.converged,
                            run.final_change};
}

BackupResult relaxed_backup(const PomdpModel& model, const RelaxedValueFunction& W,
                            const Eigen::VectorXd& alpha) {
  const RelaxedBelief a(alpha);
  BackupResult r;
  const int U = model.num_actions();
  r.q.resize(U);
  r.value = std::numeric_limits<double>::infinity();
  for (int u = 1; u <= U; ++u) {
    double q = model.c(u).dot(alpha);
    if (!stop_action(model, u)) {
      double continuation = 0.0;
      for (int y = 1; y <= model.num_observations(u); ++y)
        continuation += W(relaxed_update(model, a, y, u).weights());
      q += model.discount * continuation;
    }
    r.q[u - 1] = q;
    if (q < r.value) {
      r.value = q;
      r.action = u;
    }
  }
  return r;
}

ThresholdExtraction extract_threshold(const Policy& policy) {
  ThresholdExtraction r;
  const auto& grid = policy.grid();
  if (grid.num_states() != 2) {
    r.diagnostic = "threshold extraction needs a two-state grid";
    return r;
  }
  const auto& a = policy.actions();
  std::size_t last_stop = 0;
  bool rising = true;
  for (std::size_t k = 1; k < a.size(); ++k) {
    if (a[k] != a[k - 1]) {
      ++r.switches;
      if (!(a[k - 1] == 1 && a[k] == 2)) rising = false;
      last_stop = k - 1;
    }
  }
  if (r.switches == 1 && rising) {
    r.threshold = (static_cast<double>(last_stop) + 0.5) / grid.resolution();
  } else {
    r.diagnostic = std::to_string(r.switches) + " switch(es) along pi(2)" +
                   (rising ? "" : ", not all from stop to continue");
  }
  return r;
}

}  // namespace pomdpcs
