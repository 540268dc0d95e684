#include "pomdpcs/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pomdpcs/errors.hpp"
#include "pomdpcs/filter.hpp"

namespace pomdpcs {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Calls fn(i, j) for all i < j below n, or for `cap` random distinct pairs
// when there are more than that.
template <typename Fn>
void for_pairs(std::size_t n, std::size_t cap, Rng& rng, Fn&& fn) {
  if (n < 2) return;
  const double total = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  if (total <= static_cast<double>(cap)) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) fn(i, j);
    return;
  }
  const int ni = static_cast<int>(n);
  for (std::size_t s = 0; s < cap; ++s) {
    std::size_t i = rng.index(ni), j = rng.index(ni);
    while (j == i) j = rng.index(ni);
    if (i > j) std::swap(i, j);
    fn(i, j);
  }
}

// Grid index of the lattice midpoint of points a and b, if it exists.
std::optional<std::size_t> midpoint(const SimplexGrid& grid, std::size_t a, std::size_t b) {
  const auto ka = grid.lattice(a);
  const auto kb = grid.lattice(b);
  std::array<int, kMaxGridStates> k{};
  for (int i = 0; i < grid.num_states(); ++i) {
    const int s = ka[i] + kb[i];
    if (s % 2 != 0) return std::nullopt;
    k[i] = s / 2;
  }
  return grid.index_of(std::span<const int>(k.data(), grid.num_states()));
}

void finish(OrderCheckReport& r) {
  if (r.worst_violation == kNegInf) r.worst_violation = 0.0;
  r.holds = r.worst_violation <= r.tolerance;
}

}  // namespace

OrderCheckReport verify_concavity(const ValueFunction& V, std::size_t num_trials,
                                  double tolerance, std::uint64_t seed) {
  OrderCheckReport r;
  r.predicate = "concavity";
  r.tolerance = tolerance;
  r.worst_violation = kNegInf;
  const auto& grid = V.grid();
  auto check = [&](std::size_t a, std::size_t b) {
    const auto m = midpoint(grid, a, b);
    if (!m) return;
    ++r.samples;
    const double gap = 0.5 * (V.at_point(a) + V.at_point(b)) - V.at_point(*m);
    if (gap > r.worst_violation) {
      r.worst_violation = gap;
      r.witness.indices = {static_cast<long long>(a), static_cast<long long>(b),
                           static_cast<long long>(*m)};
      r.witness.beliefs = {grid.point(a), grid.point(b)};
      r.witness.note = "grid points (a, b, midpoint), 0-based; (V(a) + V(b)) / 2 > V(mid)";
    }
  };
  const std::size_t n = grid.size();
  Rng rng(seed);
  if (0.5 * static_cast<double>(n) * static_cast<double>(n) <= static_cast<double>(num_trials)) {
    for_pairs(n, num_trials, rng, check);
  } else {
    // Rejection-sample pairs until `num_trials` have a lattice midpoint.
    const int ni = static_cast<int>(n);
    std::size_t attempts = 0;
    while (r.samples < num_trials && attempts < 64 * num_trials) {
      ++attempts;
      const std::size_t a = rng.index(ni), b = rng.index(ni);
      if (a != b) check(a, b);
    }
  }
  finish(r);
  return r;
}

OrderCheckReport verify_stopping_set_convex(const Policy& policy) {
  OrderCheckReport r;
  r.predicate = "stopping_set_convex";
  r.tolerance = 0.0;
  const auto& grid = policy.grid();
  std::vector<std::size_t> stop;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (policy.at_point(i) == 1) stop.push_back(i);
  Rng rng(1);
  double violations = 0.0;
  for_pairs(stop.size(), kMaxPairs, rng, [&](std::size_t p, std::size_t q) {
    const auto m = midpoint(grid, stop[p], stop[q]);
    if (!m) return;
    ++r.samples;
    if (policy.at_point(*m) != 1) {
      if (violations == 0.0) {
        r.witness.indices = {static_cast<long long>(stop[p]), static_cast<long long>(stop[q]),
                             static_cast<long long>(*m)};
        r.witness.beliefs = {grid.point(stop[p]), grid.point(stop[q]), grid.point(*m)};
        r.witness.note = "stop points (a, b) with a continue midpoint, 0-based grid indices";
      }
      violations += 1.0;
    }
  });
  r.worst_violation = violations;
  r.holds = violations == 0.0;
  return r;
}

OrderCheckReport verify_homogeneity(const PomdpModel& model, const RelaxedSolveResult& solved,
                                    const std::vector<double>& kappas, int samples,
                                    std::uint64_t seed) {
  OrderCheckReport r;
  r.predicate = "homogeneity";
  r.tolerance = 1e-10;
  r.worst_violation = kNegInf;
  const auto& W = solved.value;
  const double sup = W.on_simplex().sup_norm();
  const auto& grid = W.on_simplex().grid();
  const int X = model.num_states();

  std::vector<Eigen::VectorXd> alphas;
  Rng rng(seed);
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd a = (s % 5 == 0) ? Eigen::VectorXd(grid.point(rng.index(static_cast<int>(grid.size()))))
                                     : rng.simplex_point(X);
    alphas.push_back(a * rng.uniform(0.05, 20.0));
  }
  for (const auto& alpha : alphas) {
    const double base = W(alpha);
    const double base_backup = relaxed_backup(model, W, alpha).value;
    for (double kappa : kappas) {
      if (!(kappa > 0.0)) throw PreconditionFailed("verify_homogeneity: kappa must be > 0");
      const double scale = std::max(1.0, kappa * alpha.sum() * sup);
      const Eigen::VectorXd scaled = kappa * alpha;
      const double e1 = std::abs(W(scaled) - kappa * base) / scale;
      const double e2 = std::abs(relaxed_backup(model, W, scaled).value - kappa * base_backup) /
                        scale;
      r.samples += 2;
      const double e = std::max(e1, e2);
      if (e > r.worst_violation) {
        r.worst_violation = e;
        r.witness.beliefs = {alpha};
        r.witness.note = "relative error at kappa = " + std::to_string(kappa) +
                         (e2 > e1 ? " (relaxed backup)" : " (value extension)");
      }
    }
  }
  finish(r);
  return r;
}

OrderCheckReport verify_homogeneity(const PomdpModel& model, const GridPtr& grid,
                                    const std::vector<double>& kappas, const SolverOptions& opts,
                                    int samples, std::uint64_t seed) {
  return verify_homogeneity(model, solve_relaxed(model, grid, opts), kappas, samples, seed);
}

OrderCheckReport verify_mlr_monotone_value(const ValueFunction& V, double tolerance,
                                           std::size_t pair_cap, std::uint64_t seed) {
  OrderCheckReport r;
  r.predicate = "mlr_monotone_value";
  r.tolerance = tolerance;
  r.worst_violation = kNegInf;
  const auto& grid = V.grid();
  Rng rng(seed);
  auto check = [&](std::size_t hi, std::size_t lo) {
    ++r.samples;
    const double gap = V.at_point(hi) - V.at_point(lo);
    if (gap > r.worst_violation) {
      r.worst_violation = gap;
      r.witness.indices = {static_cast<long long>(hi), static_cast<long long>(lo)};
      r.witness.beliefs = {grid.point(hi), grid.point(lo)};
      r.witness.note = "first belief MLR-dominates the second but has the larger value";
    }
  };
  for_pairs(grid.size(), pair_cap, rng, [&](std::size_t i, std::size_t j) {
    const Eigen::VectorXd a = grid.point(i);
    const Eigen::VectorXd b = grid.point(j);
    if (mlr_geq(a, b)) check(i, j);
    if (mlr_geq(b, a)) check(j, i);
  });
  finish(r);
  return r;
}

std::vector<OrderCheckReport> monotone_assumptions(const PomdpModel& model, int samples,
                                                   std::uint64_t seed) {
  OrderCheckReport a1{"A1_fosd_decreasing_cost", true, kNegInf, 1e-12, 0, {}};
  OrderCheckReport a2{"A2_tp2_transition", true, kNegInf, 1e-12, 0, {}};
  OrderCheckReport a3{"A3_tp2_observation", true, kNegInf, 1e-12, 0, {}};
  auto merge = [](OrderCheckReport& into, const OrderCheckReport& part, int u) {
    into.samples += part.samples;
    if (part.worst_violation > into.worst_violation) {
      into.worst_violation = part.worst_violation;
      into.witness = part.witness;
      into.witness.note = "action " + std::to_string(u) + ": " + part.witness.note;
    }
  };
  for (int u = 1; u <= model.num_actions(); ++u) {
    merge(a1, fosd_decreasing_cost(model, u, samples, 1e-12, derive_seed(seed, u)), u);
    merge(a2, is_tp2(model.P(u)), u);
    merge(a3, is_tp2(model.B(u)), u);
  }
  for (auto* r : {&a1, &a2, &a3}) finish(*r);
  return {a1, a2, a3};
}

PomdpModel random_conjecture_model(Rng& rng) {
  PomdpModel m;
  m.name = "conjecture-probe";
  m.kind = ModelKind::general_discounted;
  m.discount = 0.9;
  for (int u = 0; u < 2; ++u) {
    // Two-state TP2 transition: P11 >= P21.
    double p11 = rng.uniform(), p21 = rng.uniform();
    if (p11 < p21) std::swap(p11, p21);
    Eigen::MatrixXd P(2, 2);
    P << p11, 1.0 - p11, p21, 1.0 - p21;
    m.transition.push_back(P);

    const int Y = 2 + rng.index(2);
    Eigen::MatrixXd B(2, Y);
    do {
      B.row(0) = rng.simplex_point(Y).transpose();
      B.row(1) = rng.simplex_point(Y).transpose();
      if (is_tp2(B).holds) B = B.rowwise().reverse().eval();
    } while (is_tp2(B).holds);
    m.observation.push_back(B);

    double hi = rng.uniform(0.0, 2.0), lo = rng.uniform(0.0, 2.0);
    if (hi < lo) std::swap(hi, lo);
    Eigen::VectorXd c(2);
    c << hi, lo;
    m.linear_cost.push_back(c);
  }
  return m;
}

ConjectureProbeSummary conjecture_probe(const ModelGenerator& generator, int num_models,
                                        int resolution, const SolverOptions& opts,
                                        double relative_tolerance, std::uint64_t seed) {
  ConjectureProbeSummary out;
  for (int i = 0; i < num_models; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    PomdpModel model = generator(rng);
    const auto assumptions = monotone_assumptions(model, 500, derive_seed(seed, 1000 + i));
    if (!assumptions[0].holds || !assumptions[1].holds)
      throw PreconditionFailed("conjecture_probe: generated model " + std::to_string(i) +
                               " violates " + (assumptions[0].holds ? "A2" : "A1"));
    const auto grid = SimplexGrid::build(model.num_states(), resolution);
    const auto solved = solve(model, grid, opts);
    auto report = verify_mlr_monotone_value(solved.value,
                                            relative_tolerance * solved.value.sup_norm());
    report.witness.note = "model " + std::to_string(i) + ": " + report.witness.note;
    if (!report.holds && out.first_counterexample < 0) {
      out.first_counterexample = i;
      out.counterexample = model;
    }
    out.reports.push_back(std::move(report));
    ++out.models_checked;
  }
  out.summary = out.first_counterexample < 0
                    ? "no counterexample in " + std::to_string(out.models_checked) + " models"
                    : "counterexample at model " + std::to_string(out.first_counterexample);
  return out;
}

double expected_continuation(const PomdpModel& model, const ValueFunction& V,
                             const Eigen::VectorXd& pi, int u) {
  double total = 0.0;
  for (int y = 1; y <= model.num_observations(u); ++y) {
    const Eigen::VectorXd w = unnormalized_update(model, pi, y, u);
    const double sigma = w.sum();
    if (!(sigma > kZeroLikelihood)) continue;
    total += V(w / sigma) * sigma;
  }
  return total;
}

MyopicBoundReport verify_myopic_bound(const PomdpModel& model, const SolveResult& solved,
                                      const MyopicBoundOptions& opts) {
  if (model.num_actions() != 2)
    throw PreconditionFailed("verify_myopic_bound: model must have exactly two sensing modes");
  if (model.kind != ModelKind::general_discounted)
    throw PreconditionFailed("verify_myopic_bound: model must be general_discounted");
  if ((model.P(1) - model.P(2)).cwiseAbs().maxCoeff() > 1e-12)
    throw PreconditionFailed("verify_myopic_bound: sensing modes must share one transition matrix");

  MyopicBoundReport out;
  out.factorization = blackwell_factorize(model.B(1), model.B(2));
  if (!out.factorization.dominates)
    throw PreconditionFailed("verify_myopic_bound: B(2) does not Blackwell-dominate B(1) "
                             "(residual " + std::to_string(out.factorization.residual) + ")");

  const auto& V = solved.value;
  const auto& grid = V.grid();
  out.jensen = {"jensen_blackwell", true, kNegInf,
                opts.jensen_relative_tolerance * V.sup_norm(), 0, {}};
  out.q_form = {"myopic_q_form", true, kNegInf, opts.q_tolerance, 0, {}};
  out.policy_order = {"myopic_lower_bound", true, kNegInf, opts.q_tolerance, 0, {}};
  std::size_t action_disagreements = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Eigen::VectorXd pi = grid.point(i);
    const double e1 = expected_continuation(model, V, pi, 1);
    const double e2 = expected_continuation(model, V, pi, 2);
    ++out.jensen.samples;
    if (e2 - e1 > out.jensen.worst_violation) {
      out.jensen.worst_violation = e2 - e1;
      out.jensen.witness.indices = {static_cast<long long>(i)};
      out.jensen.witness.beliefs = {pi};
      out.jensen.witness.note = "continuation with sensor 2 exceeds sensor 1";
    }

    const bool strict = instantaneous_cost(model, pi, 2) <
                        instantaneous_cost(model, pi, 1) - opts.strictness_margin;
    const int myopic = strict ? 2 : 1;
    ++out.policy_order.samples;
    if (!strict) continue;
    ++out.strict_region_points;
    const double gap = solved.q_at(i, 2) - solved.q_at(i, 1);
    ++out.q_form.samples;
    if (solved.policy.at_point(i) < myopic) ++action_disagreements;
    for (auto* r : {&out.q_form, &out.policy_order}) {
      if (gap > r->worst_violation) {
        r->worst_violation = gap;
        r->witness.indices = {static_cast<long long>(i)};
        r->witness.beliefs = {pi};
      }
    }
  }
  out.q_form.witness.note = "Q(pi, 2) - Q(pi, 1) on the region where sensor 2 is myopically cheaper";
  out.policy_order.witness.note = std::to_string(action_disagreements) +
                                  " grid point(s) where the raw argmin is below the myopic action";
  for (auto* r : {&out.jensen, &out.q_form, &out.policy_order}) finish(*r);
  out.holds = out.factorization.dominates && out.jensen.holds && out.q_form.holds &&
              out.policy_order.holds;
  return out;
}

MyopicBoundReport verify_myopic_bound(const PomdpModel& model, const GridPtr& grid,
                                      const SolverOptions& solver,
                                      const MyopicBoundOptions& opts) {
  return verify_myopic_bound(model, solve_discounted(model, grid, solver), opts);
}

}  // namespace pomdpcs
