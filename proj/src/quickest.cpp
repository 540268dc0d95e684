#include "pomdpcs/quickest.hpp"

#include <cmath>
#include <tuple>
#include <vector>

#include "pomdpcs/errors.hpp"
#include "pomdpcs/filter.hpp"
#include "pomdpcs/parallel.hpp"

namespace pomdpcs {

PomdpModel build_qd_model(const QdSpec& spec) {
  if (!(spec.delay_weight > 0.0))
    throw InvalidModel("quickest detection: delay weight must be > 0");
  if (!(spec.p22 >= 0.0 && spec.p22 < 1.0))
    throw InvalidModel("quickest detection: P22 must lie in [0, 1) for a finite mean change time");
  if (spec.observation.rows() != 2 || spec.observation.cols() < 1)
    throw InvalidModel("quickest detection: observation matrix must be 2 x Y");

  PomdpModel m;
  m.name = "quickest-detection";
  m.kind = ModelKind::stopping_time;
  m.discount = 1.0;
  Eigen::MatrixXd P(2, 2);
  P << 1.0, 0.0, 1.0 - spec.p22, spec.p22;
  m.transition = {P, P};
  m.observation = {spec.observation, spec.observation};
  m.linear_cost = {Eigen::Vector2d(0.0, 1.0), Eigen::Vector2d(spec.delay_weight, 0.0)};
  m.initial_belief = Eigen::Vector2d(0.0, 1.0);

  m.nonlinear_cost = spec.continue_cost;
  if (m.nonlinear_cost.family != CostFamily::none) {
    const auto widen = [](const std::vector<double>& w, double fallback) {
      const double v = w.empty() ? fallback : w.back();
      return std::vector<double>{0.0, v};
    };
    m.nonlinear_cost.alpha = widen(spec.continue_cost.alpha, 1.0);
    m.nonlinear_cost.beta = widen(spec.continue_cost.beta, 0.0);
  }
  require_valid(m);
  return m;
}

QdSpec qd_spec_from_model(const PomdpModel& model) {
  require_valid(model);
  const auto fail = [](const std::string& what) {
    throw InvalidModel("not a quickest-detection model: " + what);
  };
  if (model.kind != ModelKind::stopping_time) fail("model_kind must be stopping_time");
  if (model.num_states() != 2) fail("needs two states");
  if (model.discount != 1.0) fail("discount must be 1");
  const auto& P = model.P(2);
  if (P(0, 0) != 1.0 || P(0, 1) != 0.0) fail("state 1 must be absorbing");
  if (model.c(1) != Eigen::Vector2d(0.0, 1.0)) fail("stop cost must be [0, 1]");
  if (model.c(2)(1) != 0.0 || !(model.c(2)(0) > 0.0)) fail("continue cost must be [d, 0] with d > 0");
  if (model.initial_belief && *model.initial_belief != Eigen::Vector2d(0.0, 1.0))
    fail("initial belief must be [0, 1]");

  QdSpec spec;
  spec.p22 = P(1, 1);
  spec.delay_weight = model.c(2)(0);
  spec.observation = model.B(2);
  spec.continue_cost = model.nonlinear_cost;
  if (spec.continue_cost.family != CostFamily::none) {
    if (!spec.continue_cost.alpha.empty()) spec.continue_cost.alpha = {spec.continue_cost.alpha[1]};
    if (!spec.continue_cost.beta.empty()) spec.continue_cost.beta = {spec.continue_cost.beta[1]};
  }
  return spec;
}

QdThresholdResult qd_threshold(const QdSpec& spec, int resolution, const SolverOptions& opts) {
  const PomdpModel model = build_qd_model(spec);
  auto solved = solve_stopping(model, SimplexGrid::build(2, resolution), opts);
  const auto extraction = extract_threshold(solved.policy);
  if (!extraction.threshold)
    throw StructureViolation("quickest detection policy is not a single threshold: " +
                             extraction.diagnostic);
  if (solved.policy.at_point(0) != 1)
    throw StructureViolation("quickest detection policy does not stop at pi(2) = 0");
  QdThresholdResult out{*extraction.threshold, solved.value.values().back(), std::move(solved)};
  return out;
}

int sample_change_time(const QdSpec& spec, Rng& rng, int cap) {
  int k = 0;
  while (k < cap) {
    ++k;
    if (rng.uniform() >= spec.p22) return k;
  }
  return cap;
}

KsEstimate ks_cost_estimate(const QdSpec& spec, double threshold, const KsOptions& opts) {
  if (opts.num_paths < 1) throw PreconditionFailed("ks_cost_estimate: num_paths must be >= 1");
  const PomdpModel model = build_qd_model(spec);
  const auto& P = model.P(2);
  const auto& B = model.B(2);

  struct PathOutcome {
    double delay = 0.0;
    double false_alarm = 0.0;
    double nonlinear = 0.0;
    bool capped = false;
  };
  std::vector<PathOutcome> paths(opts.num_paths);
  parallel_for(paths.size(), opts.workers, [&](std::size_t b, std::size_t e) {
    for (std::size_t p = b; p < e; ++p) {
      Rng rng(derive_seed(opts.seed, p));
      PathOutcome& out = paths[p];
      int x = 1;  // 0-based state: 1 = pre-change
      Eigen::Vector2d pi(0.0, 1.0);
      int k = 0;
      while (true) {
        if (pi(1) < threshold) {
          out.false_alarm = (x == 1) ? 1.0 : 0.0;
          break;
        }
        if (k >= opts.horizon_cap) {
          out.capped = true;
          break;
        }
        if (x == 0) out.delay += 1.0;
        out.nonlinear += performance_loss(model.nonlinear_cost, pi, 2);
        x = rng.categorical(P.row(x));
        const int y = rng.categorical(B.row(x));
        Eigen::Vector2d w = B.col(y).cwiseProduct(P.transpose() * pi);
        const double sigma = w.sum();
        if (sigma > kZeroLikelihood) pi = w / sigma;
        ++k;
      }
    }
  });

  KsEstimate est;
  est.threshold = threshold;
  est.num_paths = opts.num_paths;
  est.seed = opts.seed;
  const double n = static_cast<double>(opts.num_paths);
  auto mean_se = [&](auto&& field) {
    double s = 0.0;
    for (const auto& p : paths) s += field(p);
    const double mean = s / n;
    double ss = 0.0;
    for (const auto& p : paths) ss += (field(p) - mean) * (field(p) - mean);
    const double se = opts.num_paths > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    return std::pair{mean, se};
  };
  const double d = spec.delay_weight;
  std::tie(est.delay_term, est.delay_se) = mean_se([&](const PathOutcome& p) { return d * p.delay; });
  std::tie(est.false_alarm, est.false_alarm_se) =
      mean_se([](const PathOutcome& p) { return p.false_alarm; });
  est.nonlinear_term = mean_se([](const PathOutcome& p) { return p.nonlinear; }).first;
  std::tie(est.total_cost, est.total_se) = mean_se([&](const PathOutcome& p) {
    return d * p.delay + p.false_alarm + p.nonlinear;
  });
  est.ks_cost = est.delay_term + est.false_alarm;
  est.ci_low = est.total_cost - 1.96 * est.total_se;
  est.ci_high = est.total_cost + 1.96 * est.total_se;
  for (const auto& p : paths) est.cap_hits += p.capped ? 1 : 0;
  return est;
}

}  // namespace pomdpcs
