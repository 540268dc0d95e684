#include "pomdpcs/filter.hpp"

#include <string>
#include <vector>

#include "pomdpcs/errors.hpp"

namespace pomdpcs {

namespace {

void check_indices(const PomdpModel& model, int y, int u) {
  if (u < 1 || u > model.num_actions())
    throw std::out_of_range("action " + std::to_string(u) + " outside 1.." +
                            std::to_string(model.num_actions()));
  if (y < 1 || y > model.num_observations(u))
    throw std::out_of_range("observation " + std::to_string(y) + " outside 1.." +
                            std::to_string(model.num_observations(u)));
}

}  // namespace

Eigen::VectorXd unnormalized_update(const PomdpModel& model, const Eigen::VectorXd& pi, int y,
                                    int u) {
  check_indices(model, y, u);
  return model.B(u).col(y - 1).cwiseProduct(model.P(u).transpose() * pi);
}

FilterStep filter_update(const PomdpModel& model, const Belief& pi, int y, int u) {
  const Eigen::VectorXd w = unnormalized_update(model, pi.probs(), y, u);
  const double sigma = w.sum();
  if (!(sigma > kZeroLikelihood))
    throw ZeroLikelihood("observation " + std::to_string(y) + " under action " +
                         std::to_string(u) + " has likelihood " + std::to_string(sigma));
  return FilterStep{Belief::normalized(w), sigma};
}

RelaxedBelief relaxed_update(const PomdpModel& model, const RelaxedBelief& alpha, int y, int u) {
  return RelaxedBelief::allow_zero(unnormalized_update(model, alpha.weights(), y, u));
}

Eigen::VectorXd observation_likelihoods(const PomdpModel& model, const Eigen::VectorXd& pi,
                                        int u) {
  return model.B(u).transpose() * (model.P(u).transpose() * pi);
}

Belief exact_posterior_oracle(const PomdpModel& model, const Belief& initial,
                              std::span<const ObservationStep> steps) {
  if (steps.size() > static_cast<std::size_t>(kMaxOracleSteps))
    throw PreconditionFailed("exact_posterior_oracle: sequence length " +
                             std::to_string(steps.size()) + " exceeds " +
                             std::to_string(kMaxOracleSteps));
  for (const auto& s : steps) check_indices(model, s.y, s.u);

  const int X = model.num_states();
  const std::size_t n = steps.size();
  // Odometer over paths (x_0, ..., x_n).
  std::vector<int> path(n + 1, 0);
  Eigen::VectorXd joint = Eigen::VectorXd::Zero(X);
  while (true) {
    double p = initial.probs()(path[0]);
    for (std::size_t k = 0; k < n && p > 0.0; ++k) {
      const int u = steps[k].u;
      p *= model.P(u)(path[k], path[k + 1]) * model.B(u)(path[k + 1], steps[k].y - 1);
    }
    joint(path[n]) += p;

    std::size_t pos = 0;
    while (pos <= n && ++path[pos] == X) path[pos++] = 0;
    if (pos > n) break;
  }
  if (!(joint.sum() > 0.0))
    throw ZeroLikelihood("exact_posterior_oracle: observation sequence has zero probability");
  return Belief::normalized(joint);
}

}  // namespace pomdpcs
