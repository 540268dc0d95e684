#pragma once

#include <span>

#include <Eigen/Dense>

#include "pomdpcs/model.hpp"

namespace pomdpcs {

/// Likelihoods at or below this are treated as impossible observations.
inline constexpr double kZeroLikelihood = 1e-300;

struct FilterStep {
  Belief posterior;
  double likelihood;  // sigma(pi, y, u)
};

/// B_y(u) P(u)' pi without normalization. Indices are 1-based.
Eigen::VectorXd unnormalized_update(const PomdpModel& model, const Eigen::VectorXd& pi, int y,
                                    int u);

/// HMM filter step T(pi, y, u) with its normalizer sigma(pi, y, u).
/// Throws ZeroLikelihood when sigma <= kZeroLikelihood.
FilterStep filter_update(const PomdpModel& model, const Belief& pi, int y, int u);

/// Unnormalized update on the positive orthant; may return the zero vector.
RelaxedBelief relaxed_update(const PomdpModel& model, const RelaxedBelief& alpha, int y, int u);

/// sigma(pi, y, u) for every y of action u (0-based vector over y).
Eigen::VectorXd observation_likelihoods(const PomdpModel& model, const Eigen::VectorXd& pi,
                                        int u);

struct ObservationStep {
  int y;  // 1-based observation
  int u;  // 1-based action taken before the observation
};

inline constexpr int kMaxOracleSteps = 12;

/// Posterior of the final state obtained by summing the joint probability of
/// every state path. Exponential in the sequence length; intended as an
/// independent check of the recursive filter.
Belief exact_posterior_oracle(const PomdpModel& model, const Belief& initial,
                              std::span<const ObservationStep> steps);

}  // namespace pomdpcs
