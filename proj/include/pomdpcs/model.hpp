#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pomdpcs/costs.hpp"

namespace pomdpcs {

/// Row sums of every stochastic matrix must be within this of one.
inline constexpr double kStochasticTolerance = 1e-12;

enum class ModelKind { general_discounted, stopping_time };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

/// A finite POMDP with belief-dependent costs.
///
/// States, actions and observations are 1-based in every function taking an
/// index. The containers below are ordinary 0-based storage: action u lives
/// at `transition[u - 1]`. For stopping-time models action 1 is "stop" and
/// action 2 is "continue"; the stop action's dynamics are never used.
struct PomdpModel {
  std::string name;
  ModelKind kind = ModelKind::general_discounted;
  double discount = 0.0;
  std::vector<Eigen::MatrixXd> transition;   // X x X per action
  std::vector<Eigen::MatrixXd> observation;  // X x Y(u) per action
  std::vector<Eigen::VectorXd> linear_cost;  // length X per action
  NonlinearCostSpec nonlinear_cost;
  std::optional<Eigen::VectorXd> initial_belief;

  int num_states() const;
  int num_actions() const;
  int num_observations(int u) const;

  const Eigen::MatrixXd& P(int u) const { return transition.at(u - 1); }
  const Eigen::MatrixXd& B(int u) const { return observation.at(u - 1); }
  const Eigen::VectorXd& c(int u) const { return linear_cost.at(u - 1); }
};

/// Every violated invariant, each naming the matrix, row and defect.
std::vector<std::string> validate_model(const PomdpModel& model);

/// Throws InvalidModel listing every violation.
void require_valid(const PomdpModel& model);

/// A point of the probability simplex.
class Belief {
 public:
  /// Throws InvalidModel unless entries are >= 0 and sum to 1 within 1e-12.
  explicit Belief(Eigen::VectorXd probs);

  /// Divides a nonnegative, nonzero vector by its sum.
  static Belief normalized(const Eigen::VectorXd& weights);

  int size() const { return static_cast<int>(probs_.size()); }
  const Eigen::VectorXd& probs() const { return probs_; }
  /// 1-based access.
  double at(int i) const { return probs_(i - 1); }

 private:
  struct Trusted {};
  Belief(Eigen::VectorXd probs, Trusted) : probs_(std::move(probs)) {}
  Eigen::VectorXd probs_;
};

/// A nonnegative point of the positive orthant; not normalized.
class RelaxedBelief {
 public:
  /// Throws InvalidModel unless entries are >= 0 and at least one is > 0.
  explicit RelaxedBelief(Eigen::VectorXd weights);
  explicit RelaxedBelief(const Belief& belief) : weights_(belief.probs()) {}

  /// Accepts the zero vector, which the relaxed update may legitimately
  /// produce for an impossible observation.
  static RelaxedBelief allow_zero(Eigen::VectorXd weights);

  int size() const { return static_cast<int>(weights_.size()); }
  const Eigen::VectorXd& weights() const { return weights_; }
  double mass() const { return weights_.sum(); }
  bool is_zero() const { return weights_.isZero(0.0); }

 private:
  RelaxedBelief() = default;
  Eigen::VectorXd weights_;
};

/// e_i for a 1-based state i.
Belief unit_belief(int i, int num_states);
Belief uniform_belief(int num_states);

/// Model initial belief if present, otherwise the uniform belief.
Belief initial_belief_or_uniform(const PomdpModel& model);

}  // namespace pomdpcs
