#include "pomdpcs/model.hpp"

#include <cmath>
#include <sstream>

#include "pomdpcs/errors.hpp"

namespace pomdpcs {

std::string to_string(ModelKind kind) {
  return kind == ModelKind::stopping_time ? "stopping_time" : "general_discounted";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "stopping_time") return ModelKind::stopping_time;
  if (name == "general_discounted") return ModelKind::general_discounted;
  throw InvalidModel("model_kind: unknown value '" + name + "'");
}

int PomdpModel::num_states() const {
  return transition.empty() ? 0 : static_cast<int>(transition.front().rows());
}

int PomdpModel::num_actions() const { return static_cast<int>(transition.size()); }

int PomdpModel::num_observations(int u) const {
  return static_cast<int>(observation.at(u - 1).cols());
}

namespace {

void check_stochastic(const Eigen::MatrixXd& m, const std::string& label,
                      std::vector<std::string>& out) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (!std::isfinite(m(r, c)) || m(r, c) < 0.0) {
        std::ostringstream os;
        os << label << " row " << r + 1 << " column " << c + 1 << ": entry " << m(r, c)
           << " is negative or not finite";
        out.push_back(os.str());
      }
    }
    const double sum = m.row(r).sum();
    if (!(std::abs(sum - 1.0) <= kStochasticTolerance)) {
      std::ostringstream os;
      os.precision(12);
      os << label << " row " << r + 1 << ": row sum " << sum << " != 1 (defect "
         << std::abs(sum - 1.0) << ")";
      out.push_back(os.str());
    }
  }
}

}  // namespace

std::vector<std::string> validate_model(const PomdpModel& model) {
  std::vector<std::string> out;
  const int X = model.num_states();
  const int U = model.num_actions();
  if (X < 2) out.push_back("num_states: need at least 2 states, got " + std::to_string(X));
  if (U < 1) out.push_back("num_actions: need at least 1 action");
  if (static_cast<int>(model.observation.size()) != U)
    out.push_back("observation: expected " + std::to_string(U) + " matrices, got " +
                  std::to_string(model.observation.size()));
  if (static_cast<int>(model.linear_cost.size()) != U)
    out.push_back("linear_cost: expected " + std::to_string(U) + " vectors, got " +
                  std::to_string(model.linear_cost.size()));
  if (!out.empty()) return out;

  for (int u = 1; u <= U; ++u) {
    const std::string tag = "(action " + std::to_string(u) + ")";
    const auto& P = model.P(u);
    if (P.rows() != X || P.cols() != X) {
      out.push_back("transition " + tag + ": expected " + std::to_string(X) + "x" +
                    std::to_string(X));
    } else {
      check_stochastic(P, "transition " + tag, out);
    }
    const auto& B = model.B(u);
    if (B.rows() != X || B.cols() < 1) {
      out.push_back("observation " + tag + ": expected " + std::to_string(X) +
                    " rows and at least one column");
    } else {
      check_stochastic(B, "observation " + tag, out);
    }
    const auto& c = model.c(u);
    if (c.size() != X) {
      out.push_back("linear_cost " + tag + ": expected length " + std::to_string(X));
    } else if (!c.allFinite()) {
      out.push_back("linear_cost " + tag + ": non-finite entry");
    }
  }

  if (!(model.discount >= 0.0 && model.discount <= 1.0)) {
    out.push_back("discount: " + std::to_string(model.discount) + " outside [0, 1]");
  } else if (model.discount >= 1.0 && model.kind == ModelKind::general_discounted) {
    out.push_back("discount: 1 is permitted only for stopping_time models");
  }

  if (model.kind == ModelKind::stopping_time) {
    if (U != 2) {
      out.push_back("model_kind: stopping_time requires exactly 2 actions (1 = stop, 2 = continue)");
    } else if (!model.nonlinear_cost.vanishes_for(1)) {
      out.push_back("nonlinear_cost: the stop action (1) must have zero performance loss");
    }
  }

  for (auto& v : validate_cost_spec(model.nonlinear_cost, X, U)) out.push_back(std::move(v));

  if (model.initial_belief) {
    const auto& b = *model.initial_belief;
    if (b.size() != X || (b.array() < 0.0).any() ||
        std::abs(b.sum() - 1.0) > kStochasticTolerance)
      out.push_back("initial_belief: not a probability vector of length " + std::to_string(X));
  }
  return out;
}

void require_valid(const PomdpModel& model) {
  const auto report = validate_model(model);
  if (report.empty()) return;
  std::string msg = "invalid model";
  if (!model.name.empty()) msg += " '" + model.name + "'";
  for (const auto& v : report) msg += "\n  " + v;
  throw InvalidModel(msg);
}

Belief::Belief(Eigen::VectorXd probs) : probs_(std::move(probs)) {
  if (probs_.size() < 1) throw InvalidModel("belief: empty vector");
  if ((probs_.array() < 0.0).any() || !probs_.allFinite())
    throw InvalidModel("belief: negative or non-finite entry");
  if (std::abs(probs_.sum() - 1.0) > kStochasticTolerance)
    throw InvalidModel("belief: entries sum to " + std::to_string(probs_.sum()));
}

Belief Belief::normalized(const Eigen::VectorXd& weights) {
  if ((weights.array() < 0.0).any() || !weights.allFinite())
    throw InvalidModel("belief: negative or non-finite weight");
  const double total = weights.sum();
  if (!(total > 0.0)) throw InvalidModel("belief: weights sum to zero");
  Eigen::VectorXd p = weights / total;
  // A second pass keeps the sum within a few ulps of one.
  p /= p.sum();
  return Belief(std::move(p), Trusted{});
}

RelaxedBelief::RelaxedBelief(Eigen::VectorXd weights) : weights_(std::move(weights)) {
  if ((weights_.array() < 0.0).any() || !weights_.allFinite())
    throw InvalidModel("relaxed belief: negative or non-finite entry");
  if (!(weights_.maxCoeff() > 0.0)) throw InvalidModel("relaxed belief: all entries zero");
}

RelaxedBelief RelaxedBelief::allow_zero(Eigen::VectorXd weights) {
  RelaxedBelief r;
  r.weights_ = std::move(weights);
  return r;
}

Belief unit_belief(int i, int num_states) {
  if (num_states < 1) throw std::out_of_range("unit_belief: need at least one state");
  if (i < 1 || i > num_states)
    throw std::out_of_range("unit_belief: state " + std::to_string(i) + " outside 1.." +
                            std::to_string(num_states));
  Eigen::VectorXd e = Eigen::VectorXd::Zero(num_states);
  e(i - 1) = 1.0;
  return Belief(std::move(e));
}

Belief uniform_belief(int num_states) {
  if (num_states < 1) throw std::out_of_range("uniform_belief: need at least one state");
  return Belief::normalized(Eigen::VectorXd::Ones(num_states));
}

Belief initial_belief_or_uniform(const PomdpModel& model) {
  if (model.initial_belief) return Belief(*model.initial_belief);
  return uniform_belief(model.num_states());
}

}  // namespace pomdpcs
