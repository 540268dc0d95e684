#include "pomdpcs/costs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pomdpcs/errors.hpp"
#include "pomdpcs/model.hpp"
#include "pomdpcs/rng.hpp"

namespace pomdpcs {

std::string to_string(CostFamily family) {
  switch (family) {
    case CostFamily::none: return "none";
    case CostFamily::piecewise_linear: return "piecewise_linear";
    case CostFamily::mean_square: return "mean_square";
    case CostFamily::l1: return "l1";
    case CostFamily::linf: return "linf";
    case CostFamily::entropy: return "entropy";
  }
  return "none";
}

CostFamily cost_family_from_string(const std::string& name) {
  for (auto f : {CostFamily::none, CostFamily::piecewise_linear, CostFamily::mean_square,
                 CostFamily::l1, CostFamily::linf, CostFamily::entropy})
    if (to_string(f) == name) return f;
  throw InvalidModel("nonlinear_cost.family: unknown value '" + name + "'");
}

namespace {

// Missing per-action weights default to alpha = 1, beta = 0.
double alpha_of(const NonlinearCostSpec& spec, int u) {
  return spec.alpha.empty() ? 1.0 : spec.alpha.at(u - 1);
}

double beta_of(const NonlinearCostSpec& spec, int u) {
  return spec.beta.empty() ? 0.0 : spec.beta.at(u - 1);
}

// d(e_i, pi) as a function of ||e_i - pi||_inf = 1 - pi(i). The middle band is
// closed at both ends, which keeps D continuous for two states. Distances
// within kBreakpointSlack of a breakpoint count as on it, so lattice points
// such as [0.8, 0.2] land in the middle band despite 1 - 0.8 < 0.2.
constexpr double kBreakpointSlack = 1e-12;

double piecewise_level(double distance, double epsilon) {
  if (distance < epsilon - kBreakpointSlack) return 0.0;
  if (distance <= 1.0 - epsilon + kBreakpointSlack) return epsilon;
  return 1.0;
}

double xlog2x(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }

}  // namespace

bool NonlinearCostSpec::vanishes_for(int u) const {
  if (family == CostFamily::none) return true;
  return alpha_of(*this, u) == 0.0 && beta_of(*this, u) == 0.0;
}

std::vector<std::string> validate_cost_spec(const NonlinearCostSpec& spec, int num_states,
                                            int num_actions) {
  std::vector<std::string> out;
  if (spec.family == CostFamily::none) return out;
  const auto check_weights = [&](const std::vector<double>& w, const char* name) {
    if (w.empty()) return;
    if (static_cast<int>(w.size()) != num_actions) {
      out.push_back(std::string("nonlinear_cost.") + name + ": expected " +
                    std::to_string(num_actions) + " entries, got " + std::to_string(w.size()));
      return;
    }
    for (std::size_t u = 0; u < w.size(); ++u) {
      if (!std::isfinite(w[u]) || w[u] < 0.0)
        out.push_back(std::string("nonlinear_cost.") + name + " action " +
                      std::to_string(u + 1) + ": " + std::to_string(w[u]) + " is negative");
    }
  };
  check_weights(spec.alpha, "alpha");
  check_weights(spec.beta, "beta");

  if (spec.family == CostFamily::piecewise_linear) {
    if (!(spec.epsilon >= 0.0 && spec.epsilon <= 0.5))
      out.push_back("nonlinear_cost.epsilon: " + std::to_string(spec.epsilon) +
                    " outside [0, 0.5]");
  }
  if (spec.family == CostFamily::mean_square) {
    const auto& M = spec.weight;
    if (M.rows() != num_states || M.cols() != num_states) {
      out.push_back("nonlinear_cost.weight_matrix: expected " + std::to_string(num_states) +
                    "x" + std::to_string(num_states));
    } else {
      const double asym = (M - M.transpose()).cwiseAbs().maxCoeff();
      if (asym > 1e-12) {
        out.push_back("nonlinear_cost.weight_matrix: not symmetric (max asymmetry " +
                      std::to_string(asym) + ")");
      } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M, Eigen::EigenvaluesOnly);
        const double lo = eig.eigenvalues().minCoeff();
        if (lo < -1e-10)
          out.push_back("nonlinear_cost.weight_matrix: eigenvalue " + std::to_string(lo) +
                        " < 0 (not positive semidefinite)");
      }
    }
  }
  return out;
}

double performance_loss(const NonlinearCostSpec& spec, const Eigen::VectorXd& pi, int u) {
  const double a = alpha_of(spec, u);
  const double b = beta_of(spec, u);
  switch (spec.family) {
    case CostFamily::none:
      return 0.0;
    case CostFamily::piecewise_linear: {
      double total = 0.0;
      for (Eigen::Index i = 0; i < pi.size(); ++i)
        total += piecewise_level(1.0 - pi(i), spec.epsilon) * pi(i);
      return a * total + b;
    }
    case CostFamily::mean_square:
      return a * (spec.weight.diagonal().dot(pi) - pi.dot(spec.weight * pi)) + b;
    case CostFamily::l1:
      return a * 2.0 * (1.0 - pi.squaredNorm()) + b;
    case CostFamily::linf:
      return a * (1.0 - pi.squaredNorm()) + b;
    case CostFamily::entropy: {
      double h = 0.0;
      for (Eigen::Index i = 0; i < pi.size(); ++i) h -= xlog2x(pi(i));
      return a * h + b;
    }
  }
  return 0.0;
}

double performance_loss_bound(const NonlinearCostSpec& spec, int num_states, int u) {
  const double a = alpha_of(spec, u);
  const double b = beta_of(spec, u);
  switch (spec.family) {
    case CostFamily::none: return 0.0;
    case CostFamily::piecewise_linear: return a + b;
    case CostFamily::mean_square:
      return a * std::max(0.0, spec.weight.diagonal().maxCoeff()) + b;
    case CostFamily::l1: return 2.0 * a + b;
    case CostFamily::linf: return a + b;
    case CostFamily::entropy: return a * std::log2(static_cast<double>(num_states)) + b;
  }
  return 0.0;
}

double instantaneous_cost(const PomdpModel& model, const Eigen::VectorXd& pi, int u) {
  return model.c(u).dot(pi) + performance_loss(model.nonlinear_cost, pi, u);
}

double instantaneous_cost_bound(const PomdpModel& model) {
  double bound = 0.0;
  for (int u = 1; u <= model.num_actions(); ++u) {
    const double linear = model.c(u).cwiseAbs().maxCoeff();
    bound = std::max(bound, linear + performance_loss_bound(model.nonlinear_cost,
                                                            model.num_states(), u));
  }
  return bound;
}

ConcavityProbeReport concavity_probe(const NonlinearCostSpec& spec, int num_states, int u,
                                     int num_trials, double tolerance, std::uint64_t seed) {
  if (num_trials < 1) throw PreconditionFailed("concavity_probe: num_trials must be >= 1");
  Rng rng(seed);
  ConcavityProbeReport report;
  report.tolerance = tolerance;
  report.trials = num_trials;
  report.worst_violation = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < num_trials; ++t) {
    Eigen::VectorXd p1 = rng.simplex_point(num_states);
    Eigen::VectorXd p2 = rng.simplex_point(num_states);
    // Every fourth trial pins one end to a vertex so faces get exercised too.
    if (t % 4 == 3) p2 = Eigen::VectorXd::Unit(num_states, rng.index(num_states));
    const double lambda = rng.uniform();
    const Eigen::VectorXd mid = lambda * p1 + (1.0 - lambda) * p2;
    const double gap = lambda * performance_loss(spec, p1, u) +
                       (1.0 - lambda) * performance_loss(spec, p2, u) -
                       performance_loss(spec, mid, u);
    if (gap > report.worst_violation) {
      report.worst_violation = gap;
      report.witness_first = p1;
      report.witness_second = p2;
      report.witness_lambda = lambda;
    }
  }
  report.concave = report.worst_violation <= tolerance;
  return report;
}

}  // namespace pomdpcs
