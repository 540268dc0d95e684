// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pomdpcs/blackwell.hpp"
#include "pomdpcs/cli.hpp"
#include "pomdpcs/costs.hpp"
#include "pomdpcs/filter.hpp"
#include "pomdpcs/order.hpp"
#include "pomdpcs/quickest.hpp"
#include "pomdpcs/simulate.hpp"
#include "pomdpcs/solver.hpp"
#include "pomdpcs/verify.hpp"
#include "support.hpp"

using namespace pomdpcs;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects sub-checks; the first failures are kept for the summary line.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    ok_ = false;
    if (failures_++ < 3) detail_ += (detail_.empty() ? "" : "; ") + what;
  }
  void note(const std::string& s) { notes_ += (notes_.empty() ? "" : "; ") + s; }
  Outcome done() const {
    if (ok_) return {true, notes_};
    return {false, detail_ + (failures_ > 3 ? " (+" + std::to_string(failures_ - 3) + " more)" : "")};
  }

 private:
  bool ok_ = true;
  int failures_ = 0;
  std::string detail_;
  std::string notes_;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

Outcome filter_correctness() {
  Checks c;
  Rng rng(2024);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int X = 2 + rng.index(3);
    const auto m = testing::random_model(rng, X, 2, 3);
    const Belief start(rng.simplex_point(X));
    Belief pi = start;
    std::vector<ObservationStep> steps;
    const int n = 1 + rng.index(8);
    for (int k = 0; k < n; ++k) {
      const int u = 1 + rng.index(2);
      const auto lik = observation_likelihoods(m, pi.probs(), u);
      int y = 1;
      double acc = 0.0, r = rng.uniform();
      for (; y < lik.size(); ++y) {
        acc += lik(y - 1);
        if (r < acc) break;
      }
      steps.push_back({y, u});
      pi = filter_update(m, pi, y, u).posterior;
    }
    const double err = (exact_posterior_oracle(m, start, steps).probs() - pi.probs()).cwiseAbs().maxCoeff();
    worst = std::max(worst, err);
  }
  c.expect(worst <= 1e-10, "max deviation " + fmt(worst));
  c.note("max deviation " + fmt(worst));
  return c.done();
}

Outcome concavity() {
  Checks c;
  const char* files[] = {"sensing_x2.json",        "sensing_x3.json",
                         "l1_x2.json",             "piecewise_linear_x2.json",
                         "filter_vs_predictor.json", "entropy_x3.json",
                         "ultrametric_chain.json", "mean_square_x3.json",
                         "quickest_detection.json", "quickest_detection_entropy.json",
                         "quickest_detection_x3.json"};
  for (const char* f : files) {
    const auto m = testing::load_fixture(f);
    const int M = m.num_states() == 2 ? 1000 : 100;
    const auto r = solve(m, SimplexGrid::build(m.num_states(), M), {.tol = 1e-9, .workers = 8});
    const auto rep = verify_concavity(r.value, kMaxPairs, 1e-6 * r.value.sup_norm());
    c.expect(r.converged, std::string(f) + " did not converge");
    c.expect(rep.holds, std::string(f) + " violation " + fmt(rep.worst_violation));
  }
  // Negated entropy is convex; the verifier must object.
  auto neg = testing::load_fixture("filter_vs_predictor.json");
  neg.nonlinear_cost.alpha = {-1.0, -0.2};
  SolverOptions opts{.workers = 8, .validate = false};
  const auto r = solve(neg, SimplexGrid::build(2, 1000), opts);
  const auto rep = verify_concavity(r.value, kMaxPairs, 1e-6 * r.value.sup_norm());
  c.expect(!rep.holds, "negated entropy not flagged");
  c.note(std::to_string(std::size(files)) + " fixtures; control violation " + fmt(rep.worst_violation));
  return c.done();
}

Outcome stopping_convexity() {
  Checks c;
  const auto qd = testing::load_fixture("quickest_detection.json");
  const auto r2 = solve(qd, SimplexGrid::build(2, 1000), {.tol = 1e-9});
  c.expect(verify_stopping_set_convex(r2.policy).holds, "X=2 stop set not convex");
  const auto te = extract_threshold(r2.policy);
  c.expect(te.threshold.has_value(), "X=2 policy not a single switch: " + te.diagnostic);
  c.expect(r2.policy.at_point(0) == 1, "X=2 policy continues at pi(2) = 0");
  const auto x3 = testing::load_fixture("quickest_detection_x3.json");
  const auto r3 = solve(x3, SimplexGrid::build(3, 100), {.tol = 1e-9, .workers = 8});
  c.expect(verify_stopping_set_convex(r3.policy).holds, "X=3 stop set not convex");
  std::size_t stops = 0;
  for (int a : r3.policy.actions()) stops += a == 1;
  c.expect(stops > 0 && stops < r3.policy.actions().size(), "X=3 policy is constant");
  if (te.threshold) c.note("threshold " + fmt(*te.threshold));
  return c.done();
}

Outcome threshold_consistency() {
  Checks c;
  const auto spec = qd_spec_from_model(testing::load_fixture("quickest_detection.json"));
  const auto a = qd_threshold(spec, 1000, {.tol = 1e-9});
  const auto b = qd_threshold(spec, 2000, {.tol = 1e-9});
  c.expect(std::abs(a.threshold - b.threshold) <= 2.0 / 1000,
           "thresholds " + fmt(a.threshold) + " vs " + fmt(b.threshold));
  const double grid_error = std::abs(a.value_at_prior - b.value_at_prior);
  const auto ks = ks_cost_estimate(spec, a.threshold, {.num_paths = 100000, .seed = 7, .workers = 8});
  c.expect(a.value_at_prior >= ks.ci_low - grid_error && a.value_at_prior <= ks.ci_high + grid_error,
           "V(pi0) " + fmt(a.value_at_prior) + " outside [" + fmt(ks.ci_low) + ", " +
               fmt(ks.ci_high) + "] +- " + fmt(grid_error));
  c.expect(ks.cap_hits == 0, "cap hits");
  c.note("pi* " + fmt(a.threshold) + "/" + fmt(b.threshold) + ", V " + fmt(a.value_at_prior) +
         ", KS " + fmt(ks.total_cost) + " [" + fmt(ks.ci_low) + ", " + fmt(ks.ci_high) + "]");
  return c.done();
}

Outcome homogeneity() {
  Checks c;
  const std::vector<double> kappas = {0.001, 0.5, 1.0, 2.0, 7.3};
  for (const char* f : {"sensing_x2.json", "sensing_x3.json"}) {
    const auto m = testing::load_fixture(f);
    const auto g = SimplexGrid::build(m.num_states(), m.num_states() == 2 ? 1000 : 100);
    const auto rep = verify_homogeneity(m, g, kappas, {.workers = 8});
    c.expect(rep.holds, std::string(f) + " deviation " + fmt(rep.worst_violation));
  }
  return c.done();
}

Outcome mlr_monotone() {
  Checks c;
  const auto m = testing::load_fixture("monotone_a1a3.json");
  for (const auto& a : monotone_assumptions(m)) c.expect(a.holds, a.predicate + " fails");
  const auto r = solve(m, SimplexGrid::build(3, 100), {.workers = 8});
  const auto rep = verify_mlr_monotone_value(r.value, 1e-6 * r.value.sup_norm());
  c.expect(rep.holds, "A1-A3 fixture violation " + fmt(rep.worst_violation));

  const auto bad = testing::load_fixture("a1_violation.json");
  const auto rb = solve(bad, SimplexGrid::build(3, 100), {.workers = 8});
  const auto neg = verify_mlr_monotone_value(rb.value, 1e-6 * rb.value.sup_norm());
  c.expect(!neg.holds, "A1 violation not detected");
  c.expect(neg.witness.beliefs.size() == 2, "no witness pair");
  return c.done();
}

Outcome conjecture() {
  Checks c;
  const auto s = conjecture_probe(random_conjecture_model, 50, 200, {.workers = 8});
  c.expect(s.models_checked == 50, "checked " + std::to_string(s.models_checked));
  c.expect(s.first_counterexample < 0, s.summary);
  c.note(s.summary);
  return c.done();
}

Outcome blackwell() {
  Checks c;
  for (const char* f : {"filter_vs_predictor.json", "ultrametric_chain.json"}) {
    const auto m = testing::load_fixture(f);
    const auto solved = solve(m, SimplexGrid::build(2, 1000), {.workers = 8});
    const auto rep = verify_myopic_bound(m, solved);
    const std::string tag = std::string(f) + ": ";
    c.expect(rep.factorization.residual <= 1e-6, tag + "residual " + fmt(rep.factorization.residual));
    c.expect(rep.jensen.holds, tag + "jensen " + fmt(rep.jensen.worst_violation));
    c.expect(rep.q_form.holds, tag + "Q gap " + fmt(rep.q_form.worst_violation));

    const int X = m.num_states();
    const Eigen::VectorXd u = Eigen::VectorXd::Constant(X, 1.0 / X);
    const Eigen::VectorXd e1 = Eigen::VectorXd::Unit(X, 0), eX = Eigen::VectorXd::Unit(X, X - 1);
    const std::vector<Eigen::VectorXd> starts = {initial_belief_or_uniform(m).probs(), u,
                                                 0.8 * e1 + 0.2 * u, 0.8 * eX + 0.2 * u,
                                                 0.5 * e1 + 0.5 * eX};
    const auto t = compare_policies(m, grid_policy(solved.policy), myopic_policy(m), starts,
                                    {.num_paths = 20000, .seed = 11, .workers = 8});
    c.expect(t.a_not_worse_count == 5, tag + std::to_string(t.a_not_worse_count) + "/5 rows not worse");
  }
  return c.done();
}

Outcome ultrametric_roots() {
  Checks c;
  const std::vector<Eigen::MatrixXd> Bs = {
      testing::mat({{0.6, 0.4}, {0.4, 0.6}}),
      testing::load_fixture("ultrametric_3x3.json").B(1)};
  for (const auto& B : Bs) {
    const std::string tag = std::to_string(B.rows()) + "x" + std::to_string(B.cols()) + " ";
    for (int U : {2, 3, 4}) {
      const auto R = matrix_root(B, U);
      Eigen::MatrixXd p = Eigen::MatrixXd::Identity(B.rows(), B.cols());
      for (int k = 0; k < U; ++k) p *= R;
      c.expect((p - B).cwiseAbs().maxCoeff() <= 1e-8, tag + "power residual U=" + std::to_string(U));
      c.expect((R.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-10 && R.minCoeff() >= -1e-10,
               tag + "root not stochastic U=" + std::to_string(U));
    }
    double worst = 0.0;
    for (int k = 1; k < 4; ++k) {
      const auto f = blackwell_factorize(matrix_fractional_power(B, k + 1, 4),
                                         matrix_fractional_power(B, k, 4));
      worst = std::max(worst, f.residual);
    }
    c.expect(worst <= 1e-6, tag + "chain residual " + fmt(worst));
  }
  return c.done();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
  Checks c;
  struct Case {
    std::string command;
    std::vector<std::string> models;
    std::vector<std::string> predicates;
    int grid = 0;
    int paths = 0;
  };
  const std::vector<Case> cases = {
      {"validate", {"quickest_detection.json", "sensing_x3.json"}},
      {"solve", {"sensing_x3.json"}, {}, 40},
      {"solve-relaxed", {"sensing_x2.json"}, {}, 200},
      {"verify", {"monotone_a1a3.json"}, {"concavity", "mlr-monotone", "assumptions", "tp2", "fosd-cost"}, 30},
      {"verify", {"sensing_x2.json"}, {"homogeneity"}, 200},
      {"qd-threshold", {"quickest_detection.json"}, {}, 500},
      {"qd-simulate", {"quickest_detection.json"}, {}, 300, 5000},
      {"blackwell", {"filter_vs_predictor.json"}},
      {"ultrametric-root", {"ultrametric_3x3.json"}},
      {"evaluate", {"sensing_x2.json"}, {}, 200, 2000},
      {"compare", {"filter_vs_predictor.json"}, {}, 200, 2000},
      {"conjecture-probe", {}, {}, 100},
  };
  const fs::path root = fs::temp_directory_path() / "pomdpcs-acceptance";
  fs::remove_all(root);
  int n = 0;
  for (const auto& k : cases) {
    std::vector<fs::path> dirs;
    for (int w : {1, 8, 8}) {
      RunConfig cfg;
      cfg.command = k.command;
      for (const auto& m : k.models) cfg.models.push_back(testing::fixture(m));
      cfg.predicates = k.predicates;
      cfg.grid = k.grid;
      cfg.paths = k.paths;
      cfg.workers = w;
      cfg.count = 5;
      cfg.seed = 99;
      cfg.out = root / (std::to_string(n) + "-" + std::to_string(dirs.size()));
      std::ostringstream log;
      const int code = run(cfg, log);
      c.expect(code == kExitOk, k.command + " exit " + std::to_string(code) + " " + log.str());
      dirs.push_back(cfg.out);
    }
    for (std::size_t d = 1; d < dirs.size(); ++d) {
      std::set<std::string> names;
      for (const auto& e : fs::directory_iterator(dirs[0])) names.insert(e.path().filename().string());
      std::set<std::string> other;
      for (const auto& e : fs::directory_iterator(dirs[d])) other.insert(e.path().filename().string());
      c.expect(names == other, k.command + " artifact sets differ");
      for (const auto& name : names) {
        if (name == "manifest.json") {
          auto a = nlohmann::json::parse(slurp(dirs[0] / name));
          auto b = nlohmann::json::parse(slurp(dirs[d] / name));
          a.erase("runtime");
          b.erase("runtime");
          c.expect(a == b, k.command + " manifest differs");
        } else {
          c.expect(slurp(dirs[0] / name) == slurp(dirs[d] / name), k.command + " " + name + " differs");
        }
      }
    }
    ++n;
  }
  c.note(std::to_string(cases.size()) + " commands x workers {1, 8, 8}");
  return c.done();
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "filter matches path enumeration", 10, filter_correctness},
      {2, "value functions are concave", 120, concavity},
      {3, "stopping sets are convex", 60, stopping_convexity},
      {4, "detection threshold consistency", 120, threshold_consistency},
      {5, "relaxed value is positively homogeneous", 600, homogeneity},
      {6, "value is MLR-decreasing under A1-A3", 60, mlr_monotone},
      {7, "conjecture probe finds no counterexample", 300, conjecture},
      {8, "Blackwell dominance and the myopic bound", 180, blackwell},
      {9, "ultrametric roots and dominance chain", 600, ultrametric_roots},
      {10, "artifacts are deterministic", 600, determinism},
  };
  int failed = 0;
  for (const auto& k : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = k.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (o.pass && secs > k.budget_seconds) {
      o.pass = false;
      o.detail = "over time budget of " + fmt(k.budget_seconds) + " s";
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s criterion %d: %s (%.1f s)%s%s\n", o.pass ? "PASS" : "FAIL", k.id, k.name, secs,
                o.detail.empty() ? "" : " - ", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
