#include "pomdpcs/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <functional>
#include <map>

#include <json.hpp>

#include "pomdpcs/blackwell.hpp"
#include "pomdpcs/errors.hpp"
#include "pomdpcs/model_io.hpp"
#include "pomdpcs/order.hpp"
#include "pomdpcs/quickest.hpp"
#include "pomdpcs/report.hpp"
#include "pomdpcs/simulate.hpp"
#include "pomdpcs/solver.hpp"
#include "pomdpcs/verify.hpp"

namespace pomdpcs {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::string>& known_commands() {
  static const std::vector<std::string> names = {
      "validate",  "solve",           "solve-relaxed", "verify",  "qd-threshold",    "qd-simulate",
      "blackwell", "ultrametric-root", "evaluate",     "compare", "conjecture-probe"};
  return names;
}

const std::vector<std::string>& known_predicates() {
  static const std::vector<std::string> names = {
      "concavity", "stopping-convex", "threshold", "homogeneity", "mlr-monotone", "assumptions",
      "tp2",       "fosd-cost",       "blackwell", "myopic-bound", "ultrametric"};
  return names;
}

int default_resolution(int num_states) {
  switch (num_states) {
    case 2: return 1000;
    case 3: return 100;
    case 4: return 30;
    case 5: return 15;
    default: return 10;
  }
}

fs::path resolve_output_dir(const RunConfig& config) {
  if (!config.out.empty()) return config.out;
  if (const char* env = std::getenv("POMDPCS_OUT"); env && *env) return env;
  return "pomdpcs-out";
}

namespace {

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

void check_config(const RunConfig& c) {
  if (!contains(known_commands(), c.command))
    throw InvalidModel("command: unknown command '" + c.command + "'");
  if (c.command == "verify" && c.predicates.empty())
    throw InvalidModel("predicates: verify needs at least one predicate");
  for (const auto& p : c.predicates)
    if (!contains(known_predicates(), p)) throw InvalidModel("predicates: unknown predicate '" + p + "'");
  if (c.command == "conjecture-probe") {
    if (!c.models.empty()) throw InvalidModel("model: conjecture-probe generates its own models");
  } else if (c.models.empty()) {
    throw InvalidModel("model: no model file given");
  } else if (c.command != "validate" && c.models.size() != 1) {
    throw InvalidModel("model: " + c.command + " takes exactly one model file");
  }
  if (c.grid < 0) throw InvalidModel("grid: must be positive");
  if (!(c.tol > 0)) throw InvalidModel("tol: must be positive");
  if (c.max_iters < 1) throw InvalidModel("max-iters: must be positive");
  if (c.paths < 0) throw InvalidModel("paths: must be positive");
  if (c.workers < 1) throw InvalidModel("workers: must be positive");
  if (c.root_degree < 1) throw InvalidModel("root-degree: must be positive");
  if (c.count < 1) throw InvalidModel("count: must be positive");
  if (c.horizon_cap < 1) throw InvalidModel("horizon-cap: must be positive");
  if (!(c.eval_tolerance > 0)) throw InvalidModel("eval-tol: must be positive");
  for (double k : c.kappas)
    if (!(k > 0)) throw InvalidModel("kappa: scales must be positive");
  if (c.threshold && !(*c.threshold >= 0 && *c.threshold <= 1))
    throw InvalidModel("threshold: must lie in [0, 1]");
}

json config_json(const RunConfig& c) {
  json models = json::array();
  for (const auto& m : c.models) models.push_back(m.generic_string());
  json doc = {{"command", c.command},
              {"models", models},
              {"grid", c.grid},
              {"tol", c.tol},
              {"max_iters", c.max_iters},
              {"seed", c.seed},
              {"paths", c.paths},
              {"predicates", c.predicates},
              {"kappas", c.kappas},
              {"root_degree", c.root_degree},
              {"action", c.action},
              {"count", c.count},
              {"baseline", c.baseline},
              {"horizon_cap", c.horizon_cap},
              {"eval_tol", c.eval_tolerance}};
  doc["threshold"] = c.threshold ? json(*c.threshold) : json(nullptr);
  return doc;
}

// Reports from several matrices or actions folded into one verdict.
json combined(const std::string& predicate, const std::vector<OrderCheckReport>& reports) {
  json list = json::array();
  bool holds = true;
  for (const auto& r : reports) {
    list.push_back(to_json(r));
    holds = holds && r.holds;
  }
  return {{"predicate", predicate}, {"holds", holds}, {"reports", list}};
}

OrderCheckReport labelled(OrderCheckReport r, const std::string& label) {
  r.predicate = label;
  return r;
}

class Session {
 public:
  Session(const RunConfig& cfg, fs::path out, std::ostream& log)
      : cfg_(cfg), out_(std::move(out)), log_(log) {}

  int dispatch() {
    const auto& c = cfg_.command;
    if (c == "validate") return validate();
    if (c == "conjecture-probe") return conjecture();
    load();
    if (c == "solve") return solve_cmd();
    if (c == "solve-relaxed") return solve_relaxed_cmd();
    if (c == "verify") return verify_cmd();
    if (c == "qd-threshold") return qd_threshold_cmd();
    if (c == "qd-simulate") return qd_simulate_cmd();
    if (c == "blackwell") return blackwell_cmd();
    if (c == "ultrametric-root") return root_cmd();
    if (c == "evaluate") return evaluate_cmd();
    return compare_cmd();
  }

  const std::vector<std::string>& artifacts() const { return artifacts_; }

 private:
  SolverOptions solver_options() const { return {cfg_.tol, cfg_.max_iters, cfg_.workers}; }
  int resolution(int X) const { return cfg_.grid > 0 ? cfg_.grid : default_resolution(X); }

  void emit(const std::string& name, const json& doc) {
    write_json(out_ / name, doc);
    artifacts_.push_back(name);
  }
  fs::path artifact(const std::string& name) {
    artifacts_.push_back(name);
    return out_ / name;
  }

  void load() {
    model_ = load_model(cfg_.models.front());
    require_valid(model_);
  }

  const GridPtr& grid() {
    if (!grid_) grid_ = SimplexGrid::build(model_.num_states(), resolution(model_.num_states()));
    return grid_;
  }

  const SolveResult& solved() {
    if (!solved_) {
      solved_ = solve(model_, grid(), solver_options());
      if (!solved_->converged)
        log_ << "warning: value iteration stopped at max-iters with change "
             << format_number(solved_->final_change) << '\n';
    }
    return *solved_;
  }

  void require_stopping(const std::string& what) const {
    if (model_.kind != ModelKind::stopping_time)
      throw PreconditionFailed(what + ": model_kind must be stopping_time");
  }

  PolicyFn baseline() const {
    const auto& b = cfg_.baseline;
    if (b == "myopic") return myopic_policy(model_);
    if (b.rfind("constant:", 0) == 0) {
      const int u = std::atoi(b.c_str() + 9);
      if (u < 1 || u > model_.num_actions()) throw InvalidModel("baseline: action out of range");
      return constant_policy(u);
    }
    throw InvalidModel("baseline: expected 'myopic' or 'constant:<u>'");
  }

  int validate() {
    json list = json::array();
    bool ok = true;
    for (const auto& path : cfg_.models) {
      std::vector<std::string> violations;
      try {
        violations = validate_model(load_model(path));
      } catch (const InvalidModel& e) {
        violations.push_back(e.what());
      }
      ok = ok && violations.empty();
      list.push_back({{"model", path.generic_string()},
                      {"valid", violations.empty()},
                      {"violations", violations}});
    }
    emit("validation.json", {{"valid", ok}, {"models", list}});
    if (!ok) log_ << "model validation failed; see validation.json\n";
    return ok ? kExitOk : kExitInputError;
  }

  int solve_cmd() {
    const auto& s = solved();
    write_value_csv(artifact("value.csv"), s);
    json doc = solve_summary(s);
    const auto pi0 = initial_belief_or_uniform(model_).probs();
    doc["initial_belief"] = rounded_vector(pi0);
    doc["value_at_initial"] = round_output(s.value(pi0));
    emit("solve.json", doc);
    return kExitOk;
  }

  int solve_relaxed_cmd() {
    const auto r = solve_relaxed(model_, grid(), solver_options());
    write_value_csv(artifact("relaxed_value.csv"), r);
    emit("solve_relaxed.json", solve_summary(r));
    return kExitOk;
  }

  json predicate(const std::string& p) {
    if (p == "concavity") {
      const auto& V = solved().value;
      return combined(p, {verify_concavity(V, kMaxPairs, 1e-6 * V.sup_norm(), cfg_.seed)});
    }
    if (p == "stopping-convex") {
      require_stopping(p);
      return combined(p, {verify_stopping_set_convex(solved().policy)});
    }
    if (p == "threshold") {
      require_stopping(p);
      if (model_.num_states() != 2) throw PreconditionFailed("threshold: needs a two-state model");
      const auto& pol = solved().policy;
      const auto te = extract_threshold(pol);
      const bool stops_at_zero = pol.at_point(0) == 1;
      json doc = {{"predicate", p},
                  {"holds", te.threshold.has_value() && stops_at_zero},
                  {"switches", te.switches},
                  {"stops_at_pi2_zero", stops_at_zero},
                  {"diagnostic", te.diagnostic}};
      doc["threshold"] = te.threshold ? json(round_output(*te.threshold)) : json(nullptr);
      return doc;
    }
    if (p == "homogeneity")
      return combined(p, {verify_homogeneity(model_, grid(), cfg_.kappas, solver_options(), 200,
                                             cfg_.seed)});
    if (p == "mlr-monotone") {
      const auto& V = solved().value;
      return combined(p, {verify_mlr_monotone_value(V, 1e-6 * V.sup_norm(), kMaxPairs, cfg_.seed)});
    }
    if (p == "assumptions") return combined(p, monotone_assumptions(model_, 2000, cfg_.seed));
    if (p == "tp2") {
      std::vector<OrderCheckReport> reports;
      for (int u = 1; u <= model_.num_actions(); ++u) {
        const std::string tag = " (action " + std::to_string(u) + ")";
        reports.push_back(labelled(is_tp2(model_.P(u)), "tp2 transition" + tag));
        reports.push_back(labelled(is_tp2(model_.B(u)), "tp2 observation" + tag));
      }
      return combined(p, reports);
    }
    if (p == "fosd-cost") {
      std::vector<OrderCheckReport> reports;
      for (int u = 1; u <= model_.num_actions(); ++u)
        reports.push_back(fosd_decreasing_cost(model_, u, 2000, 1e-12, cfg_.seed));
      return combined(p, reports);
    }
    if (p == "blackwell") {
      if (model_.num_actions() < 2) throw PreconditionFailed("blackwell: needs two actions");
      const auto f = blackwell_factorize(model_.B(1), model_.B(2));
      json doc = to_json(f);
      doc["predicate"] = p;
      doc["holds"] = f.dominates;
      return doc;
    }
    if (p == "myopic-bound") {
      json doc = to_json(verify_myopic_bound(model_, solved()));
      doc["predicate"] = p;
      return doc;
    }
    std::vector<OrderCheckReport> reports;
    for (int u = 1; u <= model_.num_actions(); ++u)
      reports.push_back(
          labelled(is_ultrametric(model_.B(u)), "ultrametric observation (action " + std::to_string(u) + ")"));
    return combined(p, reports);
  }

  int verify_cmd() {
    json verdicts = json::object();
    bool all = true;
    std::vector<std::string> seen;
    for (const auto& p : cfg_.predicates) {
      if (contains(seen, p)) continue;
      seen.push_back(p);
      const json doc = predicate(p);
      const bool holds = doc.at("holds").get<bool>();
      emit("verify_" + p + ".json", doc);
      verdicts[p] = holds;
      all = all && holds;
      if (!holds) log_ << "violation: " << p << '\n';
    }
    emit("verify.json", {{"holds", all}, {"predicates", verdicts}});
    return all ? kExitOk : kExitViolation;
  }

  int qd_threshold_cmd() {
    const auto spec = qd_spec_from_model(model_);
    const auto r = qd_threshold(spec, resolution(2), solver_options());
    write_value_csv(artifact("value.csv"), r.solution);
    json doc = solve_summary(r.solution);
    doc["threshold"] = round_output(r.threshold);
    doc["value_at_prior"] = round_output(r.value_at_prior);
    emit("qd_threshold.json", doc);
    return kExitOk;
  }

  int qd_simulate_cmd() {
    const auto spec = qd_spec_from_model(model_);
    json doc;
    double threshold;
    if (cfg_.threshold) {
      threshold = *cfg_.threshold;
    } else {
      const auto r = qd_threshold(spec, resolution(2), solver_options());
      threshold = r.threshold;
      doc["value_at_prior"] = round_output(r.value_at_prior);
      doc["resolution"] = resolution(2);
    }
    KsOptions opts;
    opts.num_paths = cfg_.paths > 0 ? cfg_.paths : 100'000;
    opts.horizon_cap = cfg_.horizon_cap;
    opts.seed = cfg_.seed;
    opts.workers = cfg_.workers;
    doc.update(to_json(ks_cost_estimate(spec, threshold, opts)));
    emit("qd_simulate.json", doc);
    return kExitOk;
  }

  int blackwell_cmd() {
    const json doc = predicate("blackwell");
    emit("blackwell.json", doc);
    return doc.at("holds").get<bool>() ? kExitOk : kExitViolation;
  }

  int root_cmd() {
    if (cfg_.action < 1 || cfg_.action > model_.num_actions())
      throw InvalidModel("action: out of range");
    const Eigen::MatrixXd& B = model_.B(cfg_.action);
    const auto um = is_ultrametric(B);
    json doc = {{"ultrametric", to_json(um)}, {"degree", cfg_.root_degree}};
    if (!um.holds) {
      doc["holds"] = false;
      emit("ultrametric_root.json", doc);
      return kExitViolation;
    }
    const int U = cfg_.root_degree;
    const Eigen::MatrixXd root = matrix_root(B, U);
    Eigen::MatrixXd power = Eigen::MatrixXd::Identity(B.rows(), B.cols());
    std::vector<Eigen::MatrixXd> powers;  // B^{k/U}, k = 1..U
    for (int k = 1; k <= U; ++k) {
      power = power * root;
      powers.push_back(power);
    }
    doc["root"] = rounded_matrix(root);
    doc["power_residual"] = round_output((powers.back() - B).cwiseAbs().maxCoeff());
    doc["row_sum_defect"] =
        round_output((root.rowwise().sum().array() - 1.0).abs().maxCoeff());
    doc["min_entry"] = round_output(root.minCoeff());
    json chain = json::array();
    bool ok = true;
    for (int k = 1; k < U; ++k) {
      const auto f = blackwell_factorize(powers[k], powers[k - 1]);
      ok = ok && f.dominates;
      chain.push_back({{"dominant", std::to_string(k) + "/" + std::to_string(U)},
                       {"dominated", std::to_string(k + 1) + "/" + std::to_string(U)},
                       {"residual", round_output(f.residual)},
                       {"dominates", f.dominates}});
    }
    doc["chain"] = chain;
    doc["holds"] = ok;
    emit("ultrametric_root.json", doc);
    return ok ? kExitOk : kExitViolation;
  }

  EvalOptions eval_options() const {
    EvalOptions o;
    o.num_paths = cfg_.paths > 0 ? cfg_.paths : 10'000;
    o.tolerance = cfg_.eval_tolerance;
    o.horizon_cap = cfg_.horizon_cap;
    o.seed = cfg_.seed;
    o.workers = cfg_.workers;
    return o;
  }

  int evaluate_cmd() {
    const auto pi0 = initial_belief_or_uniform(model_).probs();
    const auto opts = eval_options();
    std::vector<std::pair<std::string, EvalResult>> rows;
    rows.emplace_back("optimal", evaluate_policy(model_, grid_policy(solved().policy), pi0, opts));
    if (!cfg_.baseline.empty())
      rows.emplace_back(cfg_.baseline, evaluate_policy(model_, baseline(), pi0, opts));
    write_evaluation_csv(artifact("evaluation.csv"), pi0, rows);
    json list = json::array();
    for (const auto& [name, r] : rows) {
      json j = to_json(r);
      j["policy"] = name;
      list.push_back(j);
    }
    emit("evaluate.json", {{"initial_belief", rounded_vector(pi0)},
                           {"value_at_initial", round_output(solved().value(pi0))},
                           {"rows", list}});
    return kExitOk;
  }

  std::vector<Eigen::VectorXd> comparison_beliefs() const {
    const int X = model_.num_states();
    const Eigen::VectorXd uniform = uniform_belief(X).probs();
    const Eigen::VectorXd first = unit_belief(1, X).probs();
    const Eigen::VectorXd last = unit_belief(X, X).probs();
    return {initial_belief_or_uniform(model_).probs(), uniform, 0.8 * first + 0.2 * uniform,
            0.8 * last + 0.2 * uniform, 0.5 * first + 0.5 * last};
  }

  int compare_cmd() {
    const auto table = compare_policies(model_, grid_policy(solved().policy), baseline(),
                                        comparison_beliefs(), eval_options());
    write_comparison_csv(artifact("comparison.csv"), table, "optimal", cfg_.baseline);
    json rows = json::array();
    for (const auto& r : table.rows)
      rows.push_back({{"initial_belief", rounded_vector(r.pi0)},
                      {"optimal", to_json(r.a)},
                      {"baseline", to_json(r.b)},
                      {"difference", round_output(r.mean_difference)},
                      {"difference_se", round_output(r.difference_se)},
                      {"optimal_not_worse", r.a_not_worse}});
    const bool ok = table.a_not_worse_count == static_cast<int>(table.rows.size());
    emit("compare.json", {{"holds", ok},
                          {"optimal_not_worse_count", table.a_not_worse_count},
                          {"rows", rows}});
    return ok ? kExitOk : kExitViolation;
  }

  int conjecture() {
    const auto summary = conjecture_probe(random_conjecture_model, cfg_.count, resolution(2),
                                          solver_options(), 1e-6, cfg_.seed);
    emit("conjecture_probe.json", to_json(summary));
    if (summary.counterexample) {
      save_model(*summary.counterexample, artifact("counterexample.json"));
      log_ << "counterexample found: model " << summary.first_counterexample << '\n';
      return kExitViolation;
    }
    return kExitOk;
  }

  const RunConfig& cfg_;
  fs::path out_;
  std::ostream& log_;
  PomdpModel model_;
  GridPtr grid_;
  std::optional<SolveResult> solved_;
  std::vector<std::string> artifacts_;
};

bool is_violation(const std::exception& e) {
  return dynamic_cast<const StructureViolation*>(&e) || dynamic_cast<const NegativeEigenvalue*>(&e) ||
         dynamic_cast<const PostconditionFailed*>(&e);
}

}  // namespace

int run(const RunConfig& config, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  const fs::path out = resolve_output_dir(config);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) {
    log << "error: out: cannot create output directory '" << out.string() << "'\n";
    return kExitInputError;
  }

  Session session(config, out, log);
  int code = kExitOk;
  std::string message;
  try {
    check_config(config);
    code = session.dispatch();
  } catch (const std::exception& e) {
    message = e.what();
    code = is_violation(e) ? kExitViolation : kExitInputError;
    log << (code == kExitViolation ? "violation: " : "error: ") << message << '\n';
  }

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json manifest = {{"tool", "pomdpcs"},
                   {"version", kToolVersion},
                   {"command", config.command},
                   {"config", config_json(config)},
                   {"seed", config.seed},
                   {"artifacts", session.artifacts()},
                   {"exit_code", code},
                   {"message", message},
                   {"runtime",
                    {{"wall_time_seconds", wall},
                     {"workers", config.workers},
                     {"output_dir", out.generic_string()}}}};
  try {
    write_json(out / "manifest.json", manifest);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  return code;
}

}  // namespace pomdpcs
