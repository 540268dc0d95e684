#include "pomdpcs/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "pomdpcs/errors.hpp"

namespace pomdpcs {

using nlohmann::json;

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";  // folds -0
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", kOutputDigits, x);
  return buf;
}

double round_output(double x) {
  if (!std::isfinite(x)) return x;
  return x == 0.0 ? 0.0 : std::strtod(format_number(x).c_str(), nullptr);
}

json rounded_vector(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(round_output(v(i)));
  return out;
}

json rounded_matrix(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(rounded_vector(m.row(r).transpose()));
  return out;
}

json to_json(const OrderCheckReport& r) {
  json w;
  w["indices"] = r.witness.indices;
  w["beliefs"] = json::array();
  for (const auto& b : r.witness.beliefs) w["beliefs"].push_back(rounded_vector(b));
  w["note"] = r.witness.note;
  return {{"predicate", r.predicate},
          {"holds", r.holds},
          {"worst_violation", round_output(r.worst_violation)},
          {"tolerance", round_output(r.tolerance)},
          {"samples", r.samples},
          {"witness", w}};
}

json to_json(const BlackwellFactorization& f) {
  return {{"R", rounded_matrix(f.R)},
          {"residual", round_output(f.residual)},
          {"tolerance", round_output(f.tolerance)},
          {"dominates", f.dominates},
          {"iterations", f.iterations}};
}

json to_json(const KsEstimate& e) {
  return {{"threshold", round_output(e.threshold)},
          {"delay_term", round_output(e.delay_term)},
          {"delay_se", round_output(e.delay_se)},
          {"false_alarm", round_output(e.false_alarm)},
          {"false_alarm_se", round_output(e.false_alarm_se)},
          {"nonlinear_term", round_output(e.nonlinear_term)},
          {"ks_cost", round_output(e.ks_cost)},
          {"total_cost", round_output(e.total_cost)},
          {"total_se", round_output(e.total_se)},
          {"ci", {round_output(e.ci_low), round_output(e.ci_high)}},
          {"paths", e.num_paths},
          {"cap_hits", e.cap_hits},
          {"seeds", {{"base", e.seed}, {"per_path", "splitmix64(base, path index)"}}}};
}

json to_json(const MyopicBoundReport& r) {
  return {{"holds", r.holds},
          {"factorization", to_json(r.factorization)},
          {"jensen", to_json(r.jensen)},
          {"q_form", to_json(r.q_form)},
          {"policy_order", to_json(r.policy_order)},
          {"strict_region_points", r.strict_region_points}};
}

json to_json(const ConjectureProbeSummary& s) {
  json reports = json::array();
  for (const auto& r : s.reports) reports.push_back(to_json(r));
  json doc = {{"models_checked", s.models_checked},
              {"first_counterexample", s.first_counterexample},
              {"summary", s.summary},
              {"reports", reports}};
  return doc;
}

json to_json(const EvalResult& r) {
  return {{"mean", round_output(r.mean)},
          {"standard_error", round_output(r.standard_error)},
          {"paths", r.num_paths},
          {"horizon", r.horizon},
          {"truncation_bound", round_output(r.truncation_bound)},
          {"cap_hits", r.cap_hits}};
}

json solve_summary(const SolveResult& s) {
  json doc = {{"grid_points", s.value.grid().size()},
              {"resolution", s.value.grid().resolution()},
              {"iterations", s.iterations},
              {"converged", s.converged},
              {"final_change", round_output(s.final_change)},
              {"max_abs_value", round_output(s.value.sup_norm())}};
  if (s.policy.threshold()) doc["threshold"] = round_output(*s.policy.threshold());
  return doc;
}

json solve_summary(const RelaxedSolveResult& s) {
  return {{"grid_points", s.value.on_simplex().grid().size()},
          {"resolution", s.value.on_simplex().grid().resolution()},
          {"iterations", s.iterations},
          {"converged", s.converged},
          {"final_change", round_output(s.final_change)}};
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  return out;
}

void belief_header(std::ostream& out, int X) {
  for (int i = 1; i <= X; ++i) out << "pi_" << i << ',';
}

void belief_cells(std::ostream& out, const Eigen::VectorXd& pi) {
  for (Eigen::Index i = 0; i < pi.size(); ++i) out << format_number(pi(i)) << ',';
}

}  // namespace

void write_value_csv(const std::filesystem::path& path, const SolveResult& s) {
  auto out = open_out(path);
  const auto& grid = s.value.grid();
  belief_header(out, grid.num_states());
  out << "value,action";
  for (int u = 1; u <= s.num_actions; ++u) out << ",q_" << u;
  out << '\n';
  for (std::size_t i = 0; i < grid.size(); ++i) {
    belief_cells(out, grid.point(i));
    out << format_number(s.value.at_point(i)) << ',' << s.policy.at_point(i);
    for (int u = 1; u <= s.num_actions; ++u) out << ',' << format_number(s.q_at(i, u));
    out << '\n';
  }
}

void write_value_csv(const std::filesystem::path& path, const RelaxedSolveResult& s) {
  auto out = open_out(path);
  const auto& V = s.value.on_simplex();
  const auto& grid = V.grid();
  belief_header(out, grid.num_states());
  out << "value,action\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    belief_cells(out, grid.point(i));
    out << format_number(V.at_point(i)) << ',' << s.policy.at_point(i) << '\n';
  }
}

void write_comparison_csv(const std::filesystem::path& path, const ComparisonTable& table,
                          const std::string& name_a, const std::string& name_b) {
  auto out = open_out(path);
  if (table.rows.empty()) {
    out << "policy,mean,se,paths,horizon\n";
    return;
  }
  belief_header(out, static_cast<int>(table.rows.front().pi0.size()));
  out << "policy,mean,se,paths,horizon,difference,difference_se,not_worse\n";
  for (const auto& row : table.rows) {
    for (int k = 0; k < 2; ++k) {
      const auto& r = k == 0 ? row.a : row.b;
      belief_cells(out, row.pi0);
      out << (k == 0 ? name_a : name_b) << ',' << format_number(r.mean) << ','
          << format_number(r.standard_error) << ',' << r.num_paths << ',' << r.horizon << ','
          << format_number(row.mean_difference) << ',' << format_number(row.difference_se) << ','
          << (row.a_not_worse ? "true" : "false") << '\n';
    }
  }
}

void write_evaluation_csv(const std::filesystem::path& path, const Eigen::VectorXd& pi0,
                          const std::vector<std::pair<std::string, EvalResult>>& rows) {
  auto out = open_out(path);
  belief_header(out, static_cast<int>(pi0.size()));
  out << "policy,mean,se,paths,horizon,cap_hits\n";
  for (const auto& [name, r] : rows) {
    belief_cells(out, pi0);
    out << name << ',' << format_number(r.mean) << ',' << format_number(r.standard_error) << ','
        << r.num_paths << ',' << r.horizon << ',' << r.cap_hits << '\n';
  }
}

void write_json(const std::filesystem::path& path, const json& doc) {
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
}

}  // namespace pomdpcs
