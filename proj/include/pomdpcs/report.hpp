#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "pomdpcs/blackwell.hpp"
#include "pomdpcs/order.hpp"
#include "pomdpcs/quickest.hpp"
#include "pomdpcs/simulate.hpp"
#include "pomdpcs/solver.hpp"
#include "pomdpcs/verify.hpp"

namespace pomdpcs {

/// Artifacts print numbers with 12 significant digits so that results agree
/// byte for byte across worker counts and platforms with the same libm.
inline constexpr int kOutputDigits = 12;

std::string format_number(double x);
/// x rounded to 12 significant digits (non-finite values pass through).
double round_output(double x);

nlohmann::json to_json(const OrderCheckReport& report);
nlohmann::json to_json(const BlackwellFactorization& f);
nlohmann::json to_json(const KsEstimate& e);
nlohmann::json to_json(const MyopicBoundReport& r);
nlohmann::json to_json(const ConjectureProbeSummary& s);
nlohmann::json to_json(const EvalResult& r);
nlohmann::json rounded_matrix(const Eigen::MatrixXd& m);
nlohmann::json rounded_vector(const Eigen::VectorXd& v);

/// iterations, converged, final change and (when present) the threshold.
nlohmann::json solve_summary(const SolveResult& s);
nlohmann::json solve_summary(const RelaxedSolveResult& s);

/// pi_1..pi_X, value, action, then Q(., u) for every action.
void write_value_csv(const std::filesystem::path& path, const SolveResult& s);
/// pi_1..pi_X, value, action of the relaxed solution on the simplex.
void write_value_csv(const std::filesystem::path& path, const RelaxedSolveResult& s);
/// One row per (pi0, policy).
void write_comparison_csv(const std::filesystem::path& path, const ComparisonTable& table,
                          const std::string& name_a, const std::string& name_b);
void write_evaluation_csv(const std::filesystem::path& path, const Eigen::VectorXd& pi0,
                          const std::vector<std::pair<std::string, EvalResult>>& rows);

void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

}  // namespace pomdpcs
