#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "pomdpcs/model.hpp"

namespace pomdpcs {

/// Model files are JSON objects with these keys (unknown keys are rejected):
///
///   name              string, optional
///   description       string, optional
///   model_kind        "general_discounted" | "stopping_time"
///   discount          number in [0, 1]
///   num_states        X
///   num_actions       U
///   num_observations  [Y(1), ..., Y(U)], optional (checked when present)
///   transition        U matrices, X x X, row-major (array of rows)
///   observation       U matrices, X x Y(u)
///   linear_cost       U vectors of length X
///   nonlinear_cost    optional object: family, epsilon, weight_matrix,
///                     alpha, beta (see NonlinearCostSpec)
///   initial_belief    optional length-X probability vector
///
/// Parsing only checks shapes; call validate_model for the stochastic
/// invariants. Parse errors throw InvalidModel naming the offending field.
PomdpModel model_from_json(const nlohmann::json& doc);
nlohmann::json model_to_json(const PomdpModel& model);

PomdpModel load_model(const std::filesystem::path& path);
void save_model(const PomdpModel& model, const std::filesystem::path& path);

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, const std::string& field);
nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);

}  // namespace pomdpcs
