#include "pomdpcs/model_io.hpp"

#include <fstream>
#include <set>

#include "pomdpcs/errors.hpp"

namespace pomdpcs {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
  for (const auto& [key, _] : obj.items())
    if (!allowed.contains(key)) throw InvalidModel(where + ": unknown key '" + key + "'");
}

const json& require(const json& obj, const std::string& key) {
  if (!obj.contains(key)) throw InvalidModel(key + ": missing");
  return obj.at(key);
}

double number(const json& j, const std::string& field) {
  if (!j.is_number()) throw InvalidModel(field + ": expected a number");
  return j.get<double>();
}

int count(const json& j, const std::string& field) {
  if (!j.is_number_integer()) throw InvalidModel(field + ": expected an integer");
  return j.get<int>();
}

Eigen::VectorXd vector_from_json(const json& j, const std::string& field) {
  if (!j.is_array()) throw InvalidModel(field + ": expected an array of numbers");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    v(i) = number(j[i], field + "[" + std::to_string(i) + "]");
  return v;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

std::vector<double> doubles(const json& j, const std::string& field) {
  const auto v = vector_from_json(j, field);
  return {v.data(), v.data() + v.size()};
}

}  // namespace

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw InvalidModel(field + ": expected a non-empty array of rows");
  const std::size_t cols = j[0].size();
  Eigen::MatrixXd m(j.size(), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    const std::string row_field = field + " row " + std::to_string(r + 1);
    if (!j[r].is_array() || j[r].size() != cols)
      throw InvalidModel(row_field + ": expected " + std::to_string(cols) + " entries");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = number(j[r][c], row_field);
  }
  return m;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(vector_to_json(m.row(r).transpose()));
  return out;
}

PomdpModel model_from_json(const json& doc) {
  if (!doc.is_object()) throw InvalidModel("model: expected a JSON object");
  reject_unknown(doc,
                 {"name", "description", "model_kind", "discount", "num_states", "num_actions",
                  "num_observations", "transition", "observation", "linear_cost",
                  "nonlinear_cost", "initial_belief"},
                 "model");
  PomdpModel m;
  if (doc.contains("name")) m.name = doc.at("name").get<std::string>();
  const auto& kind = require(doc, "model_kind");
  if (!kind.is_string()) throw InvalidModel("model_kind: expected a string");
  m.kind = model_kind_from_string(kind.get<std::string>());
  m.discount = number(require(doc, "discount"), "discount");
  const int X = count(require(doc, "num_states"), "num_states");
  const int U = count(require(doc, "num_actions"), "num_actions");
  if (X < 1) throw InvalidModel("num_states: must be positive");
  if (U < 1) throw InvalidModel("num_actions: must be positive");

  auto per_action = [&](const char* key) -> const json& {
    const auto& arr = require(doc, key);
    if (!arr.is_array() || static_cast<int>(arr.size()) != U)
      throw InvalidModel(std::string(key) + ": expected one entry per action (" +
                         std::to_string(U) + ")");
    return arr;
  };
  const auto& P = per_action("transition");
  const auto& B = per_action("observation");
  const auto& c = per_action("linear_cost");
  for (int u = 0; u < U; ++u) {
    const std::string tag = " (action " + std::to_string(u + 1) + ")";
    m.transition.push_back(matrix_from_json(P[u], "transition" + tag));
    if (m.transition.back().rows() != X || m.transition.back().cols() != X)
      throw InvalidModel("transition" + tag + ": expected " + std::to_string(X) + "x" +
                         std::to_string(X));
    m.observation.push_back(matrix_from_json(B[u], "observation" + tag));
    if (m.observation.back().rows() != X)
      throw InvalidModel("observation" + tag + ": expected " + std::to_string(X) + " rows");
    m.linear_cost.push_back(vector_from_json(c[u], "linear_cost" + tag));
    if (m.linear_cost.back().size() != X)
      throw InvalidModel("linear_cost" + tag + ": expected length " + std::to_string(X));
  }
  if (doc.contains("num_observations")) {
    const auto& ys = per_action("num_observations");
    for (int u = 0; u < U; ++u)
      if (count(ys[u], "num_observations") != m.observation[u].cols())
        throw InvalidModel("num_observations (action " + std::to_string(u + 1) +
                           "): does not match the observation matrix");
  }

  if (doc.contains("nonlinear_cost")) {
    const auto& nl = doc.at("nonlinear_cost");
    if (!nl.is_object()) throw InvalidModel("nonlinear_cost: expected an object");
    reject_unknown(nl, {"family", "epsilon", "weight_matrix", "alpha", "beta"}, "nonlinear_cost");
    const auto& fam = require(nl, "family");
    if (!fam.is_string()) throw InvalidModel("nonlinear_cost.family: expected a string");
    m.nonlinear_cost.family = cost_family_from_string(fam.get<std::string>());
    if (nl.contains("epsilon"))
      m.nonlinear_cost.epsilon = number(nl.at("epsilon"), "nonlinear_cost.epsilon");
    if (nl.contains("weight_matrix"))
      m.nonlinear_cost.weight = matrix_from_json(nl.at("weight_matrix"),
                                                 "nonlinear_cost.weight_matrix");
    if (nl.contains("alpha")) m.nonlinear_cost.alpha = doubles(nl.at("alpha"), "nonlinear_cost.alpha");
    if (nl.contains("beta")) m.nonlinear_cost.beta = doubles(nl.at("beta"), "nonlinear_cost.beta");
  }
  if (doc.contains("initial_belief"))
    m.initial_belief = vector_from_json(doc.at("initial_belief"), "initial_belief");
  return m;
}

json model_to_json(const PomdpModel& m) {
  json doc;
  if (!m.name.empty()) doc["name"] = m.name;
  doc["model_kind"] = to_string(m.kind);
  doc["discount"] = m.discount;
  doc["num_states"] = m.num_states();
  doc["num_actions"] = m.num_actions();
  json ys = json::array(), P = json::array(), B = json::array(), c = json::array();
  for (int u = 1; u <= m.num_actions(); ++u) {
    ys.push_back(m.num_observations(u));
    P.push_back(matrix_to_json(m.P(u)));
    B.push_back(matrix_to_json(m.B(u)));
    c.push_back(vector_to_json(m.c(u)));
  }
  doc["num_observations"] = ys;
  doc["transition"] = P;
  doc["observation"] = B;
  doc["linear_cost"] = c;
  const auto& nl = m.nonlinear_cost;
  if (nl.family != CostFamily::none) {
    json j;
    j["family"] = to_string(nl.family);
    if (nl.family == CostFamily::piecewise_linear) j["epsilon"] = nl.epsilon;
    if (nl.family == CostFamily::mean_square) j["weight_matrix"] = matrix_to_json(nl.weight);
    if (!nl.alpha.empty()) j["alpha"] = nl.alpha;
    if (!nl.beta.empty()) j["beta"] = nl.beta;
    doc["nonlinear_cost"] = j;
  }
  if (m.initial_belief) doc["initial_belief"] = vector_to_json(*m.initial_belief);
  return doc;
}

PomdpModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidModel("model file '" + path.string() + "': cannot open");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidModel("model file '" + path.string() + "': " + e.what());
  }
  try {
    return model_from_json(doc);
  } catch (const json::exception& e) {
    throw InvalidModel("model file '" + path.string() + "': " + e.what());
  }
}

void save_model(const PomdpModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << model_to_json(model).dump(2) << '\n';
}

}  // namespace pomdpcs
