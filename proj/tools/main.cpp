#include <iostream>

#include <CLI11.hpp>

#include "pomdpcs/cli.hpp"

int main(int argc, char** argv) {
  pomdpcs::RunConfig cfg;
  CLI::App app{"POMDP controlled sensing: solve, verify and simulate"};
  app.set_version_flag("--version", pomdpcs::kToolVersion);

  std::vector<std::string> models;
  std::string predicates;
  std::string threshold;
  app.add_option("command", cfg.command, "Command to run")
      ->required()
      ->check(CLI::IsMember(pomdpcs::known_commands()));
  app.add_option("--model", models, "Model file (JSON); validate accepts several");
  app.add_option("--grid", cfg.grid, "Grid resolution M (default depends on the state count)");
  app.add_option("--tol", cfg.tol, "Value iteration tolerance");
  app.add_option("--max-iters", cfg.max_iters, "Value iteration cap");
  app.add_option("--seed", cfg.seed, "Random seed");
  app.add_option("--paths", cfg.paths, "Monte Carlo paths");
  app.add_option("--out", cfg.out, "Output directory (default $POMDPCS_OUT or pomdpcs-out)");
  app.add_option("--predicates", predicates, "Comma-separated verify predicates");
  app.add_option("--kappa", cfg.kappas, "Homogeneity scales")->delimiter(',');
  app.add_option("--root-degree", cfg.root_degree, "Degree U of the matrix root");
  app.add_option("--action", cfg.action, "Observation matrix used by ultrametric-root");
  app.add_option("--workers", cfg.workers, "Worker threads");
  app.add_option("--count", cfg.count, "Models drawn by conjecture-probe");
  app.add_option("--threshold", threshold, "Announcement threshold for qd-simulate");
  app.add_option("--baseline", cfg.baseline, "Baseline policy: myopic or constant:<u>");
  app.add_option("--horizon-cap", cfg.horizon_cap, "Path length cap for simulation");
  app.add_option("--eval-tol", cfg.eval_tolerance, "Discounted truncation tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : pomdpcs::kExitInputError;
  }

  for (const auto& m : models) cfg.models.emplace_back(m);
  std::stringstream list(predicates);
  for (std::string p; std::getline(list, p, ',');)
    if (!p.empty()) cfg.predicates.push_back(p);
  if (!threshold.empty()) {
    try {
      cfg.threshold = std::stod(threshold);
    } catch (const std::exception&) {
      std::cerr << "error: threshold: not a number\n";
      return pomdpcs::kExitInputError;
    }
  }
  return pomdpcs::run(cfg, std::cerr);
}
