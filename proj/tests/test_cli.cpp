#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include <sys/wait.h>

#include <json.hpp>

#include "pomdpcs/cli.hpp"
#include "support.hpp"

using namespace pomdpcs;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "pomdpcs-cli-tests" / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

RunConfig config(const std::string& command, std::vector<std::string> models, const fs::path& out) {
  RunConfig c;
  c.command = command;
  for (const auto& m : models) c.models.push_back(testing::fixture(m));
  c.out = out;
  return c;
}

int run_quiet(const RunConfig& c) {
  std::ostringstream log;
  return run(c, log);
}

// Every file byte-identical except manifest.json, whose runtime block is
// allowed to differ.
void check_same_artifacts(const fs::path& a, const fs::path& b) {
  std::set<std::string> names_a, names_b;
  for (const auto& e : fs::directory_iterator(a)) names_a.insert(e.path().filename().string());
  for (const auto& e : fs::directory_iterator(b)) names_b.insert(e.path().filename().string());
  CHECK(names_a == names_b);
  for (const auto& n : names_a) {
    INFO(n);
    if (n == "manifest.json") {
      auto ma = read_json(a / n), mb = read_json(b / n);
      ma.erase("runtime");
      mb.erase("runtime");
      CHECK(ma == mb);
    } else {
      CHECK(slurp(a / n) == slurp(b / n));
    }
  }
}

}  // namespace

TEST_CASE("validate") {
  const auto out = scratch("validate");
  CHECK(run_quiet(config("validate", {"quickest_detection.json"}, out)) == kExitOk);
  const auto doc = read_json(out / "validation.json");
  CHECK(doc["valid"] == true);
  CHECK(doc["models"][0]["violations"].empty());
  const auto manifest = read_json(out / "manifest.json");
  CHECK(manifest["exit_code"] == 0);
  CHECK(manifest["version"] == kToolVersion);

  const auto bad = scratch("validate-bad");
  CHECK(run_quiet(config("validate", {"bad_rows.json"}, bad)) == kExitInputError);
  CHECK(read_json(bad / "validation.json")["valid"] == false);
  CHECK(fs::exists(bad / "manifest.json"));
}

TEST_CASE("input errors") {
  const auto out = scratch("errors");
  auto c = config("verify", {"quickest_detection.json"}, out);
  c.predicates = {"concavity", "bogus"};
  std::ostringstream log;
  CHECK(run(c, log) == kExitInputError);
  CHECK(log.str().find("bogus") != std::string::npos);
  CHECK_FALSE(fs::exists(out / "verify_concavity.json"));
  CHECK(fs::exists(out / "manifest.json"));
  CHECK(read_json(out / "manifest.json")["exit_code"] == 1);

  CHECK(run_quiet(config("solve", {"missing.json"}, scratch("missing"))) == kExitInputError);
  CHECK(run_quiet(config("frobnicate", {"quickest_detection.json"}, scratch("cmd"))) ==
        kExitInputError);
  CHECK(run_quiet(config("solve", {}, scratch("nomodel"))) == kExitInputError);
  CHECK(run_quiet(config("solve", {"bad_rows.json"}, scratch("badsolve"))) == kExitInputError);
  CHECK(run_quiet(config("qd-threshold", {"sensing_x2.json"}, scratch("notqd"))) ==
        kExitInputError);
}

TEST_CASE("verify") {
  SUBCASE("concavity on quickest detection holds") {
    const auto out = scratch("verify-qd");
    auto c = config("verify", {"quickest_detection.json"}, out);
    c.predicates = {"concavity", "stopping-convex", "threshold"};
    CHECK(run_quiet(c) == kExitOk);
    CHECK(read_json(out / "verify_concavity.json")["holds"] == true);
    CHECK(read_json(out / "verify.json")["holds"] == true);
    CHECK(fs::exists(out / "manifest.json"));
  }
  SUBCASE("a non-TP2 observation matrix is reported with its witness") {
    const auto out = scratch("verify-tp2");
    auto c = config("verify", {"non_tp2_observation.json"}, out);
    c.predicates = {"tp2"};
    CHECK(run_quiet(c) == kExitViolation);
    const auto doc = read_json(out / "verify_tp2.json");
    CHECK(doc["holds"] == false);
    bool found = false;
    for (const auto& r : doc["reports"])
      if (r["holds"] == false) found = r["witness"]["indices"].size() == 4;
    CHECK(found);
    CHECK(read_json(out / "manifest.json")["exit_code"] == 2);
  }
}

TEST_CASE("solve artifacts") {
  const auto out = scratch("solve");
  auto c = config("solve", {"sensing_x2.json"}, out);
  c.grid = 50;
  CHECK(run_quiet(c) == kExitOk);
  std::istringstream csv(slurp(out / "value.csv"));
  std::string header;
  std::getline(csv, header);
  CHECK(header == "pi_1,pi_2,value,action,q_1,q_2");
  int rows = 0;
  for (std::string line; std::getline(csv, line);) ++rows;
  CHECK(rows == 51);
  const auto doc = read_json(out / "solve.json");
  CHECK(doc["converged"] == true);
}

TEST_CASE("artifacts are identical across reruns and worker counts") {
  struct Case {
    std::string command;
    std::vector<std::string> models;
    std::vector<std::string> predicates;
    int grid;
    int paths;
  };
  const std::vector<Case> cases = {
      {"solve", {"sensing_x3.json"}, {}, 20, 0},
      {"verify", {"monotone_a1a3.json"}, {"concavity", "mlr-monotone", "assumptions"}, 20, 0},
      {"qd-simulate", {"quickest_detection.json"}, {}, 200, 3000},
      {"compare", {"filter_vs_predictor.json"}, {}, 100, 1000},
      {"evaluate", {"sensing_x2.json"}, {}, 100, 1000},
  };
  for (const auto& k : cases) {
    INFO(k.command);
    std::vector<fs::path> dirs;
    for (int w : {1, 8, 8}) {
      const auto out = scratch(k.command + "-w" + std::to_string(w) + "-" + std::to_string(dirs.size()));
      auto c = config(k.command, k.models, out);
      c.predicates = k.predicates;
      c.grid = k.grid;
      c.paths = k.paths;
      c.workers = w;
      c.seed = 42;
      CHECK(run_quiet(c) == kExitOk);
      dirs.push_back(out);
    }
    check_same_artifacts(dirs[0], dirs[1]);
    check_same_artifacts(dirs[1], dirs[2]);
  }
}

TEST_CASE("command-line binary") {
  const auto out = scratch("binary");
  const std::string exe = POMDPCS_CLI_PATH;
  const auto sh = [&](const std::string& args) {
    const int status = std::system((exe + " " + args + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
  };
  const std::string qd = testing::fixture("quickest_detection.json").string();
  CHECK(sh("validate --model " + qd + " --out " + out.string()) == 0);
  CHECK(fs::exists(out / "manifest.json"));
  CHECK(sh("verify --model " + testing::fixture("non_tp2_observation.json").string() +
           " --predicates tp2 --out " + out.string()) == 2);
  CHECK(sh("verify --model " + qd + " --predicates nope --out " + out.string()) == 1);
  CHECK(sh("--no-such-flag") == 1);
  CHECK(sh("ultrametric-root --model " + testing::fixture("ultrametric_chain.json").string() +
           " --root-degree 4 --out " + out.string()) == 0);
  CHECK(sh("--version") == 0);

  const auto env_out = scratch("env");
  const std::string cmd = "POMDPCS_OUT=" + env_out.string() + " " + exe + " validate --model " +
                          qd + " > /dev/null 2>&1";
  CHECK(WEXITSTATUS(std::system(cmd.c_str())) == 0);
  CHECK(fs::exists(env_out / "manifest.json"));
}
