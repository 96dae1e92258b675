#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "consolidate/consolidate.h"
#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(CLI_PATH) + " " + args + " 2>&1";
  Run r;
  FILE* p = ::popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int raw = ::pclose(p);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string config(const std::string& name) { return std::string(CONFIG_DIR) + "/" + name; }

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("consolidate-cli-" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& content = "") const {
    const fs::path p = path / name;
    if (!content.empty()) std::ofstream(p) << content;
    return p.string();
  }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("unknown key is reported with line and field") {
  TempDir dir;
  const std::string cfg = dir.file("bad.json", R"({
  "lambda": 1.0,
  "policy": {"type": "QP", "q": 3, "n": 2, "bogus": 1},
  "costs": {"A_R": 1, "c_R": 0, "h": 0.1, "A_D": 1, "c_D": 0, "omega": 0.1}
}
)");
  const Run r = run("evaluate --config " + cfg);
  CHECK(r.status == 2);
  CHECK(r.out.find(":3:") != std::string::npos);
  CHECK(r.out.find("policy.bogus") != std::string::npos);
}

TEST_CASE("missing cost key and malformed JSON exit 2") {
  TempDir dir;
  const std::string missing = dir.file("missing.json", R"({"lambda": 1.0, "policy": {"type": "QP", "q": 3, "n": 2},
 "costs": {"A_R": 1, "c_R": 0, "h": 0.1, "A_D": 1, "c_D": 0}})");
  Run r = run("evaluate --config " + missing);
  CHECK(r.status == 2);
  CHECK(r.out.find("omega") != std::string::npos);
  const std::string broken = dir.file("broken.json", "{\"lambda\": 1.0,,}");
  r = run("evaluate --config " + broken);
  CHECK(r.status == 2);
  r = run("evaluate --config " + dir.file("absent.json"));
  CHECK(r.status == 2);
}

TEST_CASE("simulate rejects too few cycles") {
  const Run r = run("simulate --config " + config("hp_reference.json") + " --cycles 99");
  CHECK(r.status == 2);
}

TEST_CASE("evaluate output is byte-identical across runs and matches the C interface") {
  TempDir dir;
  const std::string a = dir.file("a.json");
  const std::string b = dir.file("b.json");
  REQUIRE(run("evaluate --config " + config("hp_reference.json") + " --out " + a).status == 0);
  REQUIRE(run("evaluate --config " + config("hp_reference.json") + " --out " + b).status == 0);
  CHECK(slurp(a) == slurp(b));

  const json doc = json::parse(slurp(a));
  csl_system_desc d{};
  d.lambda = 1.0;
  d.kind = CSL_POLICY_HP;
  d.q = 6;
  d.T = 5.9199;
  d.Q = 14;
  d.costs = csl_costs{25.0, 0.0, 0.4, 15.0, 0.0, 0.8, 0.0};
  csl_system* sys = nullptr;
  REQUIRE(csl_system_create(&d, &sys) == CSL_OK);
  csl_evaluation ev;
  REQUIRE(csl_system_evaluate(sys, CSL_MODE_EXACT, CSL_DELAY_LINEAR, &ev) == CSL_OK);
  csl_system_destroy(sys);
  CHECK(doc["ac"].get<double>() == ev.ac);
  CHECK(doc["aod"].get<double>() == ev.aod);
  CHECK(doc["aosd"].get<double>() == ev.aosd);
  CHECK(doc["replenishment"]["e_k"].get<double>() == ev.replenish.e_k);
  CHECK(doc["cycle"]["e_wsq"].get<double>() == ev.cycle.e_wsq);
}

TEST_CASE("zero costs give zero average cost") {
  TempDir dir;
  const std::string out = dir.file("z.json");
  REQUIRE(run("evaluate --config " + config("qp_zero_cost.json") + " --out " + out).status == 0);
  CHECK(json::parse(slurp(out))["ac"].get<double>() == 0.0);
}

TEST_CASE("simulate is deterministic and agrees with evaluate") {
  TempDir dir;
  const std::string a = dir.file("a.json");
  const std::string b = dir.file("b.json");
  const std::string e = dir.file("e.json");
  const std::string args = "simulate --config " + config("hp_reference.json") + " --cycles 100000 --out ";
  REQUIRE(run(args + a).status == 0);
  REQUIRE(run(args + b).status == 0);
  CHECK(slurp(a) == slurp(b));
  REQUIRE(run("evaluate --config " + config("hp_reference.json") + " --out " + e).status == 0);
  const json sim = json::parse(slurp(a));
  const json ev = json::parse(slurp(e));
  for (const char* key : {"ac", "aod", "aosd", "air"}) {
    const double mean = sim["metrics"][key]["mean"].get<double>();
    const double se = sim["metrics"][key]["se"].get<double>();
    INFO(key);
    CHECK(std::abs(mean - ev[key].get<double>()) <= 3.0 * se);
  }
}

TEST_CASE("compare marks an unreachable quantity match as infeasible") {
  TempDir dir;
  const std::string cfg = dir.file("cmp.json", R"({
  "lambda": 1.0,
  "compare": {"target_elc": 2.5, "qh_list": [4, 6]}
}
)");
  const Run r = run("compare --config " + cfg);
  CHECK(r.status == 0);
  CHECK(r.out.find("infeasible") != std::string::npos);
}

TEST_CASE("verify passes on the default grid") {
  const Run r = run("verify");
  CHECK(r.status == 0);
  CHECK(r.out.find("exact orderings: PASS") != std::string::npos);
}

TEST_CASE("optimize trace has one row per evaluation") {
  TempDir dir;
  const std::string trace = dir.file("trace.csv");
  const std::string out = dir.file("opt.json");
  REQUIRE(run("optimize --config " + config("optimize_reference.json") + " --policy TP --trace " + trace + " --out " +
              out)
              .status == 0);
  std::ifstream in(trace);
  std::string line;
  long rows = -1;  // header
  while (std::getline(in, line)) ++rows;
  const json doc = json::parse(slurp(out));
  CHECK(rows == doc["evaluations"].get<long>());
  CHECK(doc["best"]["ac"].get<double>() > 0.0);
}
