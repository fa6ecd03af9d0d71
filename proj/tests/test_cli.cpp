#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "binyard/csv.hpp"
#include "binyard/json_io.hpp"

using namespace binyard;
namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "binyard_test_cli";

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " \"" BINYARD_CLI "\" " + args + " > \"" + (kWork / "stdout.txt").string() +
                          "\" 2> \"" + (kWork / "stderr.txt").string() + "\"";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Workdir {
  Workdir() {
    fs::remove_all(kWork);
    fs::create_directories(kWork);
  }
  ~Workdir() { fs::remove_all(kWork); }
};

std::string w(const char* sub) { return "\"" + (kWork / sub).string() + "\""; }

}  // namespace

TEST_CASE("usage errors exit 1") {
  Workdir wd;
  CHECK(run("") == 1);
  CHECK(run("fly-to-the-moon") == 1);
  CHECK(run("evaluate --rollouts 2 --out " + w("e")) == 1);  // neither agent nor checkpoint
  CHECK(run("evaluate --agent analytic --checkpoint x.bin --out " + w("e")) == 1);
  CHECK(run("simulate --steps -3") == 1);
  CHECK(run("simulate --agent oracle --out " + w("s")) == 1);
}

TEST_CASE("runtime failures exit 2") {
  Workdir wd;
  CHECK(run("simulate --plant /no/such/plant.json --out " + w("s")) == 2);
  CHECK(run("evaluate --checkpoint /no/such.bin --out " + w("e")) == 2);
  CHECK(run("gradcheck --perturb-bug") == 2);
}

TEST_CASE("simulate") {
  Workdir wd;
  REQUIRE(run("simulate --agent do-nothing --steps 600 --seed 4 --out " + w("a")) == 0);
  REQUIRE(run("simulate --agent do-nothing --steps 600 --seed 4 --out " + w("b")) == 0);
  const auto t = read_csv(kWork / "a" / "trajectory.csv");
  CHECK(t.rows.size() == 600);
  CHECK(slurp(kWork / "a" / "trajectory.csv") == slurp(kWork / "b" / "trajectory.csv"));
  for (const char* col : {"step", "container_id", "volume", "action", "success", "reward", "pu1_busy", "pu2_busy"})
    CHECK_NOTHROW(t.column(col));

  REQUIRE(run("simulate --agent analytic --steps 600 --seed 4 --out " + w("c")) == 0);
  const auto a = read_csv(kWork / "c" / "trajectory.csv");
  const auto si = a.column("success"), vi = a.column("volume");
  int emptied = 0;
  for (const auto& row : a.rows)
    if (row[si] == "1") {
      ++emptied;
      CHECK(std::stod(row[vi]) <= 40.0);
    }
  CHECK(emptied > 0);

  // seed from the environment
  REQUIRE(run("simulate --agent random --steps 50 --out " + w("d"), "BINYARD_SEED=9") == 0);
  REQUIRE(run("simulate --agent random --steps 50 --seed 9 --out " + w("e")) == 0);
  CHECK(slurp(kWork / "d" / "trajectory.csv") == slurp(kWork / "e" / "trajectory.csv"));
}

TEST_CASE("evaluate and report") {
  Workdir wd;
  REQUIRE(run("evaluate --agent analytic --rollouts 15 --seed 2 --out " + w("a")) == 0);
  REQUIRE(run("evaluate --agent analytic --rollouts 15 --seed 2 --out " + w("b")) == 0);
  const auto m = read_csv(kWork / "a" / "metrics.csv");
  REQUIRE(m.rows.size() == 1);
  CHECK(m.rows[0][m.column("rollouts")] == "15");
  CHECK(m.rows[0][m.column("violation_percentage")] == "0");
  CHECK(slurp(kWork / "a" / "report.json") == slurp(kWork / "b" / "report.json"));
  CHECK(slurp(kWork / "a" / "metrics.csv") == slurp(kWork / "b" / "metrics.csv"));

  REQUIRE(run("evaluate --agent do-nothing --rollouts 2 --seed 2 --out " + w("c")) == 0);
  const auto d = read_csv(kWork / "c" / "metrics.csv");
  CHECK(d.rows[0][d.column("violation_percentage")] == "undefined");

  REQUIRE(run("report --in " + w("a") + " --in " + w("c") + " --out " + w("all.csv")) == 0);
  CHECK(read_csv(kWork / "all.csv").rows.size() == 2);
}

TEST_CASE("train, then evaluate the checkpoint with masking") {
  Workdir wd;
  REQUIRE(run("train-curriculum --dry-run --scale 0.5") == 0);
  const auto plan = plan_from_json(Json::parse(slurp(kWork / "stdout.txt")));
  CHECK(plan.phases[0].budget_timesteps == 750000);
  CHECK_FALSE(fs::exists(kWork / "t"));

  REQUIRE(run("train-curriculum --plant \"" BINYARD_SOURCE_DIR "/configs/reduced_plant.json\" --scale 0.001 --seed 3 --out " +
              w("t")) == 0);
  for (int k = 1; k <= 5; ++k) {
    CHECK(fs::exists(kWork / "t" / ("ckpt_phase" + std::to_string(k) + ".bin")));
    CHECK(fs::exists(kWork / "t" / ("train_phase" + std::to_string(k) + ".csv")));
  }
  REQUIRE(run("evaluate --checkpoint " + w("t/ckpt_phase5.bin") + " --plant \"" BINYARD_SOURCE_DIR
              "/configs/reduced_plant.json\" --rollouts 3 --seed 1 --out " + w("e")) == 0);
  const auto m = read_csv(kWork / "e" / "metrics.csv");
  CHECK(m.rows[0][m.column("mask_violations")] == "0");

  // 5-container checkpoint against the 11-container plant
  CHECK(run("evaluate --checkpoint " + w("t/ckpt_phase5.bin") + " --rollouts 1 --out " + w("x")) == 2);

  REQUIRE(run("train-phase --plant \"" BINYARD_SOURCE_DIR "/configs/reduced_plant.json\" --phase 4 --checkpoint " +
              w("t/ckpt_phase3.bin") + " --scale 0.001 --seed 3 --out " + w("p")) == 0);
}

TEST_CASE("gradcheck") {
  Workdir wd;
  REQUIRE(run("gradcheck --seed 5") == 0);
  const auto first = slurp(kWork / "stdout.txt");
  REQUIRE(run("gradcheck --seed 5") == 0);
  CHECK(slurp(kWork / "stdout.txt") == first);
  CHECK(first.find("max relative error") != std::string::npos);
}
