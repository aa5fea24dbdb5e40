// Drives the installed-style binary through std::system: the contract
// here is the command line itself, not the library underneath.

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "touchsplat_cli";

int run_cmd(const std::string& args) {
  const std::string cmd = std::string(RECONSTRUCT_BIN) + " " + args + " >> " +
                          (kRoot / "log.txt").string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -2;
}

std::string slurp(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f.good());
  return std::string(std::istreambuf_iterator<char>(f), {});
}

void write_file(const fs::path& path, const std::string& body) {
  std::ofstream f(path, std::ios::binary);
  f << body;
}

// Shrinks the workload so the suite stays fast; everything else rides
// on the binary's defaults.
const char* kSmallConfig = R"({
  "image_size": 32,
  "metrics": {"ground_truth_samples": 20000, "cadence": 5}
})";

}  // namespace

TEST_CASE("an end-to-end run writes every artifact") {
  fs::remove_all(kRoot);
  fs::create_directories(kRoot);
  write_file(kRoot / "small.json", kSmallConfig);

  const fs::path out = kRoot / "a";
  const int rc = run_cmd(
      "--scene cube --condition occlusion --touch on --iters 10 --seed 3 "
      "--config " + (kRoot / "small.json").string() + " --out " + out.string());
  REQUIRE(rc == 0);

  const std::string csv = slurp(out / "metrics.csv");
  CHECK(csv.rfind("iteration,cd_mm,fscore_pct,jsd\n", 0) == 0);
  CHECK(csv.find("\n10,") != std::string::npos);  // final off-cadence row

  const std::string ply = slurp(out / "model.ply");
  CHECK(ply.rfind("ply\n", 0) == 0);
  CHECK(fs::exists(out / "renders" / "view_0_10.png"));

  const nlohmann::json meta = nlohmann::json::parse(slurp(out / "run.json"));
  CHECK(meta.at("config").at("iterations") == 10);
  CHECK(meta.at("config").at("seed") == 3);
  CHECK(meta.at("config").at("image_size") == 32);
  CHECK(meta.at("config").at("condition") == "occlusion");
  CHECK(meta.at("config").at("touch").at("enabled") == true);
  CHECK(meta.at("run").contains("final_stage"));
  CHECK(meta.at("run").at("iterations_completed") == 10);
}

TEST_CASE("a rerun with the same seed is byte-identical") {
  // Depends on the run the previous case produced.
  const fs::path out = kRoot / "b";
  const int rc = run_cmd(
      "--scene cube --condition occlusion --touch on --iters 10 --seed 3 "
      "--config " + (kRoot / "small.json").string() + " --out " + out.string());
  REQUIRE(rc == 0);
  CHECK(slurp(kRoot / "a" / "metrics.csv") == slurp(out / "metrics.csv"));
  CHECK(slurp(kRoot / "a" / "model.ply") == slurp(out / "model.ply"));
}

TEST_CASE("explicit flags override config-file values") {
  write_file(kRoot / "override.json", R"({
    "iterations": 99,
    "seed": 7,
    "image_size": 32,
    "touch": {"enabled": true},
    "metrics": {"ground_truth_samples": 20000}
  })");
  const fs::path out = kRoot / "c";
  const int rc = run_cmd("--scene can --touch off --iters 6 --config " +
                         (kRoot / "override.json").string() + " --out " +
                         out.string());
  REQUIRE(rc == 0);

  const nlohmann::json meta = nlohmann::json::parse(slurp(out / "run.json"));
  CHECK(meta.at("config").at("iterations") == 6);   // flag beats file
  CHECK(meta.at("config").at("seed") == 7);         // file beats default
  CHECK(meta.at("config").at("touch").at("enabled") == false);
  CHECK(meta.at("run").at("spawned") == 0);
}

TEST_CASE("invalid invocations exit nonzero") {
  fs::create_directories(kRoot);
  CHECK(run_cmd("--scene pyramid --out " + (kRoot / "x").string()) != 0);
  CHECK(run_cmd("--bogus-flag 1") != 0);
  CHECK(run_cmd("--config " + (kRoot / "missing.json").string()) != 0);
  CHECK(run_cmd("--scene cube --iters -5 --out " + (kRoot / "x").string()) !=
        0);
  fs::remove_all(kRoot);
}
