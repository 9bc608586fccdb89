#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "test_util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string stdout_text;
};

CliResult run_cli(const std::string& args, const fs::path& workdir) {
  const std::string out_file = (workdir / "stdout.txt").string();
  const std::string cmd = "cd " + workdir.string() + " && " + std::string(RAGTUNE_CLI_PATH) + " " + args + " > " +
                          out_file + " 2>&1";
  const int raw = std::system(cmd.c_str());
  CliResult res;
  res.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  res.stdout_text = testutil::slurp(out_file);
  return res;
}

void write_config(const fs::path& path, const json& config) { testutil::spit(path.string(), config.dump(2)); }

}  // namespace

TEST_CASE("gen-landscape writes deterministic files and optional replay fixtures") {
  testutil::TempDir dir("ragtune-cli");
  auto first = run_cli("--out land gen-landscape --regime easy --gen-seed 11 --export-replay 8", dir.path());
  INFO(first.stdout_text);
  REQUIRE(first.exit_code == 0);
  CHECK(fs::exists(dir.path() / "land/landscape.json"));
  CHECK(fs::exists(dir.path() / "land/replay.csv"));
  CHECK(fs::exists(dir.path() / "land/replay.manifest.json"));

  const std::string bytes = testutil::slurp((dir.path() / "land/landscape.json").string());
  auto second = run_cli("--out land gen-landscape --regime easy --gen-seed 11 --export-replay 8", dir.path());
  REQUIRE(second.exit_code == 0);
  CHECK(testutil::slurp((dir.path() / "land/landscape.json").string()) == bytes);  // idempotent rerun
}

TEST_CASE("validate accepts clean fixtures and names broken rows") {
  testutil::TempDir dir("ragtune-cli");
  REQUIRE(run_cli("--out f gen-landscape --regime medium --gen-seed 3 --export-replay 6", dir.path()).exit_code == 0);

  auto clean = run_cli("validate f/replay.csv", dir.path());
  INFO(clean.stdout_text);
  CHECK(clean.exit_code == 0);

  // corrupt one accuracy
  const fs::path csv = dir.path() / "f/replay.csv";
  std::string content = testutil::slurp(csv.string());
  const auto pos = content.find('\n') + 1;
  const auto eol = content.find('\n', pos);
  testutil::spit(csv.string(), content.substr(0, pos) + "0,q000,1.2,100\n" + content.substr(eol + 1));
  auto broken = run_cli("validate f/replay.csv", dir.path());
  CHECK(broken.exit_code == 4);
  CHECK(broken.stdout_text.find("line 2") != std::string::npos);

  // missing manifest entry
  testutil::spit(csv.string(), content);
  const fs::path manifest = dir.path() / "f/replay.manifest.json";
  json m = json::parse(testutil::slurp(manifest.string()));
  m["configs"].erase("3");
  testutil::spit(manifest.string(), m.dump(2));
  auto gap = run_cli("validate f/replay.csv", dir.path());
  CHECK(gap.exit_code == 4);
  CHECK(gap.stdout_text.find("config_id 3") != std::string::npos);
}

TEST_CASE("grid writes an oracle with one row per config and is byte-stable") {
  testutil::TempDir dir("ragtune-cli");
  REQUIRE(run_cli("--out f gen-landscape --regime easy --gen-seed 5 --export-replay 4", dir.path()).exit_code == 0);

  write_config(dir.path() / "grid.json",
               {{"space", "rag3"}, {"environment", {{"type", "replay"}, {"csv", "f/replay.csv"}}}});
  auto res = run_cli("--config grid.json --out g grid", dir.path());
  INFO(res.stdout_text);
  REQUIRE(res.exit_code == 0);
  CHECK(res.stdout_text.find("eval_count=300") != std::string::npos);  // 75 configs x 4 queries

  const std::string oracle = testutil::slurp((dir.path() / "g/oracle.csv").string());
  // header + 75 rows
  CHECK(std::count(oracle.begin(), oracle.end(), '\n') == 76);

  auto rerun = run_cli("--config grid.json --out g grid", dir.path());
  REQUIRE(rerun.exit_code == 0);
  CHECK(testutil::slurp((dir.path() / "g/oracle.csv").string()) == oracle);

  // analytic path reports zero sampled queries
  write_config(dir.path() / "grid2.json",
               {{"space", "rag3"}, {"environment", {{"type", "landscape"}, {"regime", "easy"}, {"seed", 5}}}});
  auto analytic = run_cli("--config grid2.json --out g2 grid", dir.path());
  REQUIRE(analytic.exit_code == 0);
  CHECK(analytic.stdout_text.find("eval_count=0") != std::string::npos);
}

TEST_CASE("run produces per-seed trajectories, results and aggregate files") {
  testutil::TempDir dir("ragtune-cli");
  write_config(dir.path() / "run.json", {{"space", "rag2"},
                                         {"environment", {{"type", "landscape"}, {"regime", "easy"}, {"seed", 7}}},
                                         {"method", "random"},
                                         {"T", 20},
                                         {"B", 4},
                                         {"n_seeds", 2},
                                         {"seed", 42}});
  auto res = run_cli("--config run.json --out r run", dir.path());
  INFO(res.stdout_text);
  REQUIRE(res.exit_code == 0);
  CHECK(fs::exists(dir.path() / "r/results.csv"));
  CHECK(fs::exists(dir.path() / "r/aggregate.csv"));
  CHECK(fs::exists(dir.path() / "r/oracle.csv"));
  CHECK(fs::exists(dir.path() / "r/trials_seed000.csv"));
  CHECK(fs::exists(dir.path() / "r/trials_seed001.csv"));
  CHECK_FALSE(fs::exists(dir.path() / "r/trials_seed002.csv"));
  CHECK(fs::exists(dir.path() / "r/resolved-config.json"));

  // same master seed -> identical bytes
  const std::string agg = testutil::slurp((dir.path() / "r/aggregate.csv").string());
  auto rerun = run_cli("--config run.json --out r2 run", dir.path());
  REQUIRE(rerun.exit_code == 0);
  CHECK(testutil::slurp((dir.path() / "r2/aggregate.csv").string()) == agg);

  // CLI seed override changes the outcome and is echoed in resolved-config
  auto reseeded = run_cli("--config run.json --out r3 --seed 43 run", dir.path());
  REQUIRE(reseeded.exit_code == 0);
  const json resolved = json::parse(testutil::slurp((dir.path() / "r3/resolved-config.json").string()));
  CHECK(resolved.at("seed") == 43);
}

TEST_CASE("unknown config keys and bad values exit with the config code") {
  testutil::TempDir dir("ragtune-cli");
  write_config(dir.path() / "bad.json", {{"space", "rag2"}, {"alpha_z", 1.0}});
  auto res = run_cli("--config bad.json run", dir.path());
  CHECK(res.exit_code == 2);
  CHECK(res.stdout_text.find("alpha_z") != std::string::npos);

  write_config(dir.path() / "bad2.json",
               {{"space", "rag2"}, {"method", "ucb2"},
                {"environment", {{"type", "landscape"}, {"regime", "easy"}, {"seed", 1}}}});
  CHECK(run_cli("--config bad2.json run", dir.path()).exit_code == 2);

  // missing replay file is an environment error
  write_config(dir.path() / "bad3.json",
               {{"space", "rag2"}, {"environment", {{"type", "replay"}, {"csv", "missing.csv"}}}});
  CHECK(run_cli("--config bad3.json run", dir.path()).exit_code == 3);
}

TEST_CASE("sweep lays out one subdirectory per cell") {
  testutil::TempDir dir("ragtune-cli");
  write_config(dir.path() / "sweep.json",
               {{"space", "rag2"},
                {"environment", {{"type", "landscape"}, {"regime", "easy"}, {"seed", 7}}},
                {"method", "hier_ucb"},
                {"T", 15},
                {"B", 4},
                {"n_seeds", 2},
                {"sweep", {{"alpha_h", {0.5, 1.5}}, {"alpha_l", {0.5, 1.5}}}}});
  auto res = run_cli("--config sweep.json --out s sweep", dir.path());
  INFO(res.stdout_text);
  REQUIRE(res.exit_code == 0);
  for (int i = 0; i < 4; ++i) {
    char name[16];
    std::snprintf(name, sizeof(name), "cell_%03d", i);
    CHECK(fs::exists(dir.path() / "s" / name / "aggregate.csv"));
    CHECK(fs::exists(dir.path() / "s" / name / "cell-config.json"));
  }
  CHECK_FALSE(fs::exists(dir.path() / "s/cell_004"));
  CHECK(fs::exists(dir.path() / "s/sweep_summary.csv"));

  write_config(dir.path() / "sweep_bad.json",
               {{"space", "rag2"},
                {"environment", {{"type", "landscape"}, {"regime", "easy"}, {"seed", 7}}},
                {"T", 10},
                {"sweep", {{"alpha_z", {1.0}}}}});
  auto bad = run_cli("--config sweep_bad.json --out sb sweep", dir.path());
  CHECK(bad.exit_code == 2);
  CHECK(bad.stdout_text.find("alpha_z") != std::string::npos);
}

TEST_CASE("switch runs both phases and tags the mode in its metadata") {
  testutil::TempDir dir("ragtune-cli");
  REQUIRE(run_cli("--out p gen-landscape --switch-pair --gen-seed 9", dir.path()).exit_code == 0);

  write_config(dir.path() / "switch.json",
               {{"space", "rag3"},
                {"method", "hier_ucb"},
                {"T", 50},
                {"B", 4},
                {"n_seeds", 2},
                {"switch",
                 {{"phase1", {{"type", "landscape"}, {"file", "p/landscape_phase1.json"}}},
                  {"phase2", {{"type", "landscape"}, {"file", "p/landscape_phase2.json"}}},
                  {"switch_budget", 100},
                  {"mode", "reset"}}}});
  auto res = run_cli("--config switch.json --out sw switch", dir.path());
  INFO(res.stdout_text);
  REQUIRE(res.exit_code == 0);
  CHECK(fs::exists(dir.path() / "sw/phase1_results.csv"));
  CHECK(fs::exists(dir.path() / "sw/phase2_results.csv"));
  CHECK(fs::exists(dir.path() / "sw/phase1_trials_seed000.csv"));
  CHECK(fs::exists(dir.path() / "sw/phase2_trials_seed001.csv"));
  const json meta = json::parse(testutil::slurp((dir.path() / "sw/resolved-config.json").string()));
  CHECK(meta.at("switch").at("mode") == "reset");

  auto cont = run_cli("--config switch.json --out sw2 switch --mode continue", dir.path());
  REQUIRE(cont.exit_code == 0);
  const json meta2 = json::parse(testutil::slurp((dir.path() / "sw2/resolved-config.json").string()));
  CHECK(meta2.at("switch").at("mode") == "continue");
}
