#include <doctest.h>

#include <json.hpp>

#include <impsep/imp.hpp>
#include <impsep/rng.hpp>
#include <impsep/serialize.hpp>
#include <impsep/sha256.hpp>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

#include "support/builders.hpp"

extern std::string g_impsep_binary;

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace impsep;
using namespace impsep::testing;

struct CliResult {
  int code = -1;
  std::string out;
};

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "impsep-cli-tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Runs the CLI from `dir` so relative output paths land in the scratch area.
// `env` is a shell-style prefix like "IMPSEP_SEED=9 ".
CliResult run_cli(const fs::path& dir, const std::string& args, const std::string& env = "") {
  const fs::path capture = dir / ".cli-capture.txt";
  const std::string command = "cd '" + dir.string() + "' && " + env + "'" + g_impsep_binary +
                              "' " + args + " > '" + capture.string() + "' 2>&1";
  const int status = std::system(command.c_str());
  CliResult result;
  result.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = read_text_file(capture.string());
  return result;
}

std::string file_text(const fs::path& path) { return read_text_file(path.string()); }

void write_model(const fs::path& dir) {
  write_text_file((dir / "model.json").string(), imp_to_json_text(two_block_imp()));
}

}  // namespace

TEST_CASE("help and version exit cleanly") {
  const fs::path dir = fresh_dir("help");
  const CliResult help = run_cli(dir, "--help");
  CHECK(help.code == 0);
  CHECK(help.out.find("generate") != std::string::npos);
  CHECK(help.out.find("deinterleave") != std::string::npos);
  CHECK(run_cli(dir, "--version").code == 0);
  // A parse error (missing required option) is an input problem.
  CHECK(run_cli(dir, "generate").code == 2);
}

TEST_CASE("generate is deterministic and writes a manifest") {
  const fs::path dir = fresh_dir("generate");
  write_model(dir);

  const CliResult first =
      run_cli(dir, "generate model.json -n 500 --seed 7 -o seq_a.txt --single-char");
  REQUIRE(first.code == 0);
  CHECK(first.out.find("wrote 500 symbols") != std::string::npos);

  REQUIRE(run_cli(dir, "generate model.json -n 500 --seed 7 -o seq_b.txt --single-char").code ==
          0);
  const std::string text_a = file_text(dir / "seq_a.txt");
  CHECK(text_a == file_text(dir / "seq_b.txt"));
  REQUIRE(text_a.size() == 501);  // 500 symbols plus trailing newline
  for (std::size_t i = 0; i < 500; ++i) {
    const char c = text_a[i];
    CHECK((c == 'a' || c == 'b' || c == 'c' || c == 'd'));
  }

  REQUIRE(run_cli(dir, "generate model.json -n 500 --seed 8 -o seq_c.txt --single-char").code ==
          0);
  CHECK(text_a != file_text(dir / "seq_c.txt"));

  const RunManifest manifest =
      manifest_from_json_text(file_text(dir / "seq_a.txt.manifest.json"));
  CHECK(manifest.subcommand == "generate");
  CHECK(manifest.seed == 7);
  CHECK(manifest.rng_name == kRngName);
  REQUIRE(manifest.input_digests.size() == 1);
  CHECK(manifest.input_digests[0].first == "model.json");
  CHECK(manifest.input_digests[0].second == sha256_hex(file_text(dir / "model.json")));
}

TEST_CASE("environment seed beats the flag and replay ignores both") {
  const fs::path dir = fresh_dir("env-seed");
  write_model(dir);

  REQUIRE(run_cli(dir, "generate model.json -n 400 --seed 7 -o want.txt --single-char").code ==
          0);
  REQUIRE(run_cli(dir, "generate model.json -n 400 --seed 99 -o got.txt --single-char",
                  "IMPSEP_SEED=7 ")
              .code == 0);
  const std::string want = file_text(dir / "want.txt");
  CHECK(want == file_text(dir / "got.txt"));

  // Replay regenerates the recorded run even when the environment disagrees.
  fs::remove(dir / "want.txt");
  REQUIRE(run_cli(dir, "replay want.txt.manifest.json", "IMPSEP_SEED=123 ").code == 0);
  CHECK(want == file_text(dir / "want.txt"));

  // A changed input file is detected by its digest.
  write_text_file((dir / "model.json").string(), file_text(dir / "model.json") + "\n");
  const CliResult stale = run_cli(dir, "replay want.txt.manifest.json");
  CHECK(stale.code == 2);
  CHECK(stale.out.find("changed") != std::string::npos);
}

TEST_CASE("deinterleave recovers the planted blocks and writes streams") {
  const fs::path dir = fresh_dir("roundtrip");
  write_model(dir);
  REQUIRE(run_cli(dir, "generate model.json -n 15000 --seed 3 -o seq.txt --single-char").code ==
          0);

  const CliResult run =
      run_cli(dir, "deinterleave seq.txt --single-char --seed 5 --json result.json");
  REQUIRE(run.code == 0);
  CHECK(run.out.find("partition") != std::string::npos);

  const json report = json::parse(file_text(dir / "result.json"));
  const json expected_partition = json::array({json::array({"a", "b"}), json::array({"c", "d"})});
  CHECK(report.at("partition") == expected_partition);
  CHECK(report.at("orders").at("components") == json::array({1, 1}));
  CHECK(report.at("orders").at("switch") == 0);
  CHECK(report.at("cost").at("penalty_bits").get<double>() > 0.0);
  CHECK(report.at("cost").at("total_bits").get<double>() > 0.0);

  // Stream files: one per block, named by block display label, plus the switch track.
  const std::string stream_a = file_text(dir / "seq.txt.A");
  const std::string stream_c = file_text(dir / "seq.txt.C");
  std::size_t symbols = 0;
  for (char c : stream_a) {
    if (c == '\n') continue;
    ++symbols;
    CHECK((c == 'a' || c == 'b'));
  }
  for (char c : stream_c) {
    if (c == '\n') continue;
    ++symbols;
    CHECK((c == 'c' || c == 'd'));
  }
  CHECK(symbols == 15000);

  std::size_t switch_tokens = 0;
  for (char c : file_text(dir / "seq.txt.switch")) {
    if (c == 'A' || c == 'C') ++switch_tokens;
  }
  CHECK(switch_tokens == 15000);

  // Replay reproduces the result file byte for byte.
  const std::string saved = file_text(dir / "result.json");
  fs::remove(dir / "result.json");
  REQUIRE(run_cli(dir, "replay result.json.manifest.json").code == 0);
  CHECK(saved == file_text(dir / "result.json"));
}

TEST_CASE("deinterleave handles blank input and reports budget blowups") {
  const fs::path dir = fresh_dir("edges");

  write_text_file((dir / "blank.txt").string(), " \n \n");
  const CliResult blank = run_cli(dir, "deinterleave blank.txt --single-char");
  CHECK(blank.code == 0);
  const json report = json::parse(blank.out);
  CHECK(report.at("partition") == json::array({json::array()}));
  CHECK_FALSE(fs::exists(dir / "blank.txt.A"));

  write_text_file((dir / "wide.txt").string(), "abcdefghijklmno\n");
  const CliResult wide =
      run_cli(dir, "deinterleave wide.txt --single-char --mode exhaustive --max-blocks 15");
  CHECK(wide.code == 3);
  CHECK(wide.out.find("error:") != std::string::npos);

  CHECK(run_cli(dir, "deinterleave blank.txt --mode sideways").code == 2);
  CHECK(run_cli(dir, "deinterleave no_such_file.txt").code == 2);

  write_text_file((dir / "tiny.txt").string(), "abab\n");
  REQUIRE(run_cli(dir, "deinterleave tiny.txt --single-char --no-streams").code == 0);
  CHECK_FALSE(fs::exists(dir / "tiny.txt.A"));
}

TEST_CASE("analyze reports switch structure for a composite model") {
  const fs::path dir = fresh_dir("analyze");
  write_model(dir);

  const CliResult run = run_cli(dir, "analyze model.json -o report.json");
  REQUIRE(run.code == 0);
  const json report = json::parse(file_text(dir / "report.json"));

  // Memoryless switch: no domination anywhere, both labels in layer zero.
  CHECK(report.at("domination").at("A") == json::array());
  CHECK(report.at("domination").at("C") == json::array());
  CHECK(report.at("mutual") == json::array());
  CHECK(report.at("totally_dominant") == json::array());
  CHECK(report.at("layers") == json::array({json::array({"A", "C"})}));

  const json expected_partition = json::array({json::array({"a", "b"}), json::array({"c", "d"})});
  CHECK(report.at("canonical_partition") == expected_partition);
  REQUIRE(report.at("compatible_partitions").is_array());
  bool saw_truth = false;
  for (const json& p : report.at("compatible_partitions")) {
    if (p == expected_partition) saw_truth = true;
  }
  CHECK(saw_truth);
  CHECK(report.at("kappa").at("interleaved").get<int>() > 0);
  CHECK(report.at("kappa").at("fsm").get<int>() >= report.at("kappa").at("interleaved").get<int>());
  CHECK(report.at("kappa").at("split_delta").get<int>() == 0);
}

TEST_CASE("benchmark checks assertions against the result table") {
  const fs::path dir = fresh_dir("benchmark");
  json config;
  config["num_sequences"] = 3;
  config["lengths"] = json::array({300});
  config["block_sizes"] = json::array({2, 2});
  config["orders"] = {{"components", json::array({1, 1})}, {"switch", 0}};
  config["switch_kind"] = "memoryless-uniform";
  config["seed"] = 11;
  config["methods"] = json::array({"ml_heuristic"});
  config["assertions"] = json::array(
      {{{"n", 300}, {"method", "ml_heuristic"}, {"metric", "exact"}, {"min", 0.0}, {"max", 1.0}}});
  write_text_file((dir / "cfg.json").string(), config.dump(2) + "\n");

  const CliResult pass = run_cli(dir, "benchmark --config cfg.json -o table.csv --assert");
  CHECK(pass.code == 0);
  CHECK(pass.out.find("all assertions passed") != std::string::npos);
  const std::string csv = file_text(dir / "table.csv");
  CHECK(csv.rfind("n,method,success_exact,success_canonical,success_compatible\n", 0) == 0);
  CHECK(csv.find("300,ml_heuristic,") != std::string::npos);

  config["assertions"][0]["min"] = 1.1;  // impossible: rates never exceed 1
  write_text_file((dir / "cfg_fail.json").string(), config.dump(2) + "\n");
  const CliResult fail = run_cli(dir, "benchmark --config cfg_fail.json --assert");
  CHECK(fail.code == 1);
  CHECK(fail.out.find("[FAIL]") != std::string::npos);
  CHECK(fail.out.find("assertion(s) failed") != std::string::npos);

  config["bogus"] = 1;
  write_text_file((dir / "cfg_bad.json").string(), config.dump(2) + "\n");
  CHECK(run_cli(dir, "benchmark --config cfg_bad.json").code == 2);
}

TEST_CASE("calibrate sweeps tolerance scales into a csv") {
  const fs::path dir = fresh_dir("calibrate");
  json config;
  config["num_sequences"] = 2;
  config["lengths"] = json::array({200, 400});
  config["block_sizes"] = json::array({2, 2});
  config["orders"] = {{"components", json::array({1, 1})}, {"switch", 0}};
  config["switch_kind"] = "memoryless-uniform";
  config["seed"] = 4;
  write_text_file((dir / "cfg.json").string(), config.dump(2) + "\n");

  const CliResult run = run_cli(dir, "calibrate --config cfg.json --scales 0.05,0.2 -o cal.csv");
  REQUIRE(run.code == 0);
  const std::string csv = file_text(dir / "cal.csv");
  CHECK(csv.rfind("scale,n,success_exact,success_canonical,success_compatible\n", 0) == 0);
  // One row per (scale, length) pair plus the header.
  std::size_t lines = 0;
  for (char c : csv) {
    if (c == '\n') ++lines;
  }
  CHECK(lines == 5);
  CHECK(csv.find("0.0500,200,") != std::string::npos);
  CHECK(csv.find("0.2000,400,") != std::string::npos);
}
