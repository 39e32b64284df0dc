#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>

#include <json.hpp>

#include <ftlearn/ftlearn.hpp>

#include "helpers.hpp"

using namespace ftlearn;
using testutil::TempDir;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

const char* cli_binary() { return std::getenv("FTLEARN_BIN"); }

CliResult run_cli(const TempDir& dir, const std::string& args) {
  const std::string out_path = dir.file("stdout.txt");
  const std::string err_path = dir.file("stderr.txt");
  const std::string cmd = std::string("\"") + cli_binary() + "\" " + args + " > " +
                          out_path + " 2> " + err_path;
  const int raw = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = testutil::read_file(out_path);
  r.err = testutil::read_file(err_path);
  return r;
}

std::string write_or_fixture(const TempDir& dir) {
  GroundTruth gt;
  const Threshold ta{"pa", Statistic::Min, 5.0, 0.0, FailureSide::Gt};
  const Threshold tb{"pb", Statistic::Min, 5.0, 0.0, FailureSide::Gt};
  gt.tree.events = {Event{EventKind::Tle, "boom", std::nullopt, std::nullopt},
                    Event{EventKind::Basic, make_label(ta), ta, 0.35},
                    Event{EventKind::Basic, make_label(tb), tb, 0.35}};
  gt.tree.tle = 0;
  gt.tree.gates = {Gate{GateType::Or, 0, {1, 2}, 0.0}};
  gt.sensor_models["pa"] = {Interval{0.0, 1.0}, Interval{10.0, 11.0}};
  gt.sensor_models["pb"] = {Interval{0.0, 1.0}, Interval{10.0, 11.0}};
  gt.n_units = 40;
  gt.days_per_unit = 50;
  for (int i = 1; i <= 3; ++i)
    gt.decoys.push_back(DecoySensor{"decoy_0" + std::to_string(i), Interval{0.0, 1.0}});
  const std::string path = dir.file("truth.json");
  testutil::write_file(path, ground_truth_to_json(gt).dump(2));
  return path;
}

std::string write_schema(const TempDir& dir) {
  const std::string text = R"({
    "unit_column": "unit",
    "date_column": "date",
    "sensor_columns": [
      {"name": "pa", "statistic": "min"},
      {"name": "pb", "statistic": "min"},
      {"name": "decoy_01", "statistic": "min"},
      {"name": "decoy_02", "statistic": "min"},
      {"name": "decoy_03", "statistic": "min"}
    ],
    "failure_columns": ["boom"]
  })";
  const std::string path = dir.file("schema.json");
  testutil::write_file(path, text);
  return path;
}

}  // namespace

#define REQUIRE_CLI_AVAILABLE()                              \
  if (!cli_binary()) {                                       \
    WARN("FTLEARN_BIN not set; cli tests need ctest or env"); \
    return;                                                  \
  }

TEST_CASE("generate is deterministic and respects --rows", "[cli]") {
  REQUIRE_CLI_AVAILABLE();
  TempDir dir;
  const std::string truth = write_or_fixture(dir);

  const CliResult a = run_cli(dir, "generate " + truth + " --seed 1 --out " +
                                       dir.file("a.csv"));
  REQUIRE(a.code == 0);
  const CliResult b = run_cli(dir, "generate " + truth + " --seed 1 --out " +
                                       dir.file("b.csv"));
  REQUIRE(b.code == 0);
  CHECK(testutil::read_file(dir.file("a.csv")) == testutil::read_file(dir.file("b.csv")));

  const CliResult empty = run_cli(dir, "generate " + truth + " --rows 0 --out " +
                                           dir.file("empty.csv"));
  REQUIRE(empty.code == 0);
  const std::string content = testutil::read_file(dir.file("empty.csv"));
  CHECK(content.find("unit,date") == 0);
  CHECK(std::count(content.begin(), content.end(), '\n') == 1);  // header only
}

TEST_CASE("generate, learn, eval round trip", "[cli]") {
  REQUIRE_CLI_AVAILABLE();
  TempDir dir;
  const std::string truth = write_or_fixture(dir);
  const std::string schema = write_schema(dir);
  const std::string csv = dir.file("data.csv");

  REQUIRE(run_cli(dir, "generate " + truth + " --seed 3 --out " + csv).code == 0);

  const std::string learn_args = "learn " + csv + " " + schema +
                                 " --failure boom --stat min --out-dot " +
                                 dir.file("tree.dot") + " --out-json " +
                                 dir.file("tree.json");
  const CliResult learn1 = run_cli(dir, learn_args);
  REQUIRE(learn1.code == 0);
  CHECK(learn1.out.find("significance: 1.0") != std::string::npos);
  CHECK(learn1.out.find("depth: 1") != std::string::npos);

  const std::string dot1 = testutil::read_file(dir.file("tree.dot"));
  const std::string json1 = testutil::read_file(dir.file("tree.json"));
  CHECK(dot1.find("digraph") == 0);
  CHECK(!json1.empty());

  // manifest lands next to the json output
  const std::string manifest = testutil::read_file(dir.file("tree.manifest.json"));
  const nlohmann::json m = nlohmann::json::parse(manifest);
  CHECK(m.at("tool") == "ftlearn");
  CHECK(m.at("outcomes")[0].at("status") == "ok");
  CHECK(m.at("inputs").at("csv").contains("fnv1a64"));

  // byte-identical on a rerun
  const CliResult learn2 = run_cli(dir, learn_args);
  REQUIRE(learn2.code == 0);
  CHECK(testutil::read_file(dir.file("tree.dot")) == dot1);
  CHECK(testutil::read_file(dir.file("tree.json")) == json1);

  const CliResult eval = run_cli(dir, "eval " + dir.file("tree.json") + " " + truth);
  REQUIRE(eval.code == 0);
  const std::size_t brace = eval.out.find('{');
  REQUIRE(brace != std::string::npos);
  const nlohmann::json report = nlohmann::json::parse(eval.out.substr(brace));
  CHECK(report.at("variable_recall") == 1.0);
  CHECK(report.at("top_gate_type_match") == true);
}

TEST_CASE("thresholds command emits the documented json", "[cli]") {
  REQUIRE_CLI_AVAILABLE();
  TempDir dir;
  const std::string truth = write_or_fixture(dir);
  const std::string schema = write_schema(dir);
  const std::string csv = dir.file("data.csv");
  REQUIRE(run_cli(dir, "generate " + truth + " --seed 4 --out " + csv).code == 0);

  const CliResult r =
      run_cli(dir, "thresholds " + csv + " " + schema + " --failure boom --stat min");
  REQUIRE(r.code == 0);
  const nlohmann::json doc = nlohmann::json::parse(r.out);
  CHECK(doc.at("failure") == "boom");
  REQUIRE(doc.at("thresholds").size() == 5);
  for (const auto& t : doc.at("thresholds")) {
    CHECK(t.contains("sensor"));
    CHECK(t.contains("theta"));
    CHECK(t.contains("gain"));
    CHECK(t.contains("failure_side"));
  }

  // values agree with running the pipeline through the library
  const SchemaConfig parsed = load_schema(schema);
  const Dataset data = filter_corrupt(deduplicate(load_csv(csv, parsed)), parsed);
  const ThresholdScan scan =
      threshold_all(balance(data, "boom"), "boom", Statistic::Min);
  REQUIRE(scan.thresholds.size() == doc.at("thresholds").size());
  for (std::size_t i = 0; i < scan.thresholds.size(); ++i) {
    const auto& jt = doc.at("thresholds")[i];
    CHECK(jt.at("sensor") == scan.thresholds[i].sensor_name);
    CHECK(jt.at("theta").get<double>() == scan.thresholds[i].theta);
    CHECK(jt.at("gain").get<double>() == scan.thresholds[i].gain);
  }
}

TEST_CASE("degenerate failure columns yield a documented skip", "[cli]") {
  REQUIRE_CLI_AVAILABLE();
  TempDir dir;
  testutil::write_file(dir.file("flat.csv"),
                       "unit,date,pa,pb,decoy_01,decoy_02,decoy_03,boom\n"
                       "u1,2020-01-01,1,2,3,4,5,0\n"
                       "u1,2020-01-02,2,3,4,5,6,0\n");
  const std::string schema = write_schema(dir);
  const CliResult r = run_cli(
      dir, "thresholds " + dir.file("flat.csv") + " " + schema + " --failure boom --stat min");
  REQUIRE(r.code == 0);
  const nlohmann::json doc = nlohmann::json::parse(r.out);
  CHECK(doc.at("thresholds").empty());
  CHECK(doc.contains("skip_reason"));

  const CliResult learn = run_cli(dir, "learn " + dir.file("flat.csv") + " " + schema +
                                           " --failure boom --stat min");
  CHECK(learn.code == 1);  // no positive examples is a data error for learn
}

TEST_CASE("no significant structure is a success with a skip record", "[cli]") {
  REQUIRE_CLI_AVAILABLE();
  TempDir dir;
  std::ostringstream csv;
  std::mt19937_64 rng(3);
  csv << "unit,date,pa,pb,decoy_01,decoy_02,decoy_03,boom\n";
  for (int day = 1; day <= 99; ++day) {
    char date[16];
    std::snprintf(date, sizeof date, "2020-%02d-%02d", 1 + day / 28, 1 + day % 28);
    csv << "u1," << date;
    for (int c = 0; c < 5; ++c) csv << "," << rng() % 100;
    csv << "," << rng() % 2 << "\n";
  }
  testutil::write_file(dir.file("noise.csv"), csv.str());
  const std::string schema = write_schema(dir);

  const CliResult r = run_cli(dir, "learn " + dir.file("noise.csv") + " " + schema +
                                       " --failure boom --stat min --min-significance 0.9" +
                                       " --out-json " + dir.file("tree.json"));
  REQUIRE(r.code == 0);
  CHECK(r.out.find("skipped") != std::string::npos);
  const nlohmann::json m =
      nlohmann::json::parse(testutil::read_file(dir.file("tree.manifest.json")));
  CHECK(m.at("outcomes")[0].at("status") == "skipped");
  CHECK_FALSE(std::filesystem::exists(dir.file("tree.json")));
}

TEST_CASE("learn-all writes trees, summary and manifest", "[cli]") {
  REQUIRE_CLI_AVAILABLE();
  TempDir dir;
  const std::string truth = write_or_fixture(dir);
  const std::string schema = write_schema(dir);
  const std::string csv = dir.file("data.csv");
  REQUIRE(run_cli(dir, "generate " + truth + " --seed 5 --out " + csv).code == 0);

  const std::string out_dir = dir.file("trees");
  const CliResult r = run_cli(dir, "learn-all " + csv + " " + schema + " --out-dir " + out_dir);
  REQUIRE(r.code == 0);

  const std::string summary = testutil::read_file(out_dir + "/summary.csv");
  CHECK(summary.find("failure,statistic,significance,depth,gates,runtime_ms,status") == 0);
  CHECK(std::count(summary.begin(), summary.end(), '\n') == 5);  // header + 4 statistics
  CHECK(summary.find("boom,min,1.0,1,1,") != std::string::npos);
  CHECK(summary.find(",skipped") != std::string::npos);  // no sensors for max/avg/range
  CHECK(std::filesystem::exists(out_dir + "/boom_min.json"));
  CHECK(std::filesystem::exists(out_dir + "/boom_min.dot"));
  CHECK(std::filesystem::exists(out_dir + "/manifest.json"));

  // the per-pair result agrees with a standalone learn run on the same data
  const CliResult single =
      run_cli(dir, "learn " + csv + " " + schema + " --failure boom --stat min" +
                       " --out-json " + dir.file("single.json"));
  REQUIRE(single.code == 0);
  CHECK(single.out.find("significance: 1.0\n") != std::string::npos);
}

TEST_CASE("learn-all covers every failure column", "[cli]") {
  REQUIRE_CLI_AVAILABLE();
  TempDir dir;
  const std::string truth = write_or_fixture(dir);
  REQUIRE(run_cli(dir, "generate " + truth + " --seed 6 --out " + dir.file("base.csv"))
              .code == 0);

  // graft a second, silent failure column onto the generated file
  std::istringstream in(testutil::read_file(dir.file("base.csv")));
  std::ostringstream out;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    out << line << (header ? ",quiet" : ",0") << "\n";
    header = false;
  }
  testutil::write_file(dir.file("two.csv"), out.str());
  testutil::write_file(dir.file("two_schema.json"), R"({
    "unit_column": "unit", "date_column": "date",
    "sensor_columns": [
      {"name": "pa", "statistic": "min"}, {"name": "pb", "statistic": "min"},
      {"name": "decoy_01", "statistic": "min"}, {"name": "decoy_02", "statistic": "min"},
      {"name": "decoy_03", "statistic": "min"}
    ],
    "failure_columns": ["boom", "quiet"]
  })");

  const std::string out_dir = dir.file("trees2");
  const CliResult r = run_cli(dir, "learn-all " + dir.file("two.csv") + " " +
                                       dir.file("two_schema.json") + " --out-dir " + out_dir);
  REQUIRE(r.code == 0);
  const std::string summary = testutil::read_file(out_dir + "/summary.csv");
  CHECK(std::count(summary.begin(), summary.end(), '\n') == 9);  // header + 2x4 attempts
  CHECK(summary.find("quiet,min,,,,") != std::string::npos);     // all-zero column skips
}

TEST_CASE("schema learner section sets defaults, flags override", "[cli]") {
  REQUIRE_CLI_AVAILABLE();
  TempDir dir;
  const std::string truth = write_or_fixture(dir);
  const std::string csv = dir.file("data.csv");
  REQUIRE(run_cli(dir, "generate " + truth + " --seed 8 --out " + csv).code == 0);

  // the section asks for a statistic the data does not carry
  testutil::write_file(dir.file("schema.json"), R"({
    "unit_column": "unit", "date_column": "date",
    "sensor_columns": [
      {"name": "pa", "statistic": "min"}, {"name": "pb", "statistic": "min"},
      {"name": "decoy_01", "statistic": "min"}, {"name": "decoy_02", "statistic": "min"},
      {"name": "decoy_03", "statistic": "min"}
    ],
    "failure_columns": ["boom"],
    "learner": {"statistic": "max"}
  })");
  const std::string base = "learn " + csv + " " + dir.file("schema.json") +
                           " --failure boom --out-json " + dir.file("t.json");
  const CliResult from_file = run_cli(dir, base);
  CHECK(from_file.code == 1);  // no max-statistic sensors exist
  CHECK(from_file.err.find("max") != std::string::npos);

  // an explicit flag wins over the file section
  const CliResult overridden = run_cli(dir, base + " --stat min");
  CHECK(overridden.code == 0);
  CHECK(overridden.out.find("statistic: min") != std::string::npos);
}

TEST_CASE("usage errors exit with code 2", "[cli]") {
  REQUIRE_CLI_AVAILABLE();
  TempDir dir;
  CHECK(run_cli(dir, "").code == 2);
  CHECK(run_cli(dir, "learn").code == 2);                     // missing positionals
  CHECK(run_cli(dir, "frobnicate x").code == 2);              // unknown subcommand
  testutil::write_file(dir.file("x.csv"), "unit,date,boom\n");
  const std::string schema = write_schema(dir);
  // missing --failure
  CHECK(run_cli(dir, "learn " + dir.file("x.csv") + " " + schema).code == 2);
  // config validation: max_inputs below 2
  CHECK(run_cli(dir, "learn " + dir.file("x.csv") + " " + schema +
                         " --failure boom --max-inputs 1")
            .code == 2);
  CHECK(run_cli(dir, "learn " + dir.file("x.csv") + " " + schema +
                         " --failure boom --stat weekly")
            .code == 2);
}

TEST_CASE("data errors exit with code 1", "[cli]") {
  REQUIRE_CLI_AVAILABLE();
  TempDir dir;
  const std::string schema = write_schema(dir);
  CHECK(run_cli(dir, "learn " + dir.file("missing.csv") + " " + schema +
                         " --failure boom")
            .code == 1);
  testutil::write_file(dir.file("bad.csv"), "unit,date\nu1,2020-01-01\n");
  CHECK(run_cli(dir, "learn " + dir.file("bad.csv") + " " + schema + " --failure boom")
            .code == 1);
  CHECK(run_cli(dir, "eval " + dir.file("nope.json") + " " + dir.file("nope2.json"))
            .code == 1);
}
