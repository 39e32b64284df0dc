// Command line front end: threshold learning, fault tree learning, synthetic
// data generation and recovery scoring, with a run manifest per invocation.

#include <cctype>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <ftlearn/ftlearn.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_data_error = 1;
constexpr int exit_usage = 2;

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ftlearn::Error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ftlearn::Error("cannot write '" + path + "'");
  out << content;
  if (!out) throw ftlearn::Error("failed writing '" + path + "'");
}

json file_digest(const std::string& path) {
  const std::string bytes = read_file(path);
  char hex[32];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return json{{"path", path}, {"fnv1a64", hex}, {"bytes", bytes.size()}};
}

struct LearnFlags {
  std::string csv;
  std::string schema;
  std::string failure;
  std::string stat = "min";
  int max_inputs = 3;
  double min_significance = 0.0;
};

json config_json(const ftlearn::LearnerConfig& cfg) {
  return {{"max_inputs", cfg.max_inputs},
          {"min_top_significance", cfg.min_top_significance},
          {"statistic", ftlearn::to_string(cfg.statistic)},
          {"random_seed", cfg.random_seed}};
}

json manifest_skeleton(const std::string& command, const std::string& csv,
                       const std::string& schema) {
  return {{"tool", "ftlearn"},
          {"tool_version", ftlearn::version},
          {"command", command},
          {"inputs", json{{"csv", file_digest(csv)}, {"schema", file_digest(schema)}}},
          {"outcomes", json::array()}};
}

// precedence: built-in defaults < schema "learner" section < explicit flags
ftlearn::LearnerConfig make_config(const ftlearn::SchemaConfig& schema,
                                   const LearnFlags& flags, const CLI::App* cmd) {
  ftlearn::LearnerConfig cfg;
  if (schema.learner.max_inputs) cfg.max_inputs = *schema.learner.max_inputs;
  if (schema.learner.min_top_significance)
    cfg.min_top_significance = *schema.learner.min_top_significance;
  if (schema.learner.statistic) cfg.statistic = *schema.learner.statistic;
  if (schema.learner.random_seed) cfg.random_seed = *schema.learner.random_seed;
  auto flag_given = [&](const std::string& name) {
    const CLI::Option* opt = cmd->get_option_no_throw(name);
    return opt && opt->count() > 0;
  };
  if (flag_given("--max-inputs")) cfg.max_inputs = flags.max_inputs;
  if (flag_given("--min-significance")) cfg.min_top_significance = flags.min_significance;
  if (flag_given("--stat")) cfg.statistic = ftlearn::statistic_from_string(flags.stat);
  cfg.check();
  return cfg;
}

ftlearn::Dataset load_clean(const std::string& csv, const ftlearn::SchemaConfig& schema) {
  ftlearn::Dataset d = ftlearn::load_csv(csv, schema);
  d = ftlearn::deduplicate(d);
  return ftlearn::filter_corrupt(d, schema);
}

json attempt_outcome(const ftlearn::LearnAttempt& a) {
  json out{{"failure", a.failure},
           {"statistic", ftlearn::to_string(a.statistic)},
           {"runtime_ms", a.runtime_ms}};
  if (a.tree) {
    out["status"] = "ok";
    out["significance"] = a.tree->significance;
    out["depth"] = ftlearn::depth(*a.tree);
    out["gates"] = a.tree->gates.size();
  } else {
    out["status"] = "skipped";
    out["skip_reason"] = a.skip_reason;
  }
  return out;
}

std::string sanitize(const std::string& name) {
  std::string out;
  for (char c : name)
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.') ? c : '_';
  return out;
}

int cmd_thresholds(const LearnFlags& flags, const CLI::App* cmd) {
  const ftlearn::SchemaConfig schema = ftlearn::load_schema(flags.schema);
  const ftlearn::Statistic st = make_config(schema, flags, cmd).statistic;
  const ftlearn::Dataset data = load_clean(flags.csv, schema);

  json doc{{"format_version", 1},
           {"failure", flags.failure},
           {"statistic", ftlearn::to_string(st)},
           {"thresholds", json::array()},
           {"skipped", json::array()}};
  doc["manifest"] = json{{"tool", "ftlearn"},
                         {"tool_version", ftlearn::version},
                         {"command", "thresholds"},
                         {"inputs", json{{"csv", file_digest(flags.csv)},
                                         {"schema", file_digest(flags.schema)}}}};
  try {
    const ftlearn::BalancedDataset balanced = ftlearn::balance(data, flags.failure);
    const ftlearn::ThresholdScan scan = ftlearn::threshold_all(balanced, flags.failure, st);
    for (const auto& t : scan.thresholds)
      doc["thresholds"].push_back(ftlearn::threshold_to_json(t));
    for (const auto& s : scan.skipped)
      doc["skipped"].push_back(json{{"sensor", s.sensor_name}, {"reason", s.reason}});
  } catch (const ftlearn::DataError& e) {
    // degenerate failure columns yield an empty document with the reason
    doc["skip_reason"] = e.what();
  }
  std::cout << doc.dump(2) << "\n";
  return exit_ok;
}

int cmd_learn(const LearnFlags& flags, const std::string& out_dot,
              const std::string& out_json, const CLI::App* cmd) {
  const ftlearn::SchemaConfig schema = ftlearn::load_schema(flags.schema);
  const ftlearn::LearnerConfig config = make_config(schema, flags, cmd);

  json manifest = manifest_skeleton("learn", flags.csv, flags.schema);
  manifest["config"] = config_json(config);
  manifest["config"]["failure"] = flags.failure;

  const ftlearn::Dataset data = load_clean(flags.csv, schema);

  ftlearn::LearnAttempt attempt;
  attempt.failure = flags.failure;
  attempt.statistic = config.statistic;
  const auto start = std::chrono::steady_clock::now();
  try {
    const ftlearn::BalancedDataset balanced = ftlearn::balance(data, flags.failure);
    attempt.tree = ftlearn::learn(balanced, flags.failure, config);
  } catch (const ftlearn::NoSignificantStructure& e) {
    attempt.skip_reason = e.what();
  }
  attempt.runtime_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - start)
                           .count();
  manifest["outcomes"].push_back(attempt_outcome(attempt));

  json outputs = json::object();
  if (attempt.tree) {
    const ftlearn::FaultTree& tree = *attempt.tree;
    std::cout << "failure: " << flags.failure << "\n"
              << "statistic: " << ftlearn::to_string(config.statistic) << "\n"
              << "significance: " << ftlearn::detail::format_number(tree.significance)
              << "\n"
              << "depth: " << ftlearn::depth(tree) << "\n"
              << "gates: " << tree.gates.size() << "\n";
    if (!out_dot.empty()) {
      write_file(out_dot, ftlearn::to_dot(tree));
      outputs["dot"] = out_dot;
      std::cout << "wrote " << out_dot << "\n";
    }
    if (!out_json.empty()) {
      write_file(out_json, ftlearn::to_json(tree));
      outputs["json"] = out_json;
      std::cout << "wrote " << out_json << "\n";
    }
  } else {
    std::cout << "status: skipped (" << attempt.skip_reason << ")\n";
  }
  manifest["outputs"] = outputs;

  std::string manifest_path = "ftlearn.manifest.json";
  if (!out_json.empty())
    manifest_path = fs::path(out_json).replace_extension(".manifest.json").string();
  else if (!out_dot.empty())
    manifest_path = fs::path(out_dot).replace_extension(".manifest.json").string();
  write_file(manifest_path, manifest.dump(2) + "\n");
  std::cout << "wrote " << manifest_path << "\n";
  return exit_ok;
}

int cmd_learn_all(const LearnFlags& flags, const std::string& out_dir,
                  const CLI::App* cmd) {
  const ftlearn::SchemaConfig schema = ftlearn::load_schema(flags.schema);
  const ftlearn::LearnerConfig config = make_config(schema, flags, cmd);

  fs::create_directories(out_dir);
  json manifest = manifest_skeleton("learn-all", flags.csv, flags.schema);
  manifest["config"] = config_json(config);

  const ftlearn::Dataset data = load_clean(flags.csv, schema);
  const std::vector<ftlearn::LearnAttempt> attempts = ftlearn::learn_all(data, config);

  std::ostringstream summary;
  summary << "failure,statistic,significance,depth,gates,runtime_ms,status\n";
  for (const auto& a : attempts) {
    manifest["outcomes"].push_back(attempt_outcome(a));
    std::vector<std::string> row{a.failure, ftlearn::to_string(a.statistic)};
    if (a.tree) {
      row.push_back(ftlearn::detail::format_number(a.tree->significance));
      row.push_back(std::to_string(ftlearn::depth(*a.tree)));
      row.push_back(std::to_string(a.tree->gates.size()));
    } else {
      row.insert(row.end(), {"", "", ""});
    }
    row.push_back(std::to_string(a.runtime_ms));
    row.push_back(a.tree ? "ok" : "skipped");
    ftlearn::detail::write_csv_row(summary, row);

    if (a.tree) {
      const std::string stem =
          sanitize(a.failure) + "_" + ftlearn::to_string(a.statistic);
      write_file((fs::path(out_dir) / (stem + ".json")).string(),
                 ftlearn::to_json(*a.tree));
      write_file((fs::path(out_dir) / (stem + ".dot")).string(),
                 ftlearn::to_dot(*a.tree));
      std::cout << a.failure << " [" << ftlearn::to_string(a.statistic)
                << "]: significance "
                << ftlearn::detail::format_number(a.tree->significance) << ", depth "
                << ftlearn::depth(*a.tree) << "\n";
    } else {
      std::cout << a.failure << " [" << ftlearn::to_string(a.statistic)
                << "]: skipped (" << a.skip_reason << ")\n";
    }
  }
  write_file((fs::path(out_dir) / "summary.csv").string(), summary.str());
  write_file((fs::path(out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
  std::cout << "wrote " << (fs::path(out_dir) / "summary.csv").string() << "\n";
  return exit_ok;
}

int cmd_generate(const std::string& gt_path, std::optional<std::int64_t> rows,
                 std::uint64_t seed, const std::string& out) {
  const ftlearn::GroundTruth gt = ftlearn::load_ground_truth(gt_path);
  std::optional<std::size_t> row_override;
  if (rows) {
    if (*rows < 0) throw ftlearn::Error("--rows must be non-negative");
    row_override = static_cast<std::size_t>(*rows);
  }
  const ftlearn::Dataset data = ftlearn::generate(gt, seed, row_override);
  std::ostringstream csv;
  ftlearn::write_csv(data, csv);
  write_file(out, csv.str());

  json manifest{{"tool", "ftlearn"},
                {"tool_version", ftlearn::version},
                {"command", "generate"},
                {"inputs", json{{"ground_truth", file_digest(gt_path)}}},
                {"config", json{{"seed", seed},
                                {"rows", rows ? json(*rows) : json(nullptr)}}},
                {"outputs", json{{"csv", out},
                                 {"rows", data.row_count()},
                                 {"sensor_columns", data.sensors().size()}}}};
  const std::string manifest_path =
      fs::path(out).replace_extension(".manifest.json").string();
  write_file(manifest_path, manifest.dump(2) + "\n");

  std::cout << "wrote " << out << " (" << data.row_count() << " rows, "
            << data.sensors().size() << " sensor columns)\n"
            << "wrote " << manifest_path << "\n";
  return exit_ok;
}

int cmd_eval(const std::string& learned_path, const std::string& gt_path) {
  const ftlearn::FaultTree learned = ftlearn::from_json(read_file(learned_path));
  const ftlearn::GroundTruth gt = ftlearn::load_ground_truth(gt_path);
  const ftlearn::RecoveryReport r = ftlearn::recovery_report(learned, gt);
  std::cout << "planted variables:   " << r.planted_variables << "\n"
            << "learned variables:   " << r.learned_variables << "\n"
            << "recovered variables: " << r.recovered_variables << "\n"
            << "variable recall:     " << ftlearn::detail::format_number(r.variable_recall)
            << "\n"
            << "variable precision:  "
            << ftlearn::detail::format_number(r.variable_precision) << "\n"
            << "mean theta error:    "
            << ftlearn::detail::format_number(r.mean_theta_error) << "\n"
            << "top gate type match: " << (r.top_gate_type_match ? "yes" : "no") << "\n"
            << "learned significance: "
            << ftlearn::detail::format_number(r.learned_significance) << "\n"
            << "learned depth: " << r.learned_depth << "\n"
            << "true depth:    " << r.true_depth << "\n";
  json doc = ftlearn::report_to_json(r);
  doc["manifest"] = json{{"tool", "ftlearn"},
                         {"tool_version", ftlearn::version},
                         {"command", "eval"},
                         {"inputs", json{{"learned", file_digest(learned_path)},
                                         {"ground_truth", file_digest(gt_path)}}}};
  std::cout << doc.dump(2) << "\n";
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learns explainable static fault trees from tabular sensor/failure data"};
  app.require_subcommand(1);
  app.footer("FTLEARN_THREADS caps gate-search worker threads (0 or unset = auto).");

  LearnFlags flags;
  std::string out_dot, out_json, out_dir, out_csv, gt_path, learned_path;
  std::optional<std::int64_t> rows;
  std::uint64_t seed = 0;

  auto add_data_args = [&](CLI::App* cmd, bool with_failure) {
    cmd->add_option("csv", flags.csv, "input CSV file")->required();
    cmd->add_option("schema", flags.schema, "schema JSON file")->required();
    if (with_failure) {
      cmd->add_option("--failure", flags.failure, "failure variable to analyse")
          ->required();
      cmd->add_option("--stat", flags.stat, "daily statistic: min, max, avg or range")
          ->check(CLI::IsMember({"min", "max", "avg", "range"}));
    }
  };

  CLI::App* thresholds =
      app.add_subcommand("thresholds", "learn per-sensor thresholds for one failure");
  add_data_args(thresholds, true);

  CLI::App* learn =
      app.add_subcommand("learn", "learn one fault tree for one (failure, statistic)");
  add_data_args(learn, true);
  learn->add_option("--max-inputs", flags.max_inputs, "maximum gate inputs")
      ->check(CLI::Range(2, 16));
  learn->add_option("--min-significance", flags.min_significance,
                    "exclusive significance floor for the top gate");
  learn->add_option("--out-dot", out_dot, "write the tree as Graphviz DOT");
  learn->add_option("--out-json", out_json, "write the tree as JSON");

  CLI::App* learn_all = app.add_subcommand(
      "learn-all", "learn trees for every (failure, statistic) combination");
  add_data_args(learn_all, false);
  learn_all->add_option("--out-dir", out_dir, "output directory")->required();
  learn_all->add_option("--max-inputs", flags.max_inputs, "maximum gate inputs")
      ->check(CLI::Range(2, 16));
  learn_all->add_option("--min-significance", flags.min_significance,
                        "exclusive significance floor for the top gate");

  CLI::App* generate =
      app.add_subcommand("generate", "sample a CSV dataset from a ground truth file");
  generate->add_option("ground_truth", gt_path, "ground truth JSON file")->required();
  generate->add_option("--rows", rows, "total records (overrides units x days)");
  generate->add_option("--seed", seed, "random seed");
  generate->add_option("--out", out_csv, "output CSV path")->required();

  CLI::App* eval =
      app.add_subcommand("eval", "score a learned tree against its ground truth");
  eval->add_option("learned", learned_path, "learned tree JSON")->required();
  eval->add_option("ground_truth", gt_path, "ground truth JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_usage;
  }

  try {
    if (thresholds->parsed()) return cmd_thresholds(flags, thresholds);
    if (learn->parsed()) return cmd_learn(flags, out_dot, out_json, learn);
    if (learn_all->parsed()) return cmd_learn_all(flags, out_dir, learn_all);
    if (generate->parsed()) return cmd_generate(gt_path, rows, seed, out_csv);
    if (eval->parsed()) return cmd_eval(learned_path, gt_path);
  } catch (const ftlearn::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_data_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_data_error;
  }
  return exit_usage;
}
