// subtrack command line: generate synthetic dynamic networks, detect
// subspace change points, export statistic traces and run benchmark grids.
//
// Exit codes: 0 success, 1 usage/I-O/parse errors, 2 degenerate input.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "subtrack/detector.hpp"
#include "subtrack/errors.hpp"
#include "subtrack/evaluation.hpp"
#include "subtrack/generator.hpp"
#include "subtrack/io_util.hpp"
#include "subtrack/netdata.hpp"

namespace {

namespace fs = std::filesystem;
using namespace subtrack;

struct DetectOptions {
  std::string input;
  std::string out;
  std::string trace;
  Index window = 0;
  double threshold = 0.0;
  bool auto_tune = true;
};

struct GenerateOptions {
  std::string out;
  std::string scenario = "1";
  std::optional<double> param;
  Index n = 0;
  Index T = 0;
  std::uint64_t seed = 0;
};

struct BenchOptions {
  std::string out_dir;
  std::string scenario = "1";
  Index reps = 50;
  Index n = 0;
  Index T = 0;
  std::uint64_t seed = 0;
};

GraphSequence load_sequence(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot open input file " + path);
  }
  return parse_graph_sequence(in);
}

// Output paths are checked up front, before any heavy work runs.
void require_writable_parent(const std::string& path) {
  if (path.empty()) {
    return;
  }
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) {
    throw Error("output directory " + parent.string() + " does not exist");
  }
}

DetectorConfig build_config(const DetectOptions& opt) {
  DetectorConfig config;
  const bool has_window = opt.window > 0;
  const bool has_threshold = opt.threshold > 0.0;
  if (has_window != has_threshold) {
    throw Error("--window and --threshold must be given together");
  }
  if (has_window) {
    config.window = opt.window;
    config.threshold = opt.threshold;
    config.auto_tune = false;
  } else {
    config.auto_tune = true;
  }
  return config;
}

int run_detect(const DetectOptions& opt, bool trace_only) {
  require_writable_parent(opt.out);
  require_writable_parent(opt.trace);
  const GraphSequence g = load_sequence(opt.input);
  DetectionReport report = detect(g, build_config(opt));
  report.trace_csv_path = opt.trace;

  if (!opt.trace.empty()) {
    std::ostringstream csv;
    report.trace.write_csv(csv);
    atomic_write_file(opt.trace, csv.str());
  }
  if (trace_only) {
    if (opt.trace.empty()) {
      std::ostringstream csv;
      report.trace.write_csv(csv);
      std::cout << csv.str();
    }
    std::cerr << "trace: " << report.trace.records().size() << " rows, "
              << report.coarse.points.size() << " trigger(s)\n";
    return 0;
  }

  const std::string json = report_to_json(report);
  if (opt.out.empty()) {
    std::cout << json;
  } else {
    atomic_write_file(opt.out, json);
  }
  std::cerr << "detect: " << report.refined.points.size() << " change point(s)\n";
  return 0;
}

// Default sizes per scenario, matching the benchmark grids.
void apply_scenario_defaults(const std::string& scenario, Index& n, Index& T) {
  if (n == 0) {
    n = 100;
  }
  if (T == 0) {
    if (scenario == "2") {
      T = 50;
    } else if (scenario == "3") {
      T = 150;
    } else if (scenario == "toy") {
      T = 400;
    } else {
      T = 200;
    }
  }
}

std::pair<GroundTruth, GraphSequence> generate_data(const GenerateOptions& opt,
                                                    nlohmann::json& params_json) {
  Index n = opt.n;
  Index T = opt.T;
  apply_scenario_defaults(opt.scenario, n, T);
  if (opt.scenario == "toy") {
    params_json = {{"n", n}, {"T", T}, {"seed", opt.seed}};
    return build_toy(opt.seed, n, T);
  }
  int number = 0;
  if (opt.scenario == "1") {
    number = 1;
  } else if (opt.scenario == "2") {
    number = 2;
  } else if (opt.scenario == "3") {
    number = 3;
  } else {
    throw Error("unknown scenario '" + opt.scenario + "' (use 1, 2, 3 or toy)");
  }
  ReplicationPlan plan = scenario_plan(number, n, T);
  ScenarioParams params = plan.base;
  const double value = opt.param.value_or(plan.param_values.front());
  if (plan.param_name == "s") {
    params.s = value;
  } else if (plan.param_name == "q") {
    params.q = value;
  } else {
    params.rho = value;
  }
  params.seed = opt.seed;
  params_json = {{"n", n},   {"T", T},   {"s", params.s},       {"q", params.q},
                 {"rho", params.rho},    {"seed", params.seed}, {plan.param_name, value}};
  return build_scenario(params);
}

fs::path truth_sidecar_path(const fs::path& out) {
  fs::path base = out;
  if (base.has_extension()) {
    base.replace_extension();
  }
  base += ".truth.json";
  return base;
}

int run_generate(const GenerateOptions& opt) {
  require_writable_parent(opt.out);
  nlohmann::json params_json;
  const auto [truth, sequence] = generate_data(opt, params_json);

  std::ostringstream dnet;
  serialize_graph_sequence(sequence, dnet);
  atomic_write_file(opt.out, dnet.str());

  nlohmann::json sidecar;
  sidecar["schema"] = "subtrack-truth-v1";
  sidecar["scenario"] = opt.scenario;
  sidecar["params"] = params_json;
  sidecar["change_points"] = truth.change_points();
  sidecar["segment_ranks"] = truth.segment_ranks();
  sidecar["memberships"] = truth.memberships;
  atomic_write_file(truth_sidecar_path(opt.out), sidecar.dump(2) + "\n");

  std::cerr << "generate: wrote " << opt.out << " (n=" << sequence.node_count()
            << ", T=" << sequence.layer_count() << ")\n";
  return 0;
}

int run_bench(const BenchOptions& opt) {
  int number = 0;
  if (opt.scenario == "1") {
    number = 1;
  } else if (opt.scenario == "2") {
    number = 2;
  } else if (opt.scenario == "3") {
    number = 3;
  } else {
    throw Error("unknown scenario '" + opt.scenario + "' (use 1, 2 or 3)");
  }
  Index n = opt.n;
  Index T = opt.T;
  apply_scenario_defaults(opt.scenario, n, T);
  const ReplicationPlan plan = scenario_plan(number, n, T);
  const std::vector<MetricRow> rows = run_replications(plan, opt.reps, opt.seed);

  fs::create_directories(opt.out_dir);
  const fs::path base = fs::path(opt.out_dir) / ("scenario_" + plan.scenario);
  atomic_write_file(base.string() + ".csv", metrics_to_csv(rows));
  atomic_write_file(base.string() + ".json", metrics_to_json(rows));

  std::cout << "scenario " << plan.scenario << " (n=" << n << ", T=" << T
            << ", R=" << opt.reps << ")\n";
  std::cout << "param\tmethod\t|K-K*|\tHausdorff\tfailures\n";
  for (const MetricRow& row : rows) {
    std::cout << format_double(row.param_value) << "\t" << row.method << "\t"
              << format_double(row.count_mean) << "(" << format_double(row.count_se) << ")\t"
              << format_double(row.haus_mean) << "(" << format_double(row.haus_se) << ")\t"
              << row.failures << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"network subspace change point detection"};
  app.require_subcommand(1);

  DetectOptions detect_opt;
  CLI::App* cmd_detect = app.add_subcommand("detect", "detect change points in a DNET file");
  cmd_detect->add_option("input", detect_opt.input, "DNET v1 input file")->required();
  cmd_detect->add_option("--out", detect_opt.out, "report JSON path (stdout if omitted)");
  cmd_detect->add_option("--trace", detect_opt.trace, "also write the statistic trace CSV");
  cmd_detect->add_option("--window", detect_opt.window, "window length L");
  cmd_detect->add_option("--threshold", detect_opt.threshold, "eigenvalue threshold b");
  cmd_detect->add_flag("--auto", detect_opt.auto_tune, "derive L and b from the data (default)");

  DetectOptions trace_opt;
  CLI::App* cmd_trace = app.add_subcommand("trace", "emit the per-l statistic trace CSV");
  cmd_trace->add_option("input", trace_opt.input, "DNET v1 input file")->required();
  cmd_trace->add_option("--out", trace_opt.trace, "trace CSV path (stdout if omitted)");
  cmd_trace->add_option("--window", trace_opt.window, "window length L");
  cmd_trace->add_option("--threshold", trace_opt.threshold, "eigenvalue threshold b");
  cmd_trace->add_flag("--auto", trace_opt.auto_tune, "derive L and b from the data (default)");

  GenerateOptions generate_opt;
  CLI::App* cmd_generate = app.add_subcommand("generate", "generate a synthetic sequence");
  cmd_generate->add_option("--out", generate_opt.out, "DNET output path")->required();
  cmd_generate->add_option("--scenario", generate_opt.scenario, "1, 2, 3 or toy");
  cmd_generate->add_option("--param", generate_opt.param,
                           "scenario parameter (s, q or rho depending on scenario)");
  cmd_generate->add_option("--n", generate_opt.n, "node count");
  cmd_generate->add_option("--T", generate_opt.T, "layer count");
  cmd_generate->add_option("--seed", generate_opt.seed, "master seed");

  BenchOptions bench_opt;
  CLI::App* cmd_bench = app.add_subcommand("bench", "run a replication grid");
  cmd_bench->add_option("--out", bench_opt.out_dir, "output directory")->required();
  cmd_bench->add_option("--scenario", bench_opt.scenario, "1, 2 or 3");
  cmd_bench->add_option("--reps", bench_opt.reps, "replications per cell");
  cmd_bench->add_option("--n", bench_opt.n, "node count");
  cmd_bench->add_option("--T", bench_opt.T, "layer count");
  cmd_bench->add_option("--seed", bench_opt.seed, "master seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (cmd_detect->parsed()) {
      return run_detect(detect_opt, false);
    }
    if (cmd_trace->parsed()) {
      return run_detect(trace_opt, true);
    }
    if (cmd_generate->parsed()) {
      return run_generate(generate_opt);
    }
    if (cmd_bench->parsed()) {
      return run_bench(bench_opt);
    }
  } catch (const DegenerateRankError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
