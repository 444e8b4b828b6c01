// Command-line front end for the msmp solver library. Everything goes through
// the C API in msmp/msmp.h.

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <msmp/msmp.h>

namespace {

constexpr int kExitSolved = 0;
constexpr int kExitError = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitTimeout = 3;

[[noreturn]] void die(const std::string& msg) {
  std::cerr << "error: " << msg << "\n";
  std::exit(kExitError);
}

void check(msmp_status status) {
  if (status != MSMP_OK) die(msmp_last_error());
}

std::string take_string(char* s) {
  std::string out = s ? s : "";
  msmp_string_free(s);
  return out;
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) die("cannot write " + path);
  out << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) die("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string dir_of(const std::string& path) {
  const size_t pos = path.find_last_of('/');
  return pos == std::string::npos ? std::string(".") : path.substr(0, pos);
}

std::optional<unsigned long long> env_seed() {
  const char* s = std::getenv("MSMP_SEED");
  if (!s || !*s) return std::nullopt;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s, &end, 10);
  if (end == s || *end) die("MSMP_SEED must be an unsigned integer");
  return v;
}

struct SolveArgs {
  std::string instance_path;
  std::string variant = "ms*-c";
  std::string heuristic = "exact";
  double time_limit = 0.0;
  std::string cost_model;
  bool allow_overlap = false;
  std::string output;
};

int run_solve(const SolveArgs& args) {
  msmp_instance* ins = nullptr;
  check(msmp_instance_load(args.instance_path.c_str(), args.allow_overlap ? 1 : 0, &ins));
  if (!args.cost_model.empty()) {
    // cost model lives in the instance document; rewrite it through JSON
    char* text = nullptr;
    check(msmp_instance_to_json(ins, &text));
    std::string doc = take_string(text);
    const std::string key = "\"cost_model\": \"";
    const size_t at = doc.find(key);
    if (at != std::string::npos) {
      const size_t end = doc.find('"', at + key.size());
      doc = doc.substr(0, at + key.size()) + args.cost_model + doc.substr(end);
    }
    msmp_instance_free(ins);
    ins = nullptr;
    check(msmp_instance_parse(doc.c_str(), dir_of(args.instance_path).c_str(),
                              args.allow_overlap ? 1 : 0, &ins));
  }
  msmp_solution* sol = nullptr;
  check(msmp_solve(ins, args.variant.c_str(), args.heuristic.c_str(), args.time_limit, &sol));
  char* json = nullptr;
  check(msmp_solution_to_json(ins, sol, &json));
  write_output(args.output, take_string(json));

  msmp_outcome outcome;
  check(msmp_solution_outcome(sol, &outcome));
  msmp_solution_free(sol);
  msmp_instance_free(ins);
  switch (outcome) {
    case MSMP_OUTCOME_SOLVED: return kExitSolved;
    case MSMP_OUTCOME_INFEASIBLE: return kExitInfeasible;
    case MSMP_OUTCOME_TIMEOUT: return kExitTimeout;
  }
  return kExitError;
}

struct GenArgs {
  std::string map_path;
  int random_width = 0;
  int random_height = 0;
  double obstacle_density = 0.2;
  int agents = 1;
  int goals = 0;
  unsigned long long seed = 1;
  std::string cost_model = "wait-free-at-rest";
  double time_limit = 60.0;
  std::string output;
};

int run_gen(const GenArgs& args) {
  std::string map_path = args.map_path;
  if (args.random_width > 0) {
    char* map_text = nullptr;
    check(msmp_generate_map(args.random_width, args.random_height, args.obstacle_density,
                            args.seed, &map_text));
    std::ofstream out(map_path, std::ios::binary);
    if (!out) die("cannot write " + map_path);
    out << take_string(map_text);
  }
  msmp_instance* ins = nullptr;
  check(msmp_generate_instance(map_path.c_str(), args.agents, args.goals, args.seed,
                               args.cost_model.c_str(), args.time_limit, &ins));
  char* json = nullptr;
  check(msmp_instance_to_json(ins, &json));
  write_output(args.output, take_string(json));
  msmp_instance_free(ins);
  return 0;
}

struct BenchArgs {
  std::string config_path;
  int workers = 1;
  std::string csv_output;
  std::string summary_output;
};

int run_bench_cmd(const BenchArgs& args) {
  const std::string config = read_file(args.config_path);
  const auto seed = env_seed();
  char* csv = nullptr;
  char* summary = nullptr;
  check(msmp_run_bench(config.c_str(), dir_of(args.config_path).c_str(), args.workers,
                       seed ? 1 : 0, seed.value_or(0), &csv, &summary));
  write_output(args.csv_output, take_string(csv));
  const std::string summary_text = take_string(summary);
  if (!args.summary_output.empty()) {
    write_output(args.summary_output, summary_text);
  } else if (!args.csv_output.empty() && args.csv_output != "-") {
    std::cout << summary_text;
  }
  return 0;
}

struct VerifyArgs {
  std::vector<std::string> instances;
  std::string variant = "ms*-c";
  std::string heuristic = "exact";
  std::string map_path;
  int count = 0;
  int agents = 2;
  int goals = 2;
  unsigned long long seed = 1;
  std::string output;
};

int run_verify(const VerifyArgs& args) {
  std::ostringstream csv;
  csv << "instance,solver_outcome,solver_cost,oracle_outcome,oracle_cost,match\n";
  int mismatches = 0;

  auto compare = [&](const std::string& label, msmp_instance* ins) {
    msmp_solution* got = nullptr;
    check(msmp_solve(ins, args.variant.c_str(), args.heuristic.c_str(), 0.0, &got));
    msmp_solution* want = nullptr;
    check(msmp_oracle_solve(ins, 1, &want));

    msmp_outcome got_outcome, want_outcome;
    check(msmp_solution_outcome(got, &got_outcome));
    check(msmp_solution_outcome(want, &want_outcome));
    double got_cost = 0.0, want_cost = 0.0;
    if (got_outcome == MSMP_OUTCOME_SOLVED) check(msmp_solution_cost(got, &got_cost));
    if (want_outcome == MSMP_OUTCOME_SOLVED) check(msmp_solution_cost(want, &want_cost));

    int violations = 0;
    if (got_outcome == MSMP_OUTCOME_SOLVED)
      check(msmp_validate(ins, got, nullptr, &violations));

    const bool match = got_outcome == want_outcome &&
                       (got_outcome != MSMP_OUTCOME_SOLVED || got_cost == want_cost) &&
                       violations == 0;
    if (!match) ++mismatches;
    auto outcome_str = [](msmp_outcome o) {
      switch (o) {
        case MSMP_OUTCOME_SOLVED: return "solved";
        case MSMP_OUTCOME_INFEASIBLE: return "infeasible";
        case MSMP_OUTCOME_TIMEOUT: return "timeout";
      }
      return "unknown";
    };
    csv << label << ',' << outcome_str(got_outcome) << ',';
    if (got_outcome == MSMP_OUTCOME_SOLVED) csv << got_cost;
    csv << ',' << outcome_str(want_outcome) << ',';
    if (want_outcome == MSMP_OUTCOME_SOLVED) csv << want_cost;
    csv << ',' << (match ? "yes" : "NO") << '\n';
    msmp_solution_free(got);
    msmp_solution_free(want);
  };

  for (const std::string& path : args.instances) {
    msmp_instance* ins = nullptr;
    check(msmp_instance_load(path.c_str(), 0, &ins));
    compare(path, ins);
    msmp_instance_free(ins);
  }
  if (args.count > 0) {
    if (args.map_path.empty()) die("--count requires --map");
    const unsigned long long base = env_seed().value_or(args.seed);
    for (int k = 0; k < args.count; ++k) {
      msmp_instance* ins = nullptr;
      check(msmp_generate_instance(args.map_path.c_str(), args.agents, args.goals, base + k,
                                   nullptr, 60.0, &ins));
      compare("gen#" + std::to_string(k), ins);
      msmp_instance_free(ins);
    }
  }
  write_output(args.output, csv.str());
  return mismatches == 0 ? 0 : 1;
}

struct ExportArgs {
  std::string instance_path;
  std::string name = "msmp";
  bool allow_overlap = false;
  std::string output;
};

int run_export(const ExportArgs& args) {
  msmp_instance* ins = nullptr;
  check(msmp_instance_load(args.instance_path.c_str(), args.allow_overlap ? 1 : 0, &ins));
  char* text = nullptr;
  check(msmp_export_tsplib(ins, args.name.c_str(), &text));
  write_output(args.output, take_string(text));
  msmp_instance_free(ins);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"msmp - multi-agent multi-goal sequencing and path finding solver"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(msmp_version()));

  SolveArgs solve_args;
  auto* solve = app.add_subcommand("solve", "solve an instance and print the solution JSON");
  solve->add_option("instance", solve_args.instance_path, "instance JSON file")->required();
  solve->add_option("--variant", solve_args.variant, "ms* or ms*-c (default ms*-c)");
  solve->add_option("--heuristic", solve_args.heuristic, "exact or fast (default exact)");
  solve->add_option("--time-limit", solve_args.time_limit,
                    "time limit in seconds (0 = instance value)");
  solve->add_option("--cost-model", solve_args.cost_model,
                    "wait-free-at-rest or wait-always-one (overrides the instance)");
  solve->add_flag("--allow-overlap", solve_args.allow_overlap,
                  "accept goals placed on starts/destinations");
  solve->add_option("-o,--output", solve_args.output, "output file (default stdout)");

  GenArgs gen_args;
  auto* gen = app.add_subcommand("gen", "generate a random instance");
  gen->add_option("--map", gen_args.map_path, "map file (read, or written with --random)")
      ->required();
  gen->add_option("--random-width", gen_args.random_width,
                  "generate a random map of this width first");
  gen->add_option("--random-height", gen_args.random_height, "random map height");
  gen->add_option("--obstacles", gen_args.obstacle_density, "random map obstacle density");
  gen->add_option("--agents", gen_args.agents, "number of agents")->required();
  gen->add_option("--goals", gen_args.goals, "number of goals")->required();
  gen->add_option("--seed", gen_args.seed, "generator seed");
  gen->add_option("--cost-model", gen_args.cost_model, "cost model for the instance");
  gen->add_option("--time-limit", gen_args.time_limit, "instance time limit in seconds");
  gen->add_option("-o,--output", gen_args.output, "instance JSON output (default stdout)");

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "run a benchmark campaign");
  bench->add_option("config", bench_args.config_path, "campaign config JSON")->required();
  bench->add_option("--workers", bench_args.workers, "parallel instances (default 1)");
  bench->add_option("-o,--output", bench_args.csv_output, "CSV output (default stdout)");
  bench->add_option("--summary", bench_args.summary_output, "summary JSON output");

  VerifyArgs verify_args;
  auto* verify = app.add_subcommand("verify", "compare the solver against the exhaustive oracle");
  verify->add_option("instances", verify_args.instances, "instance JSON files");
  verify->add_option("--variant", verify_args.variant, "solver variant");
  verify->add_option("--heuristic", verify_args.heuristic, "heuristic mode");
  verify->add_option("--map", verify_args.map_path, "map for generated batch");
  verify->add_option("--count", verify_args.count, "generate this many instances");
  verify->add_option("--agents", verify_args.agents, "agents per generated instance");
  verify->add_option("--goals", verify_args.goals, "goals per generated instance");
  verify->add_option("--seed", verify_args.seed, "base seed for the batch");
  verify->add_option("-o,--output", verify_args.output, "CSV output (default stdout)");

  ExportArgs export_args;
  auto* exp = app.add_subcommand("export-tsplib",
                                 "export the root sequencing graph as a TSPLIB ATSP file");
  exp->add_option("instance", export_args.instance_path, "instance JSON file")->required();
  exp->add_option("--name", export_args.name, "NAME field for the TSPLIB header");
  exp->add_flag("--allow-overlap", export_args.allow_overlap,
                "accept goals placed on starts/destinations");
  exp->add_option("-o,--output", export_args.output, "output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  if (*solve) return run_solve(solve_args);
  if (*gen) {
    if (gen_args.random_width > 0 && gen_args.random_height <= 0)
      die("--random-width requires --random-height");
    return run_gen(gen_args);
  }
  if (*bench) return run_bench_cmd(bench_args);
  if (*verify) {
    if (verify_args.instances.empty() && verify_args.count == 0)
      die("verify needs instance files or --map/--count");
    return run_verify(verify_args);
  }
  if (*exp) return run_export(export_args);
  return kExitError;
}
