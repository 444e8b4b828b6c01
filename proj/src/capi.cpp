#include "msmp/msmp.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "bench.hpp"
#include "instance.hpp"
#include "oracle.hpp"
#include "search.hpp"
#include "sequencing.hpp"

struct msmp_instance {
  msmp::Instance ins;
};

struct msmp_solution {
  msmp::Outcome outcome = msmp::Outcome::Infeasible;
  std::optional<msmp::Solution> solution;
  msmp::SolveStats stats;
  msmp::Variant variant = msmp::Variant::MSStarC;
  msmp::HeuristicMode mode = msmp::HeuristicMode::Exact;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

msmp_status fail(msmp_status code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

template <typename Fn>
msmp_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const msmp::ParseError& e) {
    return fail(MSMP_ERR_PARSE, e.what());
  } catch (const msmp::InstanceError& e) {
    return fail(MSMP_ERR_INVALID_INSTANCE, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(MSMP_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::logic_error& e) {
    return fail(MSMP_ERR_INTERNAL, e.what());
  } catch (const std::exception& e) {
    return fail(MSMP_ERR_IO, e.what());
  }
}

msmp_status parse_enum_args(const char* variant, const char* heuristic, msmp::SearchOptions& opts) {
  opts.variant = variant ? msmp::variant_from_string(variant) : msmp::Variant::MSStarC;
  opts.heuristic_mode =
      heuristic ? msmp::heuristic_mode_from_string(heuristic) : msmp::HeuristicMode::Exact;
  return MSMP_OK;
}

}  // namespace

extern "C" {

const char* msmp_version(void) { return "0.1.0"; }

const char* msmp_last_error(void) { return g_last_error.c_str(); }

void msmp_string_free(char* s) { std::free(s); }

msmp_status msmp_instance_load(const char* json_path, int allow_goal_overlap,
                               msmp_instance** out) {
  if (!json_path || !out) return fail(MSMP_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&]() {
    auto ins = msmp::load_instance_json(json_path,
                                        msmp::ValidateOptions{allow_goal_overlap != 0});
    *out = new msmp_instance{std::move(ins)};
    return MSMP_OK;
  });
}

msmp_status msmp_instance_parse(const char* json_text, const char* base_dir,
                                int allow_goal_overlap, msmp_instance** out) {
  if (!json_text || !out) return fail(MSMP_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&]() {
    auto ins = msmp::parse_instance_json(json_text, base_dir ? base_dir : "",
                                         msmp::ValidateOptions{allow_goal_overlap != 0});
    *out = new msmp_instance{std::move(ins)};
    return MSMP_OK;
  });
}

msmp_status msmp_instance_to_json(const msmp_instance* ins, char** json_out) {
  if (!ins || !json_out) return fail(MSMP_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&]() {
    *json_out = dup_string(msmp::instance_to_json(ins->ins));
    return MSMP_OK;
  });
}

msmp_status msmp_instance_counts(const msmp_instance* ins, int* agents, int* goals) {
  if (!ins) return fail(MSMP_ERR_INVALID_ARGUMENT, "null argument");
  if (agents) *agents = ins->ins.agent_count();
  if (goals) *goals = ins->ins.goal_count();
  return MSMP_OK;
}

void msmp_instance_free(msmp_instance* ins) { delete ins; }

msmp_status msmp_generate_map(int width, int height, double obstacle_density,
                              unsigned long long seed, char** map_text_out) {
  if (!map_text_out) return fail(MSMP_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&]() {
    *map_text_out = dup_string(msmp::write_map(msmp::gen_map(width, height, obstacle_density, seed)));
    return MSMP_OK;
  });
}

msmp_status msmp_generate_instance(const char* map_path, int agents, int goals,
                                   unsigned long long seed, const char* cost_model,
                                   double time_limit_s, msmp_instance** out) {
  if (!map_path || !out) return fail(MSMP_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&]() {
    msmp::Grid grid = msmp::load_map_file(map_path);
    msmp::CostModel model = cost_model ? msmp::cost_model_from_string(cost_model)
                                       : msmp::CostModel::WaitFreeAtRest;
    auto ins = msmp::gen_instance(grid, agents, goals, seed, model,
                                  time_limit_s > 0 ? time_limit_s : 60.0);
    ins.map_file = map_path;
    *out = new msmp_instance{std::move(ins)};
    return MSMP_OK;
  });
}

msmp_status msmp_solve(const msmp_instance* ins, const char* variant, const char* heuristic_mode,
                       double time_limit_s, msmp_solution** out) {
  if (!ins || !out) return fail(MSMP_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&]() {
    msmp::SearchOptions opts;
    parse_enum_args(variant, heuristic_mode, opts);
    opts.time_limit_s = time_limit_s;
    msmp::SolveResult res = msmp::search(ins->ins, opts);
    auto* sol = new msmp_solution;
    sol->outcome = res.outcome;
    sol->solution = std::move(res.solution);
    sol->stats = res.stats;
    sol->variant = opts.variant;
    sol->mode = opts.heuristic_mode;
    *out = sol;
    return MSMP_OK;
  });
}

msmp_status msmp_oracle_solve(const msmp_instance* ins, int enforce_conflicts,
                              msmp_solution** out) {
  if (!ins || !out) return fail(MSMP_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&]() {
    msmp::OracleResult res;
    try {
      res = msmp::joint_oracle(ins->ins, enforce_conflicts != 0);
    } catch (const std::invalid_argument& e) {
      return fail(MSMP_ERR_UNSUPPORTED, e.what());
    }
    auto* sol = new msmp_solution;
    sol->outcome = res.feasible ? msmp::Outcome::Solved : msmp::Outcome::Infeasible;
    if (res.solution) sol->solution = std::move(res.solution);
    *out = sol;
    return MSMP_OK;
  });
}

msmp_status msmp_solution_outcome(const msmp_solution* sol, msmp_outcome* outcome) {
  if (!sol || !outcome) return fail(MSMP_ERR_INVALID_ARGUMENT, "null argument");
  switch (sol->outcome) {
    case msmp::Outcome::Solved: *outcome = MSMP_OUTCOME_SOLVED; break;
    case msmp::Outcome::Infeasible: *outcome = MSMP_OUTCOME_INFEASIBLE; break;
    case msmp::Outcome::Timeout: *outcome = MSMP_OUTCOME_TIMEOUT; break;
  }
  return MSMP_OK;
}

msmp_status msmp_solution_cost(const msmp_solution* sol, double* cost) {
  if (!sol || !cost) return fail(MSMP_ERR_INVALID_ARGUMENT, "null argument");
  if (!sol->solution) return fail(MSMP_ERR_INVALID_ARGUMENT, "solution is not solved");
  *cost = sol->solution->cost;
  return MSMP_OK;
}

msmp_status msmp_solution_to_json(const msmp_instance* ins, const msmp_solution* sol,
                                  char** json_out) {
  if (!ins || !sol || !json_out) return fail(MSMP_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&]() {
    if (sol->solution) {
      *json_out = dup_string(msmp::solution_to_json(ins->ins, *sol->solution));
    } else {
      nlohmann::json j;
      j["outcome"] = sol->outcome == msmp::Outcome::Timeout ? "timeout" : "infeasible";
      nlohmann::json stats;
      stats["expansions"] = sol->stats.expansions;
      stats["generations"] = sol->stats.generations;
      stats["sequencing_calls"] = sol->stats.sequencing_calls;
      stats["sequencing_time_s"] = sol->stats.sequencing_time_s;
      stats["backprop_events"] = sol->stats.backprop_events;
      stats["wall_time_s"] = sol->stats.wall_time_s;
      j["stats"] = stats;
      *json_out = dup_string(j.dump(2) + "\n");
    }
    return MSMP_OK;
  });
}

void msmp_solution_free(msmp_solution* sol) { delete sol; }

msmp_status msmp_validate(const msmp_instance* ins, const msmp_solution* sol,
                          char** violations_json_out, int* violation_count) {
  if (!ins || !sol) return fail(MSMP_ERR_INVALID_ARGUMENT, "null argument");
  if (!sol->solution) return fail(MSMP_ERR_INVALID_ARGUMENT, "solution is not solved");
  return guarded([&]() {
    const auto violations = msmp::validate_solution(ins->ins, *sol->solution);
    if (violation_count) *violation_count = int(violations.size());
    if (violations_json_out)
      *violations_json_out = dup_string(msmp::violations_to_json(ins->ins, violations));
    return MSMP_OK;
  });
}

msmp_status msmp_export_tsplib(const msmp_instance* ins, const char* name, char** text_out) {
  if (!ins || !text_out) return fail(MSMP_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&]() {
    msmp::DistanceCache cache(ins->ins.grid);
    const auto tg = msmp::build_transformed_graph(ins->ins, ins->ins.starts,
                                                  msmp::initial_visited(ins->ins), cache);
    *text_out = dup_string(msmp::export_tsplib(tg, name ? name : "msmp"));
    return MSMP_OK;
  });
}

msmp_status msmp_run_bench(const char* config_json, const char* base_dir, int workers,
                           int use_seed_override, unsigned long long seed_override,
                           char** csv_out, char** summary_json_out) {
  if (!config_json) return fail(MSMP_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&]() {
    msmp::BenchConfig cfg = msmp::parse_bench_config(config_json, base_dir ? base_dir : "");
    if (use_seed_override) cfg.seed = seed_override;
    msmp::BenchResult res = msmp::run_bench(cfg, workers);
    if (csv_out) *csv_out = dup_string(res.csv());
    if (summary_json_out) *summary_json_out = dup_string(res.summary_json());
    return MSMP_OK;
  });
}

}  // extern "C"
