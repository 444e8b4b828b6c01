/*
 * msmp - multi-agent simultaneous multi-goal sequencing and path finding.
 *
 * C interface to the solver library. All functions return msmp_status;
 * MSMP_OK means success and anything else leaves a human-readable message in
 * msmp_last_error(). Strings returned through char** parameters are heap
 * allocated and must be released with msmp_string_free(). Handles are opaque
 * and freed with their matching *_free function.
 */
#ifndef MSMP_H
#define MSMP_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct msmp_instance msmp_instance;
typedef struct msmp_solution msmp_solution;

typedef enum msmp_status {
  MSMP_OK = 0,
  MSMP_ERR_INVALID_ARGUMENT = 1,
  MSMP_ERR_IO = 2,
  MSMP_ERR_PARSE = 3,
  MSMP_ERR_INVALID_INSTANCE = 4,
  MSMP_ERR_UNSUPPORTED = 5,
  MSMP_ERR_INTERNAL = 6
} msmp_status;

typedef enum msmp_outcome {
  MSMP_OUTCOME_SOLVED = 0,
  MSMP_OUTCOME_INFEASIBLE = 1,
  MSMP_OUTCOME_TIMEOUT = 2
} msmp_outcome;

const char* msmp_version(void);

/* Message for the most recent failure on this thread. */
const char* msmp_last_error(void);

void msmp_string_free(char* s);

/*
 * Instances. JSON schema: {"map_file", "starts", "destinations", "goals",
 * "cost_model", "time_limit_s"} with [row, col] coordinate pairs. map_file is
 * resolved relative to base_dir (parse) or the JSON file's directory (load).
 * allow_goal_overlap accepts goals placed on starts or destinations.
 */
msmp_status msmp_instance_load(const char* json_path, int allow_goal_overlap,
                               msmp_instance** out);
msmp_status msmp_instance_parse(const char* json_text, const char* base_dir,
                                int allow_goal_overlap, msmp_instance** out);
msmp_status msmp_instance_to_json(const msmp_instance* ins, char** json_out);
msmp_status msmp_instance_counts(const msmp_instance* ins, int* agents, int* goals);
void msmp_instance_free(msmp_instance* ins);

/* Random grid in MovingAI map format with round(w*h*density) blocked cells. */
msmp_status msmp_generate_map(int width, int height, double obstacle_density,
                              unsigned long long seed, char** map_text_out);

/*
 * Random instance over the largest connected free component of the map,
 * sampled without replacement; deterministic in seed. cost_model is
 * "wait-free-at-rest" or "wait-always-one" (NULL for the default).
 */
msmp_status msmp_generate_instance(const char* map_path, int agents, int goals,
                                   unsigned long long seed, const char* cost_model,
                                   double time_limit_s, msmp_instance** out);

/*
 * Run the solver. variant: "ms*" or "ms*-c"; heuristic_mode: "exact" or
 * "fast" (NULL for defaults "ms*-c"/"exact"). time_limit_s <= 0 uses the
 * instance's limit. The result handle carries the outcome, statistics and,
 * when solved, the paths.
 */
msmp_status msmp_solve(const msmp_instance* ins, const char* variant,
                       const char* heuristic_mode, double time_limit_s,
                       msmp_solution** out);

/*
 * Exhaustive reference solver (small instances only: at most 3 agents,
 * 5 goals, 100 free cells). Fails with MSMP_ERR_UNSUPPORTED beyond those
 * limits.
 */
msmp_status msmp_oracle_solve(const msmp_instance* ins, int enforce_conflicts,
                              msmp_solution** out);

msmp_status msmp_solution_outcome(const msmp_solution* sol, msmp_outcome* outcome);
msmp_status msmp_solution_cost(const msmp_solution* sol, double* cost);
/* Solved: {"cost", "paths", "stats", "variant", "heuristic_mode"}.
 * Otherwise: {"outcome", "stats"}. */
msmp_status msmp_solution_to_json(const msmp_instance* ins, const msmp_solution* sol,
                                  char** json_out);
void msmp_solution_free(msmp_solution* sol);

/* JSON array of violations; empty array means the solution is valid. */
msmp_status msmp_validate(const msmp_instance* ins, const msmp_solution* sol,
                          char** violations_json_out, int* violation_count);

/* TSPLIB ATSP export of the root goal-sequencing graph (EDGE_WEIGHT_TYPE
 * EXPLICIT, FULL_MATRIX; forbidden edges written as 10000000). */
msmp_status msmp_export_tsplib(const msmp_instance* ins, const char* name, char** text_out);

/*
 * Benchmark campaign. config_json: {"grids", "agents", "goals",
 * "instances_per_cell", "time_limit_s", "variant", "heuristic_mode",
 * "cost_model", "seed"}; grid entries are map paths (relative to base_dir) or
 * {"random": {"width", "height", "obstacle_density"}}. seed_override replaces
 * the config seed when use_seed_override is nonzero. Returns the per-instance
 * CSV and a summary JSON (success rate per grid/N/M cell, mean sequencing
 * time per N/M).
 */
msmp_status msmp_run_bench(const char* config_json, const char* base_dir, int workers,
                           int use_seed_override, unsigned long long seed_override,
                           char** csv_out, char** summary_json_out);

#ifdef __cplusplus
}
#endif

#endif /* MSMP_H */
