#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "grid.hpp"

namespace msmp {

// Wait-step pricing. Moves always cost 1. WaitAlwaysOne charges every wait 1;
// WaitFreeAtRest charges 0 for a wait taken on a destination vertex and 1
// elsewhere. The same per-step rule is applied by the search, the oracles and
// solution validation, so reported costs always re-validate.
enum class CostModel { WaitAlwaysOne, WaitFreeAtRest };

enum class Variant { MSStar, MSStarC };
enum class HeuristicMode { Exact, Fast };

struct InstanceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Instance {
  Grid grid;
  std::string map_file;
  std::vector<Vertex> starts;
  std::vector<Vertex> destinations;
  std::vector<Vertex> goals;
  CostModel cost_model = CostModel::WaitFreeAtRest;
  double time_limit_s = 60.0;

  int agent_count() const { return int(starts.size()); }
  int goal_count() const { return int(goals.size()); }
};

struct ValidateOptions {
  bool allow_goal_overlap = false;
};

// Throws InstanceError on any structural problem.
void validate_instance(const Instance& ins, const ValidateOptions& opts = {});

// Goal bits already satisfied at t=0. Nonzero only when goals overlap starts
// (possible with allow_goal_overlap).
uint64_t initial_visited(const Instance& ins);

inline double step_cost(CostModel model, bool moved, bool wait_at_destination) {
  if (moved) return 1.0;
  if (model == CostModel::WaitAlwaysOne) return 1.0;
  return wait_at_destination ? 0.0 : 1.0;
}

struct SolveStats {
  uint64_t expansions = 0;
  uint64_t generations = 0;
  uint64_t sequencing_calls = 0;
  double sequencing_time_s = 0.0;
  uint64_t sequencing_memo_hits = 0;
  uint64_t backprop_events = 0;
  double wall_time_s = 0.0;
};

struct Solution {
  std::vector<Path> paths;  // equal length, one per agent
  double cost = 0.0;
  SolveStats stats;
  Variant variant = Variant::MSStarC;
  HeuristicMode heuristic_mode = HeuristicMode::Exact;
};

struct Violation {
  enum class Kind {
    Structural,
    StartMismatch,
    BadTerminus,
    DuplicateDestination,
    UnvisitedGoal,
    VertexConflict,
    EdgeConflict,
    IllegalMove,
    CostMismatch,
  };
  Kind kind;
  int agent_a = -1;
  int agent_b = -1;
  int64_t time = -1;
  std::string message;
};

// Reports every violation of the problem contract: starts, termini,
// destination assignment, goal coverage, move legality, vertex/edge conflicts
// and cost recomputation under the instance cost model.
std::vector<Violation> validate_solution(const Instance& ins, const Solution& sol);

const char* to_string(Violation::Kind kind);
const char* to_string(CostModel m);
const char* to_string(Variant v);
const char* to_string(HeuristicMode m);
CostModel cost_model_from_string(const std::string& s);
Variant variant_from_string(const std::string& s);
HeuristicMode heuristic_mode_from_string(const std::string& s);

// Instance JSON: {map_file, starts, destinations, goals, cost_model,
// time_limit_s} with [row, col] coordinate pairs.
Instance parse_instance_json(const std::string& text, const std::string& base_dir,
                             const ValidateOptions& opts = {});
Instance load_instance_json(const std::string& path, const ValidateOptions& opts = {});
std::string instance_to_json(const Instance& ins);

// Solution JSON: {cost, paths, stats, variant, heuristic_mode}.
std::string solution_to_json(const Instance& ins, const Solution& sol);
std::string violations_to_json(const Instance& ins, const std::vector<Violation>& violations);

}  // namespace msmp
