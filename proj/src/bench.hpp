#pragma once

#include <string>
#include <vector>

#include "instance.hpp"
#include "search.hpp"

namespace msmp {

struct GridSpec {
  std::string id;
  std::string map_file;  // empty for generated grids
  bool random = false;
  int width = 0;
  int height = 0;
  double obstacle_density = 0.0;
};

struct BenchConfig {
  std::vector<GridSpec> grids;
  std::vector<int> agent_counts;
  std::vector<int> goal_counts;
  int instances_per_cell = 1;
  double time_limit_s = 60.0;
  Variant variant = Variant::MSStar;
  HeuristicMode heuristic_mode = HeuristicMode::Fast;
  CostModel cost_model = CostModel::WaitFreeAtRest;
  uint64_t seed = 0;
};

BenchConfig parse_bench_config(const std::string& text, const std::string& base_dir);

// Random grid with exactly round(width*height*density) blocked cells.
Grid gen_map(int width, int height, double obstacle_density, uint64_t seed);

// Uniform sampling without replacement from the largest connected free
// component (ties broken toward the component containing the smallest vertex
// id), so the conflict-free relaxation is always feasible. Deterministic in
// the seed (mt19937_64 + rejection sampling).
Instance gen_instance(const Grid& grid, int agents, int goals, uint64_t seed,
                      CostModel cost_model = CostModel::WaitFreeAtRest,
                      double time_limit_s = 60.0);

enum class BenchOutcome { Solved, Infeasible, Timeout, Error };
const char* to_string(BenchOutcome o);

struct BenchRow {
  std::string grid_id;
  int agents = 0;
  int goals = 0;
  uint64_t seed = 0;
  BenchOutcome outcome = BenchOutcome::Error;
  double cost = 0.0;
  double wall_time_s = 0.0;
  uint64_t sequencing_calls = 0;
  double mean_sequencing_time_s = 0.0;
  double sequencing_time_s = 0.0;
  uint64_t expansions = 0;
};

struct BenchResult {
  BenchConfig config;
  std::vector<BenchRow> rows;

  std::string csv() const;
  std::string summary_json() const;
};

uint64_t derive_seed(uint64_t base, uint64_t grid_index, uint64_t agents, uint64_t goals,
                     uint64_t repetition);

// Runs every (grid, N, M) cell of the campaign. Individual failures become
// rows; the campaign never aborts. `workers` > 1 distributes instances over
// threads; rows are identical (modulo timing columns) regardless.
BenchResult run_bench(const BenchConfig& config, int workers = 1);

}  // namespace msmp
