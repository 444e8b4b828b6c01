#pragma once

#include <optional>
#include <span>

#include "instance.hpp"

namespace msmp {

struct OracleLimits {
  int max_agents = 3;
  int max_goals = 5;
  int max_free_cells = 100;
};

struct OracleResult {
  bool feasible = false;
  double cost = kUnreachable;
  std::optional<Solution> solution;
  uint64_t explored = 0;
};

// Exhaustive uniform-cost search over (joint vertex, visited bits). With
// enforce_conflicts the successors are filtered by the vertex/edge conflict
// rules; without it the agents move independently (the conflict-free
// relaxation). Throws std::invalid_argument when the instance exceeds the
// size limits.
OracleResult joint_oracle(const Instance& ins, bool enforce_conflicts,
                          const OracleLimits& limits = {});

// Same search started from an arbitrary state; used for cost-to-go queries.
OracleResult joint_oracle_from(const Instance& ins, std::span<const Vertex> joint_vertex,
                               uint64_t visited, bool enforce_conflicts,
                               const OracleLimits& limits = {}, bool want_solution = true);

}  // namespace msmp
