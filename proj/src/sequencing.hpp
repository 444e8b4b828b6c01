#pragma once

#include <memory>
#include <optional>
#include <span>
#include <unordered_map>

#include "instance.hpp"

namespace msmp {

enum class NodeTag : uint8_t { AgentCurrent, Goal, Destination };

struct TgNode {
  NodeTag tag;
  int index;      // agent index, global goal index, or destination slot
  Vertex vertex;  // workspace vertex
};

// Directed complete graph over {agent current vertices} u {unvisited goals} u
// {destinations}. Edge cost classes:
//   agent/goal -> goal/destination : shortest-path cost in the workspace
//   destination -> agent           : 0
//   everything else (and diagonal) : forbidden
// Forbidden edges are kept as +inf, never a large finite number; solvers must
// reject tours that use them.
struct TransformedGraph {
  std::vector<TgNode> nodes;
  int agent_count = 0;
  std::vector<double> cost;  // row-major, size() * size()

  int size() const { return int(nodes.size()); }
  double at(int a, int b) const { return cost[size_t(a) * nodes.size() + size_t(b)]; }
  double& at(int a, int b) { return cost[size_t(a) * nodes.size() + size_t(b)]; }
  bool is_forbidden(int a, int b) const { return at(a, b) == kUnreachable; }
};

TransformedGraph build_transformed_graph(const Instance& ins, std::span<const Vertex> joint_vertex,
                                         uint64_t visited, DistanceCache& cache);

// Hamiltonian cycle; order[0] is always node 0.
struct Tour {
  std::vector<int> order;
  double cost = 0.0;
  double lower_bound = 0.0;
};

struct SequencingOptions {
  int exact_threshold = 16;          // max node count for Held-Karp
  int64_t improvement_budget = 20000;  // local-search improvement steps
};

// Throws std::logic_error when the tour violates the forced structure
// (permutation, forbidden edge, or a zero-cost destination->agent edge count
// different from the agent count).
void check_tour_structure(const TransformedGraph& tg, const Tour& tour);

// Held-Karp over node subsets; nullopt when no forbidden-free cycle exists.
// Deterministic reconstruction (lowest node index wins ties).
std::optional<Tour> solve_tsp_exact(const TransformedGraph& tg, int exact_threshold = 16);

// Nearest-neighbor construction followed by direction-preserving Or-opt
// (segment lengths 1-3) and directed 3-opt block swaps. lower_bound comes from
// the assignment relaxation. Falls back to the exact solver when construction
// dead-ends on a graph within the exact threshold.
std::optional<Tour> solve_tsp_heuristic(const TransformedGraph& tg,
                                        const SequencingOptions& opts = {},
                                        bool* used_exact = nullptr);

// Optimal assignment (successor permutation) relaxation; +inf if infeasible.
double assignment_lower_bound(const TransformedGraph& tg);

// Exhaustive permutation minimum for small graphs (test oracle); node limit 10.
std::optional<Tour> tsp_brute_force(const TransformedGraph& tg);

struct GoalSequence {
  int agent = 0;
  std::vector<Vertex> vertices;  // current vertex, goals..., destination
};

std::vector<GoalSequence> partition_tour(const TransformedGraph& tg, const Tour& tour);

struct SequencingPlan {
  std::vector<GoalSequence> sequences;
  std::vector<Path> policy_paths;  // concatenated shortest paths per agent
  double h_value = 0.0;
  Tour tour;
  bool exact = true;

  // Policy step: next vertex after position `pos` on agent i's policy path;
  // waiting at the terminus once the path is exhausted.
  Vertex next_step(int agent, size_t pos) const {
    const auto& vs = policy_paths[size_t(agent)].vertices;
    return pos + 1 < vs.size() ? vs[pos + 1] : vs.back();
  }
};

// Builds and memoizes sequencing plans keyed by (joint vertex, visited bits).
// A cached null plan records an infeasible sequencing. Not thread-safe;
// confine to one solve.
class Sequencer {
 public:
  Sequencer(const Instance& ins, HeuristicMode mode, SequencingOptions opts, DistanceCache& cache)
      : ins_(&ins), mode_(mode), opts_(opts), cache_(&cache) {}

  std::shared_ptr<const SequencingPlan> plan_for(std::span<const Vertex> joint_vertex,
                                                 uint64_t visited);

  uint64_t calls() const { return calls_; }
  uint64_t memo_hits() const { return memo_hits_; }
  double total_time_s() const { return total_time_s_; }

 private:
  const Instance* ins_;
  HeuristicMode mode_;
  SequencingOptions opts_;
  DistanceCache* cache_;
  std::unordered_map<std::string, std::shared_ptr<const SequencingPlan>> memo_;
  uint64_t calls_ = 0;
  uint64_t memo_hits_ = 0;
  double total_time_s_ = 0.0;
};

std::shared_ptr<const SequencingPlan> make_plan(const Instance& ins,
                                                std::span<const Vertex> joint_vertex,
                                                uint64_t visited, HeuristicMode mode,
                                                DistanceCache& cache,
                                                const SequencingOptions& opts = {});

// TSPLIB ATSP document (EDGE_WEIGHT_TYPE EXPLICIT, FULL_MATRIX); forbidden
// edges encoded as 10^7.
std::string export_tsplib(const TransformedGraph& tg, const std::string& name);

}  // namespace msmp
