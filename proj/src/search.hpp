#pragma once

#include <deque>
#include <memory>
#include <optional>
#include <queue>
#include <span>
#include <unordered_map>
#include <unordered_set>

#include "instance.hpp"
#include "sequencing.hpp"

namespace msmp {

struct VisitedVector {
  uint64_t bits = 0;
  int size = 0;

  bool test(int m) const { return (bits >> m) & 1ull; }
  void set(int m) { bits |= (1ull << m); }
  int count() const { return __builtin_popcountll(bits); }
  friend bool operator==(const VisitedVector&, const VisitedVector&) = default;
};

// a dominates b iff a covers every bit of b and at least one more.
bool binary_dominates(const VisitedVector& a, const VisitedVector& b);

// Set of agents in conflict between two neighboring joint vertices, as a
// bitmask: vertex conflicts (same target cell) and edge conflicts (swap along
// an edge).
uint64_t collision_fn(std::span<const Vertex> from, std::span<const Vertex> to);

struct SearchState {
  int32_t joint_id = -1;
  uint64_t bits = 0;
  double g = kUnreachable;
  double h = 0.0;
  bool h_ready = false;
  bool h_infeasible = false;
  uint64_t collision_set = 0;
  SearchState* parent = nullptr;
  std::vector<SearchState*> back_set;  // insertion order, deduplicated
  std::shared_ptr<const SequencingPlan> plan;
  bool in_open = false;
  uint32_t push_seq = 0;   // invalidates older OPEN entries
  bool dropped = false;    // evicted from alpha(v) by a dominating state
  bool alpha_member = false;

 private:
  friend class SearchContext;
  std::unordered_set<const SearchState*> back_seen_;
};

// Requires v(a) == v(b); true iff a's visited set dominates b's with g(a) <=
// g(b), or the visited sets are equal with g(a) < g(b).
bool state_dominates(const SearchState& a, const SearchState& b);

enum class Outcome { Solved, Infeasible, Timeout };

struct SearchOptions {
  Variant variant = Variant::MSStarC;
  HeuristicMode heuristic_mode = HeuristicMode::Exact;
  double time_limit_s = -1.0;  // <= 0: use the instance's limit
  SequencingOptions sequencing;
  bool record_trace = false;
  size_t trace_cap = 4096;
};

struct TraceSample {
  std::vector<Vertex> joint;
  uint64_t bits = 0;
  double g = 0.0;
};

struct SolveResult {
  Outcome outcome = Outcome::Infeasible;
  std::optional<Solution> solution;
  SolveStats stats;
  std::vector<TraceSample> trace;           // expanded states (record_trace)
  std::vector<double> pop_f;                // f of each expansion (record_trace)
  std::vector<uint8_t> pop_after_backprop;  // backprop happened since previous pop
};

struct Candidate {
  std::vector<Vertex> joint;
  double step_cost = 0.0;
  uint64_t bits = 0;
};

class SearchContext {
 public:
  SearchContext(const Instance& ins, const SearchOptions& opts);

  SolveResult run();

  // Limited neighbor set of s: agents outside the collision set follow their
  // policy step, agents inside it take every grid move including the wait.
  // Conflict filtering happens later, during processing.
  std::vector<Candidate> limited_neighbors(SearchState* s);

  // Collision-set back-propagation: grow, re-open, recurse over back_set.
  void backprop(SearchState* s, uint64_t incoming);

  // Test hooks.
  SearchState* make_state(const std::vector<Vertex>& joint, uint64_t bits, double g);
  void add_back_edge(SearchState* child, SearchState* parent);
  void set_heuristic(SearchState* s, double h);
  bool in_open(const SearchState* s) const { return s->in_open; }
  const std::vector<Vertex>& joint_of(const SearchState* s) const;
  bool alpha_antichain_ok() const;
  SolveStats& stats() { return stats_; }
  Sequencer& sequencer() { return sequencer_; }

 private:
  struct OpenEntry {
    double f;
    double g;
    int unset_bits;
    uint64_t bits;
    const std::vector<Vertex>* joint;
    SearchState* state;
    uint32_t seq;
  };
  struct OpenCmp {
    bool operator()(const OpenEntry& a, const OpenEntry& b) const;
  };
  struct StateKey {
    int32_t joint_id;
    uint64_t bits;
    bool operator==(const StateKey&) const = default;
  };
  struct StateKeyHash {
    size_t operator()(const StateKey& k) const;
  };

  int32_t intern_joint(const std::vector<Vertex>& joint);
  SearchState* canonical(const std::vector<Vertex>& joint, uint64_t bits);
  void ensure_heuristic(SearchState* s);
  void push_open(SearchState* s);
  SearchState* pop_open();
  void alpha_insert(SearchState* s);
  void process_candidate(SearchState* from, Candidate&& cand);
  void expand(SearchState* s);
  bool is_final(const SearchState* s) const;
  Solution reconstruct(SearchState* final_state) const;
  Vertex policy_next(const SearchState* s, int agent) const;

  const Instance* ins_;
  SearchOptions opts_;
  DistanceCache cache_;
  Sequencer sequencer_;
  uint64_t full_bits_ = 0;
  uint64_t all_agents_ = 0;
  std::vector<uint8_t> is_destination_;
  std::vector<int8_t> goal_bit_of_;  // per cell, goal index or -1

  std::deque<std::vector<Vertex>> joints_;
  std::unordered_map<std::string, int32_t> joint_ids_;
  std::deque<SearchState> states_;
  std::unordered_map<StateKey, SearchState*, StateKeyHash> state_map_;
  std::unordered_map<int32_t, std::vector<SearchState*>> alpha_;
  std::priority_queue<OpenEntry, std::vector<OpenEntry>, OpenCmp> open_;
  SolveStats stats_;
  bool backprop_since_pop_ = false;
  double pop_f_pending_ = 0.0;
};

SolveResult search(const Instance& ins, const SearchOptions& opts = {});

Solution reconstruct_solution(const Instance& ins, std::span<const std::vector<Vertex>> joints);

}  // namespace msmp
