#include "oracle.hpp"

#include <algorithm>

#include "search.hpp"

namespace msmp {

namespace {

// Compact free-cell indexing keeps the state table dense: a state index is
// (joint base-F number) * 2^M + bits.
struct OracleSpace {
  const Instance* ins;
  int n_agents;
  int n_goals;
  std::vector<Vertex> cell_of;         // free index -> vertex
  std::vector<int32_t> free_of;        // vertex -> free index or -1
  std::vector<std::vector<int32_t>> moves;  // per free index, successors incl. self
  std::vector<int8_t> goal_bit;        // per free index
  std::vector<uint8_t> is_dest;        // per free index
  uint64_t joint_count = 0;
  uint64_t state_count = 0;

  explicit OracleSpace(const Instance& instance) : ins(&instance) {
    const Grid& g = instance.grid;
    n_agents = instance.agent_count();
    n_goals = instance.goal_count();
    free_of.assign(size_t(g.cell_count()), -1);
    for (Vertex v = 0; v < g.cell_count(); ++v) {
      if (g.is_blocked(v)) continue;
      free_of[size_t(v)] = int32_t(cell_of.size());
      cell_of.push_back(v);
    }
    const size_t f = cell_of.size();
    moves.resize(f);
    goal_bit.assign(f, -1);
    is_dest.assign(f, 0);
    std::array<Vertex, 5> buf;
    for (size_t i = 0; i < f; ++i) {
      const int cnt = neighbors(g, cell_of[i], buf);
      for (int k = 0; k < cnt; ++k) moves[i].push_back(free_of[size_t(buf[size_t(k)])]);
    }
    for (int m = 0; m < n_goals; ++m) goal_bit[size_t(free_of[size_t(instance.goals[size_t(m)])])] = int8_t(m);
    for (Vertex d : instance.destinations) is_dest[size_t(free_of[size_t(d)])] = 1;
    joint_count = 1;
    for (int i = 0; i < n_agents; ++i) joint_count *= f;
    state_count = joint_count << n_goals;
  }

  uint64_t encode(std::span<const int32_t> cells, uint64_t bits) const {
    uint64_t j = 0;
    for (int i = 0; i < n_agents; ++i) j = j * cell_of.size() + uint64_t(cells[size_t(i)]);
    return (j << n_goals) | bits;
  }

  void decode(uint64_t idx, std::vector<int32_t>& cells, uint64_t& bits) const {
    bits = idx & ((n_goals == 64 ? ~0ull : (1ull << n_goals) - 1));
    uint64_t j = idx >> n_goals;
    for (int i = n_agents - 1; i >= 0; --i) {
      cells[size_t(i)] = int32_t(j % cell_of.size());
      j /= cell_of.size();
    }
  }
};

}  // namespace

OracleResult joint_oracle_from(const Instance& ins, std::span<const Vertex> joint_vertex,
                               uint64_t visited, bool enforce_conflicts,
                               const OracleLimits& limits, bool want_solution) {
  validate_instance(ins, ValidateOptions{true});
  if (ins.agent_count() > limits.max_agents)
    throw std::invalid_argument("oracle limit: more than " + std::to_string(limits.max_agents) +
                                " agents");
  if (ins.goal_count() > limits.max_goals)
    throw std::invalid_argument("oracle limit: more than " + std::to_string(limits.max_goals) +
                                " goals");
  if (int(ins.grid.free_count()) > limits.max_free_cells)
    throw std::invalid_argument("oracle limit: more than " +
                                std::to_string(limits.max_free_cells) + " free cells");

  const OracleSpace space(ins);
  const int n = space.n_agents;
  const uint64_t full_bits = space.n_goals == 64 ? ~0ull : (1ull << space.n_goals) - 1;

  constexpr int32_t kUnset = -1;
  std::vector<int32_t> dist(space.state_count, kUnset);
  std::vector<uint32_t> parent;
  if (want_solution) parent.assign(space.state_count, UINT32_MAX);

  std::vector<int32_t> start_cells(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int32_t c = space.free_of[size_t(joint_vertex[size_t(i)])];
    if (c < 0) throw std::invalid_argument("oracle start vertex is blocked");
    start_cells[size_t(i)] = c;
  }
  uint64_t start_bits = visited;
  for (int i = 0; i < n; ++i) {
    const int8_t b = space.goal_bit[size_t(start_cells[size_t(i)])];
    if (b >= 0) start_bits |= (1ull << b);
  }
  const uint64_t start_idx = space.encode(start_cells, start_bits);
  dist[start_idx] = 0;

  // Dial's buckets; all step costs are small integers.
  std::vector<std::vector<uint64_t>> buckets(1);
  buckets[0].push_back(start_idx);

  OracleResult result;
  std::vector<int32_t> cells(static_cast<size_t>(n)), next(static_cast<size_t>(n));
  std::vector<int> idx(static_cast<size_t>(n));
  uint64_t bits = 0;

  auto is_final = [&](std::span<const int32_t> cs, uint64_t b) {
    if (b != full_bits) return false;
    for (int i = 0; i < n; ++i) {
      if (!space.is_dest[size_t(cs[size_t(i)])]) return false;
      for (int j = i + 1; j < n; ++j)
        if (cs[size_t(i)] == cs[size_t(j)]) return false;
    }
    return true;
  };

  for (size_t d = 0; d < buckets.size(); ++d) {
    for (size_t bi = 0; bi < buckets[d].size(); ++bi) {
      const uint64_t cur = buckets[d][bi];
      if (dist[cur] != int32_t(d)) continue;  // superseded queue entry
      result.explored++;
      space.decode(cur, cells, bits);
      if (is_final(cells, bits)) {
        result.feasible = true;
        result.cost = double(d);
        if (want_solution) {
          std::vector<std::vector<Vertex>> joints;
          uint64_t walk = cur;
          for (;;) {
            std::vector<int32_t> cs(static_cast<size_t>(n));
            uint64_t bs;
            space.decode(walk, cs, bs);
            std::vector<Vertex> joint(static_cast<size_t>(n));
            for (int i = 0; i < n; ++i) joint[size_t(i)] = space.cell_of[size_t(cs[size_t(i)])];
            joints.push_back(std::move(joint));
            if (walk == start_idx) break;
            walk = parent[walk];
          }
          std::reverse(joints.begin(), joints.end());
          Solution sol = reconstruct_solution(ins, joints);
          if (sol.cost != result.cost)
            throw std::logic_error("oracle cost bookkeeping mismatch");
          result.solution = std::move(sol);
        }
        return result;
      }

      // enumerate the joint successor product
      std::fill(idx.begin(), idx.end(), 0);
      for (;;) {
        int step = 0;
        bool ok = true;
        uint64_t nbits = bits;
        for (int i = 0; i < n && ok; ++i) {
          next[size_t(i)] = space.moves[size_t(cells[size_t(i)])][size_t(idx[size_t(i)])];
          const bool moved = next[size_t(i)] != cells[size_t(i)];
          step += int(step_cost(ins.cost_model, moved,
                                space.is_dest[size_t(cells[size_t(i)])] != 0));
          const int8_t b = space.goal_bit[size_t(next[size_t(i)])];
          if (b >= 0) nbits |= (1ull << b);
        }
        if (enforce_conflicts) {
          for (int i = 0; i < n && ok; ++i)
            for (int j = i + 1; j < n && ok; ++j) {
              if (next[size_t(i)] == next[size_t(j)]) ok = false;
              if (next[size_t(i)] == cells[size_t(j)] && next[size_t(j)] == cells[size_t(i)] &&
                  cells[size_t(i)] != cells[size_t(j)])
                ok = false;
            }
        }
        if (ok) {
          const uint64_t nidx = space.encode(next, nbits);
          const int32_t nd = int32_t(d) + step;
          if (dist[nidx] == kUnset || nd < dist[nidx]) {
            dist[nidx] = nd;
            if (want_solution) parent[nidx] = uint32_t(cur);
            if (size_t(nd) >= buckets.size()) buckets.resize(size_t(nd) + 1);
            buckets[size_t(nd)].push_back(nidx);
          }
        }
        int i = n - 1;
        while (i >= 0 && ++idx[size_t(i)] == int(space.moves[size_t(cells[size_t(i)])].size())) {
          idx[size_t(i)] = 0;
          --i;
        }
        if (i < 0) break;
      }
    }
    buckets[d].clear();
    buckets[d].shrink_to_fit();
  }
  return result;  // infeasible
}

OracleResult joint_oracle(const Instance& ins, bool enforce_conflicts, const OracleLimits& limits) {
  return joint_oracle_from(ins, ins.starts, initial_visited(ins), enforce_conflicts, limits, true);
}

}  // namespace msmp
