#include "sequencing.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <sstream>

namespace msmp {

TransformedGraph build_transformed_graph(const Instance& ins, std::span<const Vertex> joint_vertex,
                                         uint64_t visited, DistanceCache& cache) {
  const int n_agents = ins.agent_count();
  if (int(joint_vertex.size()) != n_agents)
    throw std::invalid_argument("joint vertex size must equal agent count");

  TransformedGraph tg;
  tg.agent_count = n_agents;
  for (int i = 0; i < n_agents; ++i)
    tg.nodes.push_back({NodeTag::AgentCurrent, i, joint_vertex[size_t(i)]});
  for (int m = 0; m < ins.goal_count(); ++m)
    if (!(visited >> m & 1ull)) tg.nodes.push_back({NodeTag::Goal, m, ins.goals[size_t(m)]});
  for (int d = 0; d < n_agents; ++d)
    tg.nodes.push_back({NodeTag::Destination, d, ins.destinations[size_t(d)]});

  const int n = tg.size();
  tg.cost.assign(size_t(n) * size_t(n), kUnreachable);
  for (int a = 0; a < n; ++a) {
    const TgNode& from = tg.nodes[size_t(a)];
    const DistanceField* field = nullptr;
    for (int b = 0; b < n; ++b) {
      if (a == b) continue;
      const TgNode& to = tg.nodes[size_t(b)];
      if (from.tag == NodeTag::Destination) {
        if (to.tag == NodeTag::AgentCurrent) tg.at(a, b) = 0.0;
        continue;
      }
      if (to.tag == NodeTag::AgentCurrent) continue;
      if (!field) field = &cache.get(from.vertex);
      tg.at(a, b) = field->dist[size_t(to.vertex)];  // +inf stays forbidden
    }
  }
  return tg;
}

namespace {

double tour_edge_sum(const TransformedGraph& tg, const std::vector<int>& order) {
  double c = 0.0;
  for (size_t k = 0; k < order.size(); ++k) {
    double e = tg.at(order[k], order[(k + 1) % order.size()]);
    if (e == kUnreachable) return kUnreachable;
    c += e;
  }
  return c;
}

std::vector<int> rotate_to_zero(std::vector<int> order) {
  auto it = std::find(order.begin(), order.end(), 0);
  std::rotate(order.begin(), it, order.end());
  return order;
}

}  // namespace

void check_tour_structure(const TransformedGraph& tg, const Tour& tour) {
  const int n = tg.size();
  if (int(tour.order.size()) != n) throw std::logic_error("tour is not a permutation");
  std::vector<uint8_t> seen(size_t(n), 0);
  for (int v : tour.order) {
    if (v < 0 || v >= n || seen[size_t(v)]) throw std::logic_error("tour is not a permutation");
    seen[size_t(v)] = 1;
  }
  int zero_links = 0;
  double total = 0.0;
  for (size_t k = 0; k < tour.order.size(); ++k) {
    int a = tour.order[k], b = tour.order[(k + 1) % tour.order.size()];
    double e = tg.at(a, b);
    if (e == kUnreachable) throw std::logic_error("tour uses a forbidden edge");
    total += e;
    if (tg.nodes[size_t(a)].tag == NodeTag::Destination &&
        tg.nodes[size_t(b)].tag == NodeTag::AgentCurrent) {
      if (e != 0.0) throw std::logic_error("destination->agent edge has nonzero cost");
      ++zero_links;
    }
  }
  if (zero_links != tg.agent_count)
    throw std::logic_error("tour has " + std::to_string(zero_links) +
                           " destination->agent edges, expected " +
                           std::to_string(tg.agent_count));
  if (total != tour.cost) throw std::logic_error("tour cost field does not match its edges");
  if (tour.lower_bound > tour.cost) throw std::logic_error("tour lower bound exceeds its cost");
}

std::optional<Tour> solve_tsp_exact(const TransformedGraph& tg, int exact_threshold) {
  const int n = tg.size();
  if (n > exact_threshold)
    throw std::invalid_argument("transformed graph has " + std::to_string(n) +
                                " nodes, above the exact threshold " +
                                std::to_string(exact_threshold));
  if (n > 24) throw std::invalid_argument("exact solver limited to 24 nodes");
  if (n < 2) throw std::invalid_argument("transformed graph too small");

  if (n == 2) {
    double c = tg.at(0, 1), back = tg.at(1, 0);
    if (c == kUnreachable || back == kUnreachable) return std::nullopt;
    Tour t{{0, 1}, c + back, c + back};
    check_tour_structure(tg, t);
    return t;
  }

  const int m = n - 1;  // nodes 1..n-1
  const size_t masks = size_t(1) << m;
  std::vector<double> dp(masks * size_t(m), kUnreachable);
  std::vector<int8_t> par(masks * size_t(m), -2);
  for (int j = 0; j < m; ++j) {
    double c = tg.at(0, j + 1);
    if (c == kUnreachable) continue;
    dp[(size_t(1) << j) * size_t(m) + size_t(j)] = c;
    par[(size_t(1) << j) * size_t(m) + size_t(j)] = -1;  // came from node 0
  }
  for (size_t mask = 1; mask < masks; ++mask) {
    const size_t base = mask * size_t(m);
    for (int j = 0; j < m; ++j) {
      if (!(mask >> j & 1)) continue;
      const double cur = dp[base + size_t(j)];
      if (cur == kUnreachable) continue;
      for (int k = 0; k < m; ++k) {
        if (mask >> k & 1) continue;
        const double e = tg.at(j + 1, k + 1);
        if (e == kUnreachable) continue;
        const size_t nidx = (mask | (size_t(1) << k)) * size_t(m) + size_t(k);
        if (cur + e < dp[nidx]) {
          dp[nidx] = cur + e;
          par[nidx] = int8_t(j);
        }
      }
    }
  }
  const size_t full = masks - 1;
  double best = kUnreachable;
  int best_end = -1;
  for (int j = 0; j < m; ++j) {
    const double cur = dp[full * size_t(m) + size_t(j)];
    const double e = tg.at(j + 1, 0);
    if (cur == kUnreachable || e == kUnreachable) continue;
    if (cur + e < best) {
      best = cur + e;
      best_end = j;
    }
  }
  if (best_end < 0) return std::nullopt;

  std::vector<int> rev;
  size_t mask = full;
  int j = best_end;
  while (j >= 0) {
    rev.push_back(j + 1);
    int p = par[mask * size_t(m) + size_t(j)];
    mask &= ~(size_t(1) << j);
    j = p;
  }
  Tour t;
  t.order.push_back(0);
  t.order.insert(t.order.end(), rev.rbegin(), rev.rend());
  t.cost = best;
  t.lower_bound = best;
  check_tour_structure(tg, t);
  return t;
}

double assignment_lower_bound(const TransformedGraph& tg) {
  const int n = tg.size();
  // Hungarian algorithm with potentials, 1-based work arrays.
  std::vector<double> u(size_t(n) + 1, 0.0), v(size_t(n) + 1, 0.0);
  std::vector<int> p(size_t(n) + 1, 0), way(size_t(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(size_t(n) + 1, kUnreachable);
    std::vector<uint8_t> used(size_t(n) + 1, 0);
    do {
      used[size_t(j0)] = 1;
      const int i0 = p[size_t(j0)];
      double delta = kUnreachable;
      int j1 = -1;
      for (int j = 1; j <= n; ++j) {
        if (used[size_t(j)]) continue;
        const double c = tg.at(i0 - 1, j - 1);
        if (c != kUnreachable) {
          const double cur = c - u[size_t(i0)] - v[size_t(j)];
          if (cur < minv[size_t(j)]) {
            minv[size_t(j)] = cur;
            way[size_t(j)] = j0;
          }
        }
        if (minv[size_t(j)] < delta) {
          delta = minv[size_t(j)];
          j1 = j;
        }
      }
      if (j1 < 0 || delta == kUnreachable) return kUnreachable;  // no feasible assignment
      for (int j = 0; j <= n; ++j) {
        if (used[size_t(j)]) {
          u[size_t(p[size_t(j)])] += delta;
          v[size_t(j)] -= delta;
        } else {
          minv[size_t(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[size_t(j0)] != 0);
    do {
      const int j1 = way[size_t(j0)];
      p[size_t(j0)] = p[size_t(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  double total = 0.0;
  for (int j = 1; j <= n; ++j) total += tg.at(p[size_t(j)] - 1, j - 1);
  return total;
}

namespace {

// Greedy construction that never paints itself into a structural corner:
// entering a destination closes the current agent segment, which is only
// allowed while another agent node remains or everything else is done.
std::optional<std::vector<int>> nearest_neighbor_tour(const TransformedGraph& tg) {
  const int n = tg.size();
  std::vector<uint8_t> visited(size_t(n), 0);
  int agents_left = tg.agent_count - 1;  // node 0 is AgentCurrent(0)
  int goals_left = 0, dests_left = 0;
  for (const TgNode& node : tg.nodes) {
    if (node.tag == NodeTag::Goal) ++goals_left;
    if (node.tag == NodeTag::Destination) ++dests_left;
  }
  std::vector<int> order{0};
  visited[0] = 1;
  int cur = 0;
  for (int step = 1; step < n; ++step) {
    int best = -1;
    double best_cost = kUnreachable;
    for (int j = 0; j < n; ++j) {
      if (visited[size_t(j)]) continue;
      const double c = tg.at(cur, j);
      if (c == kUnreachable || c >= best_cost) continue;
      if (tg.nodes[size_t(j)].tag == NodeTag::Destination && agents_left == 0 && goals_left > 0)
        continue;
      best = j;
      best_cost = c;
    }
    if (best < 0) return std::nullopt;
    visited[size_t(best)] = 1;
    switch (tg.nodes[size_t(best)].tag) {
      case NodeTag::AgentCurrent: --agents_left; break;
      case NodeTag::Goal: --goals_left; break;
      case NodeTag::Destination: --dests_left; break;
    }
    order.push_back(best);
    cur = best;
  }
  if (tg.at(cur, 0) == kUnreachable) return std::nullopt;
  return order;
}

// Relocates order[p..p+len-1] between order[q] and order[q+1], both outside
// the segment. Direction of every piece is preserved.
bool try_or_opt(const TransformedGraph& tg, std::vector<int>& order, int64_t& budget) {
  const int n = int(order.size());
  for (int len = 1; len <= 3 && len < n - 1; ++len) {
    for (int p = 0; p + len <= n; ++p) {
      const int a = order[size_t((p + n - 1) % n)];
      const int s0 = order[size_t(p)];
      const int s1 = order[size_t(p + len - 1)];
      const int b = order[size_t((p + len) % n)];
      if (a == s1) continue;  // segment is the whole ring
      const double removed = tg.at(a, s0) + tg.at(s1, b);
      const double bridge = tg.at(a, b);
      if (bridge == kUnreachable) continue;
      for (int q = 0; q < n; ++q) {
        const int qn = (q + 1) % n;
        if ((q >= p && q <= p + len - 1) || (qn >= p && qn <= p + len - 1)) continue;
        const int c = order[size_t(q)];
        const int d = order[size_t(qn)];
        if (c == a && d == b) continue;
        const double added = tg.at(c, s0) + tg.at(s1, d);
        if (added == kUnreachable || tg.at(c, d) == kUnreachable) continue;
        const double delta = (bridge + added) - (removed + tg.at(c, d));
        if (delta < -1e-9) {
          std::vector<int> seg(order.begin() + p, order.begin() + p + len);
          order.erase(order.begin() + p, order.begin() + p + len);
          auto pos = std::find(order.begin(), order.end(), c);
          order.insert(pos + 1, seg.begin(), seg.end());
          --budget;
          return true;
        }
      }
    }
  }
  return false;
}

// Directed 3-opt: swap the two middle blocks, reconnecting A-C-B-D without
// reversing any of them.
bool try_block_swap(const TransformedGraph& tg, std::vector<int>& order, int64_t& budget) {
  const int n = int(order.size());
  for (int i = 0; i + 2 < n; ++i) {
    for (int j = i + 1; j + 1 < n; ++j) {
      const double e_ij = tg.at(order[size_t(i)], order[size_t(i + 1)]);
      const double e_jk = tg.at(order[size_t(j)], order[size_t(j + 1)]);
      for (int k = j + 1; k < n; ++k) {
        const int next_k = (k + 1) % n;
        const double e_k = tg.at(order[size_t(k)], order[size_t(next_k)]);
        const double n1 = tg.at(order[size_t(i)], order[size_t(j + 1)]);
        const double n2 = tg.at(order[size_t(k)], order[size_t(i + 1)]);
        const double n3 = tg.at(order[size_t(j)], order[size_t(next_k)]);
        if (n1 == kUnreachable || n2 == kUnreachable || n3 == kUnreachable) continue;
        const double delta = (n1 + n2 + n3) - (e_ij + e_jk + e_k);
        if (delta < -1e-9) {
          std::vector<int> rebuilt;
          rebuilt.reserve(size_t(n));
          rebuilt.insert(rebuilt.end(), order.begin(), order.begin() + i + 1);
          rebuilt.insert(rebuilt.end(), order.begin() + j + 1, order.begin() + k + 1);
          rebuilt.insert(rebuilt.end(), order.begin() + i + 1, order.begin() + j + 1);
          rebuilt.insert(rebuilt.end(), order.begin() + k + 1, order.end());
          order = std::move(rebuilt);
          --budget;
          return true;
        }
      }
    }
  }
  return false;
}

}  // namespace

std::optional<Tour> solve_tsp_heuristic(const TransformedGraph& tg, const SequencingOptions& opts,
                                        bool* used_exact) {
  if (used_exact) *used_exact = false;
  const int n = tg.size();
  if (n < 2) throw std::invalid_argument("transformed graph too small");

  auto constructed = nearest_neighbor_tour(tg);
  if (!constructed) {
    if (n <= opts.exact_threshold) {
      if (used_exact) *used_exact = true;
      return solve_tsp_exact(tg, opts.exact_threshold);
    }
    return std::nullopt;
  }

  std::vector<int> order = *constructed;
  int64_t budget = opts.improvement_budget;
  while (budget > 0) {
    if (try_or_opt(tg, order, budget)) continue;
    if (try_block_swap(tg, order, budget)) continue;
    break;
  }

  Tour t;
  t.order = rotate_to_zero(std::move(order));
  t.cost = tour_edge_sum(tg, t.order);
  const double lb = assignment_lower_bound(tg);
  t.lower_bound = lb == kUnreachable ? 0.0 : lb;
  check_tour_structure(tg, t);
  return t;
}

std::optional<Tour> tsp_brute_force(const TransformedGraph& tg) {
  const int n = tg.size();
  if (n > 10) throw std::invalid_argument("brute-force TSP limited to 10 nodes");
  if (n < 2) throw std::invalid_argument("transformed graph too small");
  std::vector<int> rest;
  for (int j = 1; j < n; ++j) rest.push_back(j);
  std::vector<int> best_order;
  double best = kUnreachable;
  std::vector<int> order(static_cast<size_t>(n));
  do {
    order[0] = 0;
    std::copy(rest.begin(), rest.end(), order.begin() + 1);
    const double c = tour_edge_sum(tg, order);
    if (c < best) {
      best = c;
      best_order = order;
    }
  } while (std::next_permutation(rest.begin(), rest.end()));
  if (best == kUnreachable) return std::nullopt;
  Tour t{std::move(best_order), best, best};
  check_tour_structure(tg, t);
  return t;
}

std::vector<GoalSequence> partition_tour(const TransformedGraph& tg, const Tour& tour) {
  check_tour_structure(tg, tour);
  const int n = tg.size();
  std::vector<GoalSequence> out(size_t(tg.agent_count));
  std::vector<uint8_t> claimed(size_t(n), 0);
  for (int pos = 0; pos < n; ++pos) {
    const TgNode& node = tg.nodes[size_t(tour.order[size_t(pos)])];
    if (node.tag != NodeTag::AgentCurrent) continue;
    GoalSequence seq;
    seq.agent = node.index;
    seq.vertices.push_back(node.vertex);
    int k = pos;
    for (;;) {
      k = (k + 1) % n;
      const TgNode& next = tg.nodes[size_t(tour.order[size_t(k)])];
      if (next.tag == NodeTag::AgentCurrent)
        throw std::logic_error("tour segment hits an agent node before a destination");
      seq.vertices.push_back(next.vertex);
      claimed[size_t(tour.order[size_t(k)])] = 1;
      if (next.tag == NodeTag::Destination) break;
    }
    out[size_t(node.index)] = std::move(seq);
  }
  for (int j = 0; j < n; ++j)
    if (!claimed[size_t(j)] && tg.nodes[size_t(j)].tag != NodeTag::AgentCurrent)
      throw std::logic_error("tour partition left a node unassigned");
  return out;
}

std::shared_ptr<const SequencingPlan> make_plan(const Instance& ins,
                                                std::span<const Vertex> joint_vertex,
                                                uint64_t visited, HeuristicMode mode,
                                                DistanceCache& cache,
                                                const SequencingOptions& opts) {
  const TransformedGraph tg = build_transformed_graph(ins, joint_vertex, visited, cache);
  std::optional<Tour> tour;
  bool exact = mode == HeuristicMode::Exact;
  if (mode == HeuristicMode::Exact) {
    tour = solve_tsp_exact(tg, opts.exact_threshold);
  } else {
    bool used_exact = false;
    tour = solve_tsp_heuristic(tg, opts, &used_exact);
    exact = used_exact;
  }
  if (!tour) return nullptr;

  auto plan = std::make_shared<SequencingPlan>();
  plan->tour = *tour;
  plan->exact = exact;
  plan->sequences = partition_tour(tg, *tour);
  plan->h_value = tour->cost;

  double policy_total = 0.0;
  for (const GoalSequence& seq : plan->sequences) {
    Path full;
    full.vertices.push_back(seq.vertices.front());
    for (size_t k = 0; k + 1 < seq.vertices.size(); ++k) {
      Path leg = shortest_path(cache, seq.vertices[k], seq.vertices[k + 1]);
      full.vertices.insert(full.vertices.end(), leg.vertices.begin() + 1, leg.vertices.end());
      full.cost += leg.cost;
    }
    policy_total += full.cost;
    plan->policy_paths.push_back(std::move(full));
  }
  if (policy_total != plan->h_value)
    throw std::logic_error("policy path costs do not reproduce the tour cost");
  return plan;
}

std::shared_ptr<const SequencingPlan> Sequencer::plan_for(std::span<const Vertex> joint_vertex,
                                                          uint64_t visited) {
  std::string key(reinterpret_cast<const char*>(joint_vertex.data()),
                  joint_vertex.size() * sizeof(Vertex));
  key.append(reinterpret_cast<const char*>(&visited), sizeof(visited));
  auto it = memo_.find(key);
  if (it != memo_.end()) {
    ++memo_hits_;
    return it->second;
  }
  const auto t0 = std::chrono::steady_clock::now();
  auto plan = make_plan(*ins_, joint_vertex, visited, mode_, *cache_, opts_);
  total_time_s_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ++calls_;
  memo_.emplace(std::move(key), plan);
  return plan;
}

std::string export_tsplib(const TransformedGraph& tg, const std::string& name) {
  constexpr long long kForbiddenWeight = 10000000;  // 10^7
  std::ostringstream out;
  out << "NAME: " << (name.empty() ? "msmp" : name) << "\n";
  out << "TYPE: ATSP\n";
  out << "COMMENT: goal-sequencing transformed graph\n";
  out << "DIMENSION: " << tg.size() << "\n";
  out << "EDGE_WEIGHT_TYPE: EXPLICIT\n";
  out << "EDGE_WEIGHT_FORMAT: FULL_MATRIX\n";
  out << "EDGE_WEIGHT_SECTION\n";
  for (int a = 0; a < tg.size(); ++a) {
    for (int b = 0; b < tg.size(); ++b) {
      if (b) out << ' ';
      const double c = tg.at(a, b);
      out << (c == kUnreachable ? kForbiddenWeight : llround(c));
    }
    out << "\n";
  }
  out << "EOF\n";
  return out.str();
}

}  // namespace msmp
