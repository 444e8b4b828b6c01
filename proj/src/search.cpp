#include "search.hpp"

#include <algorithm>
#include <chrono>
#include <cstring>

#include "rng.hpp"

namespace msmp {

bool binary_dominates(const VisitedVector& a, const VisitedVector& b) {
  if (a.size != b.size) throw std::invalid_argument("visited vectors differ in length");
  return (a.bits | b.bits) == a.bits && a.bits != b.bits;
}

uint64_t collision_fn(std::span<const Vertex> from, std::span<const Vertex> to) {
  const size_t n = to.size();
  uint64_t mask = 0;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      if (to[i] == to[j]) mask |= (1ull << i) | (1ull << j);
      if (to[i] == from[j] && to[j] == from[i] && from[i] != from[j])
        mask |= (1ull << i) | (1ull << j);
    }
  }
  return mask;
}

bool state_dominates(const SearchState& a, const SearchState& b) {
  if (a.joint_id != b.joint_id) throw std::invalid_argument("states are at different joint vertices");
  if (((a.bits | b.bits) == a.bits && a.bits != b.bits) && a.g <= b.g) return true;
  return a.bits == b.bits && a.g < b.g;
}

namespace {

bool dominates_key(uint64_t a_bits, double a_g, uint64_t b_bits, double b_g) {
  if (((a_bits | b_bits) == a_bits && a_bits != b_bits) && a_g <= b_g) return true;
  return a_bits == b_bits && a_g < b_g;
}

}  // namespace

bool SearchContext::OpenCmp::operator()(const OpenEntry& a, const OpenEntry& b) const {
  // priority_queue keeps the "largest"; return true when a is worse than b.
  if (a.f != b.f) return a.f > b.f;
  if (a.g != b.g) return a.g < b.g;  // prefer deeper states
  if (a.unset_bits != b.unset_bits) return a.unset_bits > b.unset_bits;
  if (a.joint != b.joint) {
    if (*a.joint != *b.joint) return *a.joint > *b.joint;
  }
  return a.bits > b.bits;
}

size_t SearchContext::StateKeyHash::operator()(const StateKey& k) const {
  return size_t(splitmix64(uint64_t(uint32_t(k.joint_id)) ^ splitmix64(k.bits)));
}

SearchContext::SearchContext(const Instance& ins, const SearchOptions& opts)
    : ins_(&ins),
      opts_(opts),
      cache_(ins.grid),
      sequencer_(ins, opts.heuristic_mode, opts.sequencing, cache_) {
  const int m = ins.goal_count();
  full_bits_ = m == 64 ? ~0ull : ((1ull << m) - 1);
  const int n = ins.agent_count();
  all_agents_ = n == 64 ? ~0ull : ((1ull << n) - 1);
  is_destination_.assign(size_t(ins.grid.cell_count()), 0);
  for (Vertex d : ins.destinations) is_destination_[size_t(d)] = 1;
  goal_bit_of_.assign(size_t(ins.grid.cell_count()), -1);
  for (int g = 0; g < m; ++g) goal_bit_of_[size_t(ins.goals[size_t(g)])] = int8_t(g);
}

int32_t SearchContext::intern_joint(const std::vector<Vertex>& joint) {
  std::string key(reinterpret_cast<const char*>(joint.data()), joint.size() * sizeof(Vertex));
  auto it = joint_ids_.find(key);
  if (it != joint_ids_.end()) return it->second;
  const int32_t id = int32_t(joints_.size());
  joints_.push_back(joint);
  joint_ids_.emplace(std::move(key), id);
  return id;
}

SearchState* SearchContext::canonical(const std::vector<Vertex>& joint, uint64_t bits) {
  const int32_t jid = intern_joint(joint);
  const StateKey key{jid, bits};
  auto it = state_map_.find(key);
  if (it != state_map_.end()) return it->second;
  states_.emplace_back();
  SearchState* s = &states_.back();
  s->joint_id = jid;
  s->bits = bits;
  state_map_.emplace(key, s);
  return s;
}

const std::vector<Vertex>& SearchContext::joint_of(const SearchState* s) const {
  return joints_[size_t(s->joint_id)];
}

SearchState* SearchContext::make_state(const std::vector<Vertex>& joint, uint64_t bits, double g) {
  SearchState* s = canonical(joint, bits);
  s->g = g;
  return s;
}

void SearchContext::add_back_edge(SearchState* child, SearchState* parent) {
  if (child->back_seen_.insert(parent).second) child->back_set.push_back(parent);
}

void SearchContext::set_heuristic(SearchState* s, double h) {
  s->h = h;
  s->h_ready = true;
  s->h_infeasible = false;
}

void SearchContext::ensure_heuristic(SearchState* s) {
  if (s->h_ready) return;
  auto plan = sequencer_.plan_for(joint_of(s), s->bits);
  if (!plan) {
    s->h_infeasible = true;
    s->h = kUnreachable;
  } else {
    s->plan = plan;
    s->h = plan->h_value;
  }
  s->h_ready = true;
}

void SearchContext::push_open(SearchState* s) {
  s->push_seq++;
  s->in_open = true;
  const uint64_t missing = full_bits_ & ~s->bits;
  open_.push(OpenEntry{s->g + s->h, s->g, __builtin_popcountll(missing), s->bits,
                       &joints_[size_t(s->joint_id)], s, s->push_seq});
}

SearchState* SearchContext::pop_open() {
  while (!open_.empty()) {
    const OpenEntry e = open_.top();
    open_.pop();
    SearchState* s = e.state;
    if (e.seq != s->push_seq || !s->in_open) continue;  // superseded entry
    if (s->dropped) {
      s->in_open = false;
      continue;  // dominated while queued
    }
    s->in_open = false;
    if (opts_.record_trace) {
      pop_f_pending_ = e.f;
    }
    return s;
  }
  return nullptr;
}

void SearchContext::alpha_insert(SearchState* s) {
  auto& bucket = alpha_[s->joint_id];
  if (!s->alpha_member) {
    bucket.push_back(s);
    s->alpha_member = true;
    s->dropped = false;
  }
  // keep the antichain: retire members the (updated) state now dominates
  auto keep = bucket.begin();
  for (auto it = bucket.begin(); it != bucket.end(); ++it) {
    SearchState* m = *it;
    if (m != s && dominates_key(s->bits, s->g, m->bits, m->g)) {
      m->alpha_member = false;
      m->dropped = true;  // pending OPEN entries are skipped on pop
      continue;
    }
    *keep++ = m;
  }
  bucket.erase(keep, bucket.end());
}

bool SearchContext::alpha_antichain_ok() const {
  for (const auto& [jid, bucket] : alpha_) {
    (void)jid;
    for (const SearchState* a : bucket)
      for (const SearchState* b : bucket)
        if (a != b && dominates_key(a->bits, a->g, b->bits, b->g)) return false;
  }
  return true;
}

void SearchContext::backprop(SearchState* s, uint64_t incoming) {
  if ((incoming & ~s->collision_set) == 0) return;  // already a subset
  s->collision_set |= incoming;
  stats_.backprop_events++;
  backprop_since_pop_ = true;
  if (!s->in_open && !s->dropped && s->h_ready && !s->h_infeasible && s->g != kUnreachable)
    push_open(s);
  for (SearchState* p : s->back_set) backprop(p, s->collision_set);
}

Vertex SearchContext::policy_next(const SearchState* s, int agent) const {
  const auto& path = s->plan->policy_paths[size_t(agent)].vertices;
  if (path.front() != joint_of(s)[size_t(agent)])
    throw std::logic_error("policy path does not start at the agent's current vertex");
  return path.size() > 1 ? path[1] : path.front();
}

std::vector<Candidate> SearchContext::limited_neighbors(SearchState* s) {
  ensure_heuristic(s);
  if (s->h_infeasible) return {};
  if (!s->plan) s->plan = sequencer_.plan_for(joint_of(s), s->bits);

  const int n = ins_->agent_count();
  const std::vector<Vertex>& joint = joint_of(s);
  std::vector<std::array<Vertex, 5>> options(static_cast<size_t>(n));
  std::vector<int> counts(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    if (s->collision_set >> i & 1ull) {
      counts[size_t(i)] = neighbors(ins_->grid, joint[size_t(i)], options[size_t(i)]);
    } else {
      options[size_t(i)][0] = policy_next(s, i);
      counts[size_t(i)] = 1;
    }
  }

  std::vector<Candidate> out;
  std::vector<int> idx(static_cast<size_t>(n), 0);
  std::vector<Vertex> cur(static_cast<size_t>(n));
  for (;;) {
    double cost = 0.0;
    uint64_t bits = s->bits;
    for (int i = 0; i < n; ++i) {
      cur[size_t(i)] = options[size_t(i)][size_t(idx[size_t(i)])];
      const bool moved = cur[size_t(i)] != joint[size_t(i)];
      cost += step_cost(ins_->cost_model, moved, is_destination_[size_t(joint[size_t(i)])] != 0);
      const int8_t bit = goal_bit_of_[size_t(cur[size_t(i)])];
      if (bit >= 0) bits |= (1ull << bit);
    }
    out.push_back(Candidate{cur, cost, bits});
    int i = n - 1;
    while (i >= 0 && ++idx[size_t(i)] == counts[size_t(i)]) {
      idx[size_t(i)] = 0;
      --i;
    }
    if (i < 0) break;
  }
  return out;
}

void SearchContext::process_candidate(SearchState* from, Candidate&& cand) {
  stats_.generations++;
  SearchState* child = canonical(cand.joint, cand.bits);
  add_back_edge(child, from);

  const uint64_t conflict = collision_fn(joint_of(from), cand.joint);
  if (conflict != 0) {
    child->collision_set |= opts_.variant == Variant::MSStarC ? all_agents_ : conflict;
    backprop(from, child->collision_set);
    return;  // conflicting candidates are discarded, never opened or parented
  }

  const double g_new = from->g + cand.step_cost;
  auto& bucket = alpha_[child->joint_id];
  std::vector<SearchState*> dominators;
  for (SearchState* m : bucket)
    if (dominates_key(m->bits, m->g, cand.bits, g_new)) dominators.push_back(m);
  if (!dominators.empty()) {
    for (SearchState* d : dominators) {
      backprop(from, d->collision_set);
      add_back_edge(d, from);
    }
    return;
  }
  if (child->g == g_new) {  // equal-cost re-reach: first finder keeps the state
    backprop(from, child->collision_set);
    return;
  }

  child->g = g_new;
  child->parent = from;
  ensure_heuristic(child);
  alpha_insert(child);
  if (!child->h_infeasible) push_open(child);
}

void SearchContext::expand(SearchState* s) {
  std::vector<Candidate> cands = limited_neighbors(s);
  for (Candidate& c : cands) process_candidate(s, std::move(c));
}

bool SearchContext::is_final(const SearchState* s) const {
  if (s->bits != full_bits_) return false;
  for (Vertex v : joint_of(s))
    if (!is_destination_[size_t(v)]) return false;
  return true;
}

Solution reconstruct_solution(const Instance& ins, std::span<const std::vector<Vertex>> joints) {
  const int n = ins.agent_count();
  std::vector<uint8_t> dest(size_t(ins.grid.cell_count()), 0);
  for (Vertex d : ins.destinations) dest[size_t(d)] = 1;
  Solution sol;
  sol.paths.assign(size_t(n), Path{});
  for (int i = 0; i < n; ++i) {
    Path& p = sol.paths[size_t(i)];
    for (const auto& joint : joints) p.vertices.push_back(joint[size_t(i)]);
    for (size_t t = 0; t + 1 < p.vertices.size(); ++t) {
      const bool moved = p.vertices[t] != p.vertices[t + 1];
      p.cost += step_cost(ins.cost_model, moved, dest[size_t(p.vertices[t])] != 0);
    }
    sol.cost += p.cost;
  }
  return sol;
}

Solution SearchContext::reconstruct(SearchState* final_state) const {
  std::vector<std::vector<Vertex>> joints;
  for (const SearchState* s = final_state; s != nullptr; s = s->parent)
    joints.push_back(joint_of(s));
  std::reverse(joints.begin(), joints.end());
  Solution sol = reconstruct_solution(*ins_, joints);
  if (sol.cost != final_state->g)
    throw std::logic_error("reconstructed cost " + std::to_string(sol.cost) +
                           " does not match g " + std::to_string(final_state->g));
  sol.variant = opts_.variant;
  sol.heuristic_mode = opts_.heuristic_mode;
  return sol;
}

SolveResult SearchContext::run() {
  const auto t0 = std::chrono::steady_clock::now();
  const double limit =
      opts_.time_limit_s > 0 ? opts_.time_limit_s : ins_->time_limit_s;
  SolveResult result;

  auto finish = [&](Outcome outcome, std::optional<Solution> sol) {
    result.outcome = outcome;
    stats_.sequencing_calls = sequencer_.calls();
    stats_.sequencing_time_s = sequencer_.total_time_s();
    stats_.sequencing_memo_hits = sequencer_.memo_hits();
    stats_.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (sol) {
      sol->stats = stats_;
      result.solution = std::move(sol);
    }
    result.stats = stats_;
    return result;
  };

  SearchState* start = canonical(ins_->starts, initial_visited(*ins_));
  start->g = 0.0;
  ensure_heuristic(start);
  if (start->h_infeasible) return finish(Outcome::Infeasible, std::nullopt);
  alpha_insert(start);
  push_open(start);

  while (true) {
    SearchState* s = pop_open();
    if (!s) return finish(Outcome::Infeasible, std::nullopt);
    if (limit > 0 &&
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() > limit)
      return finish(Outcome::Timeout, std::nullopt);
    stats_.expansions++;
    if (opts_.record_trace) {
      if (result.trace.size() < opts_.trace_cap)
        result.trace.push_back(TraceSample{joint_of(s), s->bits, s->g});
      result.pop_f.push_back(pop_f_pending_);
      result.pop_after_backprop.push_back(backprop_since_pop_ ? 1 : 0);
    }
    backprop_since_pop_ = false;
    if (is_final(s)) return finish(Outcome::Solved, reconstruct(s));
    expand(s);
  }
}

SolveResult search(const Instance& ins, const SearchOptions& opts) {
  validate_instance(ins, ValidateOptions{true});
  SearchContext ctx(ins, opts);
  return ctx.run();
}

}  // namespace msmp
