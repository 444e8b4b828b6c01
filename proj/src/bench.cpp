#include "bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "rng.hpp"

namespace msmp {

using nlohmann::json;

Grid gen_map(int width, int height, double obstacle_density, uint64_t seed) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("map dimensions must be positive");
  if (obstacle_density < 0.0 || obstacle_density >= 1.0)
    throw std::invalid_argument("obstacle density must be in [0, 1)");
  Grid g;
  g.width = width;
  g.height = height;
  g.blocked.assign(size_t(width) * size_t(height), 0);
  std::vector<Vertex> cells(size_t(g.cell_count()));
  for (int v = 0; v < g.cell_count(); ++v) cells[size_t(v)] = v;
  Rng rng(seed);
  rng.shuffle(cells);
  const long long k = llround(obstacle_density * g.cell_count());
  for (long long i = 0; i < k; ++i) g.blocked[size_t(cells[size_t(i)])] = 1;
  return g;
}

namespace {

std::vector<Vertex> largest_free_component(const Grid& g) {
  std::vector<int32_t> comp(size_t(g.cell_count()), -1);
  std::vector<std::vector<Vertex>> comps;
  std::array<Vertex, 5> buf;
  for (Vertex v = 0; v < g.cell_count(); ++v) {
    if (g.is_blocked(v) || comp[size_t(v)] >= 0) continue;
    const int32_t id = int32_t(comps.size());
    comps.emplace_back();
    std::deque<Vertex> queue{v};
    comp[size_t(v)] = id;
    while (!queue.empty()) {
      Vertex u = queue.front();
      queue.pop_front();
      comps[size_t(id)].push_back(u);
      const int cnt = neighbors(g, u, buf);
      for (int k = 1; k < cnt; ++k) {
        Vertex w = buf[size_t(k)];
        if (comp[size_t(w)] < 0) {
          comp[size_t(w)] = id;
          queue.push_back(w);
        }
      }
    }
  }
  if (comps.empty()) throw std::runtime_error("grid has no free cells");
  // components are discovered in increasing min-vertex order, so the first
  // maximum is the deterministic winner
  size_t best = 0;
  for (size_t i = 1; i < comps.size(); ++i)
    if (comps[i].size() > comps[best].size()) best = i;
  std::sort(comps[best].begin(), comps[best].end());
  return comps[best];
}

}  // namespace

Instance gen_instance(const Grid& grid, int agents, int goals, uint64_t seed, CostModel cost_model,
                      double time_limit_s) {
  if (agents < 1 || goals < 0) throw std::invalid_argument("bad agent or goal count");
  std::vector<Vertex> pool = largest_free_component(grid);
  const size_t needed = size_t(2 * agents + goals);
  if (pool.size() < needed)
    throw std::runtime_error("largest free component has " + std::to_string(pool.size()) +
                             " cells, need " + std::to_string(needed));
  Rng rng(seed);
  rng.shuffle(pool);
  Instance ins;
  ins.grid = grid;
  ins.cost_model = cost_model;
  ins.time_limit_s = time_limit_s;
  ins.starts.assign(pool.begin(), pool.begin() + agents);
  ins.destinations.assign(pool.begin() + agents, pool.begin() + 2 * agents);
  ins.goals.assign(pool.begin() + 2 * agents, pool.begin() + long(needed));
  validate_instance(ins);
  return ins;
}

const char* to_string(BenchOutcome o) {
  switch (o) {
    case BenchOutcome::Solved: return "solved";
    case BenchOutcome::Infeasible: return "infeasible";
    case BenchOutcome::Timeout: return "timeout";
    case BenchOutcome::Error: return "error";
  }
  return "unknown";
}

BenchConfig parse_bench_config(const std::string& text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("bench config parse error: ") + e.what());
  }
  BenchConfig cfg;
  if (!j.contains("grids") || !j["grids"].is_array() || j["grids"].empty())
    throw std::runtime_error("bench config requires a non-empty 'grids' array");
  int gen_index = 0;
  for (const auto& e : j["grids"]) {
    GridSpec spec;
    if (e.is_string()) {
      std::filesystem::path p(e.get<std::string>());
      if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
      spec.map_file = p.string();
      spec.id = std::filesystem::path(e.get<std::string>()).stem().string();
    } else if (e.is_object() && e.contains("random")) {
      const auto& r = e["random"];
      spec.random = true;
      spec.width = r.at("width").get<int>();
      spec.height = r.at("height").get<int>();
      spec.obstacle_density = r.at("obstacle_density").get<double>();
      spec.id = "random" + std::to_string(gen_index) + "_" + std::to_string(spec.width) + "x" +
                std::to_string(spec.height);
    } else {
      throw std::runtime_error("grid entries must be map paths or {\"random\": {...}}");
    }
    ++gen_index;
    cfg.grids.push_back(std::move(spec));
  }
  auto ints = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_array() || j[key].empty())
      throw std::runtime_error(std::string("bench config requires a non-empty '") + key + "' array");
    std::vector<int> out;
    for (const auto& e : j[key]) {
      int v = e.get<int>();
      if (v < 0) throw std::runtime_error(std::string("negative value in '") + key + "'");
      out.push_back(v);
    }
    return out;
  };
  cfg.agent_counts = ints("agents");
  cfg.goal_counts = ints("goals");
  cfg.instances_per_cell = j.value("instances_per_cell", 1);
  if (cfg.instances_per_cell <= 0) throw std::runtime_error("instances_per_cell must be positive");
  cfg.time_limit_s = j.value("time_limit_s", 60.0);
  if (cfg.time_limit_s <= 0) throw std::runtime_error("time_limit_s must be positive");
  if (j.contains("variant")) cfg.variant = variant_from_string(j["variant"].get<std::string>());
  if (j.contains("heuristic_mode"))
    cfg.heuristic_mode = heuristic_mode_from_string(j["heuristic_mode"].get<std::string>());
  if (j.contains("cost_model"))
    cfg.cost_model = cost_model_from_string(j["cost_model"].get<std::string>());
  cfg.seed = j.value("seed", uint64_t(0));
  return cfg;
}

uint64_t derive_seed(uint64_t base, uint64_t grid_index, uint64_t agents, uint64_t goals,
                     uint64_t repetition) {
  uint64_t h = splitmix64(base ^ 0x8add1ed9u);
  h = splitmix64(h ^ (grid_index + 1));
  h = splitmix64(h ^ (agents + 1));
  h = splitmix64(h ^ (goals + 1));
  h = splitmix64(h ^ (repetition + 1));
  return h;
}

namespace {

std::string format_number(double v) {
  if (v == llround(v) && std::abs(v) < 1e15) return std::to_string(llround(v));
  char buf[64];
  snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string format_time(double v) {
  char buf[64];
  snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

struct Task {
  size_t grid_index;
  int agents;
  int goals;
  int repetition;
};

}  // namespace

BenchResult run_bench(const BenchConfig& config, int workers) {
  BenchResult result;
  result.config = config;

  std::vector<Grid> grids;
  for (const GridSpec& spec : config.grids) {
    if (spec.random) {
      grids.push_back(gen_map(spec.width, spec.height, spec.obstacle_density,
                              derive_seed(config.seed, grids.size(), 0, 0, 0)));
    } else {
      grids.push_back(load_map_file(spec.map_file));
    }
  }

  std::vector<Task> tasks;
  for (size_t gi = 0; gi < config.grids.size(); ++gi)
    for (int n : config.agent_counts)
      for (int m : config.goal_counts)
        for (int rep = 0; rep < config.instances_per_cell; ++rep)
          tasks.push_back(Task{gi, n, m, rep});

  result.rows.assign(tasks.size(), BenchRow{});

  auto run_task = [&](size_t ti) {
    const Task& t = tasks[ti];
    BenchRow& row = result.rows[ti];
    row.grid_id = config.grids[t.grid_index].id;
    row.agents = t.agents;
    row.goals = t.goals;
    row.seed = derive_seed(config.seed, t.grid_index, uint64_t(t.agents), uint64_t(t.goals),
                           uint64_t(t.repetition));
    try {
      Instance ins = gen_instance(grids[t.grid_index], t.agents, t.goals, row.seed,
                                  config.cost_model, config.time_limit_s);
      SearchOptions opts;
      opts.variant = config.variant;
      opts.heuristic_mode = config.heuristic_mode;
      opts.time_limit_s = config.time_limit_s;
      SolveResult res = search(ins, opts);
      row.wall_time_s = res.stats.wall_time_s;
      row.sequencing_calls = res.stats.sequencing_calls;
      row.sequencing_time_s = res.stats.sequencing_time_s;
      row.mean_sequencing_time_s =
          res.stats.sequencing_calls
              ? res.stats.sequencing_time_s / double(res.stats.sequencing_calls)
              : 0.0;
      row.expansions = res.stats.expansions;
      switch (res.outcome) {
        case Outcome::Solved: {
          const auto violations = validate_solution(ins, *res.solution);
          if (!violations.empty()) {
            row.outcome = BenchOutcome::Error;
          } else {
            row.outcome = BenchOutcome::Solved;
            row.cost = res.solution->cost;
          }
          break;
        }
        case Outcome::Infeasible: row.outcome = BenchOutcome::Infeasible; break;
        case Outcome::Timeout: row.outcome = BenchOutcome::Timeout; break;
      }
    } catch (const std::exception&) {
      row.outcome = BenchOutcome::Error;
    }
  };

  const int nworkers = std::max(1, workers);
  if (nworkers == 1) {
    for (size_t ti = 0; ti < tasks.size(); ++ti) run_task(ti);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < nworkers; ++w)
      pool.emplace_back([&]() {
        for (;;) {
          const size_t ti = next.fetch_add(1);
          if (ti >= tasks.size()) return;
          run_task(ti);
        }
      });
    for (auto& th : pool) th.join();
  }
  return result;
}

std::string BenchResult::csv() const {
  std::ostringstream out;
  out << "grid,agents,goals,seed,outcome,cost,wall_time_s,sequencing_calls,"
         "mean_sequencing_time_s,expansions\n";
  for (const BenchRow& r : rows) {
    out << r.grid_id << ',' << r.agents << ',' << r.goals << ',' << r.seed << ','
        << to_string(r.outcome) << ',';
    if (r.outcome == BenchOutcome::Solved) out << format_number(r.cost);
    out << ',' << format_time(r.wall_time_s) << ',' << r.sequencing_calls << ','
        << format_time(r.mean_sequencing_time_s) << ',' << r.expansions << '\n';
  }
  return out.str();
}

std::string BenchResult::summary_json() const {
  json success = json::array();
  for (size_t gi = 0; gi < config.grids.size(); ++gi) {
    for (int n : config.agent_counts) {
      for (int m : config.goal_counts) {
        int solved = 0, total = 0;
        for (const BenchRow& r : rows) {
          if (r.grid_id != config.grids[gi].id || r.agents != n || r.goals != m) continue;
          ++total;
          if (r.outcome == BenchOutcome::Solved) ++solved;
        }
        if (!total) continue;
        json e;
        e["grid"] = config.grids[gi].id;
        e["agents"] = n;
        e["goals"] = m;
        e["solved"] = solved;
        e["total"] = total;
        e["success_rate"] = double(solved) / double(total);
        success.push_back(e);
      }
    }
  }
  // per-call sequencing time averaged over solved instances, per (N, M)
  json seq = json::array();
  for (int n : config.agent_counts) {
    for (int m : config.goal_counts) {
      double time = 0.0;
      uint64_t calls = 0;
      for (const BenchRow& r : rows) {
        if (r.agents != n || r.goals != m || r.outcome != BenchOutcome::Solved) continue;
        time += r.sequencing_time_s;
        calls += r.sequencing_calls;
      }
      json e;
      e["agents"] = n;
      e["goals"] = m;
      e["calls"] = calls;
      e["mean_sequencing_time_s"] = calls ? time / double(calls) : 0.0;
      seq.push_back(e);
    }
  }
  json j;
  j["success_rate"] = success;
  j["sequencing_time"] = seq;
  return j.dump(2) + "\n";
}

}  // namespace msmp
