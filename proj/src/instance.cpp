#include "instance.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace msmp {

using nlohmann::json;

namespace {

std::string cell_str(const Grid& g, Vertex v) {
  return "(" + std::to_string(g.row(v)) + "," + std::to_string(g.col(v)) + ")";
}

void check_vertices(const Instance& ins, const std::vector<Vertex>& vs, const char* what) {
  for (Vertex v : vs) {
    if (!ins.grid.valid_vertex(v))
      throw InstanceError(std::string(what) + " vertex out of range");
    if (ins.grid.is_blocked(v))
      throw InstanceError(std::string(what) + " vertex " + cell_str(ins.grid, v) + " is blocked");
  }
}

void check_distinct(const std::vector<Vertex>& vs, const char* what) {
  std::unordered_set<Vertex> seen(vs.begin(), vs.end());
  if (seen.size() != vs.size()) throw InstanceError(std::string(what) + " are not pairwise distinct");
}

}  // namespace

void validate_instance(const Instance& ins, const ValidateOptions& opts) {
  if (ins.grid.width <= 0 || ins.grid.height <= 0) throw InstanceError("empty grid");
  if (ins.starts.empty()) throw InstanceError("at least one agent required");
  if (ins.starts.size() != ins.destinations.size())
    throw InstanceError("destination count must equal agent count");
  if (ins.starts.size() > 64) throw InstanceError("more than 64 agents unsupported");
  if (ins.goals.size() > 64) throw InstanceError("more than 64 goals unsupported");
  check_vertices(ins, ins.starts, "start");
  check_vertices(ins, ins.destinations, "destination");
  check_vertices(ins, ins.goals, "goal");
  check_distinct(ins.starts, "starts");
  check_distinct(ins.destinations, "destinations");
  check_distinct(ins.goals, "goals");
  if (!opts.allow_goal_overlap) {
    std::unordered_set<Vertex> reserved(ins.starts.begin(), ins.starts.end());
    reserved.insert(ins.destinations.begin(), ins.destinations.end());
    for (Vertex t : ins.goals)
      if (reserved.count(t))
        throw InstanceError("goal " + cell_str(ins.grid, t) +
                            " overlaps a start or destination (pass allow-overlap to accept)");
  }
}

uint64_t initial_visited(const Instance& ins) {
  uint64_t bits = 0;
  for (size_t m = 0; m < ins.goals.size(); ++m)
    for (Vertex s : ins.starts)
      if (s == ins.goals[m]) bits |= (1ull << m);
  return bits;
}

std::vector<Violation> validate_solution(const Instance& ins, const Solution& sol) {
  std::vector<Violation> out;
  const int n = ins.agent_count();
  auto add = [&](Violation::Kind kind, int a, int b, int64_t t, std::string msg) {
    out.push_back({kind, a, b, t, std::move(msg)});
  };

  if (int(sol.paths.size()) != n) {
    add(Violation::Kind::Structural, -1, -1, -1,
        "expected " + std::to_string(n) + " paths, got " + std::to_string(sol.paths.size()));
    return out;
  }
  size_t len = sol.paths[0].vertices.size();
  bool lengths_ok = len > 0;
  for (const Path& p : sol.paths)
    if (p.vertices.size() != len) lengths_ok = false;
  if (!lengths_ok) {
    add(Violation::Kind::Structural, -1, -1, -1, "paths have unequal or zero length");
    return out;
  }
  for (int i = 0; i < n; ++i)
    for (Vertex v : sol.paths[size_t(i)].vertices)
      if (!ins.grid.passable(v)) {
        add(Violation::Kind::IllegalMove, i, -1, -1, "path visits a blocked or invalid vertex");
        return out;
      }

  std::unordered_set<Vertex> dest_set(ins.destinations.begin(), ins.destinations.end());

  for (int i = 0; i < n; ++i) {
    const auto& vs = sol.paths[size_t(i)].vertices;
    if (vs.front() != ins.starts[size_t(i)])
      add(Violation::Kind::StartMismatch, i, -1, 0,
          "agent " + std::to_string(i) + " does not start at its start vertex");
    if (!dest_set.count(vs.back()))
      add(Violation::Kind::BadTerminus, i, -1, int64_t(len) - 1,
          "agent " + std::to_string(i) + " ends at " + cell_str(ins.grid, vs.back()) +
              ", not a destination");
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (sol.paths[size_t(i)].vertices.back() == sol.paths[size_t(j)].vertices.back())
        add(Violation::Kind::DuplicateDestination, i, j, int64_t(len) - 1,
            "agents " + std::to_string(i) + " and " + std::to_string(j) +
                " end at the same destination");

  for (size_t m = 0; m < ins.goals.size(); ++m) {
    bool visited = false;
    for (int i = 0; i < n && !visited; ++i)
      for (Vertex v : sol.paths[size_t(i)].vertices)
        if (v == ins.goals[m]) {
          visited = true;
          break;
        }
    if (!visited)
      add(Violation::Kind::UnvisitedGoal, -1, -1, -1,
          "goal " + cell_str(ins.grid, ins.goals[m]) + " is never visited");
  }

  std::array<Vertex, 5> buf;
  for (int i = 0; i < n; ++i) {
    const auto& vs = sol.paths[size_t(i)].vertices;
    for (size_t t = 0; t + 1 < len; ++t) {
      const int cnt = neighbors(ins.grid, vs[t], buf);
      bool legal = false;
      for (int k = 0; k < cnt; ++k)
        if (buf[size_t(k)] == vs[t + 1]) legal = true;
      if (!legal)
        add(Violation::Kind::IllegalMove, i, -1, int64_t(t),
            "agent " + std::to_string(i) + " makes an illegal move at t=" + std::to_string(t));
    }
  }

  for (size_t t = 0; t < len; ++t)
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (sol.paths[size_t(i)].vertices[t] == sol.paths[size_t(j)].vertices[t])
          add(Violation::Kind::VertexConflict, i, j, int64_t(t),
              "agents " + std::to_string(i) + " and " + std::to_string(j) +
                  " occupy the same vertex at t=" + std::to_string(t));
  for (size_t t = 0; t + 1 < len; ++t)
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        Vertex ai = sol.paths[size_t(i)].vertices[t], bi = sol.paths[size_t(i)].vertices[t + 1];
        Vertex aj = sol.paths[size_t(j)].vertices[t], bj = sol.paths[size_t(j)].vertices[t + 1];
        if (bi == aj && bj == ai && ai != aj)
          add(Violation::Kind::EdgeConflict, i, j, int64_t(t),
              "agents " + std::to_string(i) + " and " + std::to_string(j) +
                  " swap along an edge at t=" + std::to_string(t));
      }

  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto& vs = sol.paths[size_t(i)].vertices;
    double c = 0.0;
    for (size_t t = 0; t + 1 < len; ++t) {
      bool moved = vs[t] != vs[t + 1];
      c += step_cost(ins.cost_model, moved, dest_set.count(vs[t]) > 0);
    }
    total += c;
    if (c != sol.paths[size_t(i)].cost)
      add(Violation::Kind::CostMismatch, i, -1, -1,
          "agent " + std::to_string(i) + " path cost " + std::to_string(sol.paths[size_t(i)].cost) +
              " != recomputed " + std::to_string(c));
  }
  if (total != sol.cost)
    add(Violation::Kind::CostMismatch, -1, -1, -1,
        "solution cost " + std::to_string(sol.cost) + " != recomputed " + std::to_string(total));
  return out;
}

const char* to_string(Violation::Kind kind) {
  switch (kind) {
    case Violation::Kind::Structural: return "structural";
    case Violation::Kind::StartMismatch: return "start_mismatch";
    case Violation::Kind::BadTerminus: return "bad_terminus";
    case Violation::Kind::DuplicateDestination: return "duplicate_destination";
    case Violation::Kind::UnvisitedGoal: return "unvisited_goal";
    case Violation::Kind::VertexConflict: return "vertex_conflict";
    case Violation::Kind::EdgeConflict: return "edge_conflict";
    case Violation::Kind::IllegalMove: return "illegal_move";
    case Violation::Kind::CostMismatch: return "cost_mismatch";
  }
  return "unknown";
}

const char* to_string(CostModel m) {
  return m == CostModel::WaitAlwaysOne ? "wait-always-one" : "wait-free-at-rest";
}
const char* to_string(Variant v) { return v == Variant::MSStar ? "ms*" : "ms*-c"; }
const char* to_string(HeuristicMode m) { return m == HeuristicMode::Exact ? "exact" : "fast"; }

CostModel cost_model_from_string(const std::string& s) {
  if (s == "wait-always-one") return CostModel::WaitAlwaysOne;
  if (s == "wait-free-at-rest") return CostModel::WaitFreeAtRest;
  throw std::invalid_argument("unknown cost model: " + s);
}
Variant variant_from_string(const std::string& s) {
  if (s == "ms*") return Variant::MSStar;
  if (s == "ms*-c") return Variant::MSStarC;
  throw std::invalid_argument("unknown variant: " + s);
}
HeuristicMode heuristic_mode_from_string(const std::string& s) {
  if (s == "exact") return HeuristicMode::Exact;
  if (s == "fast") return HeuristicMode::Fast;
  throw std::invalid_argument("unknown heuristic mode: " + s);
}

namespace {

std::vector<Vertex> parse_cells(const json& arr, const Grid& g, const char* what) {
  if (!arr.is_array()) throw InstanceError(std::string(what) + " must be an array");
  std::vector<Vertex> out;
  for (const auto& e : arr) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer())
      throw InstanceError(std::string(what) + " entries must be [row, col] pairs");
    int r = e[0].get<int>(), c = e[1].get<int>();
    if (!g.in_bounds(r, c))
      throw InstanceError(std::string(what) + " cell (" + std::to_string(r) + "," +
                          std::to_string(c) + ") is out of bounds");
    out.push_back(g.at(r, c));
  }
  return out;
}

json cells_json(const Grid& g, const std::vector<Vertex>& vs) {
  json arr = json::array();
  for (Vertex v : vs) arr.push_back(json::array({g.row(v), g.col(v)}));
  return arr;
}

int line_of_offset(const std::string& text, size_t offset) {
  int line = 1;
  for (size_t i = 0; i < offset && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

}  // namespace

Instance parse_instance_json(const std::string& text, const std::string& base_dir,
                             const ValidateOptions& opts) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InstanceError("instance JSON parse error at line " +
                        std::to_string(line_of_offset(text, e.byte)) + ": " + e.what());
  }
  if (!j.is_object()) throw InstanceError("instance JSON must be an object");
  if (!j.contains("map_file") || !j["map_file"].is_string())
    throw InstanceError("instance JSON requires a 'map_file' string");

  Instance ins;
  ins.map_file = j["map_file"].get<std::string>();
  std::filesystem::path map_path(ins.map_file);
  if (map_path.is_relative() && !base_dir.empty()) map_path = std::filesystem::path(base_dir) / map_path;
  ins.grid = load_map_file(map_path.string());

  for (const char* key : {"starts", "destinations", "goals"})
    if (!j.contains(key)) throw InstanceError(std::string("instance JSON requires '") + key + "'");
  ins.starts = parse_cells(j["starts"], ins.grid, "starts");
  ins.destinations = parse_cells(j["destinations"], ins.grid, "destinations");
  ins.goals = parse_cells(j["goals"], ins.grid, "goals");
  if (j.contains("cost_model")) ins.cost_model = cost_model_from_string(j["cost_model"].get<std::string>());
  if (j.contains("time_limit_s")) {
    if (!j["time_limit_s"].is_number()) throw InstanceError("time_limit_s must be a number");
    ins.time_limit_s = j["time_limit_s"].get<double>();
    if (ins.time_limit_s <= 0) throw InstanceError("time_limit_s must be positive");
  }
  validate_instance(ins, opts);
  return ins;
}

Instance load_instance_json(const std::string& path, const ValidateOptions& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open instance file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_instance_json(ss.str(), std::filesystem::path(path).parent_path().string(), opts);
  } catch (const InstanceError& e) {
    throw InstanceError(path + ": " + e.what());
  }
}

std::string instance_to_json(const Instance& ins) {
  json j;
  j["map_file"] = ins.map_file;
  j["starts"] = cells_json(ins.grid, ins.starts);
  j["destinations"] = cells_json(ins.grid, ins.destinations);
  j["goals"] = cells_json(ins.grid, ins.goals);
  j["cost_model"] = to_string(ins.cost_model);
  j["time_limit_s"] = ins.time_limit_s;
  return j.dump(2) + "\n";
}

namespace {

json stats_json(const SolveStats& s) {
  json j;
  j["expansions"] = s.expansions;
  j["generations"] = s.generations;
  j["sequencing_calls"] = s.sequencing_calls;
  j["sequencing_time_s"] = s.sequencing_time_s;
  j["backprop_events"] = s.backprop_events;
  j["wall_time_s"] = s.wall_time_s;
  return j;
}

}  // namespace

std::string solution_to_json(const Instance& ins, const Solution& sol) {
  json j;
  j["cost"] = sol.cost;
  json paths = json::array();
  for (const Path& p : sol.paths) paths.push_back(cells_json(ins.grid, p.vertices));
  j["paths"] = paths;
  j["stats"] = stats_json(sol.stats);
  j["variant"] = to_string(sol.variant);
  j["heuristic_mode"] = to_string(sol.heuristic_mode);
  return j.dump(2) + "\n";
}

std::string violations_to_json(const Instance&, const std::vector<Violation>& violations) {
  json arr = json::array();
  for (const Violation& v : violations) {
    json e;
    e["kind"] = to_string(v.kind);
    if (v.agent_a >= 0) e["agent_a"] = v.agent_a;
    if (v.agent_b >= 0) e["agent_b"] = v.agent_b;
    if (v.time >= 0) e["time"] = v.time;
    e["message"] = v.message;
    arr.push_back(e);
  }
  return arr.dump(2) + "\n";
}

}  // namespace msmp
