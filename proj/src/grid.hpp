#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace msmp {

using Vertex = int32_t;

constexpr double kUnreachable = std::numeric_limits<double>::infinity();

struct ParseError : std::runtime_error {
  int line;
  ParseError(int line_no, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line_no) + ": " + msg), line(line_no) {}
};

struct NoPathError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// 4-connected grid workspace; vertex id = row * width + col, row 0 is the
// first map line.
struct Grid {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> blocked;

  int cell_count() const { return width * height; }
  bool in_bounds(int r, int c) const { return r >= 0 && r < height && c >= 0 && c < width; }
  Vertex at(int r, int c) const { return Vertex(r * width + c); }
  int row(Vertex v) const { return v / width; }
  int col(Vertex v) const { return v % width; }
  bool valid_vertex(Vertex v) const { return v >= 0 && v < cell_count(); }
  bool is_blocked(Vertex v) const { return blocked[size_t(v)] != 0; }
  bool passable(Vertex v) const { return valid_vertex(v) && !is_blocked(v); }
  size_t free_count() const;

  bool operator==(const Grid&) const = default;
};

// Successors of v including the wait move, in the fixed order
// (self, up, right, down, left). Throws std::invalid_argument on a blocked or
// out-of-range vertex.
int neighbors(const Grid& g, Vertex v, std::array<Vertex, 5>& out);
std::vector<Vertex> neighbor_list(const Grid& g, Vertex v);

// MovingAI .map format: `type`, `height H`, `width W`, `map`, then H rows of
// W characters. '.'/'G' passable; '@'/'O'/'T' blocked.
Grid parse_map(const std::string& text);
std::string write_map(const Grid& g);
Grid load_map_file(const std::string& path);

struct DistanceField {
  Vertex source = -1;
  std::vector<double> dist;
  bool reachable(Vertex v) const { return dist[size_t(v)] != kUnreachable; }
};

// Exact unit-cost distances from source (BFS).
DistanceField shortest_dist(const Grid& g, Vertex source);

// Per-solve memo of distance fields, keyed by source vertex. Not thread-safe;
// confine one cache to one solve.
class DistanceCache {
 public:
  explicit DistanceCache(const Grid& g) : grid_(&g) {}
  const DistanceField& get(Vertex source);
  const Grid& grid() const { return *grid_; }
  size_t size() const { return memo_.size(); }

 private:
  const Grid* grid_;
  std::unordered_map<Vertex, DistanceField> memo_;
};

struct Path {
  std::vector<Vertex> vertices;
  double cost = 0.0;
};

// One shortest path src -> dst. Ties are broken by preferring the first
// improving direction in neighbor order (up, right, down, left) at each step,
// so results are reproducible. Throws NoPathError if dst is unreachable.
Path shortest_path(const Grid& g, Vertex src, Vertex dst);
Path shortest_path(DistanceCache& cache, Vertex src, Vertex dst);

}  // namespace msmp
