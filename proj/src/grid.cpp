#include "grid.hpp"

#include <deque>
#include <fstream>
#include <sstream>

namespace msmp {

size_t Grid::free_count() const {
  size_t n = 0;
  for (uint8_t b : blocked)
    if (!b) ++n;
  return n;
}

int neighbors(const Grid& g, Vertex v, std::array<Vertex, 5>& out) {
  if (!g.valid_vertex(v)) throw std::invalid_argument("neighbors: vertex out of range");
  if (g.is_blocked(v)) throw std::invalid_argument("neighbors: vertex is blocked");
  const int r = g.row(v), c = g.col(v);
  int n = 0;
  out[n++] = v;  // wait
  if (g.in_bounds(r - 1, c) && !g.is_blocked(g.at(r - 1, c))) out[n++] = g.at(r - 1, c);
  if (g.in_bounds(r, c + 1) && !g.is_blocked(g.at(r, c + 1))) out[n++] = g.at(r, c + 1);
  if (g.in_bounds(r + 1, c) && !g.is_blocked(g.at(r + 1, c))) out[n++] = g.at(r + 1, c);
  if (g.in_bounds(r, c - 1) && !g.is_blocked(g.at(r, c - 1))) out[n++] = g.at(r, c - 1);
  return n;
}

std::vector<Vertex> neighbor_list(const Grid& g, Vertex v) {
  std::array<Vertex, 5> buf;
  int n = neighbors(g, v, buf);
  return std::vector<Vertex>(buf.begin(), buf.begin() + n);
}

namespace {

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char ch : text) {
    if (ch == '\n') {
      if (!cur.empty() && cur.back() == '\r') cur.pop_back();
      lines.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) {
    if (cur.back() == '\r') cur.pop_back();
    lines.push_back(cur);
  }
  return lines;
}

bool parse_header_int(const std::string& line, const std::string& key, int& out) {
  std::istringstream ss(line);
  std::string k;
  long long v;
  if (!(ss >> k >> v) || k != key || v <= 0) return false;
  out = int(v);
  return true;
}

}  // namespace

Grid parse_map(const std::string& text) {
  const auto lines = split_lines(text);
  size_t i = 0;
  auto line_no = [&]() { return int(i + 1); };

  if (i >= lines.size() || lines[i].rfind("type", 0) != 0)
    throw ParseError(line_no(), "expected 'type' header");
  ++i;

  int width = 0, height = 0;
  for (int k = 0; k < 2; ++k) {
    if (i >= lines.size()) throw ParseError(line_no(), "expected 'height'/'width' header");
    if (height == 0 && parse_header_int(lines[i], "height", height)) {
      ++i;
    } else if (width == 0 && parse_header_int(lines[i], "width", width)) {
      ++i;
    } else {
      throw ParseError(line_no(), "expected 'height'/'width' header, got '" + lines[i] + "'");
    }
  }
  if (i >= lines.size() || lines[i] != "map") throw ParseError(line_no(), "expected 'map' header");
  ++i;

  Grid g;
  g.width = width;
  g.height = height;
  g.blocked.assign(size_t(width) * size_t(height), 0);
  for (int r = 0; r < height; ++r, ++i) {
    if (i >= lines.size())
      throw ParseError(line_no(), "expected " + std::to_string(height) + " map rows, got " +
                                      std::to_string(r));
    const std::string& row = lines[i];
    if (int(row.size()) != width)
      throw ParseError(line_no(), "row has " + std::to_string(row.size()) +
                                      " characters, expected " + std::to_string(width));
    for (int c = 0; c < width; ++c) {
      char ch = row[size_t(c)];
      if (ch == '.' || ch == 'G') continue;
      if (ch == '@' || ch == 'O' || ch == 'T') {
        g.blocked[size_t(g.at(r, c))] = 1;
        continue;
      }
      throw ParseError(line_no(), std::string("unknown map character '") + ch + "'");
    }
  }
  for (; i < lines.size(); ++i)
    if (!lines[i].empty()) throw ParseError(line_no(), "unexpected content after map rows");
  return g;
}

std::string write_map(const Grid& g) {
  std::string out = "type octile\nheight " + std::to_string(g.height) + "\nwidth " +
                    std::to_string(g.width) + "\nmap\n";
  for (int r = 0; r < g.height; ++r) {
    for (int c = 0; c < g.width; ++c) out.push_back(g.is_blocked(g.at(r, c)) ? '@' : '.');
    out.push_back('\n');
  }
  return out;
}

Grid load_map_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open map file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_map(ss.str());
  } catch (const ParseError& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

DistanceField shortest_dist(const Grid& g, Vertex source) {
  if (!g.passable(source)) throw std::invalid_argument("shortest_dist: bad source vertex");
  DistanceField f;
  f.source = source;
  f.dist.assign(size_t(g.cell_count()), kUnreachable);
  f.dist[size_t(source)] = 0.0;
  std::deque<Vertex> queue{source};
  std::array<Vertex, 5> buf;
  while (!queue.empty()) {
    Vertex v = queue.front();
    queue.pop_front();
    const double d = f.dist[size_t(v)];
    const int n = neighbors(g, v, buf);
    for (int k = 1; k < n; ++k) {  // skip the wait move
      Vertex u = buf[size_t(k)];
      if (f.dist[size_t(u)] == kUnreachable) {
        f.dist[size_t(u)] = d + 1.0;
        queue.push_back(u);
      }
    }
  }
  return f;
}

const DistanceField& DistanceCache::get(Vertex source) {
  auto it = memo_.find(source);
  if (it != memo_.end()) return it->second;
  return memo_.emplace(source, shortest_dist(*grid_, source)).first->second;
}

Path shortest_path(DistanceCache& cache, Vertex src, Vertex dst) {
  const Grid& g = cache.grid();
  if (!g.passable(src) || !g.passable(dst))
    throw std::invalid_argument("shortest_path: bad endpoint");
  const DistanceField& to_dst = cache.get(dst);
  if (!to_dst.reachable(src))
    throw NoPathError("no path from " + std::to_string(src) + " to " + std::to_string(dst));
  Path p;
  p.vertices.push_back(src);
  Vertex cur = src;
  std::array<Vertex, 5> buf;
  while (cur != dst) {
    const double d = to_dst.dist[size_t(cur)];
    const int n = neighbors(g, cur, buf);
    Vertex next = -1;
    for (int k = 1; k < n; ++k) {
      if (to_dst.dist[size_t(buf[size_t(k)])] == d - 1.0) {
        next = buf[size_t(k)];
        break;
      }
    }
    if (next < 0) throw std::logic_error("shortest_path: inconsistent distance field");
    p.vertices.push_back(next);
    cur = next;
  }
  p.cost = to_dst.dist[size_t(src)];
  return p;
}

Path shortest_path(const Grid& g, Vertex src, Vertex dst) {
  DistanceCache cache(g);
  return shortest_path(cache, src, dst);
}

}  // namespace msmp
