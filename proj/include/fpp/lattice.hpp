#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace fpp {

// A point of Z^2. Also used for displacements. Ordered lexicographically by (x, y).
struct Vertex {
  int x = 0;
  int y = 0;

  friend constexpr auto operator<=>(const Vertex&, const Vertex&) = default;

  constexpr Vertex operator+(Vertex o) const { return {x + o.x, y + o.y}; }
  constexpr Vertex operator-(Vertex o) const { return {x - o.x, y - o.y}; }
  constexpr Vertex operator-() const { return {-x, -y}; }
  constexpr Vertex operator*(int k) const { return {x * k, y * k}; }
};

inline std::ostream& operator<<(std::ostream& os, Vertex v) {
  return os << '(' << v.x << ',' << v.y << ')';
}

constexpr int l1_norm(Vertex v) { return (v.x < 0 ? -v.x : v.x) + (v.y < 0 ? -v.y : v.y); }
constexpr int linf_norm(Vertex v) {
  const int ax = v.x < 0 ? -v.x : v.x;
  const int ay = v.y < 0 ? -v.y : v.y;
  return ax > ay ? ax : ay;
}
constexpr bool adjacent(Vertex a, Vertex b) { return l1_norm(a - b) == 1; }

struct VertexHash {
  std::size_t operator()(Vertex v) const noexcept {
    const auto ux = static_cast<std::uint64_t>(static_cast<std::uint32_t>(v.x));
    const auto uy = static_cast<std::uint64_t>(static_cast<std::uint32_t>(v.y));
    std::uint64_t h = (ux << 32) | uy;
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdULL;
    h ^= h >> 33;
    return static_cast<std::size_t>(h);
  }
};

// Neighbour directions, listed so that v + offset(d) is increasing in the vertex order.
enum class Dir : std::uint8_t { left = 0, down = 1, up = 2, right = 3 };

inline constexpr std::array<Dir, 4> kDirs = {Dir::left, Dir::down, Dir::up, Dir::right};
inline constexpr std::array<Vertex, 4> kOffsets = {{{-1, 0}, {0, -1}, {0, 1}, {1, 0}}};

constexpr Vertex offset(Dir d) { return kOffsets[static_cast<int>(d)]; }
constexpr Dir opposite(Dir d) { return static_cast<Dir>(3 - static_cast<int>(d)); }
constexpr Vertex neighbor(Vertex v, Dir d) { return v + offset(d); }

constexpr Dir direction_between(Vertex from, Vertex to) {
  const Vertex d = to - from;
  if (d == Vertex{-1, 0}) return Dir::left;
  if (d == Vertex{0, -1}) return Dir::down;
  if (d == Vertex{0, 1}) return Dir::up;
  if (d == Vertex{1, 0}) return Dir::right;
  throw std::invalid_argument("vertices are not nearest neighbours");
}

enum class Axis : std::uint8_t { horizontal = 0, vertical = 1 };

// Undirected nearest-neighbour edge, stored canonically by its lower-left endpoint.
struct Edge {
  Vertex base;
  Axis axis = Axis::horizontal;

  friend constexpr auto operator<=>(const Edge&, const Edge&) = default;

  static constexpr Edge between(Vertex a, Vertex b) {
    const Vertex d = b - a;
    if (d == Vertex{1, 0}) return {a, Axis::horizontal};
    if (d == Vertex{-1, 0}) return {b, Axis::horizontal};
    if (d == Vertex{0, 1}) return {a, Axis::vertical};
    if (d == Vertex{0, -1}) return {b, Axis::vertical};
    throw std::invalid_argument("vertices are not nearest neighbours");
  }

  constexpr Vertex low() const { return base; }
  constexpr Vertex high() const {
    return axis == Axis::horizontal ? Vertex{base.x + 1, base.y} : Vertex{base.x, base.y + 1};
  }
  constexpr bool touches(Vertex v) const { return v == low() || v == high(); }
  constexpr Vertex other(Vertex v) const { return v == low() ? high() : low(); }
  constexpr Edge shifted(Vertex d) const { return {base + d, axis}; }
};

inline std::ostream& operator<<(std::ostream& os, const Edge& e) {
  return os << '{' << e.low() << ',' << e.high() << '}';
}

struct EdgeHash {
  std::size_t operator()(const Edge& e) const noexcept {
    return VertexHash{}(e.base) * 2 + static_cast<std::size_t>(e.axis);
  }
};

struct DirectedEdge {
  Vertex tail;
  Vertex head;

  friend constexpr auto operator<=>(const DirectedEdge&, const DirectedEdge&) = default;
  constexpr Edge undirected() const { return Edge::between(tail, head); }
  constexpr DirectedEdge reversed() const { return {head, tail}; }
};

// The dual edge crossing a primal edge.
struct DualEdge {
  Edge primal;
  friend constexpr auto operator<=>(const DualEdge&, const DualEdge&) = default;
};

// Axis-parallel rectangle of vertices, bounds inclusive.
struct Box {
  int x0 = 0;
  int x1 = -1;
  int y0 = 0;
  int y1 = -1;

  friend constexpr bool operator==(const Box&, const Box&) = default;

  static constexpr Box around(Vertex c, int r) { return {c.x - r, c.x + r, c.y - r, c.y + r}; }
  static constexpr Box spanning(Vertex a, Vertex b) {
    return {std::min(a.x, b.x), std::max(a.x, b.x), std::min(a.y, b.y), std::max(a.y, b.y)};
  }

  constexpr bool empty() const { return x1 < x0 || y1 < y0; }
  constexpr int width() const { return empty() ? 0 : x1 - x0 + 1; }
  constexpr int height() const { return empty() ? 0 : y1 - y0 + 1; }
  constexpr std::size_t size() const {
    return static_cast<std::size_t>(width()) * static_cast<std::size_t>(height());
  }
  constexpr bool contains(Vertex v) const { return v.x >= x0 && v.x <= x1 && v.y >= y0 && v.y <= y1; }
  constexpr bool contains(const Box& b) const {
    return b.empty() || (b.x0 >= x0 && b.x1 <= x1 && b.y0 >= y0 && b.y1 <= y1);
  }
  constexpr bool on_boundary(Vertex v) const {
    return contains(v) && (v.x == x0 || v.x == x1 || v.y == y0 || v.y == y1);
  }
  constexpr Box intersect(const Box& b) const {
    return {std::max(x0, b.x0), std::min(x1, b.x1), std::max(y0, b.y0), std::min(y1, b.y1)};
  }
  constexpr Box expanded(int r) const { return {x0 - r, x1 + r, y0 - r, y1 + r}; }
  constexpr Box shifted(Vertex d) const { return {x0 + d.x, x1 + d.x, y0 + d.y, y1 + d.y}; }
  constexpr Box hull(Vertex v) const {
    if (empty()) return {v.x, v.x, v.y, v.y};
    return {std::min(x0, v.x), std::max(x1, v.x), std::min(y0, v.y), std::max(y1, v.y)};
  }
  constexpr Box hull(const Box& b) const {
    if (b.empty()) return *this;
    if (empty()) return b;
    return {std::min(x0, b.x0), std::max(x1, b.x1), std::min(y0, b.y0), std::max(y1, b.y1)};
  }

  // Column-major index, so index order agrees with the vertex order.
  constexpr std::size_t index(Vertex v) const {
    return static_cast<std::size_t>(v.x - x0) * static_cast<std::size_t>(height()) +
           static_cast<std::size_t>(v.y - y0);
  }
  constexpr Vertex vertex(std::size_t i) const {
    const auto h = static_cast<std::size_t>(height());
    return {x0 + static_cast<int>(i / h), y0 + static_cast<int>(i % h)};
  }
};

using Window = Box;

inline std::ostream& operator<<(std::ostream& os, const Box& b) {
  return os << '[' << b.x0 << ',' << b.x1 << "]x[" << b.y0 << ',' << b.y1 << ']';
}

struct Path {
  std::vector<Vertex> vertices;

  friend bool operator==(const Path&, const Path&) = default;

  bool empty() const { return vertices.empty(); }
  std::size_t length() const { return vertices.empty() ? 0 : vertices.size() - 1; }
  Vertex front() const { return vertices.front(); }
  Vertex back() const { return vertices.back(); }

  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    for (std::size_t i = 1; i < vertices.size(); ++i) out.push_back(Edge::between(vertices[i - 1], vertices[i]));
    return out;
  }

  bool is_lattice_path() const {
    for (std::size_t i = 1; i < vertices.size(); ++i)
      if (!adjacent(vertices[i - 1], vertices[i])) return false;
    return true;
  }

  bool self_avoiding() const {
    std::vector<Vertex> s = vertices;
    std::sort(s.begin(), s.end());
    return std::adjacent_find(s.begin(), s.end()) == s.end();
  }

  Path reversed() const { return Path{{vertices.rbegin(), vertices.rend()}}; }
  Path shifted(Vertex d) const {
    Path p = *this;
    for (auto& v : p.vertices) v = v + d;
    return p;
  }
};

// Removes cycles in visiting order, keeping the first occurrence of each revisited vertex.
inline Path loop_erase(const Path& walk) {
  Path out;
  for (Vertex v : walk.vertices) {
    auto it = std::find(out.vertices.begin(), out.vertices.end(), v);
    if (it != out.vertices.end())
      out.vertices.erase(it + 1, out.vertices.end());
    else
      out.vertices.push_back(v);
  }
  return out;
}

}  // namespace fpp

template <>
struct std::hash<fpp::Vertex> : fpp::VertexHash {};
template <>
struct std::hash<fpp::Edge> : fpp::EdgeHash {};
