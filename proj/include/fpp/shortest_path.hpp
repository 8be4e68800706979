#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <vector>

#include "fpp/domain.hpp"
#include "fpp/environment.hpp"
#include "fpp/errors.hpp"
#include "fpp/lattice.hpp"

namespace fpp {

// Sum of the edge weights along a path.
inline double path_time(const Environment& env, const Path& p) {
  double t = 0;
  for (const Edge& e : p.edges()) t += env.weight(e);
  return t;
}

// Edge weights of the subgraph induced on (box ∩ member set), cached for repeated searches.
class WeightedRegion {
 public:
  WeightedRegion(const Environment& env, const Domain& domain, Box box)
      : box_(box.intersect(domain.window())) {
    init(env, [&domain](Vertex v) { return domain.contains(v); });
  }

  // Region in the full lattice.
  WeightedRegion(const Environment& env, Box box) : box_(box) {
    init(env, [](Vertex) { return true; });
  }

  WeightedRegion(const Environment& env, Box box, const std::function<bool(Vertex)>& member) : box_(box) {
    init(env, member);
  }

  const Box& box() const { return box_; }
  std::size_t size() const { return member_.size(); }
  std::size_t index(Vertex v) const { return box_.index(v); }
  Vertex vertex(std::size_t i) const { return box_.vertex(i); }
  bool member(std::size_t i) const { return member_[i] != 0; }
  bool member(Vertex v) const { return box_.contains(v) && member_[box_.index(v)] != 0; }

  // Neighbour index in direction d, or npos when it leaves the box.
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
  std::size_t step(std::size_t i, Dir d) const {
    const auto h = static_cast<std::size_t>(box_.height());
    const std::size_t y = i % h;
    switch (d) {
      case Dir::left: return i >= h ? i - h : npos;
      case Dir::right: return i + h < member_.size() ? i + h : npos;
      case Dir::down: return y > 0 ? i - 1 : npos;
      case Dir::up: return y + 1 < h ? i + 1 : npos;
    }
    return npos;
  }

  // Weight of the edge from i in direction d; infinite if that edge is not in the region.
  double weight(std::size_t i, Dir d) const {
    const auto h = static_cast<std::size_t>(box_.height());
    switch (d) {
      case Dir::right: return right_[i];
      case Dir::up: return up_[i];
      case Dir::left: return i >= h ? right_[i - h] : kInfinity;
      case Dir::down: return (i % h) > 0 ? up_[i - 1] : kInfinity;
    }
    return kInfinity;
  }

  // Cheapest edge from i to a member vertex outside the box.
  double exit_weight(std::size_t i) const { return exit_[i]; }

 private:
  template <class Pred>
  void init(const Environment& env, const Pred& member) {
    const std::size_t n = box_.size();
    member_.assign(n, 0);
    right_.assign(n, kInfinity);
    up_.assign(n, kInfinity);
    exit_.assign(n, kInfinity);
    for (std::size_t i = 0; i < n; ++i) member_[i] = member(box_.vertex(i)) ? 1 : 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!member_[i]) continue;
      const Vertex v = box_.vertex(i);
      for (Dir d : kDirs) {
        const Vertex u = neighbor(v, d);
        if (box_.contains(u)) {
          if ((d == Dir::right || d == Dir::up) && member_[box_.index(u)]) {
            const double w = env.weight(Edge::between(v, u));
            (d == Dir::right ? right_ : up_)[i] = w;
          }
        } else if (member(u)) {
          exit_[i] = std::min(exit_[i], env.weight(Edge::between(v, u)));
        }
      }
    }
  }

  Box box_;
  std::vector<std::uint8_t> member_;
  std::vector<double> right_;
  std::vector<double> up_;
  std::vector<double> exit_;
};

struct TreeOptions {
  // When non-empty the search stops once every target is settled and the frontier has moved past them.
  std::vector<Vertex> targets;
  bool parents = true;
};

// Single-source passage times inside a region, with optional geodesic tree.
//
// Among tight predecessors the parent is the neighbour with fewest hops from the root,
// then the smallest in vertex order.
class GeodesicTree {
 public:
  Vertex root() const { return root_; }
  const Box& box() const { return box_; }

  bool reached(Vertex v) const { return box_.contains(v) && settled_[box_.index(v)] != 0; }
  double time(Vertex v) const { return reached(v) ? dist_[box_.index(v)] : kInfinity; }

  // Lower bound on the passage time from the root to any vertex outside the region or unsettled.
  double escape_bound() const { return escape_; }
  bool certified(Vertex v) const { return reached(v) && dist_[box_.index(v)] < escape_; }

  bool has_parents() const { return !parent_.empty(); }
  std::optional<Vertex> parent(Vertex v) const {
    if (!reached(v) || parent_.empty()) return std::nullopt;
    const std::int64_t p = parent_[box_.index(v)];
    if (p < 0) return std::nullopt;
    return box_.vertex(static_cast<std::size_t>(p));
  }
  int hops(Vertex v) const { return reached(v) && !hops_.empty() ? hops_[box_.index(v)] : -1; }

  // Vertices from v to the root along parent pointers.
  Path path_to_root(Vertex v) const {
    if (!reached(v)) throw Disconnected("vertex not reached by the search");
    if (parent_.empty()) throw std::logic_error("tree was grown without parents");
    Path p;
    std::int64_t i = static_cast<std::int64_t>(box_.index(v));
    while (i >= 0) {
      p.vertices.push_back(box_.vertex(static_cast<std::size_t>(i)));
      i = parent_[static_cast<std::size_t>(i)];
    }
    return p;
  }

  const std::vector<double>& raw_times() const { return dist_; }
  const std::vector<std::uint8_t>& raw_settled() const { return settled_; }
  const std::vector<std::uint32_t>& settle_order() const { return order_; }

 private:
  friend GeodesicTree grow_tree(const WeightedRegion&, Vertex, const TreeOptions&);

  Vertex root_;
  Box box_;
  std::vector<double> dist_;
  std::vector<std::uint8_t> settled_;
  std::vector<std::uint32_t> order_;
  std::vector<std::int64_t> parent_;
  std::vector<std::int32_t> hops_;
  double escape_ = kInfinity;
};

inline GeodesicTree grow_tree(const WeightedRegion& region, Vertex root, const TreeOptions& options = {}) {
  if (!region.member(root)) throw OutOfWindow("root is not in the search region");
  GeodesicTree t;
  t.root_ = root;
  t.box_ = region.box();
  const std::size_t n = region.size();
  t.dist_.assign(n, kInfinity);
  t.settled_.assign(n, 0);

  std::vector<std::uint8_t> is_target;
  std::size_t remaining = 0;
  if (!options.targets.empty()) {
    is_target.assign(n, 0);
    for (Vertex v : options.targets) {
      if (!region.member(v)) continue;
      auto& f = is_target[region.index(v)];
      if (!f) {
        f = 1;
        ++remaining;
      }
    }
  }
  const bool bounded = remaining > 0;
  double target_max = -kInfinity;
  double frontier = kInfinity;

  using Item = std::pair<double, std::uint32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  const auto r = static_cast<std::uint32_t>(region.index(root));
  t.dist_[r] = 0;
  heap.push({0.0, r});
  t.order_.reserve(bounded ? 1024 : n);

  while (!heap.empty()) {
    const auto [d, i] = heap.top();
    if (t.settled_[i] || d > t.dist_[i]) {
      heap.pop();
      continue;
    }
    if (bounded && remaining == 0 && d > target_max) {
      frontier = d;
      break;
    }
    heap.pop();
    t.settled_[i] = 1;
    t.order_.push_back(i);
    if (bounded && is_target[i]) {
      --remaining;
      target_max = std::max(target_max, d);
    }
    for (Dir dir : kDirs) {
      const double w = region.weight(i, dir);
      if (w == kInfinity) continue;
      const std::size_t j = region.step(i, dir);
      const double nd = d + w;
      if (nd < t.dist_[j]) {
        t.dist_[j] = nd;
        heap.push({nd, static_cast<std::uint32_t>(j)});
      }
    }
  }

  double escape = frontier;
  for (std::uint32_t i : t.order_) {
    const double e = region.exit_weight(i);
    if (e != kInfinity) escape = std::min(escape, t.dist_[i] + e);
  }
  t.escape_ = escape;
  for (std::size_t i = 0; i < n; ++i)
    if (!t.settled_[i]) t.dist_[i] = kInfinity;

  if (!options.parents) return t;

  // Hop counts along geodesics; equal-time groups are closed under their zero-weight edges.
  constexpr std::int32_t kNoHops = std::numeric_limits<std::int32_t>::max();
  t.hops_.assign(n, kNoHops);
  t.parent_.assign(n, -1);
  const auto& order = t.order_;
  std::size_t g0 = 0;
  while (g0 < order.size()) {
    std::size_t g1 = g0 + 1;
    const double gd = t.dist_[order[g0]];
    while (g1 < order.size() && t.dist_[order[g1]] == gd) ++g1;

    for (std::size_t k = g0; k < g1; ++k) {
      const std::uint32_t v = order[k];
      std::int32_t h = (v == r) ? 0 : kNoHops;
      for (Dir dir : kDirs) {
        const double w = region.weight(v, dir);
        if (w == kInfinity) continue;
        const std::size_t u = region.step(v, dir);
        if (!t.settled_[u] || t.dist_[u] >= gd) continue;
        if (t.dist_[u] + w == gd && t.hops_[u] != kNoHops) h = std::min(h, t.hops_[u] + 1);
      }
      t.hops_[v] = h;
    }
    if (g1 - g0 > 1) {
      using HItem = std::pair<std::int32_t, std::uint32_t>;
      std::priority_queue<HItem, std::vector<HItem>, std::greater<>> q;
      for (std::size_t k = g0; k < g1; ++k)
        if (t.hops_[order[k]] != kNoHops) q.push({t.hops_[order[k]], order[k]});
      while (!q.empty()) {
        const auto [h, v] = q.top();
        q.pop();
        if (h > t.hops_[v]) continue;
        for (Dir dir : kDirs) {
          if (region.weight(v, dir) != 0.0) continue;
          const std::size_t u = region.step(v, dir);
          if (!t.settled_[u] || t.dist_[u] != gd) continue;
          if (h + 1 < t.hops_[u]) {
            t.hops_[u] = h + 1;
            q.push({h + 1, static_cast<std::uint32_t>(u)});
          }
        }
      }
    }
    for (std::size_t k = g0; k < g1; ++k) {
      const std::uint32_t v = order[k];
      if (v == r) continue;
      for (Dir dir : kDirs) {
        const double w = region.weight(v, dir);
        if (w == kInfinity) continue;
        const std::size_t u = region.step(v, dir);
        if (!t.settled_[u]) continue;
        if (t.dist_[u] + w == gd && t.hops_[u] + 1 == t.hops_[v]) {
          t.parent_[v] = static_cast<std::int64_t>(u);
          break;
        }
      }
    }
    g0 = g1;
  }
  return t;
}

// Full tree over (box ∩ V) rooted at `root`.
inline GeodesicTree geodesic_tree(const Environment& env, const Domain& domain, Vertex root, Box box) {
  WeightedRegion region(env, domain, box);
  return grow_tree(region, root);
}

struct PassageResult {
  double time = 0;
  Path path;  // from x to y
};

// Passage time restricted to (x + [-N,N]^2) ∩ V; the box must not reach past the window inside V.
inline PassageResult windowed_passage_time(const Environment& env, const Domain& domain, Vertex x, Vertex y, int N) {
  if (N < 0) throw BadInputs("box radius must be non-negative");
  const Box box = Box::around(x, N);
  if (!domain.contains(x) || !domain.contains(y)) throw BadInputs("endpoints must lie in the domain");
  if (!box.contains(y)) throw OutOfWindow("target lies outside the box");
  for (int px = box.x0; px <= box.x1; ++px)
    for (int py = box.y0; py <= box.y1; ++py) {
      const Vertex p{px, py};
      if (domain.contains(p) && !domain.in_window(p)) throw OutOfWindow("box extends beyond the window");
    }
  WeightedRegion region(env, domain, box);
  const GeodesicTree t = grow_tree(region, x, TreeOptions{{y}, true});
  if (!t.reached(y)) throw Disconnected("endpoints are not connected inside the box");
  return {t.time(y), t.path_to_root(y).reversed()};
}

enum class CertStatus { certified, heuristic, window_limited };

struct Certificate {
  CertStatus status = CertStatus::window_limited;
  int radius = 0;   // box radius of the final estimate
  int plateau = 0;  // consecutive radii with an unchanged estimate
};

struct GeodesicResult {
  Path path;
  double time = 0;
  Certificate certificate;
};

// Grows x + [-N,N]^2 until the estimate is certified by an escape bound or the window is exhausted.
inline GeodesicResult passage_time(const Environment& env, const Domain& domain, Vertex x, Vertex y) {
  if (!domain.contains(x) || !domain.contains(y)) throw BadInputs("endpoints must lie in the domain");
  if (!domain.in_window(x) || !domain.in_window(y)) throw OutOfWindow("endpoints must lie in the window");
  int N = std::max(linf_norm(x - y), 1);
  std::optional<GeodesicResult> best;
  double last_time = kInfinity;
  int plateau = 0;
  while (true) {
    const Box box = Box::around(x, N);
    WeightedRegion region(env, domain, box);
    const GeodesicTree t = grow_tree(region, x, TreeOptions{{y}, true});
    if (t.reached(y)) {
      const double ty = t.time(y);
      plateau = (best && ty == last_time) ? plateau + 1 : 0;
      last_time = ty;
      best = GeodesicResult{t.path_to_root(y).reversed(), ty, {CertStatus::window_limited, N, plateau}};
      if (t.certified(y)) {
        best->certificate.status = CertStatus::certified;
        return *best;
      }
    }
    if (box.contains(domain.window())) break;
    N += std::max(1, N / 2);
  }
  if (!best) throw Disconnected("endpoints are not connected inside the window");
  if (best->certificate.plateau >= 2) best->certificate.status = CertStatus::heuristic;
  return *best;
}

enum class Side { none, left, right, bottom, top };

inline bool on_side(const Box& box, Vertex v, Side s) {
  switch (s) {
    case Side::left: return v.x == box.x0;
    case Side::right: return v.x == box.x1;
    case Side::bottom: return v.y == box.y0;
    case Side::top: return v.y == box.y1;
    case Side::none: return false;
  }
  return false;
}

// Cheapest path inside `box` from the entry side to the exit side, never touching the forbidden side.
inline double constrained_crossing_time(const Environment& env, const Box& box, Side entry, Side exit, Side forbidden) {
  if (box.empty() || entry == Side::none || exit == Side::none) throw BadInputs("crossing needs a box and two sides");
  WeightedRegion region(env, box, [&](Vertex v) { return box.contains(v) && !on_side(box, v, forbidden); });
  const std::size_t n = region.size();
  std::vector<double> dist(n, kInfinity);
  using Item = std::pair<double, std::uint32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  for (std::size_t i = 0; i < n; ++i)
    if (region.member(i) && on_side(box, region.vertex(i), entry)) {
      dist[i] = 0;
      heap.push({0.0, static_cast<std::uint32_t>(i)});
    }
  while (!heap.empty()) {
    const auto [d, i] = heap.top();
    heap.pop();
    if (d > dist[i]) continue;
    if (on_side(box, region.vertex(i), exit)) return d;
    for (Dir dir : kDirs) {
      const double w = region.weight(i, dir);
      if (w == kInfinity) continue;
      const std::size_t j = region.step(i, dir);
      if (d + w < dist[j]) {
        dist[j] = d + w;
        heap.push({d + w, static_cast<std::uint32_t>(j)});
      }
    }
  }
  throw NoCrossing("no admissible crossing of the box");
}

}  // namespace fpp
