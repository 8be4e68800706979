#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fpp/domain.hpp"
#include "fpp/environment.hpp"
#include "fpp/errors.hpp"
#include "fpp/shortest_path.hpp"

namespace fpp {

// tree: out-edge is the tie-broken parent; literal: every tight edge tau(x) = w + tau(y).
enum class GraphMode { automatic, tree, literal };

inline GraphMode resolve_mode(GraphMode mode, const Environment& env) {
  if (mode != GraphMode::automatic) return mode;
  const bool ties_impossible = is_atomless(env.dist()) && !env.has_overrides() && env.cap() == kInfinity;
  return ties_impossible ? GraphMode::tree : GraphMode::literal;
}

namespace detail {

struct UnionFind {
  std::vector<std::uint32_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }
  std::uint32_t find(std::uint32_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  bool unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (a > b) std::swap(a, b);
    parent[b] = a;
    return true;
  }
};

constexpr std::uint8_t bit(Dir d) { return static_cast<std::uint8_t>(1u << static_cast<int>(d)); }

}  // namespace detail

// The graph eta_n restricted to directed edges whose tail lies in a box.
class GeodesicGraph {
 public:
  long n() const { return n_; }
  Vertex target() const { return target_; }
  const Box& box() const { return box_; }
  GraphMode mode() const { return mode_; }

  bool member(Vertex v) const { return box_.contains(v) && member_[box_.index(v)] != 0; }
  std::uint8_t out_mask(Vertex v) const { return box_.contains(v) ? out_[box_.index(v)] : 0; }
  bool eta(Vertex tail, Vertex head) const { return (out_mask(tail) & detail::bit(direction_between(tail, head))) != 0; }
  int out_degree(Vertex v) const { return std::popcount(out_mask(v)); }
  bool certified(Vertex v) const { return box_.contains(v) && certified_[box_.index(v)] != 0; }

  std::vector<DirectedEdge> edges() const {
    std::vector<DirectedEdge> out;
    for (std::size_t i = 0; i < out_.size(); ++i)
      for (Dir d : kDirs)
        if (out_[i] & detail::bit(d)) out.push_back({box_.vertex(i), neighbor(box_.vertex(i), d)});
    return out;
  }

  // Reached box vertices other than the target whose out-degree is not exactly one.
  std::vector<Vertex> out_degree_violations() const {
    std::vector<Vertex> out;
    for (std::size_t i = 0; i < out_.size(); ++i) {
      const Vertex v = box_.vertex(i);
      if (!member_[i] || !reached_[i] || v == target_) continue;
      if (std::popcount(out_[i]) != 1) out.push_back(v);
    }
    return out;
  }

  // Independent cycles of the undirected graph on edges inside the box.
  std::size_t undirected_circuits() const {
    detail::UnionFind uf(out_.size());
    std::size_t cycles = 0;
    for (std::size_t i = 0; i < out_.size(); ++i) {
      const Vertex v = box_.vertex(i);
      for (Dir d : {Dir::up, Dir::right}) {
        const Vertex u = neighbor(v, d);
        if (!box_.contains(u)) continue;
        if (!eta(v, u) && !eta(u, v)) continue;
        if (!uf.unite(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(box_.index(u)))) ++cycles;
      }
    }
    return cycles;
  }

  double certified_fraction() const {
    std::size_t m = 0, c = 0;
    for (std::size_t i = 0; i < out_.size(); ++i)
      if (member_[i] && reached_[i]) {
        ++m;
        c += certified_[i];
      }
    return m ? static_cast<double>(c) / static_cast<double>(m) : 0.0;
  }

  // One line "x1 y1 x2 y2 eta" per directed edge between domain vertices of the box.
  std::string dump() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < out_.size(); ++i) {
      if (!member_[i]) continue;
      const Vertex v = box_.vertex(i);
      for (Dir d : kDirs) {
        const Vertex u = neighbor(v, d);
        if (!member(u)) continue;
        os << v.x << ' ' << v.y << ' ' << u.x << ' ' << u.y << ' ' << ((out_[i] & detail::bit(d)) ? 1 : 0) << '\n';
      }
    }
    return os.str();
  }

 private:
  friend GeodesicGraph build_geodesic_graph(const WeightedRegion&, const Domain&, long, const Box&, GraphMode);

  long n_ = 0;
  Vertex target_;
  Box box_;
  GraphMode mode_ = GraphMode::tree;
  std::vector<std::uint8_t> member_;
  std::vector<std::uint8_t> reached_;
  std::vector<std::uint8_t> out_;
  std::vector<std::uint8_t> certified_;
};

// `region` must cover the whole window of `domain`; `mode` must already be resolved.
inline GeodesicGraph build_geodesic_graph(const WeightedRegion& region, const Domain& domain, long n, const Box& box,
                                          GraphMode mode) {
  if (mode == GraphMode::automatic) throw BadInputs("graph mode must be resolved before building");
  const auto vn = domain.boundary_vertex(n);
  if (!vn) throw OutOfWindow("v_n lies outside the window");
  const Box b = box.intersect(domain.window());
  if (b.empty()) throw OutOfWindow("box does not meet the window");

  std::vector<Vertex> targets;
  const Box halo = b.expanded(1).intersect(domain.window());
  for (int x = halo.x0; x <= halo.x1; ++x)
    for (int y = halo.y0; y <= halo.y1; ++y)
      if (region.member(Vertex{x, y})) targets.push_back({x, y});
  const GeodesicTree tree = grow_tree(region, *vn, TreeOptions{targets, mode == GraphMode::tree});

  GeodesicGraph g;
  g.n_ = n;
  g.target_ = *vn;
  g.box_ = b;
  g.mode_ = mode;
  g.member_.assign(b.size(), 0);
  g.reached_.assign(b.size(), 0);
  g.out_.assign(b.size(), 0);
  g.certified_.assign(b.size(), 0);
  for (std::size_t i = 0; i < b.size(); ++i) {
    const Vertex v = b.vertex(i);
    if (!region.member(v)) continue;
    g.member_[i] = 1;
    if (!tree.reached(v)) continue;
    g.reached_[i] = 1;
    g.certified_[i] = tree.certified(v) ? 1 : 0;
    if (mode == GraphMode::tree) {
      if (const auto p = tree.parent(v)) g.out_[i] = detail::bit(direction_between(v, *p));
    } else {
      const std::size_t ri = region.index(v);
      const double tv = tree.time(v);
      for (Dir d : kDirs) {
        const double w = region.weight(ri, d);
        if (w == kInfinity) continue;
        const Vertex u = neighbor(v, d);
        if (tree.reached(u) && tv == w + tree.time(u)) g.out_[i] |= detail::bit(d);
      }
    }
  }
  return g;
}

inline GeodesicGraph geodesic_graph(const Environment& env, const Domain& domain, long n, const Box& box,
                                    GraphMode mode = GraphMode::automatic) {
  const WeightedRegion region(env, domain, domain.window());
  return build_geodesic_graph(region, domain, n, box, resolve_mode(mode, env));
}

struct EdgeRecord {
  static constexpr long kNever = std::numeric_limits<long>::min();
  bool observed = false;
  bool value = false;        // eta in the last graph
  long first_on = kNever;    // first index with eta = 1
  long last_change = kNever; // last index at which eta changed (the first index counts as a change)
};

// Per directed edge trajectories of eta_n over a range of n, for tails in a box.
class LimitGraphReport {
 public:
  LimitGraphReport() = default;
  LimitGraphReport(Box box, long margin) : box_(box), margin_(margin), records_(box.size() * 4) {}

  const Box& box() const { return box_; }
  long margin() const { return margin_; }
  const std::vector<long>& indices() const { return indices_; }
  long last_index() const { return indices_.empty() ? EdgeRecord::kNever : indices_.back(); }

  const EdgeRecord& record(Vertex tail, Dir d) const { return records_[box_.index(tail) * 4 + static_cast<int>(d)]; }

  bool stabilized(Vertex tail, Dir d) const {
    if (!box_.contains(tail)) return false;
    const EdgeRecord& r = record(tail, d);
    return r.observed && !indices_.empty() && r.last_change <= indices_.back() - margin_;
  }
  bool in_limit(Vertex tail, Dir d) const { return stabilized(tail, d) && record(tail, d).value; }
  bool in_limit(Vertex tail, Vertex head) const { return in_limit(tail, direction_between(tail, head)); }

  // Fraction of undirected domain edges inside `sub` whose two orientations are both stabilized.
  double stabilized_fraction(const Box& sub) const {
    const Box s = sub.intersect(box_);
    std::size_t total = 0, stable = 0;
    for (int x = s.x0; x <= s.x1; ++x)
      for (int y = s.y0; y <= s.y1; ++y) {
        const Vertex v{x, y};
        for (Dir d : {Dir::up, Dir::right}) {
          const Vertex u = neighbor(v, d);
          if (!s.contains(u) || !record(v, d).observed) continue;
          ++total;
          if (stabilized(v, d) && stabilized(u, opposite(d))) ++stable;
        }
      }
    return total ? static_cast<double>(stable) / static_cast<double>(total) : 0.0;
  }

  std::vector<DirectedEdge> limit_edges() const {
    std::vector<DirectedEdge> out;
    for (std::size_t i = 0; i < box_.size(); ++i)
      for (Dir d : kDirs)
        if (in_limit(box_.vertex(i), d)) out.push_back({box_.vertex(i), neighbor(box_.vertex(i), d)});
    return out;
  }

  std::string dump() const {
    std::ostringstream os;
    for (const auto& e : limit_edges()) os << e.tail.x << ' ' << e.tail.y << ' ' << e.head.x << ' ' << e.head.y << " 1\n";
    return os.str();
  }

  LimitGraphReport with_margin(long margin) const {
    LimitGraphReport r = *this;
    r.margin_ = margin;
    return r;
  }

  // Hand-built report in which exactly the listed edges form the (fully stabilized) limit.
  static LimitGraphReport synthetic(const Box& box, const std::vector<DirectedEdge>& edges) {
    LimitGraphReport r(box, 0);
    r.indices_ = {0};
    for (std::size_t i = 0; i < box.size(); ++i)
      for (Dir d : kDirs) {
        auto& rec = r.records_[i * 4 + static_cast<int>(d)];
        rec.observed = true;
        rec.last_change = 0;
      }
    for (const auto& e : edges) {
      if (!box.contains(e.tail)) throw BadInputs("synthetic edge tail outside the box");
      auto& rec = r.records_[box.index(e.tail) * 4 + static_cast<int>(direction_between(e.tail, e.head))];
      rec.value = true;
      rec.first_on = 0;
    }
    return r;
  }

  // Appends the graph for the next index.
  void absorb(const GeodesicGraph& g) {
    if (!indices_.empty() && g.n() <= indices_.back()) throw BadInputs("graphs must be absorbed in increasing n");
    for (std::size_t i = 0; i < box_.size(); ++i) {
      const Vertex v = box_.vertex(i);
      if (!g.member(v)) continue;
      const std::uint8_t mask = g.out_mask(v);
      for (Dir d : kDirs) {
        if (!halo_member(neighbor(v, d))) continue;
        auto& rec = records_[i * 4 + static_cast<int>(d)];
        const bool on = (mask & detail::bit(d)) != 0;
        if (!rec.observed) {
          rec.observed = true;
          rec.value = on;
          rec.last_change = g.n();
        } else if (rec.value != on) {
          rec.value = on;
          rec.last_change = g.n();
        }
        if (on && rec.first_on == EdgeRecord::kNever) rec.first_on = g.n();
      }
    }
    indices_.push_back(g.n());
    ++graphs_;
    max_circuits_ = std::max(max_circuits_, g.undirected_circuits());
    degree_violations_ += g.out_degree_violations().size();
    certified_sum_ += g.certified_fraction();
  }

  std::size_t graphs() const { return graphs_; }
  std::size_t max_circuits() const { return max_circuits_; }
  std::size_t degree_violations() const { return degree_violations_; }
  double mean_certified_fraction() const { return graphs_ ? certified_sum_ / static_cast<double>(graphs_) : 0.0; }

  void set_domain_members(std::vector<std::uint8_t> halo_members, Box halo) {
    halo_members_ = std::move(halo_members);
    halo_ = halo;
  }

 private:
  bool halo_member(Vertex u) const { return halo_.contains(u) && halo_members_[halo_.index(u)] != 0; }

  Box box_;
  long margin_ = 0;
  std::vector<EdgeRecord> records_;
  std::vector<long> indices_;
  std::size_t graphs_ = 0;
  std::size_t max_circuits_ = 0;
  std::size_t degree_violations_ = 0;
  double certified_sum_ = 0;
  Box halo_;
  std::vector<std::uint8_t> halo_members_;
};

inline long default_margin(const IndexRange& range) { return (range.last - range.first) / 2; }

inline LimitGraphReport limit_graph(const Environment& env, const Domain& domain, const IndexRange& range,
                                    const Box& box, long margin, GraphMode mode = GraphMode::automatic) {
  const Box b = box.intersect(domain.window());
  if (b.empty()) throw OutOfWindow("box does not meet the window");
  const WeightedRegion region(env, domain, domain.window());
  const GraphMode m = resolve_mode(mode, env);
  LimitGraphReport report(b, margin);
  const Box halo = b.expanded(1).intersect(domain.window());
  std::vector<std::uint8_t> halo_members(halo.size());
  for (std::size_t i = 0; i < halo.size(); ++i) halo_members[i] = region.member(halo.vertex(i)) ? 1 : 0;
  report.set_domain_members(std::move(halo_members), halo);
  for (long n : indices_in(domain, range)) report.absorb(build_geodesic_graph(region, domain, n, b, m));
  return report;
}

enum class RayEnd { left_box, unstabilized, sink, branching, cycle };

struct Ray {
  Path path;
  RayEnd end = RayEnd::left_box;
  bool resolved() const { return end == RayEnd::left_box; }
};

// Follows stabilized limit edges from x until the ray leaves the box or cannot continue.
inline Ray forward_ray(const LimitGraphReport& report, Vertex x) {
  if (!report.box().contains(x)) throw OutOfWindow("ray start lies outside the report box");
  Ray ray;
  std::set<Vertex> seen;
  Vertex v = x;
  while (true) {
    ray.path.vertices.push_back(v);
    if (!report.box().contains(v)) {
      ray.end = RayEnd::left_box;
      return ray;
    }
    if (!seen.insert(v).second) {
      ray.path.vertices.pop_back();
      ray.end = RayEnd::cycle;
      return ray;
    }
    int candidates = 0;
    bool unstable = false;
    Dir next = Dir::left;
    for (Dir d : kDirs) {
      const EdgeRecord& r = report.record(v, d);
      if (!r.observed) continue;
      if (!report.stabilized(v, d)) {
        unstable = true;
      } else if (r.value) {
        ++candidates;
        next = d;
      }
    }
    if (unstable) {
      ray.end = RayEnd::unstabilized;
      return ray;
    }
    if (candidates == 0) {
      ray.end = RayEnd::sink;
      return ray;
    }
    if (candidates > 1) {
      ray.end = RayEnd::branching;
      return ray;
    }
    v = neighbor(v, next);
  }
}

struct BackwardCluster {
  std::vector<Vertex> vertices;  // sorted
  bool certified_finite = false;
};

// Vertices whose limit ray passes through x, restricted to `box`.
inline BackwardCluster backward_cluster(const LimitGraphReport& report, Vertex x, const Box& box) {
  const Box b = box.intersect(report.box());
  if (!b.contains(x)) throw OutOfWindow("cluster root lies outside the box");
  BackwardCluster c;
  bool finite = true;
  std::set<Vertex> seen{x};
  std::vector<Vertex> stack{x};
  while (!stack.empty()) {
    const Vertex u = stack.back();
    stack.pop_back();
    if (b.on_boundary(u)) finite = false;
    for (Dir d : kDirs) {
      const Vertex w = neighbor(u, d);
      const Dir toward = opposite(d);
      if (!report.box().contains(w)) {
        finite = false;
        continue;
      }
      if (!report.record(w, toward).observed) continue;
      if (!report.stabilized(w, toward)) finite = false;
      if (!report.in_limit(w, toward) || !b.contains(w)) continue;
      if (seen.insert(w).second) stack.push_back(w);
    }
  }
  c.vertices.assign(seen.begin(), seen.end());
  c.certified_finite = finite;
  return c;
}

struct Coalescence {
  enum Kind { merge_at, disjoint_in_window, unresolved };
  Kind kind = unresolved;
  std::optional<Vertex> merge;
};

inline Coalescence coalescence(const LimitGraphReport& report, Vertex x, Vertex y) {
  const Ray rx = forward_ray(report, x);
  const Ray ry = forward_ray(report, y);
  const std::set<Vertex> ys(ry.path.vertices.begin(), ry.path.vertices.end());
  for (Vertex v : rx.path.vertices)
    if (ys.count(v)) return {Coalescence::merge_at, v};
  if (rx.resolved() && ry.resolved()) return {Coalescence::disjoint_in_window, std::nullopt};
  return {Coalescence::unresolved, std::nullopt};
}

struct MinimizerSample {
  long n = 0;
  std::vector<Vertex> minimizers;  // argmin of f_n over the fringe
  double min_value = 0;            // min f_n
  double passage = 0;              // tau(x, v_n)
  bool certified = false;
  bool consistent = false;         // min f_n == tau(x, v_n)
};

struct MinimizerSets {
  Vertex x;
  int m = 0;
  std::vector<Vertex> ball;    // graph ball of radius m around x
  std::vector<Vertex> fringe;  // reduced-domain vertices adjacent to the ball
  std::vector<MinimizerSample> samples;
  std::optional<std::vector<Vertex>> stabilized;  // constant minimizer set over the trailing margin
};

// f_n(z) = tau(x,z) + taubar(z,v_n) over the fringe of the removed graph ball around x.
inline MinimizerSets minimizer_sets(const Environment& env, const Domain& domain, Vertex x, int m,
                                    const IndexRange& range, long margin) {
  if (m < 0) throw BadInputs("ball radius must be non-negative");
  if (!domain.contains(x) || !domain.in_window(x)) throw BadInputs("x must lie in the domain window");
  MinimizerSets out;
  out.x = x;
  out.m = m;
  {
    std::map<Vertex, int> depth{{x, 0}};
    std::vector<Vertex> frontier{x};
    for (int r = 0; r < m; ++r) {
      std::vector<Vertex> next;
      for (Vertex v : frontier)
        for (Dir d : kDirs) {
          const Vertex u = neighbor(v, d);
          if (domain.contains(u) && !depth.count(u)) {
            depth[u] = r + 1;
            next.push_back(u);
          }
        }
      frontier = std::move(next);
    }
    for (const auto& [v, dd] : depth) out.ball.push_back(v);
  }
  const RemovedDomain rd = remove_set(domain, out.ball);
  out.fringe = rd.contact_vertices();

  const WeightedRegion full(env, domain, domain.window());
  const WeightedRegion reduced(env, rd.reduced, domain.window());
  const GeodesicTree from_x = grow_tree(full, x, TreeOptions{out.fringe, false});

  for (long n : indices_in(domain, range)) {
    if (n <= rd.stable_from) continue;
    const Vertex vn = *domain.boundary_vertex(n);
    if (!rd.reduced.contains(vn)) continue;
    const GeodesicTree bar = grow_tree(reduced, vn, TreeOptions{out.fringe, false});
    const GeodesicTree direct = grow_tree(full, vn, TreeOptions{{x}, false});
    MinimizerSample s;
    s.n = n;
    s.passage = direct.time(x);
    s.certified = direct.certified(x);
    s.min_value = kInfinity;
    for (Vertex z : out.fringe) {
      s.certified = s.certified && from_x.certified(z) && bar.certified(z);
      const double f = from_x.time(z) + bar.time(z);
      if (f < s.min_value) {
        s.min_value = f;
        s.minimizers = {z};
      } else if (f == s.min_value) {
        s.minimizers.push_back(z);
      }
    }
    s.consistent = s.min_value == s.passage;
    out.samples.push_back(std::move(s));
  }
  if (!out.samples.empty()) {
    const long last = out.samples.back().n;
    const auto& final_set = out.samples.back().minimizers;
    bool stable = out.samples.front().n <= last - margin;
    for (const auto& s : out.samples)
      if (s.n >= last - margin && s.minimizers != final_set) stable = false;
    if (stable) out.stabilized = final_set;
  }
  return out;
}

}  // namespace fpp
