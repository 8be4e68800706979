#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fpp/domain.hpp"
#include "fpp/environment.hpp"
#include "fpp/errors.hpp"
#include "fpp/geodesic_graph.hpp"
#include "fpp/shortest_path.hpp"

namespace fpp {

// Winding number of a closed lattice polygon around a point given in doubled coordinates.
// The polygon lists its vertices once; the closing edge back to the first vertex is implied.
inline int winding_number(const std::vector<Vertex>& polygon, Vertex point2) {
  int wn = 0;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vertex a = polygon[i] * 2;
    const Vertex b = polygon[(i + 1) % n] * 2;
    const long long side = detail::cross(b - a, point2 - a);
    if (a.y <= point2.y) {
      if (b.y > point2.y && side > 0) ++wn;
    } else if (b.y <= point2.y && side < 0) {
      --wn;
    }
  }
  return wn;
}

// Outer box minus a closed inner box.
struct Annulus {
  Box outer;
  Box hole;

  bool contains(Vertex v) const { return outer.contains(v) && !hole.contains(v); }

  // [-N0^(n+1), N0^(n+1)]^2 minus the open box (-N0^n, N0^n)^2, around c.
  static Annulus square(Vertex c, int N0, int n) {
    if (N0 < 2 || n < 0) throw BadInputs("annulus needs N0 >= 2 and n >= 0");
    long r = 1;
    for (int i = 0; i < n; ++i) r *= N0;
    const int inner = static_cast<int>(r) - 1;
    const int outer = static_cast<int>(r * N0);
    return {Box::around(c, outer), Box::around(c, inner)};
  }

  // [-n,n] x [0,2n] minus [-m,m] x [0,2m] with m = n - floor(sqrt n), around c on the axis.
  static Annulus half(Vertex c, int n) {
    if (n < 2) throw BadInputs("half annulus needs n >= 2");
    const int m = n - static_cast<int>(std::floor(std::sqrt(static_cast<double>(n))));
    return {{c.x - n, c.x + n, c.y, c.y + 2 * n}, {c.x - m, c.x + m, c.y, c.y + 2 * m}};
  }
};

struct CircuitWitness {
  std::vector<Vertex> vertices;  // closed: the last vertex connects back to the first; open for half circuits
  bool closed = true;
  double max_weight = 0;

  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    for (std::size_t i = 0; i + 1 < vertices.size(); ++i) out.push_back(Edge::between(vertices[i], vertices[i + 1]));
    if (closed && vertices.size() > 2) out.push_back(Edge::between(vertices.back(), vertices.front()));
    return out;
  }

  std::string dump() const {
    std::ostringstream os;
    for (const Edge& e : edges()) os << e.low().x << ' ' << e.low().y << ' ' << e.high().x << ' ' << e.high().y << '\n';
    return os.str();
  }
};

struct ShapeRatio {
  double ratio = kInfinity;
  Vertex argmin;
  std::size_t sphere_size = 0;
  bool certified = false;
};

// min over |x|_1 = R of tau(0,x) / R.
inline ShapeRatio partial_shape_ratio(const Environment& env, const Domain& domain, int R) {
  if (zero_mass(env.dist()) >= 0.5) throw HypothesisViolated("zero-weight mass must be below 1/2");
  if (R <= 0) throw BadInputs("radius must be positive");
  const Vertex origin{0, 0};
  if (!domain.contains(origin) || !domain.in_window(origin)) throw BadInputs("origin must lie in the domain window");
  std::vector<Vertex> sphere;
  bool complete = true;
  for (int dx = -R; dx <= R; ++dx) {
    const int dy = R - std::abs(dx);
    for (int s : {1, -1}) {
      if (dy == 0 && s == -1) continue;
      const Vertex v{dx, s * dy};
      if (!domain.contains(v)) continue;
      if (!domain.in_window(v)) {
        complete = false;
        continue;
      }
      sphere.push_back(v);
    }
  }
  std::sort(sphere.begin(), sphere.end());
  ShapeRatio out;
  out.sphere_size = sphere.size();
  if (sphere.empty()) return out;
  const WeightedRegion region(env, domain, domain.window());
  const GeodesicTree tree = grow_tree(region, origin, TreeOptions{sphere, false});
  bool all_certified = complete;
  for (Vertex v : sphere) {
    all_certified = all_certified && tree.certified(v);
    const double r = tree.time(v) / R;
    if (r < out.ratio) {
      out.ratio = r;
      out.argmin = v;
    }
  }
  out.certified = all_certified;
  return out;
}

namespace detail {

// Vertical edges {(x,cy),(x,cy+1)} with x > cx cross the horizontal ray from (cx, cy + 1/2).
inline bool crosses_ray(Vertex a, Vertex b, Vertex center) {
  if (a.x != b.x || a.x <= center.x) return false;
  return std::min(a.y, b.y) == center.y && std::max(a.y, b.y) == center.y + 1;
}

}  // namespace detail

// A self-avoiding circuit of zero-weight edges inside the annulus that winds around `center`.
inline std::optional<CircuitWitness> find_zero_circuit(const Environment& env, const Annulus& annulus, Vertex center) {
  const Box& box = annulus.outer;
  const std::size_t n = box.size();
  auto zero_edge = [&](Vertex a, Vertex b) {
    return annulus.contains(a) && annulus.contains(b) && env.weight(Edge::between(a, b)) == 0.0;
  };
  // Zero-edge adjacency bits, cached once.
  std::vector<std::uint8_t> adj(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const Vertex v = box.vertex(i);
    if (!annulus.contains(v)) continue;
    for (Dir d : {Dir::up, Dir::right}) {
      const Vertex u = neighbor(v, d);
      if (zero_edge(v, u)) {
        adj[i] |= detail::bit(d);
        adj[box.index(u)] |= detail::bit(opposite(d));
      }
    }
  }

  std::vector<std::uint8_t> done(n, 0);
  std::vector<std::int64_t> parent(2 * n, -1);
  std::vector<std::uint8_t> seen(2 * n, 0);
  for (std::size_t s = 0; s < n; ++s) {
    if (done[s] || adj[s] == 0) continue;
    std::vector<std::size_t> touched;
    std::vector<std::size_t> queue{2 * s};
    seen[2 * s] = 1;
    touched.push_back(2 * s);
    bool found = false;
    for (std::size_t qi = 0; qi < queue.size() && !found; ++qi) {
      const std::size_t state = queue[qi];
      const std::size_t i = state / 2;
      const std::size_t par = state % 2;
      done[i] = 1;
      const Vertex v = box.vertex(i);
      for (Dir d : kDirs) {
        if (!(adj[i] & detail::bit(d))) continue;
        const Vertex u = neighbor(v, d);
        const std::size_t next = 2 * box.index(u) + (par ^ (detail::crosses_ray(v, u, center) ? 1 : 0));
        if (seen[next]) continue;
        seen[next] = 1;
        parent[next] = static_cast<std::int64_t>(state);
        touched.push_back(next);
        queue.push_back(next);
        if (next == 2 * s + 1) {
          found = true;
          break;
        }
      }
    }
    if (found) {
      std::vector<Vertex> walk;
      for (std::int64_t st = static_cast<std::int64_t>(2 * s + 1); st >= 0; st = parent[static_cast<std::size_t>(st)])
        walk.push_back(box.vertex(static_cast<std::size_t>(st) / 2));
      std::reverse(walk.begin(), walk.end());
      // Split the closed walk into simple cycles; one of them has odd crossing parity.
      std::vector<Vertex> stack;
      for (Vertex v : walk) {
        auto it = std::find(stack.begin(), stack.end(), v);
        if (it == stack.end()) {
          stack.push_back(v);
          continue;
        }
        std::vector<Vertex> cycle(it, stack.end());
        stack.erase(it + 1, stack.end());
        if (cycle.size() < 4) continue;
        int crossings = 0;
        for (std::size_t k = 0; k < cycle.size(); ++k)
          crossings += detail::crosses_ray(cycle[k], cycle[(k + 1) % cycle.size()], center) ? 1 : 0;
        if (crossings % 2 == 1) {
          CircuitWitness w{cycle, true, 0.0};
          return w;
        }
      }
    }
    for (std::size_t st : touched) seen[st] = 0, parent[st] = -1;
  }
  return std::nullopt;
}

// Re-checks closure, self-avoidance, containment, zero weights (or <= bound) and enclosure.
inline bool verify_circuit(const Environment& env, const CircuitWitness& w, const Annulus& annulus, Vertex center,
                           double bound = 0.0) {
  if (w.vertices.size() < (w.closed ? 4u : 2u)) return false;
  if (!Path{w.vertices}.self_avoiding()) return false;
  for (Vertex v : w.vertices)
    if (!annulus.contains(v)) return false;
  for (std::size_t i = 0; i + 1 < w.vertices.size(); ++i)
    if (!adjacent(w.vertices[i], w.vertices[i + 1])) return false;
  if (w.closed && !adjacent(w.vertices.back(), w.vertices.front())) return false;
  for (const Edge& e : w.edges())
    if (env.weight(e) > bound) return false;
  if (w.closed) return winding_number(w.vertices, center * 2) != 0;
  // Half circuit: both ends on the axis through the center, closed along that axis.
  if (w.vertices.front().y != center.y || w.vertices.back().y != center.y) return false;
  std::vector<Vertex> poly = w.vertices;
  const Vertex last = w.vertices.back(), first = w.vertices.front();
  const int step = first.x > last.x ? 1 : -1;
  for (int x = last.x + step; x != first.x; x += step) poly.push_back({x, center.y});
  return winding_number(poly, center * 2 + Vertex{0, 1}) != 0;
}

struct SurgeryResult {
  Path path;
  std::size_t iterations = 0;
  std::size_t adjacent_edges = 0;  // edges touching the circuit, bounding the iterations
};

// Replaces excursions of gamma beyond the circuit alpha by arcs of alpha; beta is a reference path inside alpha.
inline SurgeryResult reroute_through_circuit(const Path& gamma, const CircuitWitness& alpha, const Path& beta) {
  if (gamma.empty() || beta.empty() || gamma.front() != beta.front() || gamma.back() != beta.back())
    throw BadInputs("gamma and beta must share their endpoints");
  if (!gamma.is_lattice_path() || !gamma.self_avoiding() || !beta.is_lattice_path() || !beta.self_avoiding())
    throw BadInputs("gamma and beta must be self-avoiding lattice paths");
  if (!alpha.closed || alpha.vertices.size() < 4 || !Path{alpha.vertices}.self_avoiding())
    throw BadInputs("alpha must be a self-avoiding circuit");
  const std::vector<Vertex>& A = alpha.vertices;
  const std::size_t na = A.size();
  for (std::size_t i = 0; i < na; ++i)
    if (!adjacent(A[i], A[(i + 1) % na])) throw BadInputs("alpha is not a lattice circuit");
  const std::set<Vertex> alpha_set(A.begin(), A.end());
  for (Vertex v : beta.vertices)
    if (alpha_set.count(v) || winding_number(A, v * 2) == 0) throw BadInputs("beta must lie strictly inside alpha");

  SurgeryResult result;
  {
    std::set<Edge> adj;
    for (Vertex v : A)
      for (Dir d : kDirs) adj.insert(Edge::between(v, neighbor(v, d)));
    result.adjacent_edges = adj.size();
  }

  std::map<Vertex, std::size_t> beta_pos;
  for (std::size_t i = 0; i < beta.vertices.size(); ++i) beta_pos[beta.vertices[i]] = i;
  std::vector<std::size_t> common;
  for (std::size_t i = 0; i < gamma.vertices.size(); ++i)
    if (beta_pos.count(gamma.vertices[i])) common.push_back(i);

  Path out{{gamma.front()}};
  for (std::size_t c = 0; c + 1 < common.size(); ++c) {
    std::vector<Vertex> seg(gamma.vertices.begin() + static_cast<long>(common[c]),
                            gamma.vertices.begin() + static_cast<long>(common[c + 1]) + 1);
    const std::size_t b0 = beta_pos[seg.front()], b1 = beta_pos[seg.back()];
    std::vector<Vertex> bpart;
    // Beta portion walked from the segment's end back to its start, excluding both endpoints.
    if (b1 >= b0) {
      for (std::size_t k = b1; k > b0 + 1; --k) bpart.push_back(beta.vertices[k - 1]);
    } else {
      for (std::size_t k = b1 + 1; k < b0; ++k) bpart.push_back(beta.vertices[k]);
    }
    const bool trivial = seg.size() == 2 && bpart.empty();
    while (!trivial) {
      std::vector<Vertex> curve = seg;
      curve.insert(curve.end(), bpart.begin(), bpart.end());
      std::set<Edge> curve_edges;
      for (std::size_t k = 0; k < curve.size(); ++k)
        curve_edges.insert(Edge::between(curve[k], curve[(k + 1) % curve.size()]));
      const std::set<Vertex> on_curve(curve.begin(), curve.end());

      std::optional<std::size_t> hit;
      for (std::size_t k = 0; k < na && !hit; ++k) {
        const Edge e = Edge::between(A[k], A[(k + 1) % na]);
        if (curve_edges.count(e)) continue;
        if (winding_number(curve, A[k] + A[(k + 1) % na]) != 0) hit = k;
      }
      if (!hit) break;
      if (++result.iterations > result.adjacent_edges) throw std::logic_error("surgery failed to terminate");

      // Extend the interior edge along alpha in both directions until the curve is met.
      std::size_t hi = (*hit + 1) % na, lo = *hit;
      std::vector<Vertex> arc_fwd{A[lo]}, arc_back;
      std::size_t guard = 0;
      while (!on_curve.count(A[hi])) {
        arc_fwd.push_back(A[hi]);
        hi = (hi + 1) % na;
        if (++guard > na) throw BadInputs("alpha lies inside the curve");
      }
      arc_fwd.push_back(A[hi]);
      guard = 0;
      while (!on_curve.count(A[lo])) {
        lo = (lo + na - 1) % na;
        arc_back.push_back(A[lo]);
        if (++guard > na) throw BadInputs("alpha lies inside the curve");
      }
      std::vector<Vertex> arc(arc_back.rbegin(), arc_back.rend());
      arc.insert(arc.end(), arc_fwd.begin(), arc_fwd.end());
      if (arc_back.empty()) arc = arc_fwd;
      // arc runs from a = arc.front() to b = arc.back(), both on the curve.
      const Vertex a = arc.front(), b = arc.back();
      auto pa = std::find(seg.begin(), seg.end(), a);
      auto pb = std::find(seg.begin(), seg.end(), b);
      if (pa == seg.end() || pb == seg.end()) throw BadInputs("alpha meets the reference path");
      if (pa > pb) {
        std::reverse(arc.begin(), arc.end());
        std::swap(pa, pb);
      }
      std::vector<Vertex> next(seg.begin(), pa);
      next.insert(next.end(), arc.begin(), arc.end());
      next.insert(next.end(), pb + 1, seg.end());
      seg = std::move(next);
    }
    out.vertices.insert(out.vertices.end(), seg.begin() + 1, seg.end());
  }
  result.path = loop_erase(out);
  return result;
}

struct GammaZeroSample {
  long n = 0;
  Path path;  // from (-n,0) to (n,0)
  double time = 0;
  bool certified = false;
};

struct GammaZeroReport {
  std::vector<GammaZeroSample> samples;
  std::map<Edge, EdgeRecord> records;  // edges that appeared on some path

  // Fraction of edges inside `central` that ever appeared and whose membership has not changed for `margin`.
  double stabilized_fraction(const Box& central, long margin) const {
    if (samples.empty()) return 0.0;
    const long last = samples.back().n;
    std::size_t total = 0, stable = 0;
    for (const auto& [e, r] : records) {
      if (!central.contains(e.low()) || !central.contains(e.high())) continue;
      ++total;
      if (r.last_change <= last - margin) ++stable;
    }
    return total ? static_cast<double>(stable) / static_cast<double>(total) : 1.0;
  }
};

// Geodesics G((-n,0),(n,0)) in the half-plane with per-edge membership trajectories.
inline GammaZeroReport gamma_zero(const Environment& env, const Domain& domain, const IndexRange& range) {
  if (!std::holds_alternative<HalfPlane>(domain.spec())) throw BadInputs("gamma_zero needs the half-plane");
  if (range.first < 1 || range.stride <= 0) throw BadInputs("n must be positive");
  const WeightedRegion region(env, domain, domain.window());
  GammaZeroReport rep;
  for (long n = range.first; n <= range.last; n += range.stride) {
    const Vertex a{static_cast<int>(-n), 0}, b{static_cast<int>(n), 0};
    if (!domain.in_window(a) || !domain.in_window(b)) throw OutOfWindow("endpoints leave the window");
    const GeodesicTree tree = grow_tree(region, b, TreeOptions{{a}, true});
    if (!tree.reached(a)) throw Disconnected("endpoints not connected in the window");
    GammaZeroSample s{n, tree.path_to_root(a), tree.time(a), tree.certified(a)};
    const auto edges = s.path.edges();
    const std::set<Edge> current(edges.begin(), edges.end());
    for (const Edge& e : current) {
      auto [it, fresh] = rep.records.try_emplace(e);
      EdgeRecord& r = it->second;
      if (fresh) {
        r.observed = true;
        r.first_on = n;
        r.last_change = n;
        r.value = true;
      } else if (!r.value) {
        r.value = true;
        r.last_change = n;
      }
    }
    for (auto& [e, r] : rep.records)
      if (r.value && !current.count(e)) {
        r.value = false;
        r.last_change = n;
      }
    rep.samples.push_back(std::move(s));
  }
  return rep;
}

struct BlockingEvent {
  double crossing_time = 0;  // left to right inside the box, avoiding its top row
  double boundary_sum = 0;   // weights of box boundary edges off the axis
  bool blocked = false;      // boundary_sum < crossing_time
};

// Boundary edges of the box that do not lie on the horizontal axis.
inline std::vector<Edge> blocking_boundary_edges(const Box& box) {
  std::vector<Edge> out;
  for (int y = box.y0; y < box.y1; ++y) {
    out.push_back({{box.x0, y}, Axis::vertical});
    out.push_back({{box.x1, y}, Axis::vertical});
  }
  for (int x = box.x0; x < box.x1; ++x) {
    out.push_back({{x, box.y1}, Axis::horizontal});
    if (box.y0 != 0) out.push_back({{x, box.y0}, Axis::horizontal});
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Box edges with an endpoint untouched by the boundary edges above; every admissible crossing uses one.
inline std::vector<Edge> blocking_interior_edges(const Box& box) {
  std::set<Vertex> touched;
  for (const Edge& e : blocking_boundary_edges(box)) {
    touched.insert(e.low());
    touched.insert(e.high());
  }
  std::vector<Edge> out;
  for (int x = box.x0; x <= box.x1; ++x)
    for (int y = box.y0; y <= box.y1; ++y)
      for (Dir d : {Dir::up, Dir::right}) {
        const Vertex v{x, y}, u = neighbor(v, d);
        if (!box.contains(u)) continue;
        if (!touched.count(v) || !touched.count(u)) out.push_back(Edge::between(v, u));
      }
  return out;
}

inline BlockingEvent box_blocking_event(const Environment& env, const Box& box) {
  if (box.width() < 3 || box.height() < 2) throw BadInputs("blocking box must be at least 3 wide and 2 tall");
  BlockingEvent ev;
  for (const Edge& e : blocking_boundary_edges(box)) ev.boundary_sum += env.weight(e);
  ev.crossing_time = constrained_crossing_time(env, box, Side::left, Side::right, Side::top);
  ev.blocked = ev.boundary_sum < ev.crossing_time;
  return ev;
}

// Floors every interior edge at 1 + boundary sum, which forces the blocking event for boxes on the axis.
inline Environment force_blocking(const Environment& env, const Box& box) {
  double sum = 0;
  for (const Edge& e : blocking_boundary_edges(box)) sum += env.weight(e);
  std::vector<EdgeEdit> edits;
  for (const Edge& e : blocking_interior_edges(box)) edits.push_back({e, FloorValue{1.0 + sum}});
  return env.with_overrides(edits);
}

// Path of edges with weight <= D through the half annulus from its left axis segment to its right one.
inline std::optional<CircuitWitness> find_half_circuit(const Environment& env, double D, const Annulus& annulus,
                                                       Vertex center) {
  const Box& box = annulus.outer;
  const std::size_t n = box.size();
  std::vector<std::int64_t> parent(n, -2);
  std::vector<std::size_t> queue;
  for (int x = box.x0; x < center.x; ++x) {
    const Vertex v{x, center.y};
    if (!annulus.contains(v)) continue;
    parent[box.index(v)] = -1;
    queue.push_back(box.index(v));
  }
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    const std::size_t i = queue[qi];
    const Vertex v = box.vertex(i);
    if (v.y == center.y && v.x > center.x) {
      CircuitWitness w;
      w.closed = false;
      for (std::int64_t k = static_cast<std::int64_t>(i); k >= 0; k = parent[static_cast<std::size_t>(k)])
        w.vertices.push_back(box.vertex(static_cast<std::size_t>(k)));
      std::reverse(w.vertices.begin(), w.vertices.end());
      for (const Edge& e : w.edges()) w.max_weight = std::max(w.max_weight, env.weight(e));
      return w;
    }
    for (Dir d : kDirs) {
      const Vertex u = neighbor(v, d);
      if (!annulus.contains(u) || parent[box.index(u)] != -2) continue;
      if (env.weight(Edge::between(v, u)) > D) continue;
      parent[box.index(u)] = static_cast<std::int64_t>(i);
      queue.push_back(box.index(u));
    }
  }
  return std::nullopt;
}

// Path edges inside the region whose weight is at least c.
inline std::size_t heavy_edge_count(const Environment& env, const Path& path, const Box& region, double c) {
  std::size_t count = 0;
  for (const Edge& e : path.edges())
    if (region.contains(e.low()) && region.contains(e.high()) && env.weight(e) >= c) ++count;
  return count;
}

}  // namespace fpp
