#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "fpp/domain.hpp"
#include "fpp/environment.hpp"
#include "fpp/errors.hpp"
#include "fpp/geodesic_graph.hpp"

namespace fpp {

// Memoised rays of one report.
class RayBook {
 public:
  explicit RayBook(const LimitGraphReport& report) : report_(&report) {}

  const LimitGraphReport& report() const { return *report_; }

  const Ray& ray(Vertex v) {
    auto it = cache_.find(v);
    if (it == cache_.end()) it = cache_.emplace(v, forward_ray(*report_, v)).first;
    return it->second;
  }

  // Vertices on rays started from every vertex of L_0 inside the box, and whether all of them resolved.
  const std::unordered_set<Vertex>& axis_hits() {
    if (!axis_ready_) {
      const Box& b = report_->box();
      if (b.y0 <= 0 && b.y1 >= 0)
        for (int x = b.x0; x <= b.x1; ++x) {
          const Ray& r = ray({x, 0});
          if (!r.resolved()) axis_resolved_ = false;
          axis_hits_.insert(r.path.vertices.begin(), r.path.vertices.end());
        }
      axis_ready_ = true;
    }
    return axis_hits_;
  }
  bool axis_resolved() {
    axis_hits();
    return axis_resolved_;
  }

 private:
  const LimitGraphReport* report_;
  std::unordered_map<Vertex, Ray> cache_;
  std::unordered_set<Vertex> axis_hits_;
  bool axis_ready_ = false;
  bool axis_resolved_ = true;
};

struct DensityCounts {
  int k = 0;
  long m = 0;
  long n = 0;
  int N = 0;
  int M = 0;
  std::vector<Vertex> n_witnesses;
  std::vector<Vertex> m_witnesses;
  bool window_limited = false;
};

// Condition (b): after its start the ray never returns to heights 0..k.
inline bool avoids_lower_lines(const Ray& r, int k) {
  for (std::size_t i = 1; i < r.path.vertices.size(); ++i)
    if (r.path.vertices[i].y <= k) return false;
  return true;
}

inline bool rays_disjoint(const Ray& a, const Ray& b) {
  const std::set<Vertex> s(a.path.vertices.begin(), a.path.vertices.end());
  return std::none_of(b.path.vertices.begin(), b.path.vertices.end(), [&s](Vertex v) { return s.count(v) > 0; });
}

// Rays sharing a vertex coincide from there on, so the largest disjoint family has one ray per class.
inline DensityCounts density_counts(RayBook& book, int k, long m, long n) {
  if (k < 0 || n < m) throw BadInputs("need k >= 0 and m <= n");
  const LimitGraphReport& report = book.report();
  DensityCounts out;
  out.k = k;
  out.m = m;
  out.n = n;

  std::vector<Vertex> candidates;
  for (long a = m; a <= n; ++a) {
    const Vertex v{static_cast<int>(a), k};
    if (!report.box().contains(v)) {
      out.window_limited = true;
      continue;
    }
    candidates.push_back(v);
  }

  detail::UnionFind uf(candidates.size());
  std::unordered_map<Vertex, std::uint32_t> owner;
  for (std::uint32_t c = 0; c < candidates.size(); ++c) {
    const Ray& r = book.ray(candidates[c]);
    if (!r.resolved()) out.window_limited = true;
    for (Vertex u : r.path.vertices) {
      auto [it, fresh] = owner.emplace(u, c);
      if (!fresh) uf.unite(c, it->second);
    }
  }

  const auto& hits = book.axis_hits();
  if (!book.axis_resolved()) out.window_limited = true;
  std::map<std::uint32_t, Vertex> n_rep, m_rep;
  for (std::uint32_t c = 0; c < candidates.size(); ++c) {
    const Ray& r = book.ray(candidates[c]);
    if (!avoids_lower_lines(r, k)) continue;
    const std::uint32_t cls = uf.find(c);
    n_rep.emplace(cls, candidates[c]);
    const bool untouched = std::none_of(r.path.vertices.begin(), r.path.vertices.end(),
                                        [&hits](Vertex u) { return hits.count(u) > 0; });
    if (untouched) m_rep.emplace(cls, candidates[c]);
  }
  for (const auto& [cls, v] : n_rep) out.n_witnesses.push_back(v);
  for (const auto& [cls, v] : m_rep) out.m_witnesses.push_back(v);
  std::sort(out.n_witnesses.begin(), out.n_witnesses.end());
  std::sort(out.m_witnesses.begin(), out.m_witnesses.end());
  out.N = static_cast<int>(out.n_witnesses.size());
  out.M = static_cast<int>(out.m_witnesses.size());
  return out;
}

inline DensityCounts density_counts(const LimitGraphReport& report, int k, long m, long n) {
  RayBook book(report);
  return density_counts(book, k, m, n);
}

// Re-checks witness disjointness and the touching conditions from scratch.
inline bool verify_density_witnesses(const LimitGraphReport& report, const DensityCounts& c) {
  auto check = [&](const std::vector<Vertex>& ws, bool axis) {
    std::vector<Ray> rays;
    for (Vertex v : ws) {
      if (v.y != c.k || v.x < c.m || v.x > c.n) return false;
      rays.push_back(forward_ray(report, v));
      if (!avoids_lower_lines(rays.back(), c.k)) return false;
    }
    for (std::size_t i = 0; i < rays.size(); ++i)
      for (std::size_t j = i + 1; j < rays.size(); ++j)
        if (!rays_disjoint(rays[i], rays[j])) return false;
    if (axis) {
      const Box& b = report.box();
      for (int x = b.x0; x <= b.x1; ++x) {
        if (!b.contains(Vertex{x, 0})) continue;
        const Ray a = forward_ray(report, {x, 0});
        for (const auto& r : rays)
          if (!rays_disjoint(a, r)) return false;
      }
    }
    return true;
  };
  return c.M <= c.N && c.N <= c.n - c.m + 1 && check(c.n_witnesses, false) && check(c.m_witnesses, true);
}

struct LastIntersection {
  enum Status { certified, resolvable, window_limited };
  Status status = window_limited;
  std::optional<int> x;  // first coordinate of the final visit to L_k within the window
};

inline LastIntersection last_intersection(RayBook& book, Vertex v, int k) {
  const Ray& r = book.ray(v);
  const auto& p = r.path.vertices;
  std::optional<std::size_t> last;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i].y == k) last = i;
  LastIntersection out;
  if (!last) return out;
  out.x = p[*last].x;
  const bool tail_above = std::all_of(p.begin() + static_cast<long>(*last) + 1, p.end(), [k](Vertex u) { return u.y > k; });
  if (!r.resolved() || !tail_above) return out;
  out.status = p.back().y > book.report().box().y1 ? LastIntersection::certified : LastIntersection::resolvable;
  return out;
}

inline LastIntersection last_intersection(const LimitGraphReport& report, Vertex v, int k) {
  RayBook book(report);
  return last_intersection(book, v, k);
}

// Window and report geometry used by the ladder campaigns: window [-L, 2L] x [0, L].
struct LadderGeometry {
  int L = 0;
  Box window;
  Box box;
  IndexRange targets;
  long margin = 0;
};

inline LadderGeometry ladder_geometry(int L) {
  if (L < 8) throw BadInputs("ladder size must be at least 8");
  LadderGeometry g;
  g.L = L;
  g.window = {-L, 2 * L, 0, L};
  g.box = {-L / 2, L / 2, 0, L / 2};
  g.targets = {L, 2 * L, std::max(1, L / 32)};
  g.margin = default_margin(g.targets);
  return g;
}

struct DensityPoint {
  int L = 0;
  long n = 0;
  int N = 0;
  int M = 0;
  bool window_limited = false;
  double alpha_hat() const { return n > 0 ? static_cast<double>(N) / static_cast<double>(n) : 0.0; }
  double beta_hat() const { return n > 0 ? static_cast<double>(M) / static_cast<double>(n) : 0.0; }
};

struct DensityEstimate {
  int k = 0;
  std::vector<DensityPoint> points;
};

inline DensityEstimate density_estimates(const Environment& env, int k, const std::vector<long>& n_grid,
                                         const std::vector<int>& ladder) {
  DensityEstimate est;
  est.k = k;
  for (int L : ladder) {
    const LadderGeometry g = ladder_geometry(L);
    const Domain domain = build_domain(HalfPlane{}, g.window);
    const LimitGraphReport report = limit_graph(env, domain, g.targets, g.box, g.margin);
    RayBook book(report);
    for (long n : n_grid) {
      const DensityCounts c = density_counts(book, k, 0, n);
      est.points.push_back({L, n, c.N, c.M, c.window_limited});
    }
  }
  return est;
}

// Finite-n geodesic from v to (n,k) computed in the environment shifted down by k, mapped back up.
inline Path shifted_geodesic(const Environment& env, const Domain& domain, Vertex v, int k, long n) {
  if (!std::holds_alternative<HalfPlane>(domain.spec())) throw BadInputs("shifted geodesics need the half-plane");
  if (v.y < k) throw BadInputs("v must lie at height at least k");
  const Box w = domain.window();
  const Box lifted{w.x0, w.x1, std::max(w.y0, k) - k, w.y1 - k};
  const Domain shifted_domain = build_domain(HalfPlane{}, lifted);
  const Environment shifted_env = env.shifted({0, k});
  const auto target = shifted_domain.boundary_vertex(n);
  if (!target) throw OutOfWindow("v_n lies outside the shifted window");
  const WeightedRegion region(shifted_env, shifted_domain, lifted);
  const Vertex start = v - Vertex{0, k};
  const GeodesicTree tree = grow_tree(region, *target, TreeOptions{{start}, true});
  if (!tree.reached(start)) throw OutOfWindow("start is not connected inside the shifted window");
  return tree.path_to_root(start).shifted({0, k});
}

struct ShiftedRayOptions {
  Box box;
  long margin = 0;
  GraphMode mode = GraphMode::automatic;
};

// The limit ray of v in the environment shifted down by k, mapped back up.
inline Ray shifted_ray(const Environment& env, const Domain& domain, Vertex v, int k, const IndexRange& range,
                       const ShiftedRayOptions& opt) {
  if (!std::holds_alternative<HalfPlane>(domain.spec())) throw BadInputs("shifted rays need the half-plane");
  if (v.y < k) throw BadInputs("v must lie at height at least k");
  const Box w = domain.window();
  const Box lifted{w.x0, w.x1, std::max(w.y0, k) - k, w.y1 - k};
  const Box box{opt.box.x0, opt.box.x1, std::max(opt.box.y0, k) - k, opt.box.y1 - k};
  if (!box.contains(v - Vertex{0, k})) throw OutOfWindow("v lies outside the report box");
  const Domain shifted_domain = build_domain(HalfPlane{}, lifted);
  const LimitGraphReport report = limit_graph(env.shifted({0, k}), shifted_domain, range, box, opt.margin, opt.mode);
  Ray r = forward_ray(report, v - Vertex{0, k});
  r.path = r.path.shifted({0, k});
  return r;
}

struct BPrimeWitness {
  Vertex w1, w3, x_star;
  Path r1, r3;  // ray segments from v_i to w_i
};

struct BPrimeOutcome {
  enum Kind { occurs, fails, unresolved };
  Kind kind = unresolved;
  int failed_condition = 0;
  std::optional<BPrimeWitness> witness;
};

// Conditions of the event, checked in order on the windowed rays of v1 and v3.
inline BPrimeOutcome detect_b_prime(RayBook& book, const Environment& env, Vertex v1, Vertex v3, int k, double eps,
                                    double c_plus) {
  BPrimeOutcome out;
  const Ray& r1 = book.ray(v1);
  const Ray& r3 = book.ray(v3);
  if (!rays_disjoint(r1, r3)) {
    out.kind = BPrimeOutcome::fails;
    out.failed_condition = 1;
    return out;
  }
  if (!r1.resolved() || !r3.resolved()) return out;

  const LastIntersection l1 = last_intersection(book, v1, k);
  const LastIntersection l3 = last_intersection(book, v3, k);
  if (l1.status == LastIntersection::window_limited || l3.status == LastIntersection::window_limited) return out;
  const Vertex w1{*l1.x, k}, w3{*l3.x, k};

  const int lo = std::min(w1.x, w3.x), hi = std::max(w1.x, w3.x);
  std::optional<Vertex> x_star;
  bool undecided = false;
  for (int a = lo + 1; a < hi && !x_star; ++a) {
    const Vertex x{a, k};
    if (!book.report().box().contains(x)) {
      undecided = true;
      continue;
    }
    const Ray& rx = book.ray(x);
    if (!rx.resolved()) {
      undecided = true;
      continue;
    }
    const bool once = std::count_if(rx.path.vertices.begin(), rx.path.vertices.end(),
                                    [k](Vertex u) { return u.y == k; }) == 1;
    if (once && rays_disjoint(rx, r1) && rays_disjoint(rx, r3)) x_star = x;
  }
  if (!x_star) {
    if (undecided) return out;
    out.kind = BPrimeOutcome::fails;
    out.failed_condition = 2;
    return out;
  }

  auto prefix = [](const Ray& r, Vertex w) {
    Path p;
    for (Vertex u : r.path.vertices) {
      p.vertices.push_back(u);
      if (u == w) break;
    }
    return p;
  };
  // Only the last visit to w matters; rays are self-avoiding so the first match is it.
  BPrimeWitness wit{w1, w3, *x_star, prefix(r1, w1), prefix(r3, w3)};
  auto within = [&](const Path& p, Vertex v, Vertex w) {
    if (c_plus == kInfinity) return true;
    return path_time(env, p) <= c_plus * static_cast<double>(l1_norm(v - w));
  };
  if (!within(wit.r1, v1, w1) || !within(wit.r3, v3, w3)) {
    out.kind = BPrimeOutcome::fails;
    out.failed_condition = 3;
    return out;
  }
  if (eps != kInfinity && !(static_cast<double>(l1_norm(w1 - w3)) < eps * k)) {
    out.kind = BPrimeOutcome::fails;
    out.failed_condition = 4;
    return out;
  }
  out.kind = BPrimeOutcome::occurs;
  out.witness = std::move(wit);
  return out;
}

inline BPrimeOutcome detect_b_prime(const LimitGraphReport& report, const Environment& env, Vertex v1, Vertex v3,
                                    int k, double eps, double c_plus) {
  RayBook book(report);
  return detect_b_prime(book, env, v1, v3, k, eps, c_plus);
}

}  // namespace fpp
