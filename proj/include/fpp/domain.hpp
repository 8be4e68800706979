#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fpp/distribution.hpp"
#include "fpp/errors.hpp"
#include "fpp/lattice.hpp"

namespace fpp {

enum class Compass : std::uint8_t { east, northeast, north, northwest, west, southwest, south, southeast };

constexpr Vertex compass_vector(Compass c) {
  constexpr std::array<Vertex, 8> v = {{{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}}};
  return v[static_cast<int>(c)];
}

constexpr bool is_axis(Compass c) { return static_cast<int>(c) % 2 == 0; }

// V = {y >= 0}.
struct HalfPlane {
  friend bool operator==(const HalfPlane&, const HalfPlane&) = default;
};

// Z^2 minus the ray {tip + t * dir : t >= 0}; dir must be axis-parallel.
struct SlitPlane {
  Vertex tip{0, 0};
  Compass direction = Compass::west;
  friend bool operator==(const SlitPlane&, const SlitPlane&) = default;
};

// Closed cone at apex swept counter-clockwise from `from` to `to`.
struct Sector {
  Vertex apex{0, 0};
  Compass from = Compass::east;
  Compass to = Compass::north;
  friend bool operator==(const Sector&, const Sector&) = default;
};

using BuiltinDomain = std::variant<HalfPlane, SlitPlane, Sector>;

// A builtin domain with finitely many vertices added and removed. Removal wins over addition.
struct CustomPerturbation {
  BuiltinDomain base = HalfPlane{};
  std::vector<Vertex> added;
  std::vector<Vertex> removed;
  friend bool operator==(const CustomPerturbation&, const CustomPerturbation&) = default;
};

using DomainSpec = std::variant<HalfPlane, SlitPlane, Sector, CustomPerturbation>;

namespace detail {

constexpr long long cross(Vertex a, Vertex b) {
  return static_cast<long long>(a.x) * b.y - static_cast<long long>(a.y) * b.x;
}

inline bool builtin_contains(const BuiltinDomain& spec, Vertex v) {
  return std::visit(overloaded{
                        [v](const HalfPlane&) { return v.y >= 0; },
                        [v](const SlitPlane& s) {
                          const Vertex d = compass_vector(s.direction);
                          const Vertex p = v - s.tip;
                          if (d.x == 0) return !(p.x == 0 && p.y * d.y >= 0);
                          return !(p.y == 0 && p.x * d.x >= 0);
                        },
                        [v](const Sector& s) {
                          const Vertex p = v - s.apex;
                          const Vertex df = compass_vector(s.from);
                          const Vertex dt = compass_vector(s.to);
                          const int span = (static_cast<int>(s.to) - static_cast<int>(s.from) + 8) % 8;
                          if (span <= 4) return cross(df, p) >= 0 && cross(p, dt) >= 0;
                          return !(cross(dt, p) > 0 && cross(p, df) > 0);
                        },
                    },
                    spec);
}

inline Vertex builtin_reference(const BuiltinDomain& spec) {
  return std::visit(overloaded{
                        [](const HalfPlane&) { return Vertex{0, 0}; },
                        [](const SlitPlane& s) { return s.tip - compass_vector(s.direction); },
                        [](const Sector& s) { return s.apex; },
                    },
                    spec);
}

inline void validate_builtin(const BuiltinDomain& spec) {
  std::visit(overloaded{
                 [](const HalfPlane&) {},
                 [](const SlitPlane& s) {
                   if (!is_axis(s.direction)) throw InvalidSpec("slit direction must be axis-parallel");
                 },
                 [](const Sector& s) {
                   if (s.from == s.to) throw InvalidSpec("sector must have distinct bounding directions");
                 },
             },
             spec);
}

inline BuiltinDomain as_builtin(const DomainSpec& spec) {
  return std::visit(overloaded{
                        [](const CustomPerturbation& c) { return c.base; },
                        [](const auto& b) { return BuiltinDomain{b}; },
                    },
                    spec);
}

}  // namespace detail

inline bool spec_contains(const DomainSpec& spec, Vertex v) {
  if (const auto* c = std::get_if<CustomPerturbation>(&spec)) {
    if (std::find(c->removed.begin(), c->removed.end(), v) != c->removed.end()) return false;
    if (std::find(c->added.begin(), c->added.end(), v) != c->added.end()) return true;
    return detail::builtin_contains(c->base, v);
  }
  return detail::builtin_contains(detail::as_builtin(spec), v);
}

inline Vertex spec_reference(const DomainSpec& spec) { return detail::builtin_reference(detail::as_builtin(spec)); }

// One crossing of the dual boundary path: primal edge from `vertex` in V to `outside` not in V.
struct BoundaryEntry {
  long index = 0;
  Vertex vertex;
  Vertex outside;

  Edge edge() const { return Edge::between(vertex, outside); }
  friend bool operator==(const BoundaryEntry&, const BoundaryEntry&) = default;
};

class Domain {
 public:
  const DomainSpec& spec() const { return spec_; }
  const Window& window() const { return window_; }
  const Box& trace_box() const { return trace_box_; }
  Vertex anchor() const { return anchor_; }

  bool in_window(Vertex v) const { return window_.contains(v); }

  bool contains(Vertex v) const {
    if (window_.contains(v)) return mask_[window_.index(v)] != 0;
    return spec_contains(spec_, v);
  }

  // In-window boundary entries in increasing index order (indices may have gaps).
  const std::vector<BoundaryEntry>& boundary() const { return boundary_; }

  long min_index() const { return boundary_.front().index; }
  long max_index() const { return boundary_.back().index; }

  const BoundaryEntry* entry(long i) const {
    auto it = std::lower_bound(boundary_.begin(), boundary_.end(), i,
                               [](const BoundaryEntry& e, long k) { return e.index < k; });
    if (it == boundary_.end() || it->index != i) return nullptr;
    return &*it;
  }

  std::optional<Vertex> boundary_vertex(long i) const {
    if (const auto* e = entry(i)) return e->vertex;
    return std::nullopt;
  }

  std::vector<long> indices_of(Vertex v) const {
    std::vector<long> out;
    for (const auto& e : boundary_)
      if (e.vertex == v) out.push_back(e.index);
    return out;
  }

  bool is_boundary_vertex(Vertex v) const {
    return std::any_of(boundary_.begin(), boundary_.end(), [v](const BoundaryEntry& e) { return e.vertex == v; });
  }

  std::vector<DualEdge> dual_path() const {
    std::vector<DualEdge> out;
    out.reserve(boundary_.size());
    for (const auto& e : boundary_) out.push_back(DualEdge{e.edge()});
    return out;
  }

  // Unit directions in which the traced boundary leaves the trace box, backward then forward.
  Vertex escape_backward() const { return escape_backward_; }
  Vertex escape_forward() const { return escape_forward_; }

  friend bool operator==(const Domain&, const Domain&) = default;

 private:
  friend Domain build_domain(const DomainSpec&, const Window&);
  friend struct RemovedDomain remove_set(const Domain&, const std::vector<Vertex>&);

  static Domain make(const DomainSpec& spec, const Window& window, std::vector<std::uint8_t> mask, Box trace_box,
                     Vertex reference);
  void trace(Vertex reference);

  DomainSpec spec_;
  Window window_;
  Box trace_box_;
  std::vector<std::uint8_t> mask_;
  Vertex anchor_;
  std::vector<BoundaryEntry> boundary_;
  Vertex escape_backward_;
  Vertex escape_forward_;
};

struct RemovedDomain {
  Domain parent;
  Domain reduced;
  std::vector<Vertex> removed;
  long kappa = 0;                  // reduced index of parent entry n is n + kappa for n > stable_from
  long stable_from = 0;            // largest parent index whose entry is not carried over
  std::vector<long> contact;       // reduced indices whose vertex touches the removed set

  std::vector<Vertex> contact_vertices() const {
    std::vector<Vertex> out;
    for (long j : contact) out.push_back(*reduced.boundary_vertex(j));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
};

// Boundary indices first, first + stride, ... up to last.
struct IndexRange {
  long first = 0;
  long last = 0;
  long stride = 1;
  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

// Indices of the range whose boundary vertex lies in the window.
inline std::vector<long> indices_in(const Domain& domain, const IndexRange& range) {
  if (range.stride <= 0) throw BadInputs("index stride must be positive");
  std::vector<long> out;
  for (long n = range.first; n <= range.last; n += range.stride)
    if (domain.entry(n) != nullptr) out.push_back(n);
  return out;
}

namespace detail {

// Counter-clockwise quarter turn.
constexpr Vertex rot90(Vertex v) { return {-v.y, v.x}; }

inline int count_components(const Box& box, const std::vector<std::uint8_t>& select) {
  std::vector<std::uint8_t> seen(box.size(), 0);
  int components = 0;
  std::vector<Vertex> stack;
  for (std::size_t i = 0; i < box.size(); ++i) {
    if (!select[i] || seen[i]) continue;
    ++components;
    seen[i] = 1;
    stack.push_back(box.vertex(i));
    while (!stack.empty()) {
      const Vertex v = stack.back();
      stack.pop_back();
      for (Dir d : kDirs) {
        const Vertex u = neighbor(v, d);
        if (!box.contains(u)) continue;
        const std::size_t j = box.index(u);
        if (select[j] && !seen[j]) {
          seen[j] = 1;
          stack.push_back(u);
        }
      }
    }
  }
  return components;
}

}  // namespace detail

inline Domain Domain::make(const DomainSpec& spec, const Window& window, std::vector<std::uint8_t> mask, Box trace_box,
                           Vertex reference) {
  Domain d;
  d.spec_ = spec;
  d.window_ = window;
  d.mask_ = std::move(mask);
  d.trace_box_ = trace_box;
  d.trace(reference);
  return d;
}

inline void Domain::trace(Vertex reference) {
  auto has_outside_neighbor = [this](Vertex v) {
    for (Dir d : kDirs)
      if (!contains(neighbor(v, d))) return true;
    return false;
  };

  // Anchor: nearest boundary vertex to the reference point, ties broken by vertex order.
  const int max_radius = trace_box_.width() + trace_box_.height() + 8;
  bool found = false;
  for (int r = 0; r <= max_radius && !found; ++r) {
    std::vector<Vertex> ring;
    for (int dx = -r; dx <= r; ++dx) {
      const int dy = r - (dx < 0 ? -dx : dx);
      ring.push_back(reference + Vertex{dx, dy});
      if (dy != 0) ring.push_back(reference + Vertex{dx, -dy});
    }
    std::sort(ring.begin(), ring.end());
    for (Vertex v : ring) {
      if (contains(v) && has_outside_neighbor(v)) {
        anchor_ = v;
        found = true;
        break;
      }
    }
  }
  if (!found) throw InvalidSpec("domain has no boundary near its reference point");

  Vertex anchor_out{};
  for (Vertex off : {Vertex{0, -1}, Vertex{-1, 0}, Vertex{0, 1}, Vertex{1, 0}}) {
    if (!contains(anchor_ + off)) {
      anchor_out = anchor_ + off;
      break;
    }
  }

  // Doubled coordinates: a dual edge crossing {a in V, b not in V} runs from a+b-t to a+b+t, t = rot90(b-a).
  auto tail_of = [](Vertex a, Vertex b) { return a + b - detail::rot90(b - a); };
  auto head_of = [](Vertex a, Vertex b) { return a + b + detail::rot90(b - a); };

  // Next crossing at the dual vertex `corner` (doubled), other than the one through (a,b).
  auto step = [this](Vertex corner, Vertex a, Vertex b) {
    const Vertex ll{(corner.x - 1) / 2, (corner.y - 1) / 2};
    const std::array<std::pair<Vertex, Vertex>, 4> sides = {{{ll, ll + Vertex{1, 0}},
                                                             {ll + Vertex{0, 1}, ll + Vertex{1, 1}},
                                                             {ll, ll + Vertex{0, 1}},
                                                             {ll + Vertex{1, 0}, ll + Vertex{1, 1}}}};
    std::vector<std::pair<Vertex, Vertex>> crossings;
    for (auto [p, q] : sides) {
      const bool ip = contains(p), iq = contains(q);
      if (ip == iq) continue;
      crossings.push_back(ip ? std::pair{p, q} : std::pair{q, p});
    }
    if (crossings.size() != 2) throw InvalidSpec("dual boundary vertex does not have degree 2");
    for (auto c : crossings)
      if (!(c.first == a && c.second == b)) return c;
    throw InvalidSpec("dual boundary path is degenerate");
  };

  const std::size_t step_limit = 4 * trace_box_.size() + 64;
  std::vector<BoundaryEntry> forward, backward;
  auto in_trace = [this](Vertex a) { return trace_box_.contains(a); };

  {
    Vertex a = anchor_, b = anchor_out;
    long idx = 0;
    escape_forward_ = detail::rot90(b - a);
    while (in_trace(a)) {
      forward.push_back({idx, a, b});
      if (forward.size() > step_limit) throw InvalidSpec("dual boundary path closes into a cycle");
      const Vertex h = head_of(a, b);
      auto [na, nb] = step(h, a, b);
      if (tail_of(na, nb) != h) throw InvalidSpec("dual boundary path is not consistently oriented");
      escape_forward_ = (head_of(na, nb) - h);
      escape_forward_ = {escape_forward_.x / 2, escape_forward_.y / 2};
      a = na;
      b = nb;
      ++idx;
    }
  }
  {
    Vertex a = anchor_, b = anchor_out;
    long idx = 0;
    escape_backward_ = -detail::rot90(b - a);
    while (true) {
      const Vertex t = tail_of(a, b);
      auto [na, nb] = step(t, a, b);
      if (head_of(na, nb) != t) throw InvalidSpec("dual boundary path is not consistently oriented");
      escape_backward_ = (tail_of(na, nb) - t);
      escape_backward_ = {escape_backward_.x / 2, escape_backward_.y / 2};
      a = na;
      b = nb;
      --idx;
      if (!in_trace(a)) break;
      backward.push_back({idx, a, b});
      if (backward.size() > step_limit) throw InvalidSpec("dual boundary path closes into a cycle");
    }
  }

  boundary_.clear();
  for (auto it = backward.rbegin(); it != backward.rend(); ++it)
    if (window_.contains(it->vertex)) boundary_.push_back(*it);
  for (const auto& e : forward)
    if (window_.contains(e.vertex)) boundary_.push_back(e);
  if (boundary_.empty()) throw EmptyBoundary("no boundary vertex lies in the window");

  std::map<Vertex, int> multiplicity;
  for (const auto& e : boundary_)
    if (++multiplicity[e.vertex] > 3) throw InvalidSpec("boundary vertex repeated more than three times");
}

inline Domain build_domain(const DomainSpec& spec, const Window& window) {
  if (window.empty()) throw InvalidSpec("window is empty");
  detail::validate_builtin(detail::as_builtin(spec));
  const Vertex reference = spec_reference(spec);

  Box trace_box = window.hull(reference);
  if (const auto* c = std::get_if<CustomPerturbation>(&spec)) {
    Box pert;
    for (Vertex v : c->added) pert = pert.hull(v);
    for (Vertex v : c->removed) pert = pert.hull(v);
    if (!pert.empty()) {
      const Box region = pert.hull(reference).expanded(4);
      std::vector<std::uint8_t> in(region.size()), out(region.size());
      for (std::size_t i = 0; i < region.size(); ++i) {
        const bool m = spec_contains(spec, region.vertex(i));
        in[i] = m;
        out[i] = !m;
      }
      if (detail::count_components(region, in) != 1) throw InvalidSpec("perturbed domain is not connected");
      if (detail::count_components(region, out) != 1)
        throw InvalidSpec("perturbed domain complement is not connected");
      trace_box = trace_box.hull(pert);
    }
  }
  trace_box = trace_box.expanded(1);

  std::vector<std::uint8_t> mask(window.size());
  for (std::size_t i = 0; i < window.size(); ++i) mask[i] = spec_contains(spec, window.vertex(i));
  return Domain::make(spec, window, std::move(mask), trace_box, reference);
}

// Removes a finite connected set touching the boundary and keeps the component holding the far boundary.
inline RemovedDomain remove_set(const Domain& domain, const std::vector<Vertex>& alpha_in) {
  std::vector<Vertex> alpha = alpha_in;
  std::sort(alpha.begin(), alpha.end());
  alpha.erase(std::unique(alpha.begin(), alpha.end()), alpha.end());
  if (alpha.empty()) throw BadRemovedSet("removed set is empty");

  const Window& w = domain.window();
  for (Vertex a : alpha) {
    if (!domain.contains(a) || !w.contains(a)) throw BadRemovedSet("removed set must lie in the domain window");
    for (int dx = -2; dx <= 2; ++dx)
      for (int dy = -2; dy <= 2; ++dy) {
        const Vertex p = a + Vertex{dx, dy};
        if (!w.contains(p) && domain.contains(p)) throw BadRemovedSet("removed set is too close to the window edge");
      }
  }
  {
    std::vector<Vertex> stack{alpha.front()};
    std::vector<Vertex> seen{alpha.front()};
    while (!stack.empty()) {
      const Vertex v = stack.back();
      stack.pop_back();
      for (Dir d : kDirs) {
        const Vertex u = neighbor(v, d);
        if (std::binary_search(alpha.begin(), alpha.end(), u) &&
            std::find(seen.begin(), seen.end(), u) == seen.end()) {
          seen.push_back(u);
          stack.push_back(u);
        }
      }
    }
    if (seen.size() != alpha.size()) throw BadRemovedSet("removed set is not connected");
  }
  auto in_alpha = [&alpha](Vertex v) { return std::binary_search(alpha.begin(), alpha.end(), v); };
  if (std::none_of(domain.boundary().begin(), domain.boundary().end(),
                   [&](const BoundaryEntry& e) { return in_alpha(e.vertex); }))
    throw BadRemovedSet("removed set contains no boundary vertex");

  const BoundaryEntry& last = domain.boundary().back();
  if (in_alpha(last.vertex)) throw BadRemovedSet("removed set contains the last in-window boundary vertex");

  // Keep the component of (V minus alpha) within the window that holds the last boundary vertex.
  std::vector<std::uint8_t> mask(w.size(), 0);
  {
    std::vector<std::uint8_t> seen(w.size(), 0);
    std::vector<Vertex> stack{last.vertex};
    seen[w.index(last.vertex)] = 1;
    while (!stack.empty()) {
      const Vertex v = stack.back();
      stack.pop_back();
      mask[w.index(v)] = 1;
      for (Dir d : kDirs) {
        const Vertex u = neighbor(v, d);
        if (!w.contains(u) || seen[w.index(u)]) continue;
        if (!domain.contains(u) || in_alpha(u)) continue;
        seen[w.index(u)] = 1;
        stack.push_back(u);
      }
    }
  }

  RemovedDomain out;
  out.parent = domain;
  out.removed = alpha;
  out.reduced = Domain::make(domain.spec(), w, std::move(mask), domain.trace_box(), domain.anchor());

  std::map<Edge, long> reduced_index;
  for (const auto& e : out.reduced.boundary()) reduced_index.emplace(e.edge(), e.index);
  auto it = reduced_index.find(last.edge());
  if (it == reduced_index.end()) throw BadRemovedSet("far boundary is not shared with the reduced domain");
  out.kappa = it->second - last.index;

  out.stable_from = domain.min_index() - 1;
  for (auto e = domain.boundary().rbegin(); e != domain.boundary().rend(); ++e) {
    const BoundaryEntry* r = out.reduced.entry(e->index + out.kappa);
    if (r == nullptr || r->edge() != e->edge()) {
      out.stable_from = e->index;
      break;
    }
  }

  for (const auto& e : out.reduced.boundary()) {
    for (Dir d : kDirs)
      if (in_alpha(neighbor(e.vertex, d))) {
        out.contact.push_back(e.index);
        break;
      }
  }
  if (out.contact.empty()) throw BadRemovedSet("reduced boundary does not touch the removed set");
  return out;
}

}  // namespace fpp
