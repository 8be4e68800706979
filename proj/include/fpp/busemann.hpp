#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "fpp/domain.hpp"
#include "fpp/environment.hpp"
#include "fpp/errors.hpp"
#include "fpp/shortest_path.hpp"

namespace fpp {

// tau(q, v_n) for a few query vertices q and many boundary targets, one bounded search per target.
class PassageTable {
 public:
  PassageTable(const WeightedRegion& region, const Domain& domain, std::vector<Vertex> queries,
               std::vector<long> targets)
      : queries_(std::move(queries)), targets_(std::move(targets)) {
    times_.assign(queries_.size() * targets_.size(), kInfinity);
    certified_.assign(times_.size(), 0);
    for (std::size_t t = 0; t < targets_.size(); ++t) {
      const auto v = domain.boundary_vertex(targets_[t]);
      if (!v) throw OutOfWindow("target boundary vertex lies outside the window");
      const GeodesicTree tree = grow_tree(region, *v, TreeOptions{queries_, false});
      for (std::size_t q = 0; q < queries_.size(); ++q) {
        times_[slot(q, t)] = tree.time(queries_[q]);
        certified_[slot(q, t)] = tree.certified(queries_[q]) ? 1 : 0;
      }
    }
  }

  PassageTable(const Environment& env, const Domain& domain, std::vector<Vertex> queries, std::vector<long> targets)
      : PassageTable(WeightedRegion(env, domain, domain.window()), domain, std::move(queries), std::move(targets)) {}

  const std::vector<Vertex>& queries() const { return queries_; }
  const std::vector<long>& targets() const { return targets_; }
  double time(std::size_t q, std::size_t t) const { return times_[slot(q, t)]; }
  bool certified(std::size_t q, std::size_t t) const { return certified_[slot(q, t)] != 0; }

 private:
  std::size_t slot(std::size_t q, std::size_t t) const { return t * queries_.size() + q; }

  std::vector<Vertex> queries_;
  std::vector<long> targets_;
  std::vector<double> times_;
  std::vector<std::uint8_t> certified_;
};

struct BusemannSample {
  long n = 0;
  Vertex target;
  double value = 0;
  bool certified = false;
};

struct BusemannSequence {
  Vertex x;
  Vertex y;
  std::vector<BusemannSample> samples;
};

// B_n(x,y) = tau(x,v_n) - tau(y,v_n) over the in-window indices of the range.
inline BusemannSequence busemann_sequence(const Environment& env, const Domain& domain, Vertex x, Vertex y,
                                          const IndexRange& range) {
  if (!domain.in_window(x) || !domain.in_window(y)) throw OutOfWindow("query vertices must lie in the window");
  if (!domain.contains(x) || !domain.contains(y)) throw BadInputs("query vertices must lie in the domain");
  const std::vector<long> ns = indices_in(domain, range);
  const PassageTable table(env, domain, {x, y}, ns);
  BusemannSequence seq{x, y, {}};
  for (std::size_t t = 0; t < ns.size(); ++t) {
    const bool cert = table.certified(0, t) && table.certified(1, t);
    seq.samples.push_back({ns[t], *domain.boundary_vertex(ns[t]), table.time(0, t) - table.time(1, t), cert});
  }
  return seq;
}

// Number of certified consecutive pairs (with distinct targets) that increase.
inline std::size_t monotonicity_violations(const std::vector<BusemannSample>& samples) {
  std::size_t bad = 0;
  const BusemannSample* prev = nullptr;
  for (const auto& s : samples) {
    if (!s.certified) continue;
    if (prev && prev->target != s.target && s.value > prev->value) ++bad;
    prev = &s;
  }
  return bad;
}

struct BusemannLimitEstimate {
  double value = std::nan("");
  double upper = std::nan("");  // last certified sample
  double lower = std::nan("");  // -tau(x,y)
  bool monotone_certified = false;
  std::size_t certified_samples = 0;
  std::size_t violations = 0;
  BusemannSequence sequence;
};

inline BusemannLimitEstimate busemann_limit(const Environment& env, const Domain& domain, Vertex x, Vertex y,
                                            long n_max) {
  const auto ix = domain.indices_of(x);
  const auto iy = domain.indices_of(y);
  if (ix.empty() || iy.empty()) throw NotBoundaryVertices("both vertices must be boundary vertices");
  const long i = *std::min_element(ix.begin(), ix.end());
  const long j = *std::max_element(iy.begin(), iy.end());
  if (!(i < j)) throw NotBoundaryVertices("need x = v_i and y = v_j with i < j");

  BusemannLimitEstimate est;
  est.sequence = busemann_sequence(env, domain, x, y, IndexRange{j + 1, n_max, 1});
  est.violations = monotonicity_violations(est.sequence.samples);
  for (const auto& s : est.sequence.samples)
    if (s.certified) {
      ++est.certified_samples;
      est.upper = s.value;
    }
  est.lower = -passage_time(env, domain, x, y).time;
  est.value = est.upper;
  est.monotone_certified = est.certified_samples > 0 && est.violations == 0;
  return est;
}

struct QuadrilateralResult {
  double lhs = 0;  // tau(x,v_n2) + tau(y,v_n1)
  double rhs = 0;  // tau(x,v_n1) + tau(y,v_n2)
  bool holds = false;
};

inline QuadrilateralResult quadrilateral_check(const Environment& env, const Domain& domain, long i, long j, long n1,
                                               long n2) {
  if (!(i <= j && j < n1 && n1 < n2)) throw BadInputs("need i <= j < n1 < n2");
  const auto x = domain.boundary_vertex(i);
  const auto y = domain.boundary_vertex(j);
  if (!x || !y) throw OutOfWindow("boundary vertices must lie in the window");
  const PassageTable table(env, domain, {*x, *y}, {n1, n2});
  for (std::size_t q = 0; q < 2; ++q)
    for (std::size_t t = 0; t < 2; ++t)
      if (!table.certified(q, t)) throw Uncertified("passage time not certified in the window");
  QuadrilateralResult r;
  r.lhs = table.time(0, 1) + table.time(1, 0);
  r.rhs = table.time(0, 0) + table.time(1, 1);
  r.holds = r.lhs <= r.rhs;
  return r;
}

struct DecompositionResult {
  double lhs = 0;
  double rhs = 0;
  double discrepancy = 0;
  long argmin = 0;  // reduced index attaining the minimum
};

// tau(z,v_n) against min_j tau(z, vbar_j) + taubar(vbar_j, v_n) over indices touching the removed set.
// When z is itself a reduced boundary vertex its own index joins the minimum.
inline DecompositionResult decomposition_check(const Environment& env, const Domain& domain,
                                               const std::vector<Vertex>& alpha, Vertex z, long n) {
  const RemovedDomain rd = remove_set(domain, alpha);
  if (std::find(alpha.begin(), alpha.end(), z) != alpha.end()) throw BadRemovedSet("z lies in the removed set");
  if (!domain.contains(z) || !domain.in_window(z)) throw BadInputs("z must lie in the domain window");
  std::vector<long> J = rd.contact;
  if (rd.reduced.contains(z)) {
    const auto own = rd.reduced.indices_of(z);
    if (own.empty()) throw BadRemovedSet("z lies inside the reduced domain but not on its boundary");
    J.push_back(own.front());
  }
  const auto vn = domain.boundary_vertex(n);
  if (!vn || !rd.reduced.contains(*vn)) throw BadRemovedSet("v_n must survive the removal");

  std::vector<Vertex> fringe;
  for (long j : J) fringe.push_back(*rd.reduced.boundary_vertex(j));

  const WeightedRegion full(env, domain, domain.window());
  const WeightedRegion reduced(env, rd.reduced, domain.window());
  const GeodesicTree from_vn = grow_tree(full, *vn, TreeOptions{{z}, false});
  const GeodesicTree from_z = grow_tree(full, z, TreeOptions{fringe, false});
  const GeodesicTree from_vn_bar = grow_tree(reduced, *vn, TreeOptions{fringe, false});

  if (!from_vn.certified(z)) throw Uncertified("tau(z, v_n) not certified");
  DecompositionResult r;
  r.lhs = from_vn.time(z);
  r.rhs = kInfinity;
  for (std::size_t k = 0; k < J.size(); ++k) {
    const Vertex f = fringe[k];
    if (!from_z.certified(f) || !from_vn_bar.certified(f)) throw Uncertified("decomposition term not certified");
    const double term = from_z.time(f) + from_vn_bar.time(f);
    if (term < r.rhs) {
      r.rhs = term;
      r.argmin = J[k];
    }
  }
  r.discrepancy = std::fabs(r.lhs - r.rhs);
  return r;
}

}  // namespace fpp
