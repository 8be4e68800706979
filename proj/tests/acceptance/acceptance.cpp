// Acceptance campaign: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Arguments: an optional path for the per-seed trace CSV (default acceptance_traces.csv) and optional
// criterion numbers to run a subset.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "fpp/fpp.hpp"
#include "support/brute_force.hpp"

using namespace fpp;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

unsigned g_jobs = 1;

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::vector<std::uint64_t> seed_list(std::uint64_t first, std::size_t count) {
  std::vector<std::uint64_t> s(count);
  for (std::size_t i = 0; i < count; ++i) s[i] = first + i;
  return s;
}

// 1. Windowed passage times and the literal geodesic graph against exhaustive enumeration.
Verdict oracle_equivalence() {
  const std::vector<DistributionSpec> laws = {Uniform{0, 1}, Exponential{1}, ZeroAtom{0.55, Exponential{1}}};
  const Domain d = build_domain(HalfPlane{}, {-6, 6, 0, 6});
  const Domain small = build_domain(HalfPlane{}, {-2, 2, 0, 3});
  struct Case {
    Vertex x;
    int N;
  };
  const std::vector<Case> cases = {{{0, 0}, 1}, {{1, 0}, 2}, {{0, 1}, 2}, {{0, 2}, 1}, {{-1, 1}, 1}};
  struct Tally {
    std::size_t compared = 0, mismatched = 0;
  };
  const auto seeds = seed_list(1, 50);
  const auto per = parallel_map(seeds.size(), g_jobs, [&](std::size_t s) {
    Tally t;
    for (const auto& law : laws) {
      const Environment env(law, seeds[s]);
      for (const Case& c : cases) {
        const Box box = Box::around(c.x, c.N).intersect(d.window());
        const auto mem = testing::box_members(box, [&](Vertex v) { return d.contains(v); });
        const auto bt = testing::brute_times(env, {mem.begin(), mem.end()}, c.x);
        for (Vertex y : mem) {
          const PassageResult r = windowed_passage_time(env, d, c.x, y, c.N);
          ++t.compared;
          if (r.time != bt.time.at(y) || r.path.reversed().vertices != testing::brute_path(bt, env, y).vertices)
            ++t.mismatched;
        }
      }
      const auto mem = testing::box_members(small.window(), [&](Vertex v) { return small.contains(v); });
      for (long n : {-2L, -1L, 0L, 1L, 2L}) {
        const auto expected = testing::brute_geodesic_edges(env, {mem.begin(), mem.end()}, *small.boundary_vertex(n));
        std::vector<GraphMode> modes = {GraphMode::literal};
        if (is_atomless(law)) modes.push_back(GraphMode::tree);
        for (GraphMode m : modes) {
          const auto es = geodesic_graph(env, small, n, small.window(), m).edges();
          ++t.compared;
          if (std::set<DirectedEdge>(es.begin(), es.end()) != expected) ++t.mismatched;
        }
      }
    }
    return t;
  });
  Tally all;
  for (const auto& t : per) {
    all.compared += t.compared;
    all.mismatched += t.mismatched;
  }
  return {all.mismatched == 0, std::to_string(all.compared) + " comparisons, " + std::to_string(all.mismatched) +
                                   " mismatches (50 seeds x 3 laws)"};
}

// 2. Monotone Busemann sequences and the quadrilateral inequality.
Verdict busemann_monotonicity() {
  const Domain big = build_domain(HalfPlane{}, {-240, 440, 0, 320});
  const Domain quad = build_domain(HalfPlane{}, {-100, 180, 0, 140});
  struct Tally {
    std::size_t samples = 0, certified = 0, violations = 0;
    std::size_t quads = 0, quad_skipped = 0, quad_violations = 0;
  };
  const auto seeds = seed_list(1, 100);
  const auto per = parallel_map(seeds.size(), g_jobs, [&](std::size_t s) {
    Tally t;
    std::mt19937_64 rng(seeds[s] * 7919);
    const Environment env(Exponential{1}, seeds[s]);
    const long i = std::uniform_int_distribution<long>(-10, 9)(rng);
    const long j = std::uniform_int_distribution<long>(i + 1, 10)(rng);
    const auto seq = busemann_sequence(env, big, *big.boundary_vertex(i), *big.boundary_vertex(j), {j + 1, 200, 1});
    t.samples = seq.samples.size();
    for (const auto& x : seq.samples) t.certified += x.certified;
    t.violations = monotonicity_violations(seq.samples);
    for (int q = 0; t.quads - t.quad_skipped < 100 && q < 400; ++q) {
      const long a = std::uniform_int_distribution<long>(-20, 20)(rng);
      const long b = std::uniform_int_distribution<long>(a, 20)(rng);
      const long n1 = std::uniform_int_distribution<long>(b + 1, 60)(rng);
      const long n2 = std::uniform_int_distribution<long>(n1 + 1, 80)(rng);
      ++t.quads;
      try {
        if (!quadrilateral_check(env, quad, a, b, n1, n2).holds) ++t.quad_violations;
      } catch (const Uncertified&) {
        ++t.quad_skipped;
      }
    }
    return t;
  });
  Tally all;
  for (const auto& t : per) {
    all.samples += t.samples;
    all.certified += t.certified;
    all.violations += t.violations;
    all.quads += t.quads;
    all.quad_skipped += t.quad_skipped;
    all.quad_violations += t.quad_violations;
  }
  return {all.violations == 0 && all.quad_violations == 0 && all.quads - all.quad_skipped >= 10000,
          std::to_string(all.certified) + "/" + std::to_string(all.samples) + " certified samples, " +
              std::to_string(all.violations) + " monotonicity violations; " + std::to_string(all.quads - all.quad_skipped) +
              " quadruples checked (" + std::to_string(all.quad_skipped) + " uncertified), " +
              std::to_string(all.quad_violations) + " violations"};
}

// 3. Removed-set decomposition identity.
Verdict decomposition_identity() {
  const Domain d = build_domain(HalfPlane{}, {-60, 180, 0, 120});
  struct Set {
    std::vector<Vertex> alpha;
    Vertex z;
  };
  const std::vector<Set> sets = {
      {{{0, 0}}, {0, 1}},
      {{{-1, 0}, {0, 0}, {1, 0}}, {0, 1}},
      {{{0, 0}, {0, 1}, {0, 2}}, {0, 3}},
      {{{-1, 0}, {-1, 1}, {-1, 2}, {0, 2}, {1, 2}, {1, 1}, {1, 0}}, {0, 1}},
      {{{2, 0}, {3, 0}, {3, 1}, {4, 1}}, {3, 2}},
  };
  const std::vector<long> ns = {6, 8, 10, 13, 16, 20, 25, 31, 38, 46};
  struct Tally {
    std::size_t checks = 0, uncertified = 0, failures = 0;
    double worst = 0;
  };
  const auto seeds = seed_list(1, 50);
  const auto per = parallel_map(seeds.size(), g_jobs, [&](std::size_t s) {
    Tally t;
    const Environment env(Uniform{0, 1}, seeds[s]);
    for (const Set& set : sets)
      for (long n : ns) {
        ++t.checks;
        try {
          const double disc = decomposition_check(env, d, set.alpha, set.z, n).discrepancy;
          t.worst = std::max(t.worst, disc);
          if (!(disc <= 1e-9)) ++t.failures;
        } catch (const Uncertified&) {
          ++t.uncertified;
        }
      }
    return t;
  });
  Tally all;
  for (const auto& t : per) {
    all.checks += t.checks;
    all.uncertified += t.uncertified;
    all.failures += t.failures;
    all.worst = std::max(all.worst, t.worst);
  }
  return {all.failures == 0 && all.uncertified == 0,
          std::to_string(all.checks) + " checks, max discrepancy " + fmt("%.3g", all.worst) + ", " +
              std::to_string(all.uncertified) + " uncertified"};
}

// 4. Out-degree one and no circuits in every constructed graph for atomless weights.
Verdict graph_structure() {
  const Domain d = build_domain(HalfPlane{}, {-128, 256, 0, 192});
  const Box box{-32, 31, 0, 63};
  struct Tally {
    std::size_t graphs = 0, degree = 0, circuits = 0, mode_mismatch = 0;
  };
  const std::vector<DistributionSpec> laws = {Exponential{1}, Uniform{0, 1}};
  const auto seeds = seed_list(1, 100);
  const auto per = parallel_map(seeds.size(), g_jobs, [&](std::size_t s) {
    Tally t;
    for (const auto& law : laws) {
      const Environment env(law, seeds[s]);
      const WeightedRegion region(env, d, d.window());
      for (long n : {0L, 48L, 96L, 160L}) {
        const GeodesicGraph lit = build_geodesic_graph(region, d, n, box, GraphMode::literal);
        const GeodesicGraph tree = build_geodesic_graph(region, d, n, box, GraphMode::tree);
        t.graphs += 2;
        t.degree += lit.out_degree_violations().size() + tree.out_degree_violations().size();
        t.circuits += lit.undirected_circuits() + tree.undirected_circuits();
        if (lit.edges() != tree.edges()) ++t.mode_mismatch;
      }
    }
    return t;
  });
  Tally all;
  for (const auto& t : per) {
    all.graphs += t.graphs;
    all.degree += t.degree;
    all.circuits += t.circuits;
    all.mode_mismatch += t.mode_mismatch;
  }
  return {all.degree == 0 && all.circuits == 0 && all.mode_mismatch == 0,
          std::to_string(all.graphs) + " graphs on 64x64 boxes: " + std::to_string(all.degree) +
              " out-degree violations, " + std::to_string(all.circuits) + " circuits, " +
              std::to_string(all.mode_mismatch) + " literal/tree mismatches"};
}

// Per-seed measurements along the window ladder, shared by criteria 5 to 8.
const std::vector<int> kLadder = {64, 128, 256};
const std::vector<long> kDistances = {1, 5, 10};
const std::vector<int> kShiftK = {1, 2, 4};

struct LadderSeed {
  std::vector<double> stabilized;                 // per ladder size
  std::vector<std::vector<double>> merged;        // [distance][ladder]
  std::vector<std::vector<double>> unresolved;    // [distance][ladder]
  std::vector<double> beta;                       // beta_1 estimate per ladder size
  std::size_t n_bound_checks = 0, n_bound_failures = 0;
  std::size_t triples = 0, subadditivity_failures = 0;
  std::size_t dk_pairs = 0, dk_failures = 0;
  std::size_t graph_circuits = 0, graph_degree = 0;
  std::size_t shift_compared = 0, shift_mismatch = 0;
  std::size_t fixed_compared = 0, fixed_agree = 0;
};

LadderSeed ladder_seed(std::uint64_t seed) {
  LadderSeed out;
  out.merged.assign(kDistances.size(), {});
  out.unresolved.assign(kDistances.size(), {});
  const Environment env(Exponential{1}, seed);
  std::mt19937_64 rng(seed * 104729);
  const Box central{-16, 15, 0, 31};
  for (int L : kLadder) {
    const LadderGeometry g = ladder_geometry(L);
    const Domain d = build_domain(HalfPlane{}, g.window);
    const LimitGraphReport rep = limit_graph(env, d, g.targets, g.box, g.margin);
    out.graph_circuits += rep.max_circuits();
    out.graph_degree += rep.degree_violations();
    out.stabilized.push_back(rep.stabilized_fraction(central));
    for (std::size_t k = 0; k < kDistances.size(); ++k) {
      const Coalescence c = coalescence(rep, {0, 0}, {static_cast<int>(kDistances[k]), 0});
      out.merged[k].push_back(c.kind == Coalescence::merge_at ? 1.0 : 0.0);
      out.unresolved[k].push_back(c.kind == Coalescence::unresolved ? 1.0 : 0.0);
    }
    RayBook book(rep);
    const long half = L / 2;
    out.beta.push_back(static_cast<double>(density_counts(book, 1, 0, half).M) / static_cast<double>(half));

    // Exact density laws on every ladder size.
    std::uniform_int_distribution<long> pick(-half, half);
    for (int t = 0; t < 4; ++t) {
      long a = pick(rng), b = pick(rng), c = pick(rng);
      if (a > b) std::swap(a, b);
      if (b > c) std::swap(b, c);
      if (a > b) std::swap(a, b);
      const int k = 1 + static_cast<int>(rng() % 3);
      const DensityCounts ac = density_counts(book, k, a, c);
      const DensityCounts ab = density_counts(book, k, a, b);
      const DensityCounts bc = density_counts(book, k, b, c);
      ++out.triples;
      for (const DensityCounts* x : {&ac, &ab, &bc}) {
        ++out.n_bound_checks;
        if (x->N > x->n - x->m + 1 || x->M > x->N) ++out.n_bound_failures;
      }
      if (ac.N > ab.N + bc.N || ac.M > ab.M + bc.M) ++out.subadditivity_failures;
    }
    for (int k : kShiftK) {
      std::optional<int> prev;
      for (long m = -half; m <= half; ++m) {
        const LastIntersection li = last_intersection(book, {static_cast<int>(m), 0}, k);
        if (li.status == LastIntersection::window_limited) {
          prev.reset();
          continue;
        }
        if (prev) {
          ++out.dk_pairs;
          if (*li.x < *prev) ++out.dk_failures;
        }
        prev = li.x;
      }
    }

    // Shifted coupling on the smallest ladder size. The geodesic from v to v_n stays at heights >= k up to
    // its first step below; that segment is the shifted geodesic to its last vertex on L_k.
    if (L == kLadder.front()) {
      const WeightedRegion region(env, d, d.window());
      std::vector<std::pair<Vertex, int>> starts;
      for (int k : kShiftK)
        for (int x = -16; x <= 16; x += 8) {
          const Ray& r = book.ray({x, k});
          if (r.resolved() && avoids_lower_lines(r, k - 1)) starts.push_back({{x, k}, k});
        }
      for (long n : indices_in(d, g.targets)) {
        if (n < g.targets.last - g.margin) continue;  // the ray is stable only over the last margin of targets
        const GeodesicTree tree = grow_tree(region, *d.boundary_vertex(n));
        for (const auto& [v, k] : starts) {
          const Path p = tree.path_to_root(v);
          std::size_t exit = 0;
          while (p.vertices[exit].y >= k) ++exit;
          const Path segment{{p.vertices.begin(), p.vertices.begin() + static_cast<long>(exit)}};
          const Path shifted = shifted_geodesic(env, d, v, k, segment.back().x);
          const auto& ray = book.ray(v).path.vertices;
          ++out.shift_compared;
          if (shifted.vertices != segment.vertices || ray.size() > segment.vertices.size() ||
              !std::equal(ray.begin(), ray.end(), segment.vertices.begin()))
            ++out.shift_mismatch;
        }
      }
      for (int k : kShiftK) {
        const Ray& r = book.ray({0, k});
        if (!r.resolved() || !avoids_lower_lines(r, k - 1)) continue;
        ++out.fixed_compared;
        if (shifted_ray(env, d, {0, k}, k, g.targets, {g.box, g.margin}).path.vertices == r.path.vertices)
          ++out.fixed_agree;
      }
    }
  }
  return out;
}

std::vector<LadderSeed> g_ladder;
std::string g_trace_path = "acceptance_traces.csv";

// Runs the ladder campaign once and writes the per-seed traces.
void ensure_ladder() {
  if (!g_ladder.empty()) return;
  const auto seeds = seed_list(1, 100);
  g_ladder = parallel_map(seeds.size(), g_jobs, [&](std::size_t i) { return ladder_seed(seeds[i]); });
  std::ofstream trace(g_trace_path);
  trace << "seed,L,stabilized_fraction";
  for (long dd : kDistances) trace << ",merged_d" << dd << ",unresolved_d" << dd;
  trace << ",beta_1\n";
  for (std::size_t s = 0; s < g_ladder.size(); ++s)
    for (std::size_t l = 0; l < kLadder.size(); ++l) {
      trace << seeds[s] << ',' << kLadder[l] << ',' << fmt_double(g_ladder[s].stabilized[l]);
      for (std::size_t k = 0; k < kDistances.size(); ++k)
        trace << ',' << g_ladder[s].merged[k][l] << ',' << g_ladder[s].unresolved[k][l];
      trace << ',' << fmt_double(g_ladder[s].beta[l]) << '\n';
    }
}

bool non_decreasing_within_se(const std::vector<std::vector<double>>& by_ladder, std::string& detail) {
  bool ok = true;
  for (std::size_t i = 0; i + 1 < by_ladder.size(); ++i) {
    const auto cmp = stats::paired_difference(by_ladder[i], by_ladder[i + 1]);
    detail += " " + std::to_string(kLadder[i]) + "->" + std::to_string(kLadder[i + 1]) + ": " +
              fmt("%+.4f", cmp.mean_difference) + fmt(" (se %.4f)", cmp.standard_error);
    if (cmp.mean_difference < -cmp.standard_error) ok = false;
  }
  return ok;
}

std::vector<std::vector<double>> column(const std::function<double(const LadderSeed&, std::size_t)>& f) {
  std::vector<std::vector<double>> out(kLadder.size());
  for (const auto& s : g_ladder)
    for (std::size_t l = 0; l < kLadder.size(); ++l) out[l].push_back(f(s, l));
  return out;
}

// 5. Stabilized-edge fraction along the ladder.
Verdict graph_convergence() {
  ensure_ladder();
  const auto by_ladder = column([](const LadderSeed& s, std::size_t l) { return s.stabilized[l]; });
  std::string detail = "mean";
  for (const auto& v : by_ladder) detail += fmt(" %.4f", stats::mean(v));
  detail += ";";
  const bool ok = non_decreasing_within_se(by_ladder, detail);
  std::size_t circuits = 0, degree = 0;
  for (const auto& s : g_ladder) {
    circuits += s.graph_circuits;
    degree += s.graph_degree;
  }
  detail += "; traces in " + g_trace_path;
  return {ok && circuits == 0 && degree == 0, detail};
}

// 6. Coalescence fractions along the ladder.
Verdict coalescence_trend() {
  ensure_ladder();
  bool ok = true;
  std::string detail;
  for (std::size_t k = 0; k < kDistances.size(); ++k) {
    const auto merged = column([k](const LadderSeed& s, std::size_t l) { return s.merged[k][l]; });
    const auto unresolved = column([k](const LadderSeed& s, std::size_t l) { return -s.unresolved[k][l]; });
    detail += "d=" + std::to_string(kDistances[k]) + " merge";
    for (const auto& v : merged) detail += fmt(" %.2f", stats::mean(v));
    detail += " unresolved";
    for (const auto& v : unresolved) detail += fmt(" %.2f", -stats::mean(v));
    std::string ignored;
    ok = non_decreasing_within_se(merged, ignored) && ok;
    ok = non_decreasing_within_se(unresolved, ignored) && ok;
    if (k + 1 < kDistances.size()) detail += "; ";
  }
  return {ok, detail};
}

// 7. Exact density laws and the beta trace.
Verdict density_laws() {
  ensure_ladder();
  std::size_t nb = 0, nbf = 0, tr = 0, sf = 0, dk = 0, dkf = 0;
  std::vector<double> xs, ys;
  for (const auto& s : g_ladder) {
    nb += s.n_bound_checks;
    nbf += s.n_bound_failures;
    tr += s.triples;
    sf += s.subadditivity_failures;
    dk += s.dk_pairs;
    dkf += s.dk_failures;
    for (std::size_t l = 0; l < kLadder.size(); ++l) {
      xs.push_back(std::log2(static_cast<double>(kLadder[l])));
      ys.push_back(s.beta[l]);
    }
  }
  const auto sl = stats::slope(xs, ys);
  const bool ok = nbf == 0 && sf == 0 && dkf == 0 && tr >= 1000 && sl.value <= sl.standard_error;
  return {ok, std::to_string(nb) + " bound checks (" + std::to_string(nbf) + " failures), " + std::to_string(tr) +
                  " triples (" + std::to_string(sf) + " subadditivity failures), " + std::to_string(dk) +
                  " d_k pairs (" + std::to_string(dkf) + " decreases), beta_1 slope per doubling " +
                  fmt("%+.5f", sl.value) + fmt(" (se %.5f)", sl.standard_error)};
}

// 8. Windowed rays from L_k that avoid the lower lines run along the shifted-environment geodesics.
Verdict shifted_coupling() {
  ensure_ladder();
  std::size_t compared = 0, mismatched = 0, fixed = 0, agree = 0;
  for (const auto& s : g_ladder) {
    compared += s.shift_compared;
    mismatched += s.shift_mismatch;
    fixed += s.fixed_compared;
    agree += s.fixed_agree;
  }
  return {mismatched == 0 && compared > 0,
          std::to_string(compared) + " (ray, target) pairs with k in {1,2,4}, " + std::to_string(mismatched) +
              " mismatches; fixed-target shifted rays agree in " + std::to_string(agree) + "/" + std::to_string(fixed)};
}

// Vertex cycle along a rectilinear polygon given by its corners.
std::vector<Vertex> trace_polygon(const std::vector<Vertex>& corners) {
  std::vector<Vertex> out;
  for (std::size_t i = 0; i < corners.size(); ++i) {
    Vertex a = corners[i];
    const Vertex b = corners[(i + 1) % corners.size()];
    const Vertex step{(b.x > a.x) - (b.x < a.x), (b.y > a.y) - (b.y < a.y)};
    while (a != b) {
      out.push_back(a);
      a = a + step;
    }
  }
  return out;
}

Path random_path(std::mt19937_64& rng, Vertex from, Vertex to, const std::function<bool(Vertex)>& allowed) {
  Path walk{{from}};
  std::uniform_int_distribution<int> dir(0, 3);
  while (walk.back() != to) {
    const Vertex u = neighbor(walk.back(), kDirs[dir(rng)]);
    if (allowed(u)) walk.vertices.push_back(u);
  }
  return loop_erase(walk);
}

// 9. Path surgery on fuzzed circuits.
Verdict surgery_soundness() {
  std::mt19937_64 rng(2024);
  std::size_t cases = 0, excursions = 0, violations = 0;
  std::string first;
  auto fail = [&](const std::string& why) {
    if (violations++ == 0) first = why;
  };
  while (cases < 1000) {
    std::vector<Vertex> corners;
    const Vertex c{static_cast<int>(rng() % 21) - 10, static_cast<int>(rng() % 21) - 10};
    if (rng() % 2 == 0) {
      const int w = 2 + static_cast<int>(rng() % 5), h = 2 + static_cast<int>(rng() % 5);
      corners = {c + Vertex{-w, -h}, c + Vertex{w, -h}, c + Vertex{w, h}, c + Vertex{-w, h}};
    } else {
      const int a = 2 + static_cast<int>(rng() % 2), r = a + 1 + static_cast<int>(rng() % 4);
      corners = {{-a, -r}, {a, -r}, {a, -a}, {r, -a}, {r, a}, {a, a}, {a, r}, {-a, r}, {-a, a}, {-r, a}, {-r, -a}, {-a, -a}};
      for (Vertex& v : corners) v = v + c;
    }
    const CircuitWitness alpha{trace_polygon(corners), true, 0.0};
    const std::set<Vertex> on_alpha(alpha.vertices.begin(), alpha.vertices.end());
    auto inside = [&](Vertex v) { return !on_alpha.count(v) && winding_number(alpha.vertices, v * 2) != 0; };
    Box hull = Box::around(c, 0);
    for (Vertex v : alpha.vertices) hull = hull.hull(Box::around(v, 0));
    std::vector<Vertex> interior;
    for (int x = hull.x0; x <= hull.x1; ++x)
      for (int y = hull.y0; y <= hull.y1; ++y)
        if (inside({x, y})) interior.push_back({x, y});
    const Vertex a = interior[rng() % interior.size()];
    const Vertex b = interior[rng() % interior.size()];
    if (a == b) continue;
    const Path beta = random_path(rng, a, b, inside);
    const Box outer = hull.expanded(4);
    const Path gamma = random_path(rng, a, b, [&](Vertex v) { return outer.contains(v); });
    ++cases;
    if (std::any_of(gamma.vertices.begin(), gamma.vertices.end(), [&](Vertex v) { return !inside(v); })) ++excursions;

    std::vector<EdgeEdit> zero;
    for (const Edge& e : alpha.edges()) zero.push_back({e, SetValue{0.0}});
    const Environment env = Environment(Uniform{0, 1}, cases).with_overrides(zero);
    try {
      const SurgeryResult r = reroute_through_circuit(gamma, alpha, beta);
      if (r.path.front() != a || r.path.back() != b) fail("endpoints moved");
      if (!r.path.is_lattice_path() || !r.path.self_avoiding()) fail("output is not a self-avoiding path");
      for (Vertex v : r.path.vertices)
        if (!inside(v) && !on_alpha.count(v)) fail("output leaves the circuit");
      if (r.iterations > r.adjacent_edges) fail("iteration bound exceeded");
      if (path_time(env, r.path) > path_time(env, gamma)) fail("passage time increased");
    } catch (const std::exception& e) {
      fail(std::string("threw: ") + e.what());
    }
  }
  return {violations == 0, std::to_string(cases) + " fuzzed inputs (" + std::to_string(excursions) +
                               " with excursions), " + std::to_string(violations) + " violations" +
                               (first.empty() ? "" : " first: " + first)};
}

// 10. Circuit and half-circuit searches.
Verdict circuit_searches() {
  const auto seeds = seed_list(1, 500);
  struct Tally {
    std::size_t planted = 0, planted_missed = 0, returned = 0, bad_witness = 0;
    std::vector<std::size_t> found = std::vector<std::size_t>(3, 0);
    std::vector<std::size_t> half_found = std::vector<std::size_t>(3, 0);
    std::size_t half_runs = 0;
  };
  const std::vector<int> levels = {5, 6, 7};
  const std::vector<int> half_sizes = {16, 36, 64};
  const auto per = parallel_map(seeds.size(), g_jobs, [&](std::size_t i) {
    Tally t;
    const std::uint64_t seed = seeds[i];
    std::mt19937_64 rng(seed * 31337);
    // Planted zero ring.
    {
      const int n = 1 + static_cast<int>(rng() % 3);
      const Vertex c{static_cast<int>(rng() % 41) - 20, static_cast<int>(rng() % 41) - 20};
      const int r = (1 << n) + static_cast<int>(rng() % ((1 << n) + 1));
      const auto cyc = trace_polygon({c + Vertex{-r, -r}, c + Vertex{r, -r}, c + Vertex{r, r}, c + Vertex{-r, r}});
      std::vector<EdgeEdit> edits;
      for (std::size_t k = 0; k < cyc.size(); ++k)
        edits.push_back({Edge::between(cyc[k], cyc[(k + 1) % cyc.size()]), SetValue{0.0}});
      const Environment env = Environment(Uniform{0, 1}, seed).with_overrides(edits);
      const Annulus ann = Annulus::square(c, 2, n);
      ++t.planted;
      const auto w = find_zero_circuit(env, ann, c);
      if (!w) ++t.planted_missed;
      else if (++t.returned, !verify_circuit(env, *w, ann, c)) ++t.bad_witness;
    }
    // Planted half circuit below D in weights above D.
    {
      const int n = 8 + static_cast<int>(rng() % 9);
      const Vertex c{static_cast<int>(rng() % 41) - 20, 0};
      const Annulus ann = Annulus::half(c, n);
      const int m = ann.hole.x1 - c.x;
      const int r = m + 1 + static_cast<int>(rng() % static_cast<unsigned>(n - m));
      const int top = ann.hole.y1 - c.y + 1 + static_cast<int>(rng() % static_cast<unsigned>(ann.outer.y1 - ann.hole.y1));
      Path arc{{c + Vertex{-r, 0}}};
      for (int y = 1; y <= top; ++y) arc.vertices.push_back(c + Vertex{-r, y});
      for (int x = -r + 1; x <= r; ++x) arc.vertices.push_back(c + Vertex{x, top});
      for (int y = top - 1; y >= 0; --y) arc.vertices.push_back(c + Vertex{r, y});
      std::vector<EdgeEdit> edits;
      for (const Edge& e : arc.edges()) edits.push_back({e, SetValue{0.1}});
      const Environment env = Environment(Uniform{0.5, 1}, seed).with_overrides(edits);
      ++t.planted;
      const auto w = find_half_circuit(env, 0.4, ann, c);
      if (!w) ++t.planted_missed;
      else if (++t.returned, !verify_circuit(env, *w, ann, c, 0.4)) ++t.bad_witness;
    }
    // Zero circuits under ZeroAtom(0.55).
    const Environment zero(ZeroAtom{0.55, Exponential{1}}, seed);
    for (std::size_t l = 0; l < levels.size(); ++l) {
      const Annulus ann = Annulus::square({0, 0}, 2, levels[l]);
      if (const auto w = find_zero_circuit(zero, ann, {0, 0})) {
        ++t.found[l];
        ++t.returned;
        if (!verify_circuit(zero, *w, ann, {0, 0})) ++t.bad_witness;
      }
    }
    // Half circuits below D = 0.8 under Uniform(0,1), on the first 200 seeds.
    if (i < 200) {
      ++t.half_runs;
      const Environment env(Uniform{0, 1}, seed);
      for (std::size_t l = 0; l < half_sizes.size(); ++l) {
        const Annulus ann = Annulus::half({0, 0}, half_sizes[l]);
        if (const auto w = find_half_circuit(env, 0.8, ann, {0, 0})) {
          ++t.half_found[l];
          ++t.returned;
          if (!verify_circuit(env, *w, ann, {0, 0}, 0.8)) ++t.bad_witness;
        }
      }
    }
    return t;
  });
  Tally all;
  for (const auto& t : per) {
    all.planted += t.planted;
    all.planted_missed += t.planted_missed;
    all.returned += t.returned;
    all.bad_witness += t.bad_witness;
    all.half_runs += t.half_runs;
    for (std::size_t l = 0; l < 3; ++l) {
      all.found[l] += t.found[l];
      all.half_found[l] += t.half_found[l];
    }
  }
  const double top = static_cast<double>(all.found.back()) / static_cast<double>(seeds.size());
  std::string detail = std::to_string(all.planted) + " planted (" + std::to_string(all.planted_missed) + " missed), " +
                       std::to_string(all.returned) + " witnesses (" + std::to_string(all.bad_witness) +
                       " failed re-verification); ZeroAtom(0.55) success by level";
  for (std::size_t l = 0; l < levels.size(); ++l)
    detail += " n=" + std::to_string(levels[l]) + ":" + fmt("%.3f", static_cast<double>(all.found[l]) / seeds.size());
  detail += "; half circuits D=0.8";
  for (std::size_t l = 0; l < half_sizes.size(); ++l)
    detail += " n=" + std::to_string(half_sizes[l]) + ":" +
              fmt("%.3f", static_cast<double>(all.half_found[l]) / static_cast<double>(all.half_runs));
  return {all.planted_missed == 0 && all.bad_witness == 0 && top >= 0.95, detail};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(FPP_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// 11. Every experiment kind rerun from its manifest reproduces its result files byte for byte.
Verdict determinism() {
  const std::vector<std::string> configs = {
      R"({"schema": 1, "experiment": "busemann", "window": [-16, 48, 0, 32], "seeds": [1, 2],
          "distribution": {"kind": "exponential"}, "params": {"i": -2, "j": 3, "n": [4, 24]}})",
      R"({"schema": 1, "experiment": "graph-limit", "ladder": [16, 32], "seeds": [1, 2], "params": {"central": 8}})",
      R"({"schema": 1, "experiment": "coalescence", "ladder": [16, 32], "seeds": [1, 2, 3],
          "params": {"distances": [1, 3]}})",
      R"({"schema": 1, "experiment": "density", "ladder": [16, 32], "seeds": [4, 5], "params": {"k": 2, "n": [4, 8]}})",
      R"({"schema": 1, "experiment": "bprime", "ladder": [32], "seeds": [1, 2], "distribution": {"kind": "uniform"},
          "params": {"v1": [-4, 0], "v3": [4, 0], "k": 2}})",
      R"({"schema": 1, "experiment": "circuits", "seeds": {"first": 1, "count": 4},
          "distribution": {"kind": "zero-atom", "p0": 0.55}, "params": {"levels": [3, 4]}})",
      R"({"schema": 1, "experiment": "circuits", "seeds": [1, 2], "params": {"mode": "half", "D": 0.8, "levels": [8, 16]}})",
      R"({"schema": 1, "experiment": "gamma-zero", "window": [-24, 24, 0, 24], "seeds": [1, 2],
          "distribution": {"kind": "exponential"}, "params": {"n": [2, 16, 2], "central": 4}})",
      R"({"schema": 1, "experiment": "blocking", "seeds": [1, 2, 3], "params": {"sizes": [3, 5]}})",
      R"({"schema": 1, "experiment": "shape-ratio", "window": [-20, 20, 0, 20], "seeds": [1, 2],
          "distribution": {"kind": "uniform"}, "params": {"radii": [4, 8]}})",
  };
  const fs::path root = fs::temp_directory_path() / "fpp_acceptance_determinism";
  fs::remove_all(root);
  std::size_t runs = 0, files = 0, differing = 0, failed = 0;
  std::string first;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const fs::path dir = root / std::to_string(i);
    fs::create_directories(dir);
    std::ofstream(dir / "config.json") << configs[i];
    const int a = run_cli("run " + (dir / "config.json").string() + " --out " + (dir / "a").string() + " --jobs 1");
    const int b = run_cli("run " + (dir / "a" / "manifest.json").string() + " --out " + (dir / "b").string() + " --jobs 3");
    const int v = run_cli("verify " + (dir / "a").string());
    ++runs;
    if (a != 0 || b != 0 || v != 0) {
      ++failed;
      if (first.empty()) first = "config " + std::to_string(i) + " exit codes " + std::to_string(a) + "/" +
                                 std::to_string(b) + "/" + std::to_string(v);
      continue;
    }
    const auto manifest = nlohmann::json::parse(slurp(dir / "a" / "manifest.json"));
    for (const auto& f : manifest.at("files")) {
      const std::string name = f.at("name").get<std::string>();
      ++files;
      if (slurp(dir / "a" / name) != slurp(dir / "b" / name)) {
        ++differing;
        if (first.empty()) first = name;
      }
    }
  }
  fs::remove_all(root);
  return {failed == 0 && differing == 0 && files > 0,
          std::to_string(runs) + " experiments, " + std::to_string(files) + " result files, " +
              std::to_string(differing) + " differ, " + std::to_string(failed) + " failed runs" +
              (first.empty() ? "" : " first: " + first)};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (!a.empty() && std::all_of(a.begin(), a.end(), ::isdigit)) only.insert(std::stoi(a));
    else g_trace_path = a;
  }
  g_jobs = resolve_jobs(0);
  struct Criterion {
    int id;
    const char* name;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "oracle equivalence", oracle_equivalence},
      {2, "busemann monotonicity", busemann_monotonicity},
      {3, "decomposition identity", decomposition_identity},
      {4, "geodesic graph structure", graph_structure},
      {5, "graph convergence trend", graph_convergence},
      {6, "coalescence trend", coalescence_trend},
      {7, "density laws", density_laws},
      {8, "shifted coupling", shifted_coupling},
      {9, "surgery soundness", surgery_soundness},
      {10, "circuit searches", circuit_searches},
      {11, "determinism", determinism},
  };
  int failures = 0, ran = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    ++ran;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %2d %-26s %s [%.1fs]\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(), secs);
    std::fflush(stdout);
    if (!v.pass) ++failures;
  }
  std::printf("%d/%d criteria passed\n", ran - failures, ran);
  return failures == 0 ? 0 : 1;
}
