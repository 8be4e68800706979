#include <gtest/gtest.h>

#include <random>

#include "fpp/shortest_path.hpp"
#include "support/brute_force.hpp"

using namespace fpp;
using fpp::testing::box_members;
using fpp::testing::brute_path;
using fpp::testing::brute_times;

namespace {

double path_weight(const Environment& env, const Path& p) {
  double t = 0;
  for (const Edge& e : p.edges()) t += env.weight(e);
  return t;
}

}  // namespace

TEST(WindowedPassage, UnitSquare) {
  const Domain d = build_domain(HalfPlane{}, {-3, 3, 0, 3});
  std::vector<EdgeEdit> edits;
  for (int x = -2; x <= 2; ++x)
    for (int y = -1; y <= 2; ++y)
      for (Axis a : {Axis::horizontal, Axis::vertical}) edits.push_back({Edge{{x, y}, a}, SetValue{10}});
  edits.push_back({Edge::between({0, 0}, {1, 0}), SetValue{3}});
  edits.push_back({Edge::between({1, 0}, {1, 1}), SetValue{1}});
  edits.push_back({Edge::between({0, 0}, {0, 1}), SetValue{2}});
  edits.push_back({Edge::between({0, 1}, {1, 1}), SetValue{1}});
  const Environment env = Environment(Uniform{0, 1}, 1).with_overrides(edits);
  const PassageResult r = windowed_passage_time(env, d, {0, 0}, {1, 1}, 1);
  EXPECT_EQ(r.time, 3.0);
  const std::vector<Vertex> expected = {{0, 0}, {0, 1}, {1, 1}};
  EXPECT_EQ(r.path.vertices, expected);
}

TEST(WindowedPassage, SameVertex) {
  const Domain d = build_domain(HalfPlane{}, {-3, 3, 0, 3});
  const PassageResult r = windowed_passage_time(Environment(Exponential{1}, 1), d, {0, 1}, {0, 1}, 1);
  EXPECT_EQ(r.time, 0.0);
  EXPECT_EQ(r.path.vertices.size(), 1u);
}

TEST(WindowedPassage, MatchesBruteForce) {
  const Domain d = build_domain(HalfPlane{}, {-4, 4, 0, 6});
  const std::vector<DistributionSpec> laws = {Uniform{0, 1}, Exponential{1}, ZeroAtom{0.55, Exponential{1}}};
  for (const auto& law : laws)
    for (std::uint64_t seed : {7u, 8u, 9u}) {
      const Environment env(law, seed);
      for (Vertex x : {Vertex{0, 2}, Vertex{1, 0}}) {
        const int N = 2;
        const Box box = Box::around(x, N);
        const auto mem = box_members(box, [&](Vertex v) { return d.contains(v); });
        const std::set<Vertex> members(mem.begin(), mem.end());
        const auto bt = brute_times(env, members, x);
        for (Vertex y : mem) {
          const PassageResult r = windowed_passage_time(env, d, x, y, N);
          ASSERT_EQ(r.time, bt.time.at(y)) << describe(law) << " seed " << seed;
          EXPECT_EQ(r.path.reversed().vertices, brute_path(bt, env, y).vertices);
          EXPECT_EQ(path_weight(env, r.path), r.time);
        }
      }
    }
}

TEST(WindowedPassage, Errors) {
  const Domain d = build_domain(HalfPlane{}, {-4, 4, 0, 4});
  const Environment env(Exponential{1}, 1);
  EXPECT_THROW(windowed_passage_time(env, d, {3, 1}, {3, 2}, 2), OutOfWindow);
  EXPECT_THROW(windowed_passage_time(env, d, {0, 1}, {3, 3}, 1), OutOfWindow);
  const Domain slit = build_domain(SlitPlane{{0, 0}, Compass::west}, {-6, 6, -6, 6});
  EXPECT_THROW(windowed_passage_time(env, slit, {-2, 1}, {-2, -1}, 2), Disconnected);
}

TEST(PassageTime, SymmetricAndCertified) {
  const Domain d = build_domain(HalfPlane{}, {-40, 40, 0, 40});
  const Vertex x{-5, 3}, y{5, 3};
  int certified = 0;
  const int seeds = 1000;
  for (int s = 0; s < seeds; ++s) {
    const Environment env(Exponential{1}, 500 + s);
    const GeodesicResult a = passage_time(env, d, x, y);
    if (a.certificate.status == CertStatus::certified) ++certified;
    if (s < 50) {
      const GeodesicResult b = passage_time(env, d, y, x);
      EXPECT_EQ(a.time, b.time);
      EXPECT_EQ(path_weight(env, a.path), a.time);
      EXPECT_EQ(a.path.front(), x);
      EXPECT_EQ(a.path.back(), y);
    }
  }
  EXPECT_GE(certified, seeds * 99 / 100);
}

TEST(PassageTime, ZeroAtomReportsAStatus) {
  const Domain d = build_domain(HalfPlane{}, {-20, 20, 0, 20});
  const Environment env(ZeroAtom{0.6, Exponential{1}}, 4);
  const GeodesicResult r = passage_time(env, d, {-3, 2}, {3, 2});
  EXPECT_EQ(path_weight(env, r.path), r.time);
  if (r.certificate.status == CertStatus::heuristic) EXPECT_GE(r.certificate.plateau, 2);
}

TEST(GeodesicTree, RootAndPaths) {
  const Domain d = build_domain(HalfPlane{}, {-12, 12, 0, 12});
  const Environment env(Exponential{1}, 21);
  const Vertex root{0, 0};
  const GeodesicTree t = geodesic_tree(env, d, root, d.window());
  EXPECT_EQ(t.time(root), 0.0);
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> ux(-12, 12), uy(0, 12);
  for (int k = 0; k < 100; ++k) {
    const Vertex v{ux(rng), uy(rng)};
    const Path p = t.path_to_root(v);
    EXPECT_EQ(path_weight(env, p), t.time(v));
    const GeodesicTree from_v = grow_tree(WeightedRegion(env, d, d.window()), v, TreeOptions{{root}, false});
    EXPECT_EQ(from_v.time(root), t.time(v));
  }
  // Atomless weights: exactly one tight neighbor for every non-root vertex.
  for (std::size_t i = 0; i < d.window().size(); ++i) {
    const Vertex v = d.window().vertex(i);
    if (v == root) continue;
    int tight = 0;
    for (Dir dir : kDirs) {
      const Vertex u = neighbor(v, dir);
      if (t.reached(u) && t.time(u) + env.weight(Edge::between(u, v)) == t.time(v)) ++tight;
    }
    EXPECT_EQ(tight, 1) << v.x << "," << v.y;
  }
}

TEST(Crossing, MatchesBruteForce) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Environment env(Uniform{0, 1}, seed);
    const Box box{0, 3, 0, 2};
    EXPECT_EQ(constrained_crossing_time(env, box, Side::left, Side::right, Side::top),
              fpp::testing::brute_crossing(env, box, Side::left, Side::right, Side::top));
    EXPECT_EQ(constrained_crossing_time(env, box, Side::bottom, Side::top, Side::none),
              fpp::testing::brute_crossing(env, box, Side::bottom, Side::top, Side::none));
  }
}

TEST(Crossing, UnitBox) {
  const Environment env(Exponential{1}, 3);
  const Box box{0, 1, 0, 1};
  const double bottom = env.weight(Edge::between({0, 0}, {1, 0}));
  const double top = env.weight(Edge::between({0, 1}, {1, 1}));
  EXPECT_EQ(constrained_crossing_time(env, box, Side::left, Side::right, Side::none), std::min(bottom, top));
  EXPECT_EQ(constrained_crossing_time(env, box, Side::left, Side::right, Side::top), bottom);
  EXPECT_THROW(constrained_crossing_time(env, Box{0, 3, 0, 0}, Side::left, Side::right, Side::top), NoCrossing);
}
