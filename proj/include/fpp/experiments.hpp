#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "fpp/busemann.hpp"
#include "fpp/campaign.hpp"
#include "fpp/coalescence_stats.hpp"
#include "fpp/domain.hpp"
#include "fpp/environment.hpp"
#include "fpp/errors.hpp"
#include "fpp/geodesic_graph.hpp"
#include "fpp/probes.hpp"
#include "fpp/serialize.hpp"
#include "fpp/svg.hpp"

namespace fpp {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kConfigSchema = 1;

inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Shortest round-trip decimal form.
inline std::string fmt_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

enum class ExperimentKind { busemann, graph_limit, coalescence, density, bprime, circuits, gamma_zero, blocking, shape_ratio };

inline const std::map<std::string, ExperimentKind>& experiment_kinds() {
  static const std::map<std::string, ExperimentKind> kinds = {
      {"busemann", ExperimentKind::busemann},       {"graph-limit", ExperimentKind::graph_limit},
      {"coalescence", ExperimentKind::coalescence}, {"density", ExperimentKind::density},
      {"bprime", ExperimentKind::bprime},           {"circuits", ExperimentKind::circuits},
      {"gamma-zero", ExperimentKind::gamma_zero},   {"blocking", ExperimentKind::blocking},
      {"shape-ratio", ExperimentKind::shape_ratio},
  };
  return kinds;
}

struct ExperimentConfig {
  std::string name;
  ExperimentKind kind = ExperimentKind::busemann;
  DomainSpec domain = HalfPlane{};
  std::optional<Box> window;
  std::vector<int> ladder;
  DistributionSpec dist = Uniform{0.0, 1.0};
  std::vector<std::uint64_t> seeds;
  nlohmann::json params = nlohmann::json::object();
  nlohmann::json source;  // the config as given, re-emitted into the manifest
};

namespace detail {

using nlohmann::json;

inline const json& param(const ExperimentConfig& c, const char* key) {
  if (!c.params.contains(key)) throw ConfigError(std::string("missing parameter '") + key + "'");
  return c.params.at(key);
}

template <class T>
T param_or(const ExperimentConfig& c, const char* key, T fallback) {
  if (!c.params.contains(key)) return fallback;
  try {
    return c.params.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("parameter '") + key + "' has the wrong type");
  }
}

inline std::vector<long> long_list(const ExperimentConfig& c, const char* key, std::vector<long> fallback) {
  if (!c.params.contains(key)) return fallback;
  const json& j = c.params.at(key);
  if (!j.is_array()) throw ConfigError(std::string("parameter '") + key + "' must be a list");
  std::vector<long> out;
  for (const auto& v : j) {
    if (!v.is_number_integer()) throw ConfigError(std::string("parameter '") + key + "' must hold integers");
    out.push_back(v.get<long>());
  }
  return out;
}

inline IndexRange range_param(const ExperimentConfig& c, const char* key) {
  const std::vector<long> r = long_list(c, key, {});
  if (r.size() < 2 || r.size() > 3) throw ConfigError(std::string("parameter '") + key + "' must be [first, last, stride?]");
  const IndexRange out{r[0], r[1], r.size() == 3 ? r[2] : 1};
  if (out.stride <= 0 || out.last < out.first) throw ConfigError(std::string("parameter '") + key + "' is empty");
  return out;
}

inline Box require_window(const ExperimentConfig& c) {
  if (!c.window) throw ConfigError("experiment needs a window");
  return *c.window;
}

inline Domain make_domain(const ExperimentConfig& c) {
  try {
    return build_domain(c.domain, require_window(c));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("domain: ") + e.what());
  }
}

inline void require_half_plane(const ExperimentConfig& c) {
  if (!std::holds_alternative<HalfPlane>(c.domain)) throw ConfigError("this experiment runs on the half-plane");
}

inline std::vector<int> ladder_of(const ExperimentConfig& c) {
  if (c.ladder.empty()) throw ConfigError("experiment needs a window ladder");
  return c.ladder;
}

inline std::string csv_line(std::initializer_list<std::string> cells) {
  std::string s;
  bool first = true;
  for (const auto& c : cells) {
    if (!first) s += ',';
    s += c;
    first = false;
  }
  return s + '\n';
}

inline std::string path_text(const Path& p) {
  std::ostringstream os;
  for (Vertex v : p.vertices) os << v.x << ' ' << v.y << '\n';
  return os.str();
}

inline std::string ray_end_name(RayEnd e) {
  switch (e) {
    case RayEnd::left_box: return "left_box";
    case RayEnd::unstabilized: return "unstabilized";
    case RayEnd::sink: return "sink";
    case RayEnd::branching: return "branching";
    case RayEnd::cycle: return "cycle";
  }
  return "?";
}

}  // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& j) {
  using detail::json;
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c;
  c.source = j;
  if (!j.contains("schema") || !j.at("schema").is_number_integer() || j.at("schema").get<int>() != kConfigSchema)
    throw ConfigError("config needs \"schema\": " + std::to_string(kConfigSchema));
  if (!j.contains("experiment") || !j.at("experiment").is_string()) throw ConfigError("config needs an experiment kind");
  const std::string kind = j.at("experiment").get<std::string>();
  const auto it = experiment_kinds().find(kind);
  if (it == experiment_kinds().end()) throw ConfigError("unknown experiment '" + kind + "'");
  c.kind = it->second;
  c.name = j.value("name", kind);
  if (j.contains("domain")) c.domain = json_io::domain_from(j.at("domain"));
  if (j.contains("window")) c.window = json_io::box_from(j.at("window"));
  if (j.contains("ladder")) {
    if (!j.at("ladder").is_array()) throw ConfigError("ladder must be a list of sizes");
    for (const auto& L : j.at("ladder")) {
      if (!L.is_number_integer() || L.get<int>() < 8) throw ConfigError("ladder sizes must be integers >= 8");
      c.ladder.push_back(L.get<int>());
    }
  }
  if (j.contains("distribution")) c.dist = json_io::distribution_from(j.at("distribution"));
  if (!j.contains("seeds")) throw ConfigError("config needs seeds");
  const json& s = j.at("seeds");
  if (s.is_array()) {
    for (const auto& v : s) {
      if (!v.is_number_unsigned()) throw ConfigError("seeds must be non-negative integers");
      c.seeds.push_back(v.get<std::uint64_t>());
    }
  } else if (s.is_object()) {
    const auto first = s.value("first", std::uint64_t{0});
    const auto count = s.value("count", std::uint64_t{0});
    for (std::uint64_t i = 0; i < count; ++i) c.seeds.push_back(first + i);
  } else {
    throw ConfigError("seeds must be a list or {\"first\", \"count\"}");
  }
  if (c.seeds.empty()) throw ConfigError("no seeds");
  if (j.contains("params")) {
    if (!j.at("params").is_object()) throw ConfigError("params must be an object");
    c.params = j.at("params");
  }
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read " + file.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  // A manifest carries its config; running it reproduces the original run.
  if (j.is_object() && j.contains("config") && j.contains("files")) j = j.at("config");
  return parse_config(j);
}

// Output of one run: named result files plus invariant breaches found while producing them.
struct RunOutput {
  std::map<std::string, std::string> files;
  std::vector<std::string> violations;
  nlohmann::json certification = nlohmann::json::object();
};

namespace detail {

struct SeedOutput {
  std::map<std::string, std::string> rows;   // appended to the shared CSV of that name
  std::map<std::string, std::string> files;  // written as-is
  std::vector<std::string> violations;
  std::size_t certified = 0;
  std::size_t total = 0;
};

inline SeedOutput run_busemann(const ExperimentConfig& c, std::uint64_t seed) {
  const Domain domain = make_domain(c);
  const Environment env(c.dist, seed);
  Vertex x, y;
  if (c.params.contains("x")) {
    x = json_io::vertex_from(param(c, "x"));
    y = json_io::vertex_from(param(c, "y"));
  } else {
    x = *domain.boundary_vertex(param_or<long>(c, "i", 0));
    y = *domain.boundary_vertex(param_or<long>(c, "j", 1));
  }
  const BusemannSequence seq = busemann_sequence(env, domain, x, y, range_param(c, "n"));
  SeedOutput out;
  for (const auto& s : seq.samples) {
    out.rows["busemann.csv"] += csv_line({std::to_string(seed), std::to_string(s.n), std::to_string(s.target.x),
                                          std::to_string(s.target.y), fmt_double(s.value), s.certified ? "1" : "0"});
    out.total++;
    if (s.certified) out.certified++;
  }
  if (const std::size_t v = monotonicity_violations(seq.samples))
    out.violations.push_back("seed " + std::to_string(seed) + ": " + std::to_string(v) + " monotonicity violations");
  return out;
}

inline Box central_box(const ExperimentConfig& c) {
  const int h = param_or<int>(c, "central", 32);
  return {-h / 2, h / 2 - 1, 0, h - 1};
}

inline SeedOutput run_graph_limit(const ExperimentConfig& c, std::uint64_t seed, bool first) {
  require_half_plane(c);
  const Environment env(c.dist, seed);
  const bool tree_mode = resolve_mode(GraphMode::automatic, env) == GraphMode::tree;
  SeedOutput out;
  for (int L : ladder_of(c)) {
    const LadderGeometry g = ladder_geometry(L);
    const Domain domain = build_domain(HalfPlane{}, g.window);
    const LimitGraphReport rep = limit_graph(env, domain, g.targets, g.box, g.margin);
    const double frac = rep.stabilized_fraction(central_box(c));
    out.rows["graph_limit.csv"] +=
        csv_line({std::to_string(seed), std::to_string(L), std::to_string(rep.graphs()), fmt_double(frac),
                  std::to_string(rep.max_circuits()), std::to_string(rep.degree_violations()),
                  fmt_double(rep.mean_certified_fraction())});
    if (tree_mode && (rep.max_circuits() || rep.degree_violations()))
      out.violations.push_back("seed " + std::to_string(seed) + " L " + std::to_string(L) + ": geodesic graph is not a forest");
    if (first) out.files["graph_" + std::to_string(L) + ".txt"] = rep.dump();
    out.total++;
    out.certified += rep.mean_certified_fraction() > 0 ? 1 : 0;
  }
  return out;
}

inline SeedOutput run_coalescence(const ExperimentConfig& c, std::uint64_t seed, bool first) {
  require_half_plane(c);
  const Environment env(c.dist, seed);
  const std::vector<long> ds = long_list(c, "distances", {1, 5, 10});
  SeedOutput out;
  for (int L : ladder_of(c)) {
    const LadderGeometry g = ladder_geometry(L);
    const Domain domain = build_domain(HalfPlane{}, g.window);
    const LimitGraphReport rep = limit_graph(env, domain, g.targets, g.box, g.margin);
    std::string rays;
    for (long d : ds) {
      const Vertex a{0, 0}, b{static_cast<int>(d), 0};
      if (!rep.box().contains(b)) throw ConfigError("pair distance exceeds the report box");
      const Coalescence co = coalescence(rep, a, b);
      const char* status = co.kind == Coalescence::merge_at ? "merge"
                           : co.kind == Coalescence::disjoint_in_window ? "disjoint"
                                                                        : "unresolved";
      out.rows["coalescence.csv"] += csv_line({std::to_string(seed), std::to_string(L), std::to_string(d), status,
                                               co.merge ? std::to_string(co.merge->x) : "",
                                               co.merge ? std::to_string(co.merge->y) : ""});
      out.total++;
      out.certified += co.kind == Coalescence::unresolved ? 0 : 1;
      for (Vertex v : {a, b}) {
        const Ray r = forward_ray(rep, v);
        rays += "ray " + std::to_string(v.x) + ' ' + std::to_string(v.y) + ' ' + ray_end_name(r.end) + '\n' +
                path_text(r.path);
      }
    }
    if (first) out.files["rays_" + std::to_string(L) + ".txt"] = rays;
  }
  return out;
}

inline SeedOutput run_density(const ExperimentConfig& c, std::uint64_t seed) {
  require_half_plane(c);
  const Environment env(c.dist, seed);
  const int k = param_or<int>(c, "k", 1);
  const long m = param_or<long>(c, "m", 0);
  const std::vector<long> ns = long_list(c, "n", {4, 8, 16});
  SeedOutput out;
  for (int L : ladder_of(c)) {
    const LadderGeometry g = ladder_geometry(L);
    const Domain domain = build_domain(HalfPlane{}, g.window);
    const LimitGraphReport rep = limit_graph(env, domain, g.targets, g.box, g.margin);
    RayBook book(rep);
    for (long n : ns) {
      if (n < m) throw ConfigError("density needs m <= n");
      const DensityCounts dc = density_counts(book, k, m, n);
      out.rows["density.csv"] += csv_line({std::to_string(seed), std::to_string(L), std::to_string(k),
                                           std::to_string(m), std::to_string(n), std::to_string(dc.N),
                                           std::to_string(dc.M), dc.window_limited ? "1" : "0"});
      out.total++;
      out.certified += dc.window_limited ? 0 : 1;
      if (dc.N > n - m + 1 || dc.M > dc.N || !verify_density_witnesses(rep, dc))
        out.violations.push_back("seed " + std::to_string(seed) + ": density counts fail their bounds");
    }
  }
  return out;
}

inline SeedOutput run_bprime(const ExperimentConfig& c, std::uint64_t seed) {
  require_half_plane(c);
  const Environment env(c.dist, seed);
  const int k = param_or<int>(c, "k", 2);
  const double eps = param_or<double>(c, "eps", 1.0);
  double c_plus = kInfinity;
  if (c.params.contains("c_plus") && c.params.at("c_plus").is_number()) {
    c_plus = c.params.at("c_plus").get<double>();
  } else {
    try {
      c_plus = shape_bound_constant(c.dist);
    } catch (const UnboundedSupport&) {
      c_plus = kInfinity;
    }
  }
  const Vertex v1 = json_io::vertex_from(param(c, "v1"));
  const Vertex v3 = json_io::vertex_from(param(c, "v3"));
  SeedOutput out;
  for (int L : ladder_of(c)) {
    const LadderGeometry g = ladder_geometry(L);
    if (!g.box.contains(v1) || !g.box.contains(v3)) throw ConfigError("v1 and v3 must lie in the report box");
    const Domain domain = build_domain(HalfPlane{}, g.window);
    const LimitGraphReport rep = limit_graph(env, domain, g.targets, g.box, g.margin);
    const BPrimeOutcome o = detect_b_prime(rep, env, v1, v3, k, eps, c_plus);
    const char* kind = o.kind == BPrimeOutcome::occurs ? "occurs" : o.kind == BPrimeOutcome::fails ? "fails" : "unresolved";
    std::string w1, w3, xs;
    if (o.witness) {
      w1 = std::to_string(o.witness->w1.x);
      w3 = std::to_string(o.witness->w3.x);
      xs = std::to_string(o.witness->x_star.x);
    }
    out.rows["bprime.csv"] += csv_line({std::to_string(seed), std::to_string(L), std::to_string(k), kind,
                                        std::to_string(o.failed_condition), w1, w3, xs});
    out.total++;
    out.certified += o.kind == BPrimeOutcome::unresolved ? 0 : 1;
  }
  return out;
}

inline SeedOutput run_circuits(const ExperimentConfig& c, std::uint64_t seed) {
  const Environment env(c.dist, seed);
  const std::string mode = param_or<std::string>(c, "mode", "square");
  const Vertex center = c.params.contains("center") ? json_io::vertex_from(c.params.at("center")) : Vertex{0, 0};
  SeedOutput out;
  for (long n : long_list(c, "levels", {1, 2, 3, 4})) {
    std::optional<CircuitWitness> w;
    Annulus an;
    double bound = 0.0;
    if (mode == "square") {
      an = Annulus::square(center, param_or<int>(c, "N0", 2), static_cast<int>(n));
      w = find_zero_circuit(env, an, center);
    } else if (mode == "half") {
      bound = param_or<double>(c, "D", 0.8);
      an = Annulus::half(center, static_cast<int>(n));
      w = find_half_circuit(env, bound, an, center);
    } else {
      throw ConfigError("circuit mode must be 'square' or 'half'");
    }
    if (c.window && !(c.window->contains(Vertex{an.outer.x0, an.outer.y0}) && c.window->contains(Vertex{an.outer.x1, an.outer.y1})))
      throw ConfigError("annulus leaves the declared window");
    out.rows["circuits.csv"] += csv_line({std::to_string(seed), std::to_string(n), w ? "1" : "0",
                                          w ? std::to_string(w->vertices.size()) : "0"});
    out.total++;
    if (w) {
      out.certified++;
      out.files["witnesses/circuit_" + std::to_string(seed) + "_" + std::to_string(n) + ".txt"] = path_text(Path{w->vertices});
      if (!verify_circuit(env, *w, an, center, bound))
        out.violations.push_back("seed " + std::to_string(seed) + ": circuit witness fails re-verification");
    }
  }
  return out;
}

inline SeedOutput run_gamma_zero(const ExperimentConfig& c, std::uint64_t seed) {
  require_half_plane(c);
  const Domain domain = make_domain(c);
  const Environment env(c.dist, seed);
  const IndexRange range = range_param(c, "n");
  const double heavy = param_or<double>(c, "heavy", 0.5);
  const GammaZeroReport rep = gamma_zero(env, domain, range);
  SeedOutput out;
  for (const auto& s : rep.samples) {
    const double t = path_time(env, s.path);
    const Box region{static_cast<int>(-s.n), static_cast<int>(s.n), 0, static_cast<int>(s.n)};
    out.rows["gamma_zero.csv"] += csv_line({std::to_string(seed), std::to_string(s.n), fmt_double(s.time),
                                            std::to_string(s.path.edges().size()), s.certified ? "1" : "0",
                                            std::to_string(heavy_edge_count(env, s.path, region, heavy))});
    out.files["witnesses/gamma_" + std::to_string(seed) + "_" + std::to_string(s.n) + ".txt"] = path_text(s.path);
    out.total++;
    out.certified += s.certified ? 1 : 0;
    if (t != s.time) out.violations.push_back("seed " + std::to_string(seed) + ": gamma path time mismatch");
  }
  const int h = param_or<int>(c, "central", 8);
  const long margin = param_or<long>(c, "margin", (range.last - range.first) / 2);
  out.rows["gamma_zero_stability.csv"] +=
      csv_line({std::to_string(seed), std::to_string(margin), fmt_double(rep.stabilized_fraction({-h, h, 0, h}, margin))});
  return out;
}

inline SeedOutput run_blocking(const ExperimentConfig& c, std::uint64_t seed) {
  const Environment env(c.dist, seed);
  SeedOutput out;
  for (long m : long_list(c, "sizes", {4, 8, 16})) {
    const Box box{0, static_cast<int>(m), 0, static_cast<int>(m)};
    const BlockingEvent ev = box_blocking_event(env, box);
    const BlockingEvent forced = box_blocking_event(force_blocking(env, box), box);
    out.rows["blocking.csv"] += csv_line({std::to_string(seed), std::to_string(m), fmt_double(ev.crossing_time),
                                          fmt_double(ev.boundary_sum), ev.blocked ? "1" : "0",
                                          forced.blocked ? "1" : "0"});
    out.total++;
    out.certified++;
    if (!forced.blocked) out.violations.push_back("seed " + std::to_string(seed) + ": forced blocking failed");
  }
  return out;
}

inline SeedOutput run_shape_ratio(const ExperimentConfig& c, std::uint64_t seed) {
  const Domain domain = make_domain(c);
  const Environment env(c.dist, seed);
  SeedOutput out;
  for (long R : long_list(c, "radii", {8, 16, 32})) {
    ShapeRatio r;
    try {
      r = partial_shape_ratio(env, domain, static_cast<int>(R));
    } catch (const HypothesisViolated& e) {
      throw ConfigError(e.what());
    }
    out.rows["shape_ratio.csv"] +=
        csv_line({std::to_string(seed), std::to_string(R), fmt_double(r.ratio), r.certified ? "1" : "0"});
    out.total++;
    out.certified += r.certified ? 1 : 0;
  }
  return out;
}

inline const std::map<std::string, std::string>& csv_headers() {
  static const std::map<std::string, std::string> h = {
      {"busemann.csv", "seed,n,target_x,target_y,value,certified\n"},
      {"graph_limit.csv", "seed,L,graphs,stabilized_fraction,max_circuits,degree_violations,mean_certified_fraction\n"},
      {"coalescence.csv", "seed,L,d,status,merge_x,merge_y\n"},
      {"density.csv", "seed,L,k,m,n,N,M,window_limited\n"},
      {"bprime.csv", "seed,L,k,outcome,failed_condition,w1_x,w3_x,x_star_x\n"},
      {"circuits.csv", "seed,level,found,length\n"},
      {"gamma_zero.csv", "seed,n,time,edges,certified,heavy_edges\n"},
      {"gamma_zero_stability.csv", "seed,margin,stabilized_fraction\n"},
      {"blocking.csv", "seed,m,crossing_time,boundary_sum,blocked,forced_blocked\n"},
      {"shape_ratio.csv", "seed,R,ratio,certified\n"},
  };
  return h;
}

inline SeedOutput run_seed(const ExperimentConfig& c, std::uint64_t seed, bool first) {
  switch (c.kind) {
    case ExperimentKind::busemann: return run_busemann(c, seed);
    case ExperimentKind::graph_limit: return run_graph_limit(c, seed, first);
    case ExperimentKind::coalescence: return run_coalescence(c, seed, first);
    case ExperimentKind::density: return run_density(c, seed);
    case ExperimentKind::bprime: return run_bprime(c, seed);
    case ExperimentKind::circuits: return run_circuits(c, seed);
    case ExperimentKind::gamma_zero: return run_gamma_zero(c, seed);
    case ExperimentKind::blocking: return run_blocking(c, seed);
    case ExperimentKind::shape_ratio: return run_shape_ratio(c, seed);
  }
  throw ConfigError("unknown experiment");
}

// Upfront checks so that configuration errors surface before any work starts.
inline void validate_config(const ExperimentConfig& c) {
  switch (c.kind) {
    case ExperimentKind::busemann: {
      const Domain d = make_domain(c);
      range_param(c, "n");
      if (c.params.contains("x")) {
        for (const char* key : {"x", "y"}) {
          const Vertex v = json_io::vertex_from(param(c, key));
          if (!d.in_window(v) || !d.contains(v)) throw ConfigError(std::string(key) + " must lie in the domain window");
        }
      } else {
        for (const char* key : {"i", "j"})
          if (!d.boundary_vertex(param_or<long>(c, key, key[0] == 'i' ? 0 : 1)))
            throw ConfigError(std::string("boundary index ") + key + " lies outside the window");
      }
      break;
    }
    case ExperimentKind::gamma_zero: {
      require_half_plane(c);
      const Domain d = make_domain(c);
      const IndexRange r = range_param(c, "n");
      if (!d.in_window({static_cast<int>(-r.last), 0}) || !d.in_window({static_cast<int>(r.last), 0}))
        throw ConfigError("gamma endpoints leave the window");
      break;
    }
    case ExperimentKind::shape_ratio: {
      const Domain d = make_domain(c);
      if (!d.in_window({0, 0})) throw ConfigError("origin must lie in the window");
      break;
    }
    case ExperimentKind::graph_limit:
    case ExperimentKind::coalescence:
    case ExperimentKind::density:
    case ExperimentKind::bprime:
      require_half_plane(c);
      ladder_of(c);
      break;
    case ExperimentKind::circuits:
    case ExperimentKind::blocking:
      break;
  }
}

}  // namespace detail

inline RunOutput run_experiment(const ExperimentConfig& config, unsigned jobs = 1) {
  detail::validate_config(config);
  const auto per_seed = parallel_map(config.seeds.size(), jobs, [&](std::size_t i) {
    try {
      return detail::run_seed(config, config.seeds[i], i == 0);
    } catch (const ConfigError&) {
      throw;
    } catch (const OutOfWindow& e) {
      throw ConfigError(e.what());
    } catch (const EmptyBoundary& e) {
      throw ConfigError(e.what());
    }
  });
  RunOutput out;
  std::size_t certified = 0, total = 0;
  for (const auto& s : per_seed) {
    for (const auto& [name, rows] : s.rows) {
      auto& f = out.files[name];
      if (f.empty()) f = detail::csv_headers().at(name);
      f += rows;
    }
    for (const auto& [name, body] : s.files) out.files[name] = body;
    out.violations.insert(out.violations.end(), s.violations.begin(), s.violations.end());
    certified += s.certified;
    total += s.total;
  }
  out.certification = {{"certified", certified}, {"total", total}};
  return out;
}

inline nlohmann::json make_manifest(const ExperimentConfig& config, const RunOutput& run, double wall_seconds) {
  nlohmann::json files = nlohmann::json::array();
  for (const auto& [name, body] : run.files)
    files.push_back({{"name", name}, {"fnv1a", hex64(fnv1a(body))}, {"bytes", body.size()}});
  return {{"tool", "fpp"},
          {"version", kToolVersion},
          {"config", config.source},
          {"config_hash", hex64(fnv1a(config.source.dump()))},
          {"seeds", config.seeds},
          {"files", files},
          {"wall_clock_seconds", wall_seconds},
          {"certification", run.certification},
          {"violations", run.violations}};
}

inline void write_run(const std::filesystem::path& dir, const ExperimentConfig& config, const RunOutput& run,
                      double wall_seconds) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  for (const auto& [name, body] : run.files) {
    const fs::path p = dir / name;
    fs::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << body;
  }
  std::ofstream(dir / "manifest.json", std::ios::binary) << make_manifest(config, run, wall_seconds).dump(2) << '\n';
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw MissingData("missing " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

namespace detail {

inline std::vector<std::vector<std::string>> csv_rows(const std::string& body) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(body);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(std::move(cells));
  }
  return rows;
}

inline std::vector<Vertex> read_vertices(const std::string& body) {
  std::vector<Vertex> out;
  std::istringstream in(body);
  int x, y;
  while (in >> x >> y) out.push_back({x, y});
  return out;
}

}  // namespace detail

// Re-checks file hashes and the experiment's invariants from the stored results and witnesses.
inline std::vector<std::string> verify_run(const std::filesystem::path& dir) {
  const nlohmann::json manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
  const ExperimentConfig config = parse_config(manifest.at("config"));
  std::vector<std::string> problems;
  std::map<std::string, std::string> files;
  for (const auto& f : manifest.at("files")) {
    const std::string name = f.at("name").get<std::string>();
    std::string body;
    try {
      body = read_file(dir / name);
    } catch (const MissingData&) {
      problems.push_back("missing file " + name);
      continue;
    }
    if (hex64(fnv1a(body)) != f.at("fnv1a").get<std::string>()) problems.push_back("hash mismatch in " + name);
    files[name] = std::move(body);
  }
  auto rows = [&](const std::string& name) {
    const auto it = files.find(name);
    return it == files.end() ? std::vector<std::vector<std::string>>{} : detail::csv_rows(it->second);
  };

  switch (config.kind) {
    case ExperimentKind::busemann: {
      std::map<std::string, std::vector<BusemannSample>> by_seed;
      for (const auto& r : rows("busemann.csv"))
        by_seed[r[0]].push_back({std::stol(r[1]), {std::stoi(r[2]), std::stoi(r[3])}, std::stod(r[4]), r[5] == "1"});
      for (const auto& [seed, samples] : by_seed)
        if (monotonicity_violations(samples)) problems.push_back("seed " + seed + ": Busemann sequence increases");
      break;
    }
    case ExperimentKind::graph_limit: {
      const Environment probe(config.dist, 0);
      if (resolve_mode(GraphMode::automatic, probe) == GraphMode::tree)
        for (const auto& r : rows("graph_limit.csv"))
          if (r[4] != "0" || r[5] != "0") problems.push_back("seed " + r[0] + ": geodesic graph is not a forest");
      break;
    }
    case ExperimentKind::density:
      for (const auto& r : rows("density.csv"))
        if (std::stol(r[5]) > std::stol(r[4]) - std::stol(r[3]) + 1 || std::stol(r[6]) > std::stol(r[5]))
          problems.push_back("seed " + r[0] + ": density count exceeds its bound");
      break;
    case ExperimentKind::circuits: {
      const std::string mode = detail::param_or<std::string>(config, "mode", "square");
      const Vertex center =
          config.params.contains("center") ? json_io::vertex_from(config.params.at("center")) : Vertex{0, 0};
      for (const auto& r : rows("circuits.csv")) {
        if (r[2] != "1") continue;
        const std::string name = "witnesses/circuit_" + r[0] + "_" + r[1] + ".txt";
        if (!files.count(name)) {
          problems.push_back("missing witness " + name);
          continue;
        }
        const Environment env(config.dist, std::stoull(r[0]));
        const int n = std::stoi(r[1]);
        CircuitWitness w{detail::read_vertices(files[name]), mode == "square", 0.0};
        const Annulus an = mode == "square"
                               ? Annulus::square(center, detail::param_or<int>(config, "N0", 2), n)
                               : Annulus::half(center, n);
        const double bound = mode == "square" ? 0.0 : detail::param_or<double>(config, "D", 0.8);
        if (!verify_circuit(env, w, an, center, bound)) problems.push_back("witness " + name + " fails re-verification");
      }
      break;
    }
    case ExperimentKind::gamma_zero:
      for (const auto& r : rows("gamma_zero.csv")) {
        const std::string name = "witnesses/gamma_" + r[0] + "_" + r[1] + ".txt";
        if (!files.count(name)) {
          problems.push_back("missing witness " + name);
          continue;
        }
        const Environment env(config.dist, std::stoull(r[0]));
        const Path p{detail::read_vertices(files[name])};
        const long n = std::stol(r[1]);
        if (!p.is_lattice_path() || p.front() != Vertex{static_cast<int>(-n), 0} ||
            p.back() != Vertex{static_cast<int>(n), 0} || fmt_double(path_time(env, p)) != r[2])
          problems.push_back("gamma path " + name + " fails re-verification");
      }
      break;
    case ExperimentKind::blocking:
      for (const auto& r : rows("blocking.csv"))
        if (r[5] != "1") problems.push_back("seed " + r[0] + ": forced blocking failed");
      break;
    case ExperimentKind::coalescence:
    case ExperimentKind::bprime:
    case ExperimentKind::shape_ratio:
      break;
  }
  return problems;
}

inline const std::vector<std::string>& figure_kinds() {
  static const std::vector<std::string> k = {"domain", "graph", "rays", "circuit"};
  return k;
}

// Renders a figure from a result directory; MissingData when the run lacks what the figure needs.
inline std::string render_figure(const std::filesystem::path& dir, const std::string& kind) {
  const nlohmann::json manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
  const ExperimentConfig config = parse_config(manifest.at("config"));
  auto ladder_domain = [&]() {
    if (config.ladder.empty()) throw MissingData("run has no window ladder");
    return build_domain(HalfPlane{}, ladder_geometry(config.ladder.back()).window);
  };
  if (kind == "domain") {
    const Domain d = config.window ? build_domain(config.domain, *config.window) : ladder_domain();
    SvgCanvas svg(d.window());
    svg.domain(d);
    svg.boundary(d);
    return svg.str();
  }
  if (kind == "graph" || kind == "rays") {
    if (config.ladder.empty()) throw MissingData("run has no window ladder");
    const int L = config.ladder.back();
    const Box box = ladder_geometry(L).box;
    SvgCanvas svg(box);
    const Domain clipped = build_domain(HalfPlane{}, box);
    svg.domain(clipped);
    svg.boundary(clipped);
    if (kind == "graph") {
      const std::string body = read_file(dir / ("graph_" + std::to_string(L) + ".txt"));
      std::vector<DirectedEdge> es;
      std::istringstream in(body);
      int a, b, c, e, eta;
      while (in >> a >> b >> c >> e >> eta) es.push_back({{a, b}, {c, e}});
      svg.edges(es, "graph");
    } else {
      const std::string body = read_file(dir / ("rays_" + std::to_string(L) + ".txt"));
      std::istringstream in(body);
      std::string line;
      Path current;
      auto flush = [&] {
        if (!current.empty()) svg.path(current, "ray");
        current = Path{};
      };
      while (std::getline(in, line)) {
        if (line.rfind("ray ", 0) == 0) {
          flush();
          continue;
        }
        std::istringstream ls(line);
        Vertex v;
        if (ls >> v.x >> v.y) current.vertices.push_back(v);
      }
      flush();
    }
    return svg.str();
  }
  if (kind == "circuit") {
    if (config.kind != ExperimentKind::circuits) throw MissingData("run has no circuit witnesses");
    const std::string mode = detail::param_or<std::string>(config, "mode", "square");
    const Vertex center = config.params.contains("center") ? json_io::vertex_from(config.params.at("center")) : Vertex{0, 0};
    for (const auto& f : manifest.at("files")) {
      const std::string name = f.at("name").get<std::string>();
      if (name.rfind("witnesses/circuit_", 0) != 0) continue;
      const CircuitWitness w{detail::read_vertices(read_file(dir / name)), mode == "square", 0.0};
      Box view{center.x, center.x, center.y, center.y};
      for (Vertex v : w.vertices) view = view.hull(Box{v.x, v.x, v.y, v.y});
      SvgCanvas svg(view);
      svg.circuit(w, center);
      return svg.str();
    }
    throw MissingData("run found no circuit");
  }
  throw MissingData("unknown figure kind '" + kind + "'");
}

}  // namespace fpp
