#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <utility>
#include <variant>
#include <vector>

#include "fpp/distribution.hpp"
#include "fpp/errors.hpp"
#include "fpp/lattice.hpp"

namespace fpp {

namespace hashing {

constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t edge_hash(std::uint64_t seed, const Edge& e) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint32_t>(e.base.x));
  h = splitmix64(h ^ static_cast<std::uint32_t>(e.base.y));
  h = splitmix64(h ^ static_cast<std::uint64_t>(e.axis));
  return h;
}

// Midpoint of one of 2^53 equal cells of (0,1); never 0 or 1.
constexpr double open_unit(std::uint64_t h) {
  return (static_cast<double>(h >> 12) + 0.5) * 0x1.0p-52;
}

}  // namespace hashing

// Weights live on a dyadic grid so that passage times are exact sums while they stay below 2^17.
inline constexpr int kWeightQuantumBits = 36;

inline double quantize_weight(double w) {
  if (!std::isfinite(w)) return w;
  return std::ldexp(std::nearbyint(std::ldexp(w, kWeightQuantumBits)), -kWeightQuantumBits);
}

struct SetValue {
  double value = 0;
};
struct FloorValue {
  double value = 0;
};
using Edit = std::variant<SetValue, FloorValue>;

struct EdgeEdit {
  Edge edge;
  Edit edit;
};

class Environment {
 public:
  struct Override {
    bool is_floor = false;
    double value = 0;
    friend bool operator==(const Override&, const Override&) = default;
  };

  Environment(DistributionSpec dist, std::uint64_t seed, Vertex shift = {}) : dist_(std::move(dist)), seed_(seed), shift_(shift) {
    validate(dist_);
  }

  const DistributionSpec& dist() const { return dist_; }
  std::uint64_t seed() const { return seed_; }
  Vertex shift() const { return shift_; }
  double cap() const { return cap_; }
  bool has_overrides() const { return overrides_ && !overrides_->empty(); }

  // Sampled weight before overrides and caps.
  double raw_weight(const Edge& e) const {
    return quantile(dist_, hashing::open_unit(hashing::edge_hash(seed_, e.shifted(shift_))));
  }

  double weight(const Edge& e) const {
    const Edge key = e.shifted(shift_);
    double w = quantile(dist_, hashing::open_unit(hashing::edge_hash(seed_, key)));
    if (overrides_) {
      auto it = overrides_->find(key);
      if (it != overrides_->end()) w = it->second.is_floor ? std::max(w, it->second.value) : it->second.value;
    }
    if (w > cap_) w = cap_;
    return quantize_weight(w);
  }

  double weight(Vertex a, Vertex b) const { return weight(Edge::between(a, b)); }

  // weight(shifted(x), e) == weight(*this, e + x)
  Environment shifted(Vertex x) const {
    Environment out = *this;
    out.shift_ = shift_ + x;
    return out;
  }

  Environment with_overrides(const std::vector<EdgeEdit>& edits) const {
    auto table = overrides_ ? std::make_shared<std::map<Edge, Override>>(*overrides_)
                            : std::make_shared<std::map<Edge, Override>>();
    for (const auto& [edge, edit] : edits) {
      const bool floor = std::holds_alternative<FloorValue>(edit);
      const double v = floor ? std::get<FloorValue>(edit).value : std::get<SetValue>(edit).value;
      if (!(v >= 0) || std::isnan(v)) throw NegativeValue("override values must be non-negative");
      const Edge key = edge.shifted(shift_);
      auto it = table->find(key);
      if (it == table->end()) {
        table->emplace(key, Override{floor, v});
      } else if (!floor) {
        it->second = Override{false, v};
      } else {
        // A floor on top of a set or floor raises the stored value; the kind stays.
        it->second.value = std::max(it->second.value, v);
      }
    }
    Environment out = *this;
    out.overrides_ = std::move(table);
    return out;
  }

  // Truncated weights min(w, c).
  Environment capped(double c) const {
    if (!(c >= 0)) throw NegativeValue("cap must be non-negative");
    Environment out = *this;
    out.cap_ = std::min(cap_, c);
    return out;
  }

  const std::map<Edge, Override>* overrides() const { return overrides_.get(); }

 private:
  DistributionSpec dist_;
  std::uint64_t seed_ = 0;
  Vertex shift_{};
  double cap_ = kInfinity;
  std::shared_ptr<const std::map<Edge, Override>> overrides_;
};

inline double weight(const Environment& env, const Edge& e) { return env.weight(e); }
inline Environment shift(const Environment& env, Vertex x) { return env.shifted(x); }
inline Environment apply_overrides(const Environment& env, const std::vector<EdgeEdit>& edits) {
  return env.with_overrides(edits);
}

}  // namespace fpp
