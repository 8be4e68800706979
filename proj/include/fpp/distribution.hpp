#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>

#include "fpp/errors.hpp"

namespace fpp {

struct Exponential {
  double rate = 1.0;
  friend bool operator==(const Exponential&, const Exponential&) = default;
};

struct Uniform {
  double lo = 0.0;
  double hi = 1.0;
  friend bool operator==(const Uniform&, const Uniform&) = default;
};

struct Pareto {
  double shape = 2.0;
  double scale = 1.0;
  friend bool operator==(const Pareto&, const Pareto&) = default;
};

// Weight a with probability p, b otherwise.
struct TwoPoint {
  double p = 0.5;
  double a = 0.0;
  double b = 1.0;
  friend bool operator==(const TwoPoint&, const TwoPoint&) = default;
};

using ContinuousLaw = std::variant<Exponential, Uniform, Pareto>;

// Atom of mass p0 at zero on top of a continuous law.
struct ZeroAtom {
  double p0 = 0.5;
  ContinuousLaw tail = Exponential{1.0};
  friend bool operator==(const ZeroAtom&, const ZeroAtom&) = default;
};

using DistributionSpec = std::variant<Exponential, Uniform, Pareto, TwoPoint, ZeroAtom>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

namespace detail {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

inline bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

inline void validate_continuous(const ContinuousLaw& law) {
  std::visit(overloaded{
                 [](const Exponential& d) {
                   if (!(std::isfinite(d.rate) && d.rate > 0)) throw InvalidSpec("exponential rate must be positive");
                 },
                 [](const Uniform& d) {
                   if (!(finite_nonneg(d.lo) && std::isfinite(d.hi) && d.hi > d.lo))
                     throw InvalidSpec("uniform bounds must satisfy 0 <= lo < hi");
                 },
                 [](const Pareto& d) {
                   if (!(std::isfinite(d.shape) && d.shape > 0 && std::isfinite(d.scale) && d.scale > 0))
                     throw InvalidSpec("pareto shape and scale must be positive");
                 },
             },
             law);
}

inline double continuous_quantile(const ContinuousLaw& law, double u) {
  return std::visit(overloaded{
                        [u](const Exponential& d) { return -std::log1p(-u) / d.rate; },
                        [u](const Uniform& d) { return d.lo + (d.hi - d.lo) * u; },
                        [u](const Pareto& d) { return d.scale * std::pow(1.0 - u, -1.0 / d.shape); },
                    },
                    law);
}

inline double continuous_cdf(const ContinuousLaw& law, double w) {
  return std::visit(overloaded{
                        [w](const Exponential& d) { return w <= 0 ? 0.0 : -std::expm1(-d.rate * w); },
                        [w](const Uniform& d) {
                          if (w <= d.lo) return 0.0;
                          if (w >= d.hi) return 1.0;
                          return (w - d.lo) / (d.hi - d.lo);
                        },
                        [w](const Pareto& d) { return w <= d.scale ? 0.0 : 1.0 - std::pow(d.scale / w, d.shape); },
                    },
                    law);
}

inline double continuous_mean(const ContinuousLaw& law) {
  return std::visit(overloaded{
                        [](const Exponential& d) { return 1.0 / d.rate; },
                        [](const Uniform& d) { return 0.5 * (d.lo + d.hi); },
                        [](const Pareto& d) { return d.shape > 1 ? d.shape * d.scale / (d.shape - 1) : kInfinity; },
                    },
                    law);
}

inline double continuous_sup(const ContinuousLaw& law) {
  return std::visit(overloaded{
                        [](const Exponential&) { return kInfinity; },
                        [](const Uniform& d) { return d.hi; },
                        [](const Pareto&) { return kInfinity; },
                    },
                    law);
}

}  // namespace detail

inline void validate(const DistributionSpec& dist) {
  std::visit(detail::overloaded{
                 [](const TwoPoint& d) {
                   if (!(d.p >= 0 && d.p <= 1)) throw InvalidSpec("two-point probability must lie in [0,1]");
                   if (!detail::finite_nonneg(d.a) || !detail::finite_nonneg(d.b))
                     throw InvalidSpec("two-point atoms must be finite and non-negative");
                 },
                 [](const ZeroAtom& d) {
                   if (!(d.p0 >= 0 && d.p0 < 1)) throw InvalidSpec("zero-atom mass must lie in [0,1)");
                   detail::validate_continuous(d.tail);
                 },
                 [](const auto& d) { detail::validate_continuous(ContinuousLaw{d}); },
             },
             dist);
}

// Inverse CDF, u in (0,1).
inline double quantile(const DistributionSpec& dist, double u) {
  return std::visit(detail::overloaded{
                        [u](const TwoPoint& d) { return u < d.p ? d.a : d.b; },
                        [u](const ZeroAtom& d) {
                          if (u < d.p0) return 0.0;
                          return detail::continuous_quantile(d.tail, (u - d.p0) / (1.0 - d.p0));
                        },
                        [u](const auto& d) { return detail::continuous_quantile(ContinuousLaw{d}, u); },
                    },
                    dist);
}

inline double cdf(const DistributionSpec& dist, double w) {
  return std::visit(detail::overloaded{
                        [w](const TwoPoint& d) {
                          double c = 0;
                          if (w >= d.a) c += d.p;
                          if (w >= d.b) c += 1.0 - d.p;
                          return c;
                        },
                        [w](const ZeroAtom& d) {
                          if (w < 0) return 0.0;
                          return d.p0 + (1.0 - d.p0) * detail::continuous_cdf(d.tail, w);
                        },
                        [w](const auto& d) { return detail::continuous_cdf(ContinuousLaw{d}, w); },
                    },
                    dist);
}

inline double mean(const DistributionSpec& dist) {
  return std::visit(detail::overloaded{
                        [](const TwoPoint& d) { return d.p * d.a + (1.0 - d.p) * d.b; },
                        [](const ZeroAtom& d) { return (1.0 - d.p0) * detail::continuous_mean(d.tail); },
                        [](const auto& d) { return detail::continuous_mean(ContinuousLaw{d}); },
                    },
                    dist);
}

// Essential supremum of the law.
inline double lambda_plus(const DistributionSpec& dist) {
  return std::visit(detail::overloaded{
                        [](const TwoPoint& d) {
                          double s = 0;
                          if (d.p > 0) s = std::max(s, d.a);
                          if (d.p < 1) s = std::max(s, d.b);
                          return s;
                        },
                        [](const ZeroAtom& d) { return detail::continuous_sup(d.tail); },
                        [](const auto& d) { return detail::continuous_sup(ContinuousLaw{d}); },
                    },
                    dist);
}

inline double zero_mass(const DistributionSpec& dist) {
  return std::visit(detail::overloaded{
                        [](const TwoPoint& d) {
                          double m = 0;
                          if (d.a == 0) m += d.p;
                          if (d.b == 0) m += 1.0 - d.p;
                          return m;
                        },
                        [](const ZeroAtom& d) { return d.p0; },
                        [](const auto&) { return 0.0; },
                    },
                    dist);
}

inline bool is_atomless(const DistributionSpec& dist) {
  return std::visit(detail::overloaded{
                        [](const TwoPoint&) { return false; },
                        [](const ZeroAtom& d) { return d.p0 == 0.0; },
                        [](const auto&) { return true; },
                    },
                    dist);
}

// (mean + ess sup) / 2; only defined for bounded weights.
inline double shape_bound_constant(const DistributionSpec& dist) {
  const double lam = lambda_plus(dist);
  if (!std::isfinite(lam)) throw UnboundedSupport("weights have unbounded support");
  return 0.5 * (mean(dist) + lam);
}

inline std::string describe(const DistributionSpec& dist) {
  std::ostringstream os;
  os.precision(17);
  auto cont = [&os](const ContinuousLaw& law) {
    std::visit(detail::overloaded{
                   [&os](const Exponential& d) { os << "Exponential(" << d.rate << ')'; },
                   [&os](const Uniform& d) { os << "Uniform(" << d.lo << ',' << d.hi << ')'; },
                   [&os](const Pareto& d) { os << "Pareto(" << d.shape << ',' << d.scale << ')'; },
               },
               law);
  };
  std::visit(detail::overloaded{
                 [&os](const TwoPoint& d) { os << "TwoPoint(" << d.p << ',' << d.a << ',' << d.b << ')'; },
                 [&os, &cont](const ZeroAtom& d) {
                   os << "ZeroAtom(" << d.p0 << ',';
                   cont(d.tail);
                   os << ')';
                 },
                 [&cont](const auto& d) { cont(ContinuousLaw{d}); },
             },
             dist);
  return os.str();
}

}  // namespace fpp
