#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "json.hpp"

#include "condense/bits.hpp"
#include "condense/rational.hpp"

namespace condense {

/// Tolerance on the total mass of a double-valued distribution.
inline constexpr double kDoubleMassTolerance = 1e-12;
/// Slack used when a bound is compared against a computed entropy.
inline constexpr double kBoundSlack = 1e-9;

/// Finite distribution over t-bit outcomes. Only positive atoms are stored.
template <class P>
class BasicDist {
 public:
  using prob_type = P;

  BasicDist() = default;

  BasicDist(unsigned t, std::map<std::uint64_t, P> mass) : t_(t) {
    if (t > 64) throw std::invalid_argument("bit width above 64");
    P total = 0;
    for (auto& [x, p] : mass) {
      if (p < 0) throw std::invalid_argument("negative probability");
      if (t < 64 && x > bits::mask(t)) throw std::invalid_argument("outcome outside bit width");
      if (p == 0) continue;
      total += p;
      mass_.emplace(x, p);
    }
    if constexpr (std::is_same_v<P, Rational>) {
      if (total != 1) throw std::invalid_argument("probabilities sum to " + fraction_string(total));
    } else {
      if (std::abs(total - 1.0) > kDoubleMassTolerance)
        throw std::invalid_argument("probabilities sum to " + std::to_string(total));
    }
  }

  static BasicDist uniform(unsigned t) {
    std::uint64_t size = bits::checked_pow2(t, 24, "uniform distribution");
    std::map<std::uint64_t, P> mass;
    P each = P(1) / P(size);
    for (std::uint64_t x = 0; x < size; ++x) mass.emplace_hint(mass.end(), x, each);
    return BasicDist(t, std::move(mass));
  }

  static BasicDist point(unsigned t, std::uint64_t x) { return BasicDist(t, {{x, P(1)}}); }

  /// Normalised histogram; total is the sum of the counts.
  static BasicDist from_counts(unsigned t, const std::map<std::uint64_t, std::uint64_t>& counts) {
    std::uint64_t total = 0;
    for (auto& [x, c] : counts) total += c;
    if (total == 0) throw std::invalid_argument("empty histogram");
    std::map<std::uint64_t, P> mass;
    for (auto& [x, c] : counts) {
      if (c == 0) continue;
      if constexpr (std::is_same_v<P, Rational>)
        mass.emplace(x, make_rational(BigInt(c), BigInt(total)));
      else
        mass.emplace(x, static_cast<double>(c) / static_cast<double>(total));
    }
    return BasicDist(t, std::move(mass));
  }

  unsigned bit_width() const { return t_; }
  const std::map<std::uint64_t, P>& mass() const { return mass_; }
  std::size_t support_size() const { return mass_.size(); }

  P prob(std::uint64_t x) const {
    auto it = mass_.find(x);
    return it == mass_.end() ? P(0) : it->second;
  }

  template <class Range>
  P prob_of(const Range& outcomes) const {
    P sum = 0;
    for (auto x : outcomes) sum += prob(x);
    return sum;
  }

  /// Atoms sorted by decreasing probability, ties by ascending outcome.
  std::vector<std::pair<std::uint64_t, P>> sorted_desc() const {
    std::vector<std::pair<std::uint64_t, P>> atoms(mass_.begin(), mass_.end());
    std::stable_sort(atoms.begin(), atoms.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    return atoms;
  }

  bool operator==(const BasicDist& o) const { return t_ == o.t_ && mass_ == o.mass_; }

 private:
  unsigned t_ = 0;
  std::map<std::uint64_t, P> mass_;
};

using Dist = BasicDist<Rational>;
using DistD = BasicDist<double>;

inline DistD to_double_dist(const Dist& d) {
  std::map<std::uint64_t, double> mass;
  double total = 0;
  for (auto& [x, p] : d.mass()) total += (mass[x] = to_double(p));
  // renormalise the rounding error away so the double invariant holds
  for (auto& [x, p] : mass) p /= total;
  return DistD(d.bit_width(), std::move(mass));
}

/// Mixture sum_i w_i * D_i; weights must sum to one.
template <class P>
BasicDist<P> mixture(const std::vector<std::pair<P, BasicDist<P>>>& parts) {
  if (parts.empty()) throw std::invalid_argument("empty mixture");
  unsigned t = parts.front().second.bit_width();
  std::map<std::uint64_t, P> mass;
  for (auto& [w, d] : parts) {
    if (d.bit_width() != t) throw std::invalid_argument("mixture of different bit widths");
    for (auto& [x, p] : d.mass()) mass[x] += w * p;
  }
  return BasicDist<P>(t, std::move(mass));
}

template <class P>
P tv_distance(const BasicDist<P>& a, const BasicDist<P>& b) {
  if (a.bit_width() != b.bit_width())
    throw std::invalid_argument("tv_distance: bit widths " + std::to_string(a.bit_width()) +
                                " and " + std::to_string(b.bit_width()) + " differ");
  P sum = 0;
  auto ia = a.mass().begin();
  auto ib = b.mass().begin();
  while (ia != a.mass().end() || ib != b.mass().end()) {
    if (ib == b.mass().end() || (ia != a.mass().end() && ia->first < ib->first)) {
      sum += ia->second;
      ++ia;
    } else if (ia == a.mass().end() || ib->first < ia->first) {
      sum += ib->second;
      ++ib;
    } else {
      P d = ia->second - ib->second;
      sum += d < 0 ? P(-d) : d;
      ++ia;
      ++ib;
    }
  }
  return sum / 2;
}

template <class P>
double min_entropy(const BasicDist<P>& d) {
  P top = 0;
  for (auto& [x, p] : d.mass()) top = std::max(top, p);
  return -std::log2(to_double(top));
}

template <class P>
struct SmoothEntropyResult {
  double entropy_bits = 0;
  P cap = 0;
  P removed_mass = 0;
};

namespace detail {
template <class P>
P eps_as(double eps) {
  if constexpr (std::is_same_v<P, Rational>)
    return rational_from_double(eps);
  else
    return eps;
}

template <class P>
P pow2_neg_as(unsigned t) {
  if constexpr (std::is_same_v<P, Rational>)
    return pow2_neg(t);
  else
    return std::ldexp(1.0, -static_cast<int>(t));
}
}  // namespace detail

/// Smallest cap c >= 2^-t with sum max(p - c, 0) <= eps, found by water-filling
/// over the atoms in decreasing order. The mass cut above c fits below it
/// because c >= 2^-t leaves room on the remaining outcomes.
template <class P>
SmoothEntropyResult<P> smooth_min_entropy(const BasicDist<P>& d, const P& eps) {
  if (eps < 0 || eps >= 1) throw std::invalid_argument("smoothing eps outside [0,1)");
  auto atoms = d.sorted_desc();
  P floor_cap = detail::pow2_neg_as<P>(d.bit_width());
  P prefix = 0;
  P cap = floor_cap;
  for (std::size_t j = 1; j <= atoms.size(); ++j) {
    prefix += atoms[j - 1].second;
    P next = j < atoms.size() ? atoms[j].second : P(0);
    // cutting at the next atom would remove prefix - j*next
    if (prefix - P(j) * next >= eps) {
      cap = (prefix - eps) / P(j);
      break;
    }
  }
  if (cap < floor_cap) cap = floor_cap;
  SmoothEntropyResult<P> out;
  out.cap = cap;
  for (auto& [x, p] : atoms)
    if (p > cap) out.removed_mass += p - cap;
  out.entropy_bits = -std::log2(to_double(cap));
  return out;
}

template <class P>
  requires(!std::is_same_v<P, double>)
SmoothEntropyResult<P> smooth_min_entropy(const BasicDist<P>& d, double eps) {
  return smooth_min_entropy(d, detail::eps_as<P>(eps));
}

/// Greedy heavy set: heaviest atoms first (ties by ascending outcome) until the
/// collected mass reaches eps. Present exactly when the smooth entropy is below k.
template <class P>
std::optional<std::vector<std::uint64_t>> heavy_set(const BasicDist<P>& d, double k, double eps) {
  if (!(eps > 0 && eps < 1)) throw std::invalid_argument("heavy_set eps outside (0,1)");
  P e = detail::eps_as<P>(eps);
  if (!(smooth_min_entropy(d, e).entropy_bits < k)) return std::nullopt;
  std::vector<std::uint64_t> chosen;
  P got = 0;
  for (auto& [x, p] : d.sorted_desc()) {
    if (got >= e) break;
    chosen.push_back(x);
    got += p;
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

template <class P>
struct BoundCheck {
  double bound = 0;
  bool holds = false;
  P hit_prob = 0;
  double smooth_bits = 0;
};

/// If S carries probability p > eps, the smooth entropy is at most log2(|S|/(p - eps)).
template <class P, class Range>
BoundCheck<P> tv_entropy_bound_check(const BasicDist<P>& d, const Range& S, double eps) {
  std::set<std::uint64_t> uniq(std::begin(S), std::end(S));
  BoundCheck<P> out;
  out.hit_prob = d.prob_of(uniq);
  P e = detail::eps_as<P>(eps);
  if (out.hit_prob <= e)
    throw std::domain_error("tv_entropy_bound_check: Pr[S] = " + std::to_string(to_double(out.hit_prob)) +
                            " does not exceed eps");
  out.bound = std::log2(static_cast<double>(uniq.size())) - std::log2(to_double(P(out.hit_prob - e)));
  out.smooth_bits = smooth_min_entropy(d, e).entropy_bits;
  out.holds = out.smooth_bits <= out.bound + kBoundSlack;
  return out;
}

template <class P>
std::string prob_to_string(const P& p) {
  if constexpr (std::is_same_v<P, Rational>) {
    return fraction_string(p);
  } else {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", p);
    return buf;
  }
}

template <class P>
nlohmann::json to_json(const BasicDist<P>& d) {
  nlohmann::json mass = nlohmann::json::object();
  for (auto& [x, p] : d.mass()) mass[std::to_string(x)] = prob_to_string(p);
  return {{"t", d.bit_width()}, {"mass", mass}};
}

template <class P>
BasicDist<P> dist_from_json(const nlohmann::json& j) {
  unsigned t = j.at("t").get<unsigned>();
  std::map<std::uint64_t, P> mass;
  for (auto& [key, val] : j.at("mass").items())
    mass[std::stoull(key)] = probability_from_string<P>(val.template get<std::string>());
  return BasicDist<P>(t, std::move(mass));
}

}  // namespace condense
