#pragma once

// Output-light seeded extractors (random-process and explicit) and the
// wrapper that turns one into a condenser for uniform (2,3)-SHELA sources.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "condense/bits.hpp"
#include "condense/checks.hpp"
#include "condense/dist.hpp"
#include "condense/gf2m.hpp"
#include "condense/rational.hpp"
#include "condense/seeded_ext.hpp"

namespace condense {

// ---------------------------------------------------------------------------
// Random-process parameters

/// Parameters of the random process. Logarithms are natural except where a
/// bit length is meant (d, m). "paper" follows the formulas verbatim; "scaled"
/// takes M, p, gamma and R from the caller.
struct RandomProcessParams {
  std::string profile = "paper";
  unsigned n = 0;
  double k = 0;
  long double eps = 0;
  long double N = 0;
  long double K = 0;
  long double D_seed = 0;
  long double M = 0;
  long double R = 0;
  long double p = 0;
  long double gamma = 0;
  long double L_big = 0;
  unsigned d = 0;  // ceil(log2((1 + gamma) p M))
  bool feasible = false;
  double min_feasible_k = 0;  // smallest k with p <= 1

  std::uint64_t M_count() const { return static_cast<std::uint64_t>(std::ceil(M - 1e-9L)); }
  unsigned m_bits() const;
};

class InfeasibleParams : public std::domain_error {
 public:
  InfeasibleParams(const std::string& what, double min_k) : std::domain_error(what), min_k_(min_k) {}
  double min_k() const { return min_k_; }

 private:
  double min_k_;
};

/// Paper formulas at K = 2^k. Throws InfeasibleParams when p > 1.
RandomProcessParams derive_params(unsigned n, double k, double eps);
/// Same with K given directly (need not be a power of two).
RandomProcessParams derive_params_K(unsigned n, long double K, double eps);
/// Desk profile: M = 2^m_bits, caller-chosen p, gamma and threshold R;
/// D_seed = 2^d with d from the ceiling rule.
RandomProcessParams scaled_params(unsigned n, double k, double eps, unsigned m_bits, double p, double gamma,
                                  double R);

struct ConstraintReport {
  std::string profile;
  bool certifying = false;  // paper profile with every row holding
  std::vector<Check> rows;
  bool all_pass() const { return condense::all_pass(rows); }
  std::vector<std::string> failing() const;
};

/// The eight inequalities of the constraint table, in table order.
ConstraintReport validate_constraints(const RandomProcessParams& p);

// ---------------------------------------------------------------------------
// Sampled extractor

/// f(i, s) = S_i[s mod |S_i|] for i in [N], s in [2^d].
class SampledCondenser {
 public:
  SampledCondenser(unsigned n, unsigned m, unsigned d, std::uint64_t M, std::vector<std::vector<std::uint32_t>> sets,
                   std::uint64_t rng_seed);

  SeededExtSpec spec() const { return {n_, d_, m_}; }
  std::uint64_t eval(std::uint64_t x, std::uint64_t s) const {
    detail::check_widths(spec(), x, s);
    const auto& set = sets_[x];
    return set[s % set.size()];
  }

  unsigned n() const { return n_; }
  unsigned m() const { return m_; }
  unsigned d() const { return d_; }
  std::uint64_t M() const { return M_; }
  std::uint64_t rng_seed() const { return rng_seed_; }
  const std::vector<std::vector<std::uint32_t>>& sets() const { return sets_; }
  const std::vector<std::uint32_t>& set(std::uint64_t i) const { return sets_.at(i); }

  std::uint64_t insertions = 0;               // elements added during sampling
  std::vector<std::uint64_t> resampled;       // indices whose first draw was empty

 private:
  unsigned n_, m_, d_;
  std::uint64_t M_;
  std::uint64_t rng_seed_;
  std::vector<std::vector<std::uint32_t>> sets_;
};

inline constexpr unsigned kMaxSampledDrawBits = 30;

/// Each value of [M] enters S_i independently with probability p.
/// An empty S_i is redrawn once; a second empty draw throws.
SampledCondenser sample_output_light(const RandomProcessParams& params, std::uint64_t rng_seed);

struct SampledAudit {
  std::string profile;
  bool certifying = false;
  std::uint64_t min_size = 0, max_size = 0, total_size = 0;
  std::uint64_t max_multiplicity = 0, witness = 0;
  std::vector<Rational> subset_tv;  // f's own seed rule, one per trial
  Rational max_tv = 0;
  Rational max_tv_uniform_element = 0;
  std::uint64_t adversary_set_size = 0;
  Rational adversary_success = 0;
  double wrap_k = 0;
  std::vector<Check> checks;
  bool pass() const { return all_pass(checks); }
};

/// (a) set sizes within (1 +- gamma) p M and (1 + gamma) p M <= 2^d;
/// (b) max_z |{i : z in S_i}| < R; (c) exact TV to uniform for `trials`
/// random K-subsets; (d) greedy position-3 adversary against the wrapped
/// condenser.
SampledAudit audit_sampled(const SampledCondenser& cond, const RandomProcessParams& params, unsigned trials,
                           std::uint64_t rng_seed);

/// Exact TV(f(X, U_d), U_M) for X uniform on the listed inputs.
Rational subset_tv(const SampledCondenser& cond, const std::vector<std::uint64_t>& inputs);

/// max_z |{i : z in S_i}| and the witness z, by counting occurrences.
std::pair<std::uint64_t, std::uint64_t> max_multiplicity(const SampledCondenser& cond);

// ---------------------------------------------------------------------------
// Explicit somewhere-extractor

struct ExplicitCfg {
  unsigned n = 16;
  unsigned d = 3;
  double eps = 0.25;
  std::uint64_t inner_key = 1;

  unsigned n1() const { return n / 4; }
  unsigned n2() const { return 7 * n / 4; }
  unsigned limb_bits() const { return n / 16; }
  static constexpr unsigned limbs = 4;
  double eps0() const { return eps / 4; }
  /// n/2 - ceil(log2(1/eps0)); may be negative for tiny eps.
  int inner_out() const;
  unsigned out_bits() const { return n / 16; }
  void validate() const;
};

/// Explicit extractor on 2n input bits. The inner extractor is the keyed stand-in: a
/// table over 7n/4 + d bits does not fit for any n >= 16.
class ExplicitExt {
 public:
  explicit ExplicitExt(ExplicitCfg cfg);

  const ExplicitCfg& cfg() const { return cfg_; }
  const KeyedExt& inner() const { return inner_; }
  const FieldParams& field() const { return field_; }
  SeededExtSpec spec() const { return {2 * cfg_.n, cfg_.d, cfg_.out_bits()}; }

  /// (Y1, Y2) with Y1 = (U[1..n/8], V[1..n/8]) and Y2 the remaining bits,
  /// U-part in the high half of each.
  std::pair<std::uint64_t, std::uint64_t> split(std::uint64_t x1, std::uint64_t x2) const;
  /// First n/4 bits of the inner output with the last of them set to 1.
  std::uint64_t r2_prime(std::uint64_t y2, std::uint64_t s) const;
  std::uint64_t r2_prime_from_hash(std::uint64_t h, std::uint64_t s) const;
  /// <R2', Y1> over GF(2^(n/16))^4, limbs little-endian.
  std::uint64_t combine(std::uint64_t r2p, std::uint64_t y1) const;

  std::uint64_t eval3(std::uint64_t x1, std::uint64_t x2, std::uint64_t s) const;
  std::uint64_t eval(std::uint64_t x, std::uint64_t s) const {
    detail::check_widths(spec(), x, s);
    return eval3(x >> cfg_.n, x & bits::mask(cfg_.n), s);
  }

 private:
  ExplicitCfg cfg_;
  KeyedExt inner_;
  FieldParams field_;
};

std::uint64_t explicit_ext(std::uint64_t x1, std::uint64_t x2, std::uint64_t s, const ExplicitCfg& cfg);

/// |{Y1 : <R2'(y2, s), Y1> = z}|.
std::uint64_t fiber_count(const ExplicitExt& ext, std::uint64_t s, std::uint64_t y2, std::uint64_t z);
std::uint64_t fiber_count_r2(const ExplicitExt& ext, std::uint64_t r2p, std::uint64_t z);

inline constexpr unsigned kMaxProfileBits = 32;

/// For every Y2 the set of R2' values reachable over all seeds, as a bitmask
/// over the 2^(n/4 - 1) admissible R2' (index r2p >> 1), histogrammed over
/// all Y2. Every exact whole-domain audit of the explicit extractor reduces to this.
struct ExplicitReachProfile {
  std::map<std::uint64_t, std::uint64_t> mask_count;
  std::uint64_t y2_total = 0;
};

ExplicitReachProfile explicit_reach_profile(const ExplicitExt& ext);

/// Exact |{x : exists s, Ext(x, s) = z}| for every z, from the profile.
OutputLightReport audit_explicit_output_light(const ExplicitExt& ext, const ExplicitReachProfile& prof,
                                              std::uint64_t R);

// ---------------------------------------------------------------------------
// Wrapper

/// g(x1, x2, x3) = Ext(x1 o x2, first d bits of x3).
template <SeededExtractorLike E>
class WrappedCondenser {
 public:
  WrappedCondenser(const E& ext, unsigned n) : ext_(&ext), n_(n) {
    SeededExtSpec s = ext.spec();
    if (s.n != 2 * n)
      throw std::invalid_argument("wrapped extractor reads " + std::to_string(s.n) + " bits, expected " +
                                  std::to_string(2 * n));
    if (s.d > n) throw std::invalid_argument("seed length " + std::to_string(s.d) + " exceeds block length");
  }

  unsigned n() const { return n_; }
  unsigned d() const { return ext_->spec().d; }
  unsigned m() const { return ext_->spec().m; }
  const E& ext() const { return *ext_; }

  std::uint64_t seed_of(std::uint64_t x3) const { return bits::prefix(x3, n_, d()); }
  std::uint64_t operator()(std::uint64_t x1, std::uint64_t x2, std::uint64_t x3) const {
    return ext_->eval((x1 << n_) | x2, seed_of(x3));
  }

 private:
  const E* ext_;
  unsigned n_;
};

template <SeededExtractorLike E>
WrappedCondenser<E> wrap_condenser(const E& ext, unsigned n) {
  return WrappedCondenser<E>(ext, n);
}

/// log2(eps N^2 / (2R)) with N = 2^n.
inline double wrap_entropy_k(unsigned n, double eps, double R) {
  return std::log2(eps) + 2.0 * n - 1.0 - std::log2(R);
}

/// Samples (x1, x2, x3) and rerandomises the low n - d bits of x3; the output
/// must not move.
template <SeededExtractorLike E>
Check wrap_reads_prefix_only(const WrappedCondenser<E>& g, unsigned samples, std::uint64_t rng_seed) {
  std::mt19937_64 rng(rng_seed);
  unsigned n = g.n(), d = g.d();
  std::uint64_t moved = 0;
  for (unsigned i = 0; i < samples; ++i) {
    std::uint64_t x1 = rng() & bits::mask(n), x2 = rng() & bits::mask(n), x3 = rng() & bits::mask(n);
    std::uint64_t other = (x3 & ~bits::mask(n - d) & bits::mask(n)) | (rng() & bits::mask(n - d));
    if (g(x1, x2, x3) != g(x1, x2, other)) ++moved;
  }
  return {"wrap.prefix_only", "wrap_condenser reads at most d bits of x3", moved == 0,
          {{"samples", samples}, {"d", d}, {"n", n}, {"moved", moved}}};
}

/// Exact TV(g(X), U_m) when one of the first two blocks is uniform, the
/// other is table[uniform block], and x3 is uniform. bad_half is 0 or 1.
template <SeededExtractorLike E>
Rational somewhere_random_tv(const E& ext, unsigned n, unsigned bad_half, const std::vector<std::uint64_t>& table) {
  SeededExtSpec sp = ext.spec();
  if (sp.n != 2 * n) throw std::invalid_argument("extractor input is not two blocks");
  if (bad_half > 1) throw std::invalid_argument("bad half must be 0 or 1");
  std::uint64_t goods = bits::checked_pow2(n, 24, "somewhere-random enumeration");
  if (table.size() != goods) throw std::invalid_argument("bad-half table must have 2^n entries");
  bits::checked_pow2(n + sp.d, 28, "somewhere-random enumeration");
  bits::checked_pow2(sp.m, 24, "somewhere-random output space");
  std::uint64_t seeds = std::uint64_t{1} << sp.d, outs = std::uint64_t{1} << sp.m;
  std::vector<std::uint64_t> counts(outs, 0);
  for (std::uint64_t u = 0; u < goods; ++u) {
    std::uint64_t bad = table[u] & bits::mask(n);
    std::uint64_t x = bad_half == 0 ? (bad << n) | u : (u << n) | bad;
    for (std::uint64_t s = 0; s < seeds; ++s) ++counts[ext.eval(x, s)];
  }
  BigInt total = BigInt(goods) * seeds, num = 0;
  for (auto c : counts) {
    BigInt diff = BigInt(c) * outs - total;
    num += diff < 0 ? BigInt(-diff) : diff;
  }
  return Rational(num, 2 * total * outs);
}

struct Position3Result {
  std::vector<std::uint64_t> order;  // outputs by decreasing reach, ties ascending
  Dist output;
  double smooth_bits = 0;
};

namespace detail {
inline std::vector<std::uint64_t> reach_order(const std::vector<std::uint64_t>& reach) {
  std::vector<std::uint64_t> order(reach.size());
  for (std::uint64_t z = 0; z < reach.size(); ++z) order[z] = z;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return reach[a] > reach[b]; });
  return order;
}

inline Dist counts_to_dist(unsigned m, const std::vector<std::uint64_t>& counts) {
  std::map<std::uint64_t, std::uint64_t> c;
  for (std::uint64_t z = 0; z < counts.size(); ++z)
    if (counts[z]) c[z] = counts[z];
  return Dist::from_counts(m, c);
}
}  // namespace detail

/// Adversary in position 3 of the wrapped condenser: for each (x1, x2) it
/// picks the reachable output that comes first in decreasing-reach order.
template <SeededExtractorLike E>
Position3Result position3_greedy(const E& ext, double eps) {
  SeededExtSpec sp = ext.spec();
  std::uint64_t xs = bits::checked_pow2(sp.n, 24, "position-3 enumeration");
  bits::checked_pow2(sp.n + sp.d, 26, "position-3 enumeration");
  bits::checked_pow2(sp.m, 24, "position-3 output space");
  std::uint64_t seeds = std::uint64_t{1} << sp.d;
  std::vector<std::vector<std::uint64_t>> reach_sets(xs);
  std::vector<std::uint64_t> reach(std::size_t{1} << sp.m, 0);
  for (std::uint64_t x = 0; x < xs; ++x) {
    auto& r = reach_sets[x];
    for (std::uint64_t s = 0; s < seeds; ++s) r.push_back(ext.eval(x, s));
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
    for (auto z : r) ++reach[z];
  }
  Position3Result out;
  out.order = detail::reach_order(reach);
  std::vector<std::uint64_t> rank(reach.size());
  for (std::uint64_t i = 0; i < out.order.size(); ++i) rank[out.order[i]] = i;
  std::vector<std::uint64_t> counts(reach.size(), 0);
  for (auto& r : reach_sets) {
    auto best = *std::min_element(r.begin(), r.end(), [&](auto a, auto b) { return rank[a] < rank[b]; });
    ++counts[best];
  }
  out.output = detail::counts_to_dist(sp.m, counts);
  out.smooth_bits = smooth_min_entropy(out.output, eps).entropy_bits;
  return out;
}

/// Same adversary for the explicit extractor, computed from the reach profile.
Position3Result position3_greedy(const ExplicitExt& ext, const ExplicitReachProfile& prof, double eps);

struct WrapCertificate {
  std::string extractor;
  unsigned n = 0, d = 0, m = 0;
  double eps = 0;
  std::uint64_t R = 0;  // max preimage count + 1
  double k = 0;
  double position3_smooth_bits = 0;
  Rational worst_position12_tv = 0;
  std::uint64_t position12_tables = 0;
  std::vector<Check> checks;
  bool verified() const { return all_pass(checks); }
};

/// Assembles the three-position certificate from an output-lightness report,
/// a position-3 result and the somewhere-random TVs.
WrapCertificate certify_wrap(const std::string& extractor, unsigned n, unsigned d, unsigned m, double eps,
                             const OutputLightReport& light, const Position3Result& pos3,
                             const std::vector<Rational>& position12_tvs, Check prefix_only);

// ---------------------------------------------------------------------------
// JSON

nlohmann::json to_json(const RandomProcessParams& p);
nlohmann::json to_json(const ConstraintReport& r);
nlohmann::json to_json(const SampledCondenser& c);
SampledCondenser sampled_condenser_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SampledAudit& a);
nlohmann::json to_json(const ExplicitCfg& c);
ExplicitCfg explicit_cfg_from_json(const nlohmann::json& j);
nlohmann::json to_json(const WrapCertificate& c);

}  // namespace condense
