#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "json.hpp"

#include "condense/bits.hpp"
#include "condense/dist.hpp"

namespace condense {

struct SeededExtSpec {
  unsigned n = 0;
  unsigned d = 1;
  unsigned m = 0;
  double declared_k = 0;
  double declared_eps = 0;

  void validate() const {
    if (n == 0 || n > 64) throw std::invalid_argument("input width must be in [1, 64]");
    if (d < 1 || d > 63) throw std::invalid_argument("seed width must be in [1, 63]");
    if (m > n) throw std::invalid_argument("output wider than input");
  }
  bool operator==(const SeededExtSpec&) const = default;
};

template <class E>
concept SeededExtractorLike = requires(const E& e, std::uint64_t x, std::uint64_t s) {
  { e.spec() } -> std::convertible_to<SeededExtSpec>;
  { e.eval(x, s) } -> std::convertible_to<std::uint64_t>;
};

namespace detail {
inline void check_widths(const SeededExtSpec& spec, std::uint64_t x, std::uint64_t s) {
  if (x > bits::mask(spec.n)) throw std::invalid_argument("input wider than " + std::to_string(spec.n) + " bits");
  if (s > bits::mask(spec.d)) throw std::invalid_argument("seed wider than " + std::to_string(spec.d) + " bits");
}

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

/// y = T(s) x over GF(2) with T the m x n Toeplitz matrix read from the
/// (n + m - 1)-bit seed s (bit positions 0-based from the most significant end):
/// T[i][j] = s[j - i] for j >= i, and T[i][j] = s[n - 1 + i - j] for j < i.
/// Row 0 is s[0..n-1]; the rest of column 0 is s[n..n+m-2].
class ToeplitzExt {
 public:
  ToeplitzExt(unsigned n, unsigned m, double declared_k = 0, double declared_eps = 0) {
    spec_ = {n, n + m - 1, m, declared_k, declared_eps};
    if (m == 0) throw std::invalid_argument("Toeplitz output width must be positive");
    spec_.validate();
  }

  const SeededExtSpec& spec() const { return spec_; }

  /// Row i of T(s) as an n-bit string, most significant bit = column 0.
  std::uint64_t row(std::uint64_t s, unsigned i) const {
    unsigned n = spec_.n, d = spec_.d;
    std::uint64_t r = 0;
    for (unsigned j = 0; j < n; ++j) {
      unsigned pos = j >= i ? j - i : n - 1 + i - j;
      r = (r << 1) | bits::bit_at(s, d, pos);
    }
    return r;
  }

  std::uint64_t eval(std::uint64_t x, std::uint64_t s) const {
    detail::check_widths(spec_, x, s);
    std::uint64_t y = 0;
    for (unsigned i = 0; i < spec_.m; ++i) y = (y << 1) | (std::popcount(row(s, i) & x) & 1);
    return y;
  }

 private:
  SeededExtSpec spec_;
};

inline constexpr unsigned kMaxTableBits = 26;

/// Fully tabulated random function, entry (x, s) at index (x << d) | s.
class TableExt {
 public:
  TableExt(SeededExtSpec spec, std::uint64_t rng_seed) : spec_(spec), rng_seed_(rng_seed) {
    spec_.validate();
    std::uint64_t size = bits::checked_pow2(spec_.n + spec_.d, kMaxTableBits, "random extractor table");
    table_.resize(size);
    std::mt19937_64 rng(rng_seed);
    for (auto& v : table_) v = static_cast<std::uint32_t>(rng() & bits::mask(spec_.m));
  }

  const SeededExtSpec& spec() const { return spec_; }
  std::uint64_t rng_seed() const { return rng_seed_; }
  std::uint64_t entry(std::uint64_t index) const { return table_.at(index); }

  std::uint64_t eval(std::uint64_t x, std::uint64_t s) const {
    detail::check_widths(spec_, x, s);
    return table_[(x << spec_.d) | s];
  }

 private:
  SeededExtSpec spec_;
  std::uint64_t rng_seed_;
  std::vector<std::uint32_t> table_;
};

/// Heuristic keyed mixing of (x, s) truncated to the top m bits. Not a
/// certified extractor; reports that use it say so.
class KeyedExt {
 public:
  KeyedExt(SeededExtSpec spec, std::uint64_t key) : spec_(spec), key_(key) { spec_.validate(); }

  const SeededExtSpec& spec() const { return spec_; }
  std::uint64_t key() const { return key_; }

  std::uint64_t eval(std::uint64_t x, std::uint64_t s) const {
    detail::check_widths(spec_, x, s);
    return raw(x, s);
  }

  std::uint64_t raw(std::uint64_t x, std::uint64_t s) const { return squeeze(absorb(x), s); }

  /// raw() split in two so callers sweeping many seeds per x hash x once.
  std::uint64_t absorb(std::uint64_t x) const { return detail::mix64(key_ + 0x9e3779b97f4a7c15ULL * (x + 1)); }
  std::uint64_t squeeze(std::uint64_t h, std::uint64_t s) const {
    h = detail::mix64(h ^ (0x632be59bd9b4e019ULL + s * 0xd6e8feb86659fd93ULL));
    return spec_.m == 0 ? 0 : h >> (64 - spec_.m);
  }

 private:
  SeededExtSpec spec_;
  std::uint64_t key_;
};

using AnyExtractor = std::variant<ToeplitzExt, TableExt, KeyedExt>;

inline const SeededExtSpec& spec_of(const AnyExtractor& e) {
  return std::visit([](const auto& x) -> const SeededExtSpec& { return x.spec(); }, e);
}

inline std::uint64_t ext_eval(const AnyExtractor& e, std::uint64_t x, std::uint64_t s) {
  return std::visit([&](const auto& v) { return v.eval(x, s); }, e);
}

inline std::string kind_of(const AnyExtractor& e) {
  switch (e.index()) {
    case 0: return "toeplitz";
    case 1: return "table";
    default: return "keyed";
  }
}

/// Adapter so the variant itself satisfies SeededExtractorLike.
struct AnyExtractorRef {
  const AnyExtractor& e;
  SeededExtSpec spec() const { return spec_of(e); }
  std::uint64_t eval(std::uint64_t x, std::uint64_t s) const { return ext_eval(e, x, s); }
};

struct OutputLightReport {
  std::uint64_t max_preimages = 0;
  std::uint64_t witness_output = 0;
  std::uint64_t R = 0;
  bool exhaustive = false;
  bool certifying = false;
  bool pass = false;
  std::uint64_t pair_total = 0;      // (x, s) pairs evaluated, with multiplicity
  std::uint64_t distinct_total = 0;  // sum over z of |{x : exists s, Ext(x, s) = z}|
  std::uint64_t samples = 0;
  std::map<std::uint64_t, std::uint64_t> counts;  // kept when the output space is small
};

inline constexpr unsigned kMaxExhaustiveAuditBits = 30;
inline constexpr unsigned kMaxKeptCountBits = 16;

/// Counts |{x : exists s, Ext(x, s) = z}| for every z and compares the worst
/// count with R. Exhaustive when n + d <= 30, otherwise sampled over x and
/// flagged non-certifying (counts are then scaled estimates).
template <SeededExtractorLike E>
OutputLightReport audit_output_light(const E& ext, std::uint64_t R, std::uint64_t samples = 1 << 16,
                                     std::uint64_t rng_seed = 1) {
  SeededExtSpec spec = ext.spec();
  OutputLightReport rep;
  rep.R = R;
  rep.exhaustive = spec.n + spec.d <= kMaxExhaustiveAuditBits;
  rep.certifying = rep.exhaustive;
  std::uint64_t seeds = std::uint64_t{1} << spec.d;
  bool dense = spec.m <= 26;
  std::vector<std::uint32_t> dense_counts(dense ? (std::size_t{1} << spec.m) : 0);
  std::unordered_map<std::uint64_t, std::uint64_t> sparse_counts;
  std::vector<std::uint64_t> outs(seeds);

  auto visit_x = [&](std::uint64_t x) {
    for (std::uint64_t s = 0; s < seeds; ++s) outs[s] = ext.eval(x, s);
    rep.pair_total += seeds;
    std::sort(outs.begin(), outs.end());
    auto end = std::unique(outs.begin(), outs.end());
    for (auto it = outs.begin(); it != end; ++it) {
      if (dense)
        ++dense_counts[*it];
      else
        ++sparse_counts[*it];
    }
  };

  if (rep.exhaustive) {
    for (std::uint64_t x = 0, nx = std::uint64_t{1} << spec.n; x < nx; ++x) visit_x(x);
    rep.samples = std::uint64_t{1} << spec.n;
  } else {
    std::mt19937_64 rng(rng_seed);
    for (std::uint64_t i = 0; i < samples; ++i) visit_x(rng() & bits::mask(spec.n));
    rep.samples = samples;
  }

  double scale = rep.exhaustive ? 1.0 : std::ldexp(1.0, static_cast<int>(spec.n)) / static_cast<double>(samples);
  auto record = [&](std::uint64_t z, std::uint64_t c) {
    if (c == 0) return;
    std::uint64_t v = rep.exhaustive ? c : static_cast<std::uint64_t>(std::llround(c * scale));
    rep.distinct_total += v;
    if (v > rep.max_preimages) {
      rep.max_preimages = v;
      rep.witness_output = z;
    }
    if (spec.m <= kMaxKeptCountBits) rep.counts[z] = v;
  };
  if (dense) {
    for (std::uint64_t z = 0; z < dense_counts.size(); ++z) record(z, dense_counts[z]);
  } else {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> sorted(sparse_counts.begin(), sparse_counts.end());
    std::sort(sorted.begin(), sorted.end());
    for (auto& [z, c] : sorted) record(z, c);
  }
  rep.pass = rep.max_preimages < R;
  return rep;
}

inline nlohmann::json to_json(const OutputLightReport& r) {
  nlohmann::json j = {{"max_preimages", r.max_preimages}, {"witness_output", r.witness_output},
                      {"R", r.R},
                      {"exhaustive", r.exhaustive},
                      {"certifying", r.certifying},
                      {"pass", r.pass},
                      {"pair_total", r.pair_total},
                      {"distinct_total", r.distinct_total},
                      {"samples", r.samples}};
  if (!r.counts.empty()) {
    nlohmann::json c = nlohmann::json::object();
    for (auto& [z, v] : r.counts) c[std::to_string(z)] = v;
    j["counts"] = c;
  }
  return j;
}

struct FlatSourceError {
  Rational plain = 0;   // TV(Ext(X, U_d), U_m)
  Rational strong = 0;  // TV((U_d, Ext(X, U_d)), (U_d, U_m))
};

/// Exact extractor errors for X uniform on `support`, seed uniform.
template <SeededExtractorLike E>
FlatSourceError flat_source_error(const E& ext, const std::vector<std::uint64_t>& support) {
  SeededExtSpec spec = ext.spec();
  if (support.empty()) throw std::invalid_argument("empty flat source");
  if (spec.m > 24) throw std::length_error("output space too large for exact TV");
  std::uint64_t seeds = std::uint64_t{1} << spec.d;
  std::uint64_t outs = std::uint64_t{1} << spec.m;
  std::vector<std::uint64_t> total(outs, 0), per_seed(outs, 0);
  FlatSourceError err;
  BigInt xs = support.size();
  // strong error = (1/2^d) sum_s TV(Ext(X, s), U_m); each TV computed with a
  // common denominator |X| * 2^m
  BigInt strong_num = 0;
  for (std::uint64_t s = 0; s < seeds; ++s) {
    std::fill(per_seed.begin(), per_seed.end(), 0);
    for (auto x : support) ++per_seed[ext.eval(x, s)];
    for (std::uint64_t z = 0; z < outs; ++z) {
      total[z] += per_seed[z];
      BigInt diff = BigInt(per_seed[z]) * outs - xs;
      strong_num += diff < 0 ? BigInt(-diff) : diff;
    }
  }
  err.strong = Rational(strong_num, 2 * xs * outs * seeds);
  BigInt plain_num = 0;
  for (std::uint64_t z = 0; z < outs; ++z) {
    BigInt diff = BigInt(total[z]) * outs - xs * seeds;
    plain_num += diff < 0 ? BigInt(-diff) : diff;
  }
  err.plain = Rational(plain_num, 2 * xs * seeds * outs);
  return err;
}

struct FlatSearchResult {
  std::vector<std::uint64_t> support;
  FlatSourceError error;
  bool strong = true;
  std::uint64_t evaluations = 0;
};

/// Randomised hill-climbing over flat sources of size 2^k: swap one member
/// for one non-member whenever that raises the chosen error.
template <SeededExtractorLike E>
FlatSearchResult search_flat_sources(const E& ext, unsigned k, bool strong, unsigned restarts, unsigned steps,
                                     std::uint64_t rng_seed) {
  SeededExtSpec spec = ext.spec();
  std::uint64_t nx = bits::checked_pow2(spec.n, 24, "flat-source search");
  std::uint64_t size = bits::checked_pow2(k, spec.n, "flat source size");
  std::mt19937_64 rng(rng_seed);
  auto score = [&](const FlatSourceError& e) { return strong ? e.strong : e.plain; };
  FlatSearchResult best;
  best.strong = strong;
  for (unsigned r = 0; r < restarts; ++r) {
    std::vector<std::uint64_t> all(nx);
    for (std::uint64_t i = 0; i < nx; ++i) all[i] = i;
    for (std::uint64_t i = nx - 1; i > 0; --i) std::swap(all[i], all[rng() % (i + 1)]);
    std::vector<std::uint64_t> in(all.begin(), all.begin() + size), out(all.begin() + size, all.end());
    auto cur = flat_source_error(ext, in);
    ++best.evaluations;
    for (unsigned it = 0; it < steps && !out.empty(); ++it) {
      std::size_t a = rng() % in.size(), b = rng() % out.size();
      std::swap(in[a], out[b]);
      auto cand = flat_source_error(ext, in);
      ++best.evaluations;
      if (score(cand) > score(cur))
        cur = cand;
      else
        std::swap(in[a], out[b]);
    }
    if (best.support.empty() || score(cur) > score(best.error)) {
      best.error = cur;
      best.support = in;
      std::sort(best.support.begin(), best.support.end());
    }
  }
  return best;
}

inline nlohmann::json to_json(const SeededExtSpec& s) {
  return {{"n", s.n}, {"d", s.d}, {"m", s.m}, {"k", s.declared_k}, {"eps", s.declared_eps}};
}

inline SeededExtSpec seeded_spec_from_json(const nlohmann::json& j) {
  SeededExtSpec s{j.at("n").get<unsigned>(), j.at("d").get<unsigned>(), j.at("m").get<unsigned>(),
                  j.value("k", 0.0), j.value("eps", 0.0)};
  s.validate();
  return s;
}

inline nlohmann::json to_json(const AnyExtractor& e) {
  std::string material = "0";
  if (auto t = std::get_if<TableExt>(&e)) material = bits::to_hex(t->rng_seed());
  if (auto k = std::get_if<KeyedExt>(&e)) material = bits::to_hex(k->key());
  return {{"kind", kind_of(e)}, {"spec", to_json(spec_of(e))}, {"seed_material", material}};
}

inline AnyExtractor extractor_from_json(const nlohmann::json& j) {
  auto kind = j.at("kind").get<std::string>();
  auto spec = seeded_spec_from_json(j.at("spec"));
  std::uint64_t material = bits::from_hex(j.at("seed_material").get<std::string>());
  if (kind == "toeplitz") {
    ToeplitzExt t(spec.n, spec.m, spec.declared_k, spec.declared_eps);
    if (t.spec().d != spec.d) throw std::invalid_argument("Toeplitz seed width must be n + m - 1");
    return t;
  }
  if (kind == "table") return TableExt(spec, material);
  if (kind == "keyed") return KeyedExt(spec, material);
  throw std::invalid_argument("unknown extractor kind: " + kind);
}

}  // namespace condense
