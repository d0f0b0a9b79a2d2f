#pragma once

// Adversarial sources against a given block function. Every builder ends by
// recomputing the exact output distribution of the emitted source and checking
// the entropy bound against it; nothing is certified from the construction alone.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "condense/bits.hpp"
#include "condense/checks.hpp"
#include "condense/covering.hpp"
#include "condense/dist.hpp"
#include "condense/sources.hpp"

namespace condense {

using CertSource = std::variant<FiShelaDesc, NosfDesc, FiShelaMixture>;

inline Dist exact_output_dist(const BlockFunctionTable& f, const CertSource& src) {
  return std::visit([&](auto& s) { return exact_output_dist(f, s); }, src);
}

inline nlohmann::json to_json(const CertSource& src) {
  return std::visit([](auto& s) { return to_json(s); }, src);
}

struct CondenseCertificate {
  std::string construction;
  std::string case_name;
  CertSource source;
  double eps = 0;
  std::vector<std::uint64_t> heavy_set;
  Rational hit_prob = 0;
  double bound_bits = 0;    // log2(|D| / (hit_prob - eps))
  double claimed_bits = 0;  // the rate bound the construction promises
  double delta = 0;
  nlohmann::json delta_terms = nlohmann::json::object();
  double smooth_bits = 0;   // exact smooth min-entropy of f(X)
  bool nosf_only = false;
  std::vector<Check> checks;
  nlohmann::json detail = nlohmann::json::object();
  Dist output;

  bool verified() const { return all_pass(checks); }
};

namespace detail {

inline void check_eps(double eps, double lo, double hi, const char* what) {
  if (!(eps >= lo && eps < hi))
    throw std::invalid_argument(std::string(what) + ": eps must lie in [" + std::to_string(lo) + ", " +
                                std::to_string(hi) + ")");
}

/// Distinct outputs of f over all suffixes, with the leading blocks packed in `prefix`.
/// Stops counting once the support exceeds `cap`.
inline std::vector<std::uint64_t> suffix_support(const BlockFunctionTable& f, std::uint64_t prefix,
                                                 unsigned suffix_bits, std::uint64_t cap = UINT64_MAX) {
  std::vector<std::uint64_t> out;
  std::uint64_t count = std::uint64_t{1} << suffix_bits;
  for (std::uint64_t y = 0; y < count; ++y) out.push_back(f((prefix << suffix_bits) | y));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (out.size() > cap) out.resize(cap + 1);
  return out;
}

/// Appends the generic certificate checks and fills output, hit, bound and smooth entropy.
inline void finalize(const BlockFunctionTable& f, CondenseCertificate& cert) {
  std::visit([](auto& s) { s.validate(); }, cert.source);
  cert.checks.push_back({"source.structure", "emitted source is a well-formed description", true, {}});
  cert.output = exact_output_dist(f, cert.source);
  auto bc = tv_entropy_bound_check(cert.output, cert.heavy_set, cert.eps);
  cert.hit_prob = bc.hit_prob;
  cert.bound_bits = bc.bound;
  cert.smooth_bits = bc.smooth_bits;
  cert.checks.push_back({"certificate.tv_bound", "smooth min-entropy <= log2(|D| / (Pr[D] - eps))", bc.holds,
                         {{"smooth_bits", bc.smooth_bits}, {"bound_bits", bc.bound},
                          {"hit_prob", fraction_string(bc.hit_prob)}, {"heavy_set_size", cert.heavy_set.size()}}});
  cert.checks.push_back({"certificate.claimed_rate", "smooth min-entropy <= claimed rate bound",
                         cert.smooth_bits <= cert.claimed_bits + kBoundSlack,
                         {{"smooth_bits", cert.smooth_bits}, {"claimed_bits", cert.claimed_bits}}});
}

inline Check cover_check(const CoverResult& r, const std::string& name) {
  nlohmann::json failed = nlohmann::json::array();
  for (auto& c : r.checks)
    if (!c.pass) failed.push_back(c.name);
  return {name, "greedy cover postconditions", r.ok(), {{"steps", r.steps}, {"bound", r.bound}, {"failed", failed}}};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// (1, ell) sources

/// Adversary for f over ell blocks with one good block. At each level with L
/// blocks left and current output range T_eff: if some value of the next block
/// leaves at most c0 * T_eff^((L-1)/L) outputs, fix it and recurse on the
/// restriction; otherwise cover the (block value -> reachable output) graph
/// greedily and let the remaining blocks steer into the cover.
inline CondenseCertificate build_1l_adversary(const BlockFunctionTable& f, double eps) {
  const double c0 = 1.0, c1 = (1 + eps) / 2;
  detail::check_eps(eps, 0.0, 1.0, "build_1l_adversary");
  if (eps >= c1) throw std::invalid_argument("build_1l_adversary: eps must be below c1");
  const unsigned n = f.n(), ell = f.ell(), t = f.t();
  bits::checked_pow2(n * ell, 26, "build_1l_adversary evaluations");
  bits::checked_pow2(t, kMaxEnumBits, "build_1l_adversary output space");
  const std::uint64_t N = std::uint64_t{1} << n;

  CondenseCertificate cert;
  cert.construction = "shela_1l";
  cert.eps = eps;
  const double cover_term = std::log2(c1 / ((1 - c1) * c0 * (c1 - eps)));
  cert.delta_terms = {{"cover_term", cover_term}, {"recursion_term", cover_term + std::log2(c0) / ell}};
  cert.delta = std::max(cover_term, cover_term + std::log2(c0) / ell);
  cert.claimed_bits = static_cast<double>(t) / ell + cert.delta;

  FiShelaDesc src{n, ell, {}, {}};
  std::uint64_t prefix = 0;
  unsigned i = 0;
  double t_eff = std::exp2(static_cast<double>(t));
  std::vector<std::uint64_t> range;  // current output range; empty = all of [2^t]
  nlohmann::json levels = nlohmann::json::array();

  while (true) {
    unsigned L = ell - i;
    if (L == 1) {
      src.good = {i};
      cert.heavy_set = detail::suffix_support(f, prefix, n);
      cert.case_name = i == 0 ? "base" : "fixed_then_base";
      levels.push_back({{"blocks_left", 1}, {"case", "base"}, {"range", t_eff}});
      double level_claim = std::log2(t_eff) + cert.delta;
      cert.checks.push_back({"lemma.level_bound", "log2(|D|/(1-eps)) <= log2(T_eff) + delta",
                             std::log2(cert.heavy_set.size() / (1 - eps)) <= level_claim + kBoundSlack,
                             {{"level_claim", level_claim}}});
      break;
    }
    double expo = static_cast<double>(L - 1) / L;
    double threshold = c0 * std::pow(t_eff, expo);
    unsigned suffix_bits = n * (L - 1);
    std::optional<std::uint64_t> pick;
    std::vector<std::uint64_t> pick_support;
    for (std::uint64_t x = 0; x < N && !pick; ++x) {
      auto cap = static_cast<std::uint64_t>(std::floor(threshold * (1 + 1e-12) + 1e-12));
      auto s = detail::suffix_support(f, (prefix << n) | x, suffix_bits, cap);
      if (s.size() <= cap) {
        pick = x;
        pick_support = std::move(s);
      }
    }
    if (pick) {
      levels.push_back({{"blocks_left", L}, {"case", "fix"}, {"value", *pick}, {"threshold", threshold},
                        {"support", pick_support.size()}});
      src.bad[i] = BadBlock::fixed(*pick);
      prefix = (prefix << n) | *pick;
      t_eff = static_cast<double>(pick_support.size());
      range = std::move(pick_support);
      ++i;
      continue;
    }

    // cover case
    auto right_index = [&](std::uint64_t z) -> std::uint32_t {
      if (range.empty()) return static_cast<std::uint32_t>(z);
      return static_cast<std::uint32_t>(std::lower_bound(range.begin(), range.end(), z) - range.begin());
    };
    std::vector<std::vector<std::uint32_t>> adj(N);
    for (std::uint64_t x = 0; x < N; ++x)
      for (auto z : detail::suffix_support(f, (prefix << n) | x, suffix_bits)) adj[x].push_back(right_index(z));
    BipartiteGraph g(N, static_cast<std::uint64_t>(t_eff), std::move(adj));
    auto cover = greedy_cover(g, c0, expo, c1);
    for (auto v : cover.chosen) cert.heavy_set.push_back(range.empty() ? v : range[v]);
    std::sort(cert.heavy_set.begin(), cert.heavy_set.end());
    cert.checks.push_back(detail::cover_check(cover, "cover.postconditions"));

    // a(x) = smallest packed suffix whose output lands in D
    std::vector<std::uint64_t> a(N, 0);
    std::uint64_t hits = 0;
    for (std::uint64_t x = 0; x < N; ++x)
      for (std::uint64_t y = 0; y < (std::uint64_t{1} << suffix_bits); ++y)
        if (std::binary_search(cert.heavy_set.begin(), cert.heavy_set.end(),
                               f((((prefix << n) | x) << suffix_bits) | y))) {
          a[x] = y;
          ++hits;
          break;
        }
    src.good = {i};
    for (unsigned j = i + 1; j < ell; ++j) {
      std::vector<std::uint64_t> table(bits::checked_pow2(n * j, kMaxEnumBits, "adaptive table"));
      for (std::uint64_t p = 0; p < table.size(); ++p) {
        std::uint64_t x = bits::block_at(p, n, j, i);
        table[p] = bits::block_at(a[x], n, L - 1, j - i - 1);
      }
      src.bad[j] = BadBlock::adaptive(std::move(table));
    }
    cert.case_name = i == 0 ? "cover" : "fixed_then_cover";
    double level_claim = std::log2(t_eff) / L + cover_term;
    double ceil_claim = std::log2(std::ceil(cover.bound - 1e-9) / (c1 - eps));
    levels.push_back({{"blocks_left", L}, {"case", "cover"}, {"threshold", threshold}, {"cover_bound", cover.bound},
                      {"heavy_set_size", cert.heavy_set.size()}, {"steered", hits}});
    cert.checks.push_back({"cover.hit_at_least_c1", "covered fraction of the good block >= c1",
                           at_least(static_cast<double>(hits), c1 * N), {{"covered", hits}, {"N", N}}});
    cert.checks.push_back({"lemma.level_bound", "log2(|D|/(c1-eps)) <= log2(ceil(cover bound)/(c1-eps))",
                           std::log2(cert.heavy_set.size() / (c1 - eps)) <= ceil_claim + kBoundSlack,
                           {{"level_claim", level_claim}, {"ceiling_claim", ceil_claim}}});
    break;
  }
  cert.detail["levels"] = levels;
  cert.detail["recursion_depth"] = i;
  cert.checks.push_back({"recursion.depth", "recursion depth <= ell - 1", i + 1 <= ell, {{"depth", i}}});
  cert.source = src;
  detail::finalize(f, cert);
  return cert;
}

// ---------------------------------------------------------------------------
// splitting and partitioning

/// Pieces per outer block when ell inner blocks are spread over ell_prime outer
/// blocks as evenly as possible: the first r get c+1, the rest c.
inline std::vector<unsigned> split_layout(unsigned ell, unsigned ell_prime) {
  if (ell_prime == 0 || ell < ell_prime) throw std::invalid_argument("split_layout requires ell >= ell' >= 1");
  unsigned c = ell / ell_prime, r = ell % ell_prime;
  std::vector<unsigned> out(ell_prime, c);
  for (unsigned j = 0; j < r; ++j) ++out[j];
  return out;
}

namespace detail {
inline void check_split(unsigned ell, unsigned ell_prime, unsigned m, unsigned n) {
  auto layout = split_layout(ell, ell_prime);
  if (layout[0] * m > n)
    throw std::invalid_argument("split needs ceil(ell/ell')*m <= n, got " + std::to_string(layout[0] * m) + " > " +
                                std::to_string(n));
}
}  // namespace detail

/// f(Y_1..Y_ell') = h(X_1..X_ell) where each Y_j is cut into its leading m-bit pieces.
inline BlockFunctionTable split_function(const BlockFunctionTable& h, unsigned ell_prime, unsigned n) {
  unsigned m = h.n(), ell = h.ell();
  detail::check_split(ell, ell_prime, m, n);
  auto layout = split_layout(ell, ell_prime);
  auto fn = [h, layout, m, n, ell_prime](std::uint64_t y) {
    std::uint64_t x = 0;
    for (unsigned j = 0; j < ell_prime; ++j) {
      unsigned kept = layout[j] * m;
      std::uint64_t yj = bits::block_at(y, n, ell_prime, j);
      x = bits::concat(x, yj >> (n - kept), kept);
    }
    return h(x);
  };
  auto f = BlockFunctionTable::callback(n, ell_prime, h.t(), fn);
  return n * ell_prime <= kMaxEnumBits ? f.to_dense() : f;
}

/// Turns a (1, ell') fiSHELA source over n-bit blocks into a (g, ell) source over
/// m-bit blocks by cutting every block into pieces. Bad pieces may depend on
/// the discarded low bits of the good block, so the result is a mixture over
/// those bits.
inline FiShelaMixture split_blocks_reduction(const FiShelaDesc& inner, unsigned g, unsigned ell, unsigned m) {
  inner.validate();
  const unsigned n = inner.n, ell_prime = inner.ell;
  if (inner.g() != 1) throw std::invalid_argument("split_blocks_reduction expects one good block");
  if (g == 0 || g * ell_prime > ell) throw std::invalid_argument("split_blocks_reduction needs g/ell <= 1/ell'");
  detail::check_split(ell, ell_prime, m, n);
  auto layout = split_layout(ell, ell_prime);
  std::vector<unsigned> start(ell_prime + 1, 0);
  for (unsigned j = 0; j < ell_prime; ++j) start[j + 1] = start[j] + layout[j];
  const unsigned jg = inner.good[0];
  if (layout[jg] < g) throw std::logic_error("split produced fewer than g good blocks");
  const unsigned discarded = n - layout[jg] * m;
  const std::uint64_t variants = bits::checked_pow2(discarded, 16, "discarded bits of the good block");

  FiShelaMixture mix;
  Rational weight = make_rational(BigInt(1), BigInt(variants));
  for (std::uint64_t d = 0; d < variants; ++d) {
    FiShelaDesc out{m, ell, {}, {}};
    for (unsigned q = 0; q < layout[jg]; ++q) out.good.push_back(start[jg] + q);
    // full Y prefix (blocks 0..i-1) from the packed X prefix of start[i] pieces
    auto y_prefix = [&](std::uint64_t xp, unsigned i) {
      std::uint64_t yp = 0;
      for (unsigned k = 0; k < i; ++k) {
        std::uint64_t yk;
        if (k == jg) {
          std::uint64_t kept = 0;
          for (unsigned q = 0; q < layout[k]; ++q) kept = (kept << m) | bits::block_at(xp, m, start[i], start[k] + q);
          yk = (kept << discarded) | d;
        } else {
          yk = inner.bad.at(k).resolve(yp);
        }
        yp = (yp << n) | yk;
      }
      return yp;
    };
    for (auto& [i, b] : inner.bad) {
      for (unsigned q = 0; q < layout[i]; ++q) {
        unsigned xi = start[i] + q;
        auto piece = [&](std::uint64_t yi) { return (yi >> (n - (q + 1) * m)) & bits::mask(m); };
        if (b.kind == BadBlock::Kind::Fixed) {
          out.bad[xi] = BadBlock::fixed(piece(b.value));
          continue;
        }
        std::vector<std::uint64_t> table(bits::checked_pow2(m * xi, kMaxEnumBits, "split adaptive table"));
        for (std::uint64_t xp = 0; xp < table.size(); ++xp) {
          std::uint64_t head = xp >> (m * q);  // drop pieces of block i itself
          table[xp] = piece(b.resolve(y_prefix(head, i)));
        }
        out.bad[xi] = BadBlock::adaptive(std::move(table));
      }
    }
    mix.components.emplace_back(weight, std::move(out));
  }
  mix.validate();
  return mix;
}

/// h over ell0 blocks of n bits from f over c*ell0 blocks of n/c bits. With
/// block 0 most significant the packed inputs coincide, so h and f share a table.
inline BlockFunctionTable scale_up_reduction(const BlockFunctionTable& f, unsigned c) {
  if (c == 0 || f.ell() % c != 0) throw std::invalid_argument("scale_up_reduction: c must divide the block count");
  unsigned n = f.n() * c, ell0 = f.ell() / c;
  if (f.is_dense()) return BlockFunctionTable::dense(n, ell0, f.t(), f.table());
  return BlockFunctionTable::callback(n, ell0, f.t(), [f](std::uint64_t x) { return f(x); });
}

/// Cuts every n-bit block into c pieces: a (g, ell) source becomes (c*g, c*ell).
inline FiShelaDesc partition_source(const FiShelaDesc& src, unsigned c) {
  src.validate();
  if (c == 0 || src.n % c != 0) throw std::invalid_argument("partition_source: c must divide n");
  unsigned m = src.n / c;
  FiShelaDesc out{m, src.ell * c, {}, {}};
  for (unsigned i = 0; i < src.ell; ++i) {
    for (unsigned q = 0; q < c; ++q) {
      unsigned xi = i * c + q;
      auto piece = [&](std::uint64_t v) { return (v >> (src.n - (q + 1) * m)) & bits::mask(m); };
      if (src.is_good(i)) {
        out.good.push_back(xi);
        continue;
      }
      const auto& b = src.bad.at(i);
      if (b.kind == BadBlock::Kind::Fixed) {
        out.bad[xi] = BadBlock::fixed(piece(b.value));
        continue;
      }
      std::vector<std::uint64_t> table(bits::checked_pow2(m * xi, kMaxEnumBits, "partitioned table"));
      for (std::uint64_t xp = 0; xp < table.size(); ++xp) table[xp] = piece(b.table[xp >> (m * q)]);
      out.bad[xi] = BadBlock::adaptive(std::move(table));
    }
  }
  out.validate();
  return out;
}

inline NosfDesc partition_source(const NosfDesc& src, unsigned c) {
  src.validate();
  if (c == 0 || src.n % c != 0) throw std::invalid_argument("partition_source: c must divide n");
  unsigned m = src.n / c;
  // the packed good pieces equal the packed good blocks, so tables keep their index
  NosfDesc out{m, src.ell * c, {}, {}};
  for (unsigned i = 0; i < src.ell; ++i)
    for (unsigned q = 0; q < c; ++q) {
      unsigned xi = i * c + q;
      if (src.is_good(i)) {
        out.good.push_back(xi);
        continue;
      }
      auto& tbl = out.bad[xi];
      for (auto v : src.bad.at(i)) tbl.push_back((v >> (src.n - (q + 1) * m)) & bits::mask(m));
    }
  out.validate();
  return out;
}

/// Adversary against h over ell blocks of m bits with g good blocks, at rate
/// 1/floor(ell/g): build the (1, c) adversary for the split function and cut
/// its blocks back into m-bit pieces.
inline CondenseCertificate build_shela_rate_adversary(const BlockFunctionTable& h, unsigned g, double eps) {
  unsigned ell = h.ell(), m = h.n();
  if (g == 0 || g > ell) throw std::invalid_argument("build_shela_rate_adversary: need 1 <= g <= ell");
  unsigned c = ell / g;
  unsigned n = split_layout(ell, c)[0] * m;
  auto f = split_function(h, c, n);
  auto inner = build_1l_adversary(f, eps);
  auto mix = split_blocks_reduction(std::get<FiShelaDesc>(inner.source), g, ell, m);

  CondenseCertificate cert;
  cert.construction = "shela_rate";
  cert.case_name = inner.case_name;
  cert.eps = eps;
  cert.heavy_set = inner.heavy_set;
  cert.delta = inner.delta;
  cert.delta_terms = inner.delta_terms;
  cert.claimed_bits = static_cast<double>(h.t()) / c + inner.delta;
  cert.source = mix;
  cert.detail = {{"outer_blocks", c}, {"outer_bits", n}, {"inner_case", inner.case_name},
                 {"inner_verified", inner.verified()}};
  for (auto& ch : inner.checks) cert.checks.push_back({"inner." + ch.name, ch.invariant, ch.pass, ch.detail});
  detail::finalize(h, cert);
  cert.checks.push_back({"reduction.distribution", "h on the split source equals f on the inner source",
                         cert.output == inner.output, {}});
  return cert;
}

// ---------------------------------------------------------------------------
// (2, 3)-NOSF

struct Nosf23Constants {
  double eps = 0, alpha = 0, c0 = 0, c1 = 0, c2 = 0, c3 = 0, c4 = 0, c5 = 0, c6 = 0;
  std::vector<Check> inequalities;
};

inline Nosf23Constants nosf23_constants(double eps) {
  detail::check_eps(eps, 0.0, 0.25, "nosf23_constants");
  Nosf23Constants k;
  k.eps = eps;
  k.alpha = 0.25 - eps;
  double a = k.alpha;
  k.c0 = 0.25 - a / 2;
  k.c2 = 0.25 + a / 8;
  k.c4 = 1 - a / 4;
  k.c5 = (0.25 - a / 2) / (0.25 + a * a / 16 - a / 4);
  k.c3 = k.c6 = 1 - k.c5;
  k.c1 = k.c3 * k.c5 / ((1 - k.c3 * k.c6 - k.c5) * k.c6);
  auto add = [&](std::string name, bool ok) { k.inequalities.push_back({std::move(name), "constant inequality", ok, {}}); };
  add("eps < c0 <= 1", eps < k.c0 && k.c0 <= 1);
  add("eps < c2*c4", eps < k.c2 * k.c4);
  add("c4 < 1", k.c4 < 1);
  add("c2 < 1/2", k.c2 < 0.5);
  add("c0 <= c5*(1-2c2)^2", k.c0 <= k.c5 * (1 - 2 * k.c2) * (1 - 2 * k.c2) * (1 + 1e-12));
  add("c3*c6 + c5 < 1", k.c3 * k.c6 + k.c5 < 1);
  return k;
}

inline nlohmann::json to_json(const Nosf23Constants& k) {
  return {{"eps", k.eps}, {"alpha", k.alpha}, {"c0", k.c0}, {"c1", k.c1}, {"c2", k.c2}, {"c3", k.c3},
          {"c4", k.c4},   {"c5", k.c5},       {"c6", k.c6}, {"inequalities", to_json(k.inequalities)}};
}

/// Adversary for f over 3 blocks with two good blocks. Cases are tried in the
/// order 2 (steer block 3), 3 (steer block 2 from blocks 1 and 3, NOSF only),
/// then 4, which reduces to 1 (fix block 1).
inline CondenseCertificate build_nosf23_adversary(const BlockFunctionTable& f, double eps) {
  if (f.ell() != 3) throw std::invalid_argument("build_nosf23_adversary needs three blocks");
  if (!(eps > 0 && eps < 0.25)) throw std::invalid_argument("build_nosf23_adversary: eps must lie in (0, 1/4)");
  if (f.n() > 7) throw std::length_error("build_nosf23_adversary: n above 7 exceeds the N^3 budget");
  bits::checked_pow2(f.t(), kMaxEnumBits, "build_nosf23_adversary output space");
  auto k = nosf23_constants(eps);
  const unsigned n = f.n(), t = f.t();
  const std::uint64_t N = std::uint64_t{1} << n, T = std::uint64_t{1} << t;
  const double thr = k.c3 * std::cbrt(static_cast<double>(T));
  auto F = [&](std::uint64_t a, std::uint64_t b, std::uint64_t c) { return f((((a << n) | b) << n) | c); };

  CondenseCertificate cert;
  cert.construction = "nosf23";
  cert.eps = eps;
  cert.detail["constants"] = to_json(k);
  for (auto& c : k.inequalities) cert.checks.push_back({"constants." + c.name, c.invariant, c.pass, c.detail});

  // support of the free coordinate for every pair; `free` is 2 (x3) or 1 (x2)
  std::vector<std::uint32_t> stamp(T, 0);
  std::uint32_t epoch = 0;
  auto pair_supports = [&](int free) {
    std::vector<std::vector<std::uint32_t>> supp(N * N);
    for (std::uint64_t a = 0; a < N; ++a)
      for (std::uint64_t b = 0; b < N; ++b) {
        ++epoch;
        auto& s = supp[a * N + b];
        for (std::uint64_t y = 0; y < N; ++y) {
          std::uint64_t z = free == 2 ? F(a, b, y) : F(a, y, b);
          if (stamp[z] != epoch) {
            stamp[z] = epoch;
            s.push_back(static_cast<std::uint32_t>(z));
          }
        }
        std::sort(s.begin(), s.end());
      }
    return supp;
  };
  auto big_pairs = [&](const std::vector<std::vector<std::uint32_t>>& supp) {
    std::vector<std::uint64_t> out;
    for (std::uint64_t p = 0; p < supp.size(); ++p)
      if (at_least(static_cast<double>(supp[p].size()), thr)) out.push_back(p);
    return out;
  };
  // Cases 2 and 3 share the steering construction
  auto steer = [&](const std::vector<std::vector<std::uint32_t>>& supp, const std::vector<std::uint64_t>& P,
                   int free) {
    std::vector<std::vector<std::uint32_t>> adj;
    for (auto p : P) adj.push_back(supp[p]);
    auto cover = greedy_cover(BipartiteGraph(P.size(), T, std::move(adj)), k.c3, 1.0 / 3, k.c4);
    cert.checks.push_back(detail::cover_check(cover, "cover.postconditions"));
    cert.heavy_set.assign(cover.chosen.begin(), cover.chosen.end());
    std::sort(cert.heavy_set.begin(), cert.heavy_set.end());
    std::vector<std::uint64_t> a(N * N, 0);
    for (std::uint64_t p = 0; p < N * N; ++p)
      for (std::uint64_t y = 0; y < N; ++y) {
        std::uint64_t z = free == 2 ? F(p / N, p % N, y) : F(p / N, y, p % N);
        if (std::binary_search(cert.heavy_set.begin(), cert.heavy_set.end(), z)) {
          a[p] = y;
          break;
        }
      }
    cert.delta = std::log2(k.c4 / ((1 - k.c4) * k.c3 * (k.c2 * k.c4 - eps)));
    cert.detail["pairs"] = P.size();
    cert.detail["cover_bound"] = cover.bound;
    return a;
  };

  auto supp12 = pair_supports(2);
  auto P12 = big_pairs(supp12);
  auto P13 = std::vector<std::uint64_t>{};
  std::vector<std::vector<std::uint32_t>> supp13;
  bool case2 = at_least(static_cast<double>(P12.size()), k.c2 * N * N);
  bool case3 = false;
  if (!case2) {
    supp13 = pair_supports(1);
    P13 = big_pairs(supp13);
    case3 = at_least(static_cast<double>(P13.size()), k.c2 * N * N);
  }
  cert.detail["P12"] = P12.size();
  if (!case2) cert.detail["P13"] = P13.size();

  if (case2) {
    cert.case_name = "case2";
    auto a = steer(supp12, P12, 2);
    cert.source = FiShelaDesc{n, 3, {0, 1}, {{2, BadBlock::adaptive(std::move(a))}}};
  } else if (case3) {
    cert.case_name = "case3";
    cert.nosf_only = true;
    auto a = steer(supp13, P13, 1);
    NosfDesc src{n, 3, {0, 2}, {{1, std::move(a)}}};
    cert.detail["fishela_form"] = as_fishela(src).has_value();
    cert.source = std::move(src);
  } else {
    cert.case_name = "case4_to_1";
    // Q12 / Q13 are the complements of P12 / P13
    std::vector<char> in_p12(N * N, 0), in_p13(N * N, 0);
    for (auto p : P12) in_p12[p] = 1;
    for (auto p : P13) in_p13[p] = 1;
    std::uint64_t best = 0, best_score = 0;
    for (std::uint64_t z = 0; z < N; ++z) {
      std::uint64_t score = 0;
      for (std::uint64_t y = 0; y < N; ++y) score += !in_p12[z * N + y] + !in_p13[z * N + y];
      if (score > best_score) best = z, best_score = score;
    }
    std::vector<std::uint64_t> P2, P3;
    for (std::uint64_t y = 0; y < N; ++y) {
      if (!in_p12[best * N + y]) P2.push_back(y);
      if (!in_p13[best * N + y]) P3.push_back(y);
    }
    double need = (1 - 2 * k.c2) * N;
    if (!at_least(static_cast<double>(P2.size()), need) || !at_least(static_cast<double>(P3.size()), need))
      throw std::logic_error("build_nosf23_adversary: no case fired (|P2|=" + std::to_string(P2.size()) +
                             ", |P3|=" + std::to_string(P3.size()) + ")");
    std::vector<std::uint32_t> colors(P2.size() * P3.size());
    for (std::size_t u = 0; u < P2.size(); ++u)
      for (std::size_t v = 0; v < P3.size(); ++v) colors[u * P3.size() + v] = static_cast<std::uint32_t>(F(best, P2[u], P3[v]));
    ColoredCompleteBipartite h(P2.size(), P3.size(), T, std::move(colors));
    auto cover = greedy_color_cover(h, k.c3, k.c5, k.c6, 1.0 / 3);
    cert.checks.push_back(detail::cover_check(cover, "cover.postconditions"));
    cert.heavy_set.assign(cover.chosen.begin(), cover.chosen.end());
    std::sort(cert.heavy_set.begin(), cert.heavy_set.end());
    cert.delta = std::log2(k.c1 / (k.c0 - eps));
    cert.detail["z1"] = best;
    cert.detail["P2"] = P2.size();
    cert.detail["P3"] = P3.size();
    cert.detail["cover_bound"] = cover.bound;
    cert.source = FiShelaDesc{n, 3, {1, 2}, {{0, BadBlock::fixed(best)}}};
  }
  cert.delta_terms = {{cert.case_name, cert.delta}};
  cert.claimed_bits = 2.0 * t / 3 + cert.delta;
  detail::finalize(f, cert);
  double floor = cert.case_name == "case4_to_1" ? k.c0 : k.c2 * k.c4;
  cert.checks.push_back({"case.hit_floor", "Pr[f(X) in D] >= the case's probability floor",
                         to_double(cert.hit_prob) >= floor - 1e-12,
                         {{"hit_prob", to_double(cert.hit_prob)}, {"floor", floor}}});
  return cert;
}

/// (2c, 3c)-NOSF adversary against h over 3c blocks: run the (2,3) construction
/// on the scaled-up function and partition its source.
inline CondenseCertificate build_nosf_scaled_adversary(const BlockFunctionTable& h, unsigned c, double eps) {
  if (h.ell() != 3 * c) throw std::invalid_argument("build_nosf_scaled_adversary needs 3c blocks");
  auto f0 = scale_up_reduction(h, c);
  auto inner = build_nosf23_adversary(f0, eps);
  CondenseCertificate cert = inner;
  cert.construction = "nosf_scaled";
  cert.checks.clear();
  for (auto& ch : inner.checks) cert.checks.push_back({"inner." + ch.name, ch.invariant, ch.pass, ch.detail});
  if (auto* fs = std::get_if<FiShelaDesc>(&inner.source))
    cert.source = partition_source(*fs, c);
  else
    cert.source = partition_source(std::get<NosfDesc>(inner.source), c);
  cert.detail["scale"] = c;
  detail::finalize(h, cert);
  cert.checks.push_back({"reduction.distribution", "h on the partitioned source equals the scaled function on the inner source",
                         cert.output == inner.output, {}});
  return cert;
}

// ---------------------------------------------------------------------------
// extraction from (2, 3)-SHELA

struct ExtractionResult {
  FiShelaDesc source;
  std::string case_name;
  Rational bias = 0;        // |Pr[f(X) = 0] - 1/2|
  Rational guaranteed = 0;  // floor promised by the case reached
  std::vector<Check> checks;
  nlohmann::json detail = nlohmann::json::object();
  bool verified() const { return all_pass(checks); }
};

struct ExtractionConstants {
  Rational c0 = make_rational(29, 50), c1 = make_rational(3, 5);
  Rational c2() const { return (2 * (1 - c0) - c1) / (1 - c1); }
  Rational floor_bias() const { return std::min({c0, c1, c2()}) - make_rational(1, 2); }
};

/// Source that pins a one-bit f away from uniform by at least 0.08.
inline ExtractionResult build_shela23_extraction_adversary(const BlockFunctionTable& f,
                                                           const ExtractionConstants& k = {}) {
  if (f.t() != 1) throw std::invalid_argument("build_shela23_extraction_adversary needs a one-bit output");
  if (f.ell() != 3) throw std::invalid_argument("build_shela23_extraction_adversary needs three blocks");
  if (f.n() > 7) throw std::length_error("build_shela23_extraction_adversary: n above 7 exceeds the N^3 budget");
  const unsigned n = f.n();
  const std::uint64_t N = std::uint64_t{1} << n, N2 = N * N;
  auto F = [&](std::uint64_t a, std::uint64_t b, std::uint64_t c) { return f((((a << n) | b) << n) | c); };

  // label[p] = 0 (S_0), 1 (S_1) or 2 (S_01) for p = x1*N + x2
  std::vector<std::uint8_t> label(N2);
  std::uint64_t size[3] = {0, 0, 0};
  for (std::uint64_t p = 0; p < N2; ++p) {
    bool zero = false, one = false;
    for (std::uint64_t y = 0; y < N && !(zero && one); ++y) (F(p / N, p % N, y) ? one : zero) = true;
    label[p] = zero && one ? 2 : (one ? 1 : 0);
    ++size[label[p]];
  }
  ExtractionResult res;
  res.detail = {{"S0", size[0]}, {"S1", size[1]}, {"S01", size[2]}, {"c0", fraction_string(k.c0)},
                {"c1", fraction_string(k.c1)}, {"c2", fraction_string(k.c2())}};
  FiShelaDesc src{n, 3, {}, {}};

  std::optional<int> forced;
  for (int b : {0, 1})
    if (!forced && Rational(size[b] + size[2]) >= k.c0 * Rational(N2)) forced = b;
  if (forced) {
    int b = *forced;
    res.case_name = b == 0 ? "case1" : "case2";
    std::vector<std::uint64_t> a(N2, 0);
    for (std::uint64_t p = 0; p < N2; ++p)
      for (std::uint64_t y = 0; y < N; ++y)
        if (static_cast<int>(F(p / N, p % N, y)) == b) {
          a[p] = y;
          break;
        }
    src.good = {0, 1};
    src.bad[2] = BadBlock::adaptive(std::move(a));
    res.guaranteed = k.c0 - make_rational(1, 2);
  } else {
    // graph on x1 x x2 with an edge where the pair fixes the output
    std::vector<bool> heavy(N, false), has0(N, false), has1(N, false);
    std::uint64_t heavy_count = 0;
    for (std::uint64_t u = 0; u < N; ++u) {
      std::uint64_t deg = 0;
      for (std::uint64_t v = 0; v < N; ++v) {
        auto l = label[u * N + v];
        if (l == 2) continue;
        ++deg;
        (l == 0 ? has0 : has1)[u] = true;
      }
      heavy[u] = Rational(deg) > k.c1 * Rational(N);
      heavy_count += heavy[u];
    }
    res.detail["heavy"] = heavy_count;
    std::optional<std::uint64_t> single;
    for (int want : {0, 1}) {
      for (std::uint64_t u = 0; u < N && !single; ++u)
        if (heavy[u] && (want == 0 ? (has0[u] && !has1[u]) : (has1[u] && !has0[u]))) single = u;
      if (single) break;
    }
    if (!single) {
      res.case_name = "case3.1";
      std::vector<std::uint64_t> a(N, 0);
      for (std::uint64_t u = 0; u < N; ++u) {
        if (!heavy[u]) continue;
        for (std::uint64_t v = 0; v < N; ++v)
          if (label[u * N + v] == 0) {
            a[u] = v;
            break;
          }
      }
      src.good = {0, 2};
      src.bad[1] = BadBlock::adaptive(std::move(a));
      res.guaranteed = k.c2() - make_rational(1, 2);
    } else {
      res.case_name = "case3.2";
      res.detail["fixed_u"] = *single;
      src.good = {1, 2};
      src.bad[0] = BadBlock::fixed(*single);
      res.guaranteed = k.c1 - make_rational(1, 2);
    }
    res.checks.push_back({"case3.heavy_floor", "|U_H| >= c2 * N", Rational(heavy_count) >= k.c2() * Rational(N),
                          {{"heavy", heavy_count}}});
  }
  src.validate();
  res.source = src;
  auto d = exact_output_dist(f, src);
  res.bias = abs(d.prob(0) - make_rational(1, 2));
  res.checks.push_back({"extraction.case_floor", "exact bias >= the floor of the case reached",
                        res.bias >= res.guaranteed,
                        {{"bias", fraction_string(res.bias)}, {"guaranteed", fraction_string(res.guaranteed)}}});
  res.checks.push_back({"extraction.bias_floor", "exact bias >= min(c0, c1, c2) - 1/2",
                        res.bias >= k.floor_bias(),
                        {{"bias", fraction_string(res.bias)}, {"floor", fraction_string(k.floor_bias())}}});
  res.detail["output"] = to_json(d);
  return res;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const CondenseCertificate& c) {
  nlohmann::json d = nlohmann::json::array();
  for (auto z : c.heavy_set) d.push_back(z);
  return {{"construction", c.construction},
          {"case", c.case_name},
          {"eps", c.eps},
          {"source", to_json(c.source)},
          {"heavy_set", d},
          {"hit_prob", fraction_string(c.hit_prob)},
          {"bound_bits", c.bound_bits},
          {"claimed_bits", c.claimed_bits},
          {"delta", c.delta},
          {"delta_terms", c.delta_terms},
          {"smooth_bits", c.smooth_bits},
          {"nosf_only", c.nosf_only},
          {"verified", c.verified()},
          {"checks", to_json(c.checks)},
          {"detail", c.detail},
          {"output", to_json(c.output)}};
}

inline nlohmann::json to_json(const ExtractionResult& r) {
  return {{"case", r.case_name},
          {"bias", fraction_string(r.bias)},
          {"bias_value", to_double(r.bias)},
          {"guaranteed", fraction_string(r.guaranteed)},
          {"source", to_json(r.source)},
          {"verified", r.verified()},
          {"checks", to_json(r.checks)},
          {"detail", r.detail}};
}

}  // namespace condense
