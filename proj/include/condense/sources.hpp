#pragma once

// Block sources. Blocks are indexed from 0; a tuple of blocks packs into one
// integer with block 0 in the most significant position (see bits.hpp).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

#include "condense/bits.hpp"
#include "condense/dist.hpp"

namespace condense {

/// Largest number of bits enumerated exhaustively by this module.
inline constexpr unsigned kMaxEnumBits = 24;

/// f : ({0,1}^n)^ell -> {0,1}^t, stored densely or as a callback on packed input.
class BlockFunctionTable {
 public:
  using Callback = std::function<std::uint64_t(std::uint64_t)>;

  BlockFunctionTable() = default;

  static BlockFunctionTable dense(unsigned n, unsigned ell, unsigned t, std::vector<std::uint32_t> table) {
    BlockFunctionTable f(n, ell, t);
    if (t > 32) throw std::invalid_argument("dense tables hold at most 32 output bits");
    std::uint64_t size = bits::checked_pow2(n * ell, kMaxEnumBits, "dense function table");
    if (table.size() != size) throw std::invalid_argument("table size does not match 2^(n*ell)");
    for (auto v : table)
      if (v > bits::mask(t)) throw std::invalid_argument("table entry exceeds 2^t");
    f.table_ = std::move(table);
    return f;
  }

  static BlockFunctionTable callback(unsigned n, unsigned ell, unsigned t, Callback fn) {
    BlockFunctionTable f(n, ell, t);
    if (!fn) throw std::invalid_argument("empty callback");
    f.fn_ = std::move(fn);
    return f;
  }

  /// Uniformly random dense table; one raw draw per entry.
  static BlockFunctionTable random(unsigned n, unsigned ell, unsigned t, std::mt19937_64& rng) {
    std::uint64_t size = bits::checked_pow2(n * ell, kMaxEnumBits, "random function table");
    std::vector<std::uint32_t> table(size);
    for (auto& v : table) v = static_cast<std::uint32_t>(rng() & bits::mask(t));
    return dense(n, ell, t, std::move(table));
  }

  unsigned n() const { return n_; }
  unsigned ell() const { return ell_; }
  unsigned t() const { return t_; }
  bool is_dense() const { return !fn_; }
  const std::vector<std::uint32_t>& table() const { return table_; }

  std::uint64_t operator()(std::uint64_t packed) const {
    if (!fn_) return table_[packed];
    std::uint64_t v = fn_(packed);
    if (v > bits::mask(t_)) throw std::logic_error("callback output exceeds 2^t");
    return v;
  }

  std::uint64_t eval(std::span<const std::uint64_t> blocks) const {
    if (blocks.size() != ell_) throw std::invalid_argument("wrong number of blocks");
    for (auto b : blocks)
      if (b > bits::mask(n_)) throw std::invalid_argument("block exceeds n bits");
    return (*this)(bits::pack_blocks(blocks, n_));
  }

  BlockFunctionTable to_dense() const {
    if (!fn_) return *this;
    std::uint64_t size = bits::checked_pow2(n_ * ell_, kMaxEnumBits, "materialising a callback");
    std::vector<std::uint32_t> table(size);
    for (std::uint64_t x = 0; x < size; ++x) table[x] = static_cast<std::uint32_t>((*this)(x));
    return dense(n_, ell_, t_, std::move(table));
  }

 private:
  BlockFunctionTable(unsigned n, unsigned ell, unsigned t) : n_(n), ell_(ell), t_(t) {
    if (n == 0 || ell == 0) throw std::invalid_argument("n and ell must be positive");
    if (n * ell > 64) throw std::invalid_argument("n*ell exceeds 64 bits");
    if (t == 0 || t > 64) throw std::invalid_argument("t must lie in [1, 64]");
  }

  unsigned n_ = 0, ell_ = 0, t_ = 0;
  std::vector<std::uint32_t> table_;
  Callback fn_;
};

/// Raw little-endian fixture: ceil(t/8) bytes per entry, entries indexed by packed input.
inline BlockFunctionTable function_from_bytes(unsigned n, unsigned ell, unsigned t, std::span<const std::uint8_t> raw) {
  std::uint64_t size = bits::checked_pow2(n * ell, kMaxEnumBits, "function file");
  unsigned width = (t + 7) / 8;
  if (raw.size() != size * width)
    throw std::invalid_argument("function file has " + std::to_string(raw.size()) + " bytes, expected " +
                                std::to_string(size * width));
  std::vector<std::uint32_t> table(size);
  for (std::uint64_t i = 0; i < size; ++i) {
    std::uint64_t v = 0;
    for (unsigned b = 0; b < width; ++b) v |= std::uint64_t{raw[i * width + b]} << (8 * b);
    table[i] = static_cast<std::uint32_t>(v);
  }
  return BlockFunctionTable::dense(n, ell, t, std::move(table));
}

inline std::vector<std::uint8_t> function_to_bytes(const BlockFunctionTable& f) {
  auto d = f.to_dense();
  unsigned width = (d.t() + 7) / 8;
  std::vector<std::uint8_t> out;
  out.reserve(d.table().size() * width);
  for (auto v : d.table())
    for (unsigned b = 0; b < width; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
  return out;
}

/// A bad block of a fiSHELA source: a constant, or a table indexed by the
/// packed values of all earlier blocks (n*i bits for block i).
struct BadBlock {
  enum class Kind { Fixed, Adaptive };
  Kind kind = Kind::Fixed;
  std::uint64_t value = 0;
  std::vector<std::uint64_t> table;

  static BadBlock fixed(std::uint64_t v) { return {Kind::Fixed, v, {}}; }
  static BadBlock adaptive(std::vector<std::uint64_t> t) { return {Kind::Adaptive, 0, std::move(t)}; }

  std::uint64_t resolve(std::uint64_t prefix) const { return kind == Kind::Fixed ? value : table[prefix]; }
  bool operator==(const BadBlock&) const = default;
};

namespace detail {
inline void check_good_indices(const std::vector<unsigned>& good, unsigned ell) {
  if (!std::is_sorted(good.begin(), good.end()) || std::adjacent_find(good.begin(), good.end()) != good.end())
    throw std::invalid_argument("good indices must be sorted and distinct");
  if (!good.empty() && good.back() >= ell) throw std::invalid_argument("good index out of range");
}
}  // namespace detail

/// Uniform (g, ell)-fiSHELA source: good blocks uniform, each bad block a
/// function of the blocks strictly before it.
struct FiShelaDesc {
  unsigned n = 0, ell = 0;
  std::vector<unsigned> good;
  std::map<unsigned, BadBlock> bad;

  unsigned g() const { return static_cast<unsigned>(good.size()); }
  bool is_good(unsigned i) const { return std::binary_search(good.begin(), good.end(), i); }

  /// Structural check: the bad blocks are exactly the complement of the good
  /// ones and every adaptive table has domain 2^(n*i), so it can only read
  /// earlier blocks.
  void validate() const {
    if (n == 0 || ell == 0 || n * ell > 64) throw std::invalid_argument("bad fiSHELA dimensions");
    detail::check_good_indices(good, ell);
    for (unsigned i = 0; i < ell; ++i) {
      bool has_bad = bad.count(i) > 0;
      if (has_bad == is_good(i)) throw std::invalid_argument("block " + std::to_string(i) + " must be good xor bad");
    }
    for (auto& [i, b] : bad) {
      if (b.kind == BadBlock::Kind::Fixed) {
        if (b.value > bits::mask(n)) throw std::invalid_argument("fixed value exceeds n bits");
        continue;
      }
      std::uint64_t size = bits::checked_pow2(n * i, kMaxEnumBits, "adaptive table");
      if (b.table.size() != size)
        throw std::invalid_argument("adaptive table for block " + std::to_string(i) + " must have 2^(n*i) entries");
      for (auto v : b.table)
        if (v > bits::mask(n)) throw std::invalid_argument("adaptive value exceeds n bits");
    }
  }

  /// Packed block tuple produced by the given good values (packed in good-index order).
  std::uint64_t resolve(std::uint64_t good_packed) const {
    std::uint64_t prefix = 0;
    unsigned gi = 0;
    for (unsigned i = 0; i < ell; ++i) {
      std::uint64_t v;
      if (gi < good.size() && good[gi] == i)
        v = bits::block_at(good_packed, n, g(), gi++);
      else
        v = bad.at(i).resolve(prefix);
      prefix = (prefix << n) | v;
    }
    return prefix;
  }

  bool operator==(const FiShelaDesc&) const = default;
};

/// Uniform (g, ell)-NOSF source: each bad block is a function of all good blocks.
struct NosfDesc {
  unsigned n = 0, ell = 0;
  std::vector<unsigned> good;
  std::map<unsigned, std::vector<std::uint64_t>> bad;  // indexed by packed good values

  unsigned g() const { return static_cast<unsigned>(good.size()); }
  bool is_good(unsigned i) const { return std::binary_search(good.begin(), good.end(), i); }

  void validate() const {
    if (n == 0 || ell == 0 || n * ell > 64) throw std::invalid_argument("bad NOSF dimensions");
    detail::check_good_indices(good, ell);
    std::uint64_t size = bits::checked_pow2(n * g(), kMaxEnumBits, "NOSF table");
    for (unsigned i = 0; i < ell; ++i)
      if ((bad.count(i) > 0) == is_good(i))
        throw std::invalid_argument("block " + std::to_string(i) + " must be good xor bad");
    for (auto& [i, t] : bad) {
      if (t.size() != size) throw std::invalid_argument("NOSF table must have 2^(n*g) entries");
      for (auto v : t)
        if (v > bits::mask(n)) throw std::invalid_argument("NOSF value exceeds n bits");
    }
  }

  std::uint64_t resolve(std::uint64_t good_packed) const {
    std::uint64_t out = 0;
    unsigned gi = 0;
    for (unsigned i = 0; i < ell; ++i) {
      std::uint64_t v = (gi < good.size() && good[gi] == i) ? bits::block_at(good_packed, n, g(), gi++)
                                                            : bad.at(i)[good_packed];
      out = (out << n) | v;
    }
    return out;
  }

  bool operator==(const NosfDesc&) const = default;
};

/// Convex combination of fiSHELA sources sharing (n, ell); the form a
/// randomized adversary takes.
struct FiShelaMixture {
  std::vector<std::pair<Rational, FiShelaDesc>> components;

  void validate() const {
    if (components.empty()) throw std::invalid_argument("empty mixture");
    Rational total = 0;
    for (auto& [w, d] : components) {
      if (w <= 0) throw std::invalid_argument("mixture weights must be positive");
      d.validate();
      if (d.n != components[0].second.n || d.ell != components[0].second.ell)
        throw std::invalid_argument("mixture components disagree on dimensions");
      total += w;
    }
    if (total != 1) throw std::invalid_argument("mixture weights sum to " + fraction_string(total));
  }
};

/// Uniform (g, ell)-SHELA source: an index tuple is drawn from index_dist,
/// then the adversary for that tuple runs.
struct ShelaDesc {
  unsigned n = 0, ell = 0, g = 0;
  std::map<std::vector<unsigned>, Rational> index_dist;
  std::map<std::vector<unsigned>, FiShelaDesc> per_tuple;

  void validate() const {
    if (index_dist.empty()) throw std::invalid_argument("empty index distribution");
    Rational total = 0;
    for (auto& [tuple, w] : index_dist) {
      if (w <= 0) throw std::invalid_argument("index weights must be positive");
      if (tuple.size() != g) throw std::invalid_argument("index tuple must have g entries");
      detail::check_good_indices(tuple, ell);
      auto it = per_tuple.find(tuple);
      if (it == per_tuple.end()) throw std::invalid_argument("index tuple without an adversary");
      if (it->second.good != tuple || it->second.n != n || it->second.ell != ell)
        throw std::invalid_argument("adversary does not match its index tuple");
      it->second.validate();
      total += w;
    }
    if (total != 1) throw std::invalid_argument("index weights sum to " + fraction_string(total));
  }
};

using AnySource = std::variant<FiShelaDesc, NosfDesc>;

// ---------------------------------------------------------------------------
// enumeration

/// Calls visit(packed_tuple) once per good assignment (each has weight 2^-(g*n)).
template <class Src, class Visit>
void for_each_outcome(const Src& src, Visit&& visit) {
  std::uint64_t count = bits::checked_pow2(src.n * src.g(), kMaxEnumBits, "good-block enumeration");
  for (std::uint64_t gp = 0; gp < count; ++gp) visit(src.resolve(gp));
}

namespace detail {
template <class Src, class Map>
Dist histogram_dist(const Src& src, unsigned width, Map&& map) {
  std::uint64_t count = bits::checked_pow2(src.n * src.g(), kMaxEnumBits, "good-block enumeration");
  std::map<std::uint64_t, std::uint64_t> counts;
  if (width <= 20) {
    std::vector<std::uint64_t> dense(std::size_t{1} << width, 0);
    for (std::uint64_t gp = 0; gp < count; ++gp) ++dense[map(src.resolve(gp))];
    for (std::uint64_t z = 0; z < dense.size(); ++z)
      if (dense[z]) counts.emplace_hint(counts.end(), z, dense[z]);
  } else {
    std::unordered_map<std::uint64_t, std::uint64_t> sparse;
    for (std::uint64_t gp = 0; gp < count; ++gp) ++sparse[map(src.resolve(gp))];
    counts.insert(sparse.begin(), sparse.end());
  }
  return Dist::from_counts(width, counts);
}
}  // namespace detail

/// Exact distribution of the packed block tuple.
template <class Src>
Dist joint_dist(const Src& src) {
  src.validate();
  return detail::histogram_dist(src, src.n * src.ell, [](std::uint64_t x) { return x; });
}

inline void check_shape(const BlockFunctionTable& f, unsigned n, unsigned ell) {
  if (f.n() != n || f.ell() != ell)
    throw std::invalid_argument("function shape (" + std::to_string(f.n()) + "," + std::to_string(f.ell()) +
                                ") does not match source (" + std::to_string(n) + "," + std::to_string(ell) + ")");
}

/// Exact distribution of f(X).
template <class Src>
Dist exact_output_dist(const BlockFunctionTable& f, const Src& src) {
  src.validate();
  check_shape(f, src.n, src.ell);
  return detail::histogram_dist(src, f.t(), [&](std::uint64_t x) { return f(x); });
}

inline Dist exact_output_dist(const BlockFunctionTable& f, const AnySource& src) {
  return std::visit([&](auto& s) { return exact_output_dist(f, s); }, src);
}

inline Dist exact_output_dist(const BlockFunctionTable& f, const FiShelaMixture& mix) {
  mix.validate();
  std::vector<std::pair<Rational, Dist>> parts;
  for (auto& [w, d] : mix.components) parts.emplace_back(w, exact_output_dist(f, d));
  return mixture(parts);
}

/// Splits a SHELA source into its fixed-index components, weighted by index_dist.
inline FiShelaMixture decompose_shela(const ShelaDesc& s) {
  s.validate();
  FiShelaMixture mix;
  for (auto& [tuple, w] : s.index_dist) mix.components.emplace_back(w, s.per_tuple.at(tuple));
  return mix;
}

inline Dist exact_output_dist(const BlockFunctionTable& f, const ShelaDesc& s) {
  return exact_output_dist(f, decompose_shela(s));
}

/// Every fiSHELA source is NOSF: tabulate each bad block against the good values.
inline NosfDesc to_nosf(const FiShelaDesc& src) {
  src.validate();
  NosfDesc out{src.n, src.ell, src.good, {}};
  std::uint64_t count = bits::checked_pow2(src.n * src.g(), kMaxEnumBits, "NOSF conversion");
  for (auto& [i, b] : src.bad) out.bad[i].resize(count);
  for (std::uint64_t gp = 0; gp < count; ++gp) {
    std::uint64_t x = src.resolve(gp);
    for (auto& [i, tbl] : out.bad) tbl[gp] = bits::block_at(x, src.n, src.ell, i);
  }
  return out;
}

/// A NOSF source is fiSHELA exactly when each bad block is determined by the
/// blocks before it. Returns the fiSHELA form, or nullopt when some bad block
/// reads a later good block.
inline std::optional<FiShelaDesc> as_fishela(const NosfDesc& src) {
  src.validate();
  FiShelaDesc out{src.n, src.ell, src.good, {}};
  std::uint64_t count = bits::checked_pow2(src.n * src.g(), kMaxEnumBits, "fiSHELA conversion");
  for (auto& [i, tbl] : src.bad) {
    std::uint64_t size = bits::checked_pow2(src.n * i, kMaxEnumBits, "adaptive table");
    std::vector<std::uint64_t> table(size, 0);
    std::vector<bool> seen(size, false);
    bool constant = true;
    for (std::uint64_t gp = 0; gp < count; ++gp) {
      std::uint64_t x = src.resolve(gp);
      std::uint64_t prefix = i == 0 ? 0 : x >> (src.n * (src.ell - i));
      std::uint64_t v = tbl[gp];
      if (seen[prefix] && table[prefix] != v) return std::nullopt;
      seen[prefix] = true;
      table[prefix] = v;
      constant = constant && v == tbl[0];
    }
    out.bad[i] = constant ? BadBlock::fixed(tbl[0]) : BadBlock::adaptive(std::move(table));
  }
  return out;
}

// ---------------------------------------------------------------------------
// almost-CG

/// Minimum over good indices i and reachable prefixes a of
/// H_inf(X_i | X_1..X_{i-1} = a), computed from the exact joint distribution.
inline double min_conditional_entropy(const Dist& joint, unsigned n, unsigned ell, const std::vector<unsigned>& good) {
  if (joint.bit_width() != n * ell) throw std::invalid_argument("joint width must be n*ell");
  detail::check_good_indices(good, ell);
  double worst = static_cast<double>(n);
  for (unsigned i : good) {
    unsigned shift = n * (ell - 1 - i);
    // (prefix, x_i) marginal and prefix marginal
    std::map<std::uint64_t, Rational> prefix_mass;
    std::map<std::pair<std::uint64_t, std::uint64_t>, Rational> pair_mass;
    for (auto& [x, p] : joint.mass()) {
      std::uint64_t prefix = i == 0 ? 0 : x >> (shift + n);
      std::uint64_t xi = (x >> shift) & bits::mask(n);
      prefix_mass[prefix] += p;
      pair_mass[{prefix, xi}] += p;
    }
    for (auto& [key, p] : pair_mass) {
      double h = -std::log2(to_double(p / prefix_mass[key.first]));
      worst = std::min(worst, h);
    }
  }
  return worst;
}

/// True iff every good block has conditional min-entropy >= k given every
/// reachable prefix.
inline bool check_almost_cg(const Dist& joint, unsigned n, unsigned ell, const std::vector<unsigned>& good, double k) {
  return min_conditional_entropy(joint, n, ell, good) >= k - kBoundSlack;
}

template <class Src>
bool check_almost_cg(const Src& src, double k) {
  return check_almost_cg(joint_dist(src), src.n, src.ell, src.good, k);
}

// ---------------------------------------------------------------------------
// sampling and random descriptions

template <class Src>
std::vector<std::uint64_t> sample(const Src& src, std::mt19937_64& rng) {
  std::uint64_t gp = 0;
  for (unsigned j = 0; j < src.g(); ++j) gp = (gp << src.n) | (rng() & bits::mask(src.n));
  return bits::unpack_blocks(src.resolve(gp), src.n, src.ell);
}

/// Random fiSHELA adversary: each bad block is Fixed or Adaptive with equal odds.
inline FiShelaDesc random_fishela(unsigned n, unsigned ell, std::vector<unsigned> good, std::mt19937_64& rng) {
  FiShelaDesc d{n, ell, std::move(good), {}};
  for (unsigned i = 0; i < ell; ++i) {
    if (d.is_good(i)) continue;
    if (i == 0 || rng() % 2 == 0) {
      d.bad[i] = BadBlock::fixed(rng() & bits::mask(n));
    } else {
      std::vector<std::uint64_t> table(bits::checked_pow2(n * i, kMaxEnumBits, "adaptive table"));
      for (auto& v : table) v = rng() & bits::mask(n);
      d.bad[i] = BadBlock::adaptive(std::move(table));
    }
  }
  d.validate();
  return d;
}

inline NosfDesc random_nosf(unsigned n, unsigned ell, std::vector<unsigned> good, std::mt19937_64& rng) {
  NosfDesc d{n, ell, std::move(good), {}};
  std::uint64_t size = bits::checked_pow2(n * d.g(), kMaxEnumBits, "NOSF table");
  for (unsigned i = 0; i < ell; ++i) {
    if (d.is_good(i)) continue;
    auto& t = d.bad[i];
    t.resize(size);
    for (auto& v : t) v = rng() & bits::mask(n);
  }
  d.validate();
  return d;
}

/// Random SHELA source over `tuples` distinct index tuples with integer weights in [1, 10].
inline ShelaDesc random_shela(unsigned n, unsigned ell, unsigned g, unsigned tuples, std::mt19937_64& rng) {
  if (g > ell) throw std::invalid_argument("g exceeds ell");
  std::set<std::vector<unsigned>> chosen;
  std::vector<unsigned> all(ell);
  for (unsigned i = 0; i < ell; ++i) all[i] = i;
  std::uint64_t possible = 1;
  for (unsigned i = 0; i < g; ++i) possible = possible * (ell - i) / (i + 1);
  tuples = static_cast<unsigned>(std::min<std::uint64_t>(tuples, possible));
  while (chosen.size() < tuples) {
    for (unsigned i = 0; i < g; ++i) std::swap(all[i], all[i + rng() % (ell - i)]);
    std::vector<unsigned> t(all.begin(), all.begin() + g);
    std::sort(t.begin(), t.end());
    chosen.insert(t);
  }
  ShelaDesc s{n, ell, g, {}, {}};
  std::vector<std::uint64_t> weights;
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < chosen.size(); ++i) total += weights.emplace_back(1 + rng() % 10);
  std::size_t i = 0;
  for (auto& t : chosen) {
    s.index_dist[t] = make_rational(BigInt(weights[i++]), BigInt(total));
    s.per_tuple[t] = random_fishela(n, ell, t, rng);
  }
  return s;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const BlockFunctionTable& f) {
  if (!f.is_dense()) throw std::invalid_argument("callback functions are not serialisable");
  return {{"n", f.n()}, {"ell", f.ell()}, {"t", f.t()}, {"table", f.table()}};
}

inline BlockFunctionTable function_from_json(const nlohmann::json& j) {
  return BlockFunctionTable::dense(j.at("n"), j.at("ell"), j.at("t"), j.at("table").get<std::vector<std::uint32_t>>());
}

inline nlohmann::json to_json(const BadBlock& b) {
  if (b.kind == BadBlock::Kind::Fixed) return {{"kind", "fixed"}, {"value", b.value}};
  return {{"kind", "adaptive"}, {"table", b.table}};
}

inline BadBlock bad_block_from_json(const nlohmann::json& j) {
  auto kind = j.at("kind").get<std::string>();
  if (kind == "fixed") return BadBlock::fixed(j.at("value"));
  if (kind == "adaptive") return BadBlock::adaptive(j.at("table").get<std::vector<std::uint64_t>>());
  throw std::invalid_argument("unknown bad block kind: " + kind);
}

inline nlohmann::json to_json(const FiShelaDesc& d) {
  nlohmann::json bad = nlohmann::json::object();
  for (auto& [i, b] : d.bad) bad[std::to_string(i)] = to_json(b);
  return {{"type", "fishela"}, {"n", d.n}, {"ell", d.ell}, {"good", d.good}, {"bad", bad}};
}

inline FiShelaDesc fishela_from_json(const nlohmann::json& j) {
  FiShelaDesc d{j.at("n"), j.at("ell"), j.at("good").get<std::vector<unsigned>>(), {}};
  for (auto& [k, v] : j.at("bad").items()) d.bad[static_cast<unsigned>(std::stoul(k))] = bad_block_from_json(v);
  d.validate();
  return d;
}

inline nlohmann::json to_json(const NosfDesc& d) {
  nlohmann::json bad = nlohmann::json::object();
  for (auto& [i, t] : d.bad) bad[std::to_string(i)] = t;
  return {{"type", "nosf"}, {"n", d.n}, {"ell", d.ell}, {"good", d.good}, {"bad", bad}};
}

inline NosfDesc nosf_from_json(const nlohmann::json& j) {
  NosfDesc d{j.at("n"), j.at("ell"), j.at("good").get<std::vector<unsigned>>(), {}};
  for (auto& [k, v] : j.at("bad").items())
    d.bad[static_cast<unsigned>(std::stoul(k))] = v.get<std::vector<std::uint64_t>>();
  d.validate();
  return d;
}

inline nlohmann::json to_json(const AnySource& s) {
  return std::visit([](auto& d) { return to_json(d); }, s);
}

inline AnySource source_from_json(const nlohmann::json& j) {
  auto type = j.at("type").get<std::string>();
  if (type == "fishela") return fishela_from_json(j);
  if (type == "nosf") return nosf_from_json(j);
  throw std::invalid_argument("unknown source type: " + type);
}

inline nlohmann::json to_json(const FiShelaMixture& m) {
  nlohmann::json arr = nlohmann::json::array();
  for (auto& [w, d] : m.components) arr.push_back({{"weight", fraction_string(w)}, {"source", to_json(d)}});
  return {{"type", "fishela_mixture"}, {"components", arr}};
}

inline FiShelaMixture mixture_from_json(const nlohmann::json& j) {
  FiShelaMixture m;
  for (auto& c : j.at("components"))
    m.components.emplace_back(parse_rational(c.at("weight").get<std::string>()), fishela_from_json(c.at("source")));
  m.validate();
  return m;
}

inline nlohmann::json to_json(const ShelaDesc& s) {
  nlohmann::json comps = nlohmann::json::array();
  for (auto& [tuple, w] : s.index_dist)
    comps.push_back({{"indices", tuple}, {"weight", fraction_string(w)}, {"source", to_json(s.per_tuple.at(tuple))}});
  return {{"type", "shela"}, {"n", s.n}, {"ell", s.ell}, {"g", s.g}, {"components", comps}};
}

inline ShelaDesc shela_from_json(const nlohmann::json& j) {
  ShelaDesc s{j.at("n"), j.at("ell"), j.at("g"), {}, {}};
  for (auto& c : j.at("components")) {
    auto tuple = c.at("indices").get<std::vector<unsigned>>();
    s.index_dist[tuple] = parse_rational(c.at("weight").get<std::string>());
    s.per_tuple[tuple] = fishela_from_json(c.at("source"));
  }
  s.validate();
  return s;
}

}  // namespace condense
