#pragma once

// Bitstring conventions shared by every module.
//
// A w-bit string is held in the low w bits of a uint64_t, most significant
// bit first: 0-based position j (1-based j+1) is (v >> (w - 1 - j)) & 1.
// Tuples of blocks pack block 0 into the most significant bits, so
// x1 o x2 o ... o xl reads left to right as one integer.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace condense::bits {

inline constexpr std::uint64_t mask(unsigned w) {
  return w >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << w) - 1);
}

inline constexpr unsigned bit_at(std::uint64_t v, unsigned w, unsigned j) {
  return static_cast<unsigned>((v >> (w - 1 - j)) & 1u);
}

/// 1-based inclusive slice [a, b] of a w-bit string, returned as a (b-a+1)-bit value.
inline std::uint64_t slice(std::uint64_t v, unsigned w, unsigned a, unsigned b) {
  if (a < 1 || b > w || a > b + 1) throw std::out_of_range("bit slice out of range");
  unsigned len = b + 1 - a;
  if (len == 0) return 0;
  return (v >> (w - b)) & mask(len);
}

/// First d bits (from the most significant end) of a w-bit string.
inline std::uint64_t prefix(std::uint64_t v, unsigned w, unsigned d) {
  if (d > w) throw std::out_of_range("prefix longer than string");
  return d == 0 ? 0 : (v >> (w - d)) & mask(d);
}

inline std::uint64_t concat(std::uint64_t hi, std::uint64_t lo, unsigned lo_width) {
  return lo_width >= 64 ? lo : (hi << lo_width) | (lo & mask(lo_width));
}

inline std::uint64_t pack_blocks(std::span<const std::uint64_t> blocks, unsigned n) {
  std::uint64_t packed = 0;
  for (auto b : blocks) packed = (packed << n) | (b & mask(n));
  return packed;
}

inline std::vector<std::uint64_t> unpack_blocks(std::uint64_t packed, unsigned n, unsigned ell) {
  std::vector<std::uint64_t> out(ell);
  for (unsigned i = 0; i < ell; ++i) out[ell - 1 - i] = (packed >> (n * i)) & mask(n);
  return out;
}

/// Block i (0-based) of an ell-block packed tuple.
inline std::uint64_t block_at(std::uint64_t packed, unsigned n, unsigned ell, unsigned i) {
  return (packed >> (n * (ell - 1 - i))) & mask(n);
}

inline std::uint64_t checked_pow2(unsigned e, unsigned limit, const char* what) {
  if (e > limit)
    throw std::length_error(std::string(what) + ": 2^" + std::to_string(e) +
                            " exceeds the enumeration limit 2^" + std::to_string(limit));
  return std::uint64_t{1} << e;
}

/// Lower-case hex with no prefix.
inline std::string to_hex(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  if (v == 0) return "0";
  std::string s;
  while (v) {
    s.insert(s.begin(), digits[v & 15]);
    v >>= 4;
  }
  return s;
}

inline std::uint64_t from_hex(const std::string& s) {
  std::string body = s.rfind("0x", 0) == 0 ? s.substr(2) : s;
  if (body.empty() || body.size() > 16) throw std::invalid_argument("bad hex: " + s);
  std::size_t used = 0;
  std::uint64_t v = std::stoull(body, &used, 16);
  if (used != body.size()) throw std::invalid_argument("bad hex: " + s);
  return v;
}

}  // namespace condense::bits
