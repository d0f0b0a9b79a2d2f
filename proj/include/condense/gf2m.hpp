#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "condense/bits.hpp"

namespace condense {

namespace gf2 {

inline int degree(std::uint64_t p) { return p == 0 ? -1 : 63 - std::countl_zero(p); }

/// Remainder of a modulo b in GF(2)[x].
inline std::uint64_t poly_mod(std::uint64_t a, std::uint64_t b) {
  int db = degree(b);
  if (db < 0) throw std::domain_error("polynomial division by zero");
  for (int da = degree(a); da >= db; da = degree(a)) a ^= b << (da - db);
  return a;
}

/// Carry-less product; callers keep the operands below 2^32.
inline std::uint64_t clmul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = 0;
  while (b) {
    if (b & 1) r ^= a;
    a <<= 1;
    b >>= 1;
  }
  return r;
}

inline bool is_irreducible(std::uint64_t p) {
  int d = degree(p);
  if (d < 1) return false;
  // a reducible polynomial has a factor of degree at most d/2
  std::uint64_t limit = std::uint64_t{1} << (d / 2 + 1);
  for (std::uint64_t q = 2; q < limit; ++q)
    if (poly_mod(p, q) == 0) return false;
  return true;
}

}  // namespace gf2

/// Lexicographically smallest irreducible polynomial of each degree 1..32.
inline constexpr std::array<std::uint64_t, 33> kDefaultPolys = {
    0x0,       0x3,       0x7,        0xb,        0x13,       0x25,       0x43,
    0x83,      0x11b,     0x203,      0x409,      0x805,      0x1009,     0x201b,
    0x4021,    0x8003,    0x1002b,    0x20009,    0x40009,    0x80027,    0x100009,
    0x200005,  0x400003,  0x800021,   0x100001b,  0x2000009,  0x400001b,  0x8000027,
    0x10000003, 0x20000005, 0x40000003, 0x80000009, 0x10000008d};

class FieldParams {
 public:
  FieldParams(unsigned m, std::uint64_t poly) : m_(m), poly_(poly) {
    if (m < 1 || m > 32) throw std::invalid_argument("field degree must be in [1, 32]");
    if (gf2::degree(poly) != static_cast<int>(m) || (poly & 1) == 0)
      throw std::invalid_argument("reduction polynomial 0x" + bits::to_hex(poly) + " is not of degree " +
                                  std::to_string(m) + " with constant term");
    if (!(kDefaultPolys[m] == poly || gf2::is_irreducible(poly)))
      throw std::invalid_argument("reduction polynomial 0x" + bits::to_hex(poly) + " is reducible");
  }

  static FieldParams standard(unsigned m) {
    if (m < 1 || m > 32) throw std::invalid_argument("field degree must be in [1, 32]");
    return FieldParams(m, kDefaultPolys[m]);
  }

  unsigned m() const { return m_; }
  std::uint64_t poly() const { return poly_; }
  std::uint64_t order() const { return std::uint64_t{1} << m_; }

  std::uint64_t mul(std::uint64_t a, std::uint64_t b) const {
    return gf2::poly_mod(gf2::clmul(a, b), poly_);
  }

  std::uint64_t inv(std::uint64_t a) const {
    if (a == 0) throw std::domain_error("inverse of zero");
    // extended Euclid on (poly, a), tracking the coefficient of a
    std::uint64_t r0 = poly_, r1 = a, s0 = 0, s1 = 1;
    while (r1 != 0) {
      int shift = gf2::degree(r0) - gf2::degree(r1);
      if (shift < 0) {
        std::swap(r0, r1);
        std::swap(s0, s1);
        continue;
      }
      r0 ^= r1 << shift;
      s0 ^= s1 << shift;
    }
    // r0 is the gcd, which is 1 for an irreducible modulus
    return gf2::poly_mod(s0, poly_);
  }

  bool operator==(const FieldParams&) const = default;

 private:
  unsigned m_;
  std::uint64_t poly_;
};

struct FieldElem {
  std::uint64_t value;
  FieldParams params;

  FieldElem(std::uint64_t v, FieldParams p) : value(v), params(p) {
    if (v >= p.order()) throw std::invalid_argument("field element wider than m bits");
  }
  bool operator==(const FieldElem&) const = default;
};

inline void require_same_field(const FieldElem& a, const FieldElem& b) {
  if (!(a.params == b.params)) throw std::invalid_argument("field parameters differ");
}

inline FieldElem gf_add(const FieldElem& a, const FieldElem& b) {
  require_same_field(a, b);
  return {a.value ^ b.value, a.params};
}

inline FieldElem gf_mul(const FieldElem& a, const FieldElem& b) {
  require_same_field(a, b);
  return {a.params.mul(a.value, b.value), a.params};
}

inline FieldElem gf_inv(const FieldElem& a) { return {a.params.inv(a.value), a.params}; }

/// sum_i u_i * v_i over GF(2^m), limbs given as raw m-bit values.
inline FieldElem vec_inner_product(std::span<const std::uint64_t> u, std::span<const std::uint64_t> v,
                                   const FieldParams& params) {
  if (u.size() != v.size())
    throw std::invalid_argument("limb vectors of length " + std::to_string(u.size()) + " and " +
                                std::to_string(v.size()));
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] >= params.order() || v[i] >= params.order())
      throw std::invalid_argument("limb wider than m bits");
    acc ^= params.mul(u[i], v[i]);
  }
  return {acc, params};
}

/// Limb j holds bits [j*mb, (j+1)*mb) counted from the least significant end.
inline std::vector<std::uint64_t> to_limbs(std::uint64_t v, unsigned r, unsigned mb) {
  std::vector<std::uint64_t> out(r);
  for (unsigned j = 0; j < r; ++j) out[j] = (v >> (j * mb)) & bits::mask(mb);
  return out;
}

inline std::uint64_t from_limbs(std::span<const std::uint64_t> limbs, unsigned mb) {
  std::uint64_t v = 0;
  for (std::size_t j = 0; j < limbs.size(); ++j) v |= (limbs[j] & bits::mask(mb)) << (j * mb);
  return v;
}

/// Error bound of the inner-product two-source extractor: 2^((n + m - k1 - k2) / 2).
inline double ip_extractor_error(double k1, double k2, unsigned n, unsigned m) {
  if (m == 0 || n % m != 0)
    throw std::invalid_argument("output width " + std::to_string(m) + " does not divide " + std::to_string(n));
  return std::exp2((static_cast<double>(n) + m - k1 - k2) / 2.0);
}

inline nlohmann::json to_json(const FieldParams& p) {
  return {{"m", p.m()}, {"poly", "0x" + bits::to_hex(p.poly())}};
}

inline FieldParams field_params_from_json(const nlohmann::json& j) {
  return FieldParams(j.at("m").get<unsigned>(), bits::from_hex(j.at("poly").get<std::string>()));
}

}  // namespace condense
