#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>

#include <boost/multiprecision/cpp_int.hpp>

namespace condense {

/// Exact probability type used by every certification path.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline Rational make_rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw std::domain_error("rational with zero denominator");
  return Rational(BigInt(num), BigInt(den));
}

inline Rational make_rational(const BigInt& num, const BigInt& den) {
  if (den == 0) throw std::domain_error("rational with zero denominator");
  return Rational(num, den);
}

/// 2^-bits as an exact rational.
inline Rational pow2_neg(unsigned bits) {
  BigInt den = 1;
  den <<= bits;
  return Rational(BigInt(1), den);
}

/// Binary doubles convert exactly; 0.1 becomes the nearest dyadic rational.
inline Rational rational_from_double(double v) {
  if (!std::isfinite(v)) throw std::domain_error("non-finite probability");
  return Rational(v);
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }
inline double to_double(double d) { return d; }

/// Always "p/q", including integers ("1/1") and zero ("0/1").
inline std::string fraction_string(const Rational& r) {
  return boost::multiprecision::numerator(r).str() + "/" +
         boost::multiprecision::denominator(r).str();
}

/// Accepts "p/q", an integer "p", or a decimal literal ("0.25", "1e-3").
inline Rational parse_rational(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("empty probability string");
  std::string s(text);
  try {
    if (auto slash = s.find('/'); slash != std::string::npos) {
      BigInt num(s.substr(0, slash));
      BigInt den(s.substr(slash + 1));
      return make_rational(num, den);
    }
    if (s.find_first_of(".eE") == std::string::npos) return Rational(BigInt(s));
    // exact decimal: mantissa digits scaled by a power of ten
    std::size_t epos = s.find_first_of("eE");
    std::string mant = s.substr(0, epos);
    long exp10 = epos == std::string::npos ? 0 : std::stol(s.substr(epos + 1));
    bool neg = !mant.empty() && (mant[0] == '-' || mant[0] == '+');
    bool minus = neg && mant[0] == '-';
    if (neg) mant.erase(0, 1);
    std::string digits;
    for (char c : mant) {
      if (c == '.') {
        continue;
      }
      if (c < '0' || c > '9') throw std::invalid_argument("bad digit");
      digits.push_back(c);
    }
    if (auto dot = mant.find('.'); dot != std::string::npos)
      exp10 -= static_cast<long>(mant.size() - dot - 1);
    if (digits.empty()) throw std::invalid_argument("no digits");
    BigInt num(digits);
    BigInt scale = 1;
    for (long i = 0; i < std::labs(exp10); ++i) scale *= 10;
    Rational out = exp10 >= 0 ? Rational(num * scale) : Rational(num, scale);
    return minus ? Rational(-out) : out;
  } catch (const std::domain_error&) {
    throw;
  } catch (const std::exception&) {
    throw std::invalid_argument("malformed probability string: " + s);
  }
}

template <class P>
P probability_from_string(std::string_view text) {
  if constexpr (std::is_same_v<P, Rational>) {
    return parse_rational(text);
  } else {
    return to_double(parse_rational(text));
  }
}

}  // namespace condense
