#pragma once

// 256-bit binary fixed point for circle positions, interval endpoints and
// exact dyadic measures.

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace logcascade {

inline constexpr int kFracBits = 256;

// Little-endian fraction limbs: value = sum limbs[i] * 2^(64 i - 256).
using Limbs = std::array<std::uint64_t, 4>;

namespace limbs {

using u128 = unsigned __int128;

inline std::uint64_t add(Limbs& a, const Limbs& b) noexcept {
  u128 carry = 0;
  for (int i = 0; i < 4; ++i) {
    carry += static_cast<u128>(a[i]) + b[i];
    a[i] = static_cast<std::uint64_t>(carry);
    carry >>= 64;
  }
  return static_cast<std::uint64_t>(carry);
}

inline std::uint64_t sub(Limbs& a, const Limbs& b) noexcept {
  std::uint64_t borrow = 0;
  for (int i = 0; i < 4; ++i) {
    const std::uint64_t bi = b[i] + borrow;
    const std::uint64_t next = (bi < borrow) || (a[i] < bi) ? 1 : 0;
    a[i] -= bi;
    borrow = next;
  }
  return borrow;
}

// 2^256 - a (mod 2^256).
inline Limbs negate(const Limbs& a) noexcept {
  Limbs r{0, 0, 0, 0};
  sub(r, a);
  return r;
}

inline bool is_zero(const Limbs& a) noexcept {
  return (a[0] | a[1] | a[2] | a[3]) == 0;
}

// True when a < 2^-128, i.e. the integer value occupies only the low half.
inline bool below_guard(const Limbs& a) noexcept { return (a[3] | a[2]) == 0; }

inline bool less(const Limbs& a, const Limbs& b) noexcept {
  for (int i = 3; i >= 0; --i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

// a * k mod 2^256.
inline Limbs mul_small(const Limbs& a, std::uint64_t k) noexcept {
  Limbs r{};
  u128 carry = 0;
  for (int i = 0; i < 4; ++i) {
    carry += static_cast<u128>(a[i]) * k;
    r[i] = static_cast<std::uint64_t>(carry);
    carry >>= 64;
  }
  return r;
}

// Nearest double to the fraction; relative error below 2^-52.
inline double to_double(const Limbs& a) noexcept {
  if (a[3]) return static_cast<double>(a[3]) * 0x1p-64 + static_cast<double>(a[2]) * 0x1p-128;
  if (a[2]) return static_cast<double>(a[2]) * 0x1p-128 + static_cast<double>(a[1]) * 0x1p-192;
  if (a[1]) return static_cast<double>(a[1]) * 0x1p-192 + static_cast<double>(a[0]) * 0x1p-256;
  return static_cast<double>(a[0]) * 0x1p-256;
}

}  // namespace limbs

// Unsigned fixed point number with a 64-bit integer part and 256 fractional
// bits. Arithmetic wraps modulo 2^64; circle points keep whole() == 0.
class Fixed {
 public:
  constexpr Fixed() = default;
  constexpr explicit Fixed(const Limbs& frac, std::uint64_t whole = 0)
      : frac_(frac), whole_(whole) {}

  static Fixed one() { return Fixed(Limbs{0, 0, 0, 0}, 1); }
  // Exact conversion; throws for negative, non-finite or >= 2^64 input.
  static Fixed from_double(double x);
  // Round-to-nearest num/den; requires 0 <= num/den < 2^64.
  static Fixed from_ratio(const mpz_class& num, const mpz_class& den);
  static Fixed from_ratio(const mpq_class& r) {
    return from_ratio(r.get_num(), r.get_den());
  }
  // value * 2^256 (exact).
  static Fixed from_scaled(const mpz_class& scaled);
  // Parses the format produced by hex(): "<whole hex>.<64 hex digits>".
  static Fixed from_hex(std::string_view text);

  const Limbs& frac_limbs() const noexcept { return frac_; }
  std::uint64_t whole() const noexcept { return whole_; }
  Fixed frac() const noexcept { return Fixed(frac_, 0); }
  bool is_zero() const noexcept { return whole_ == 0 && limbs::is_zero(frac_); }

  double to_double() const noexcept {
    return static_cast<double>(whole_) + limbs::to_double(frac_);
  }
  mpz_class scaled() const;  // value * 2^256
  mpq_class to_mpq() const;
  std::string hex() const;

  Fixed& operator+=(const Fixed& o) noexcept {
    whole_ += o.whole_ + limbs::add(frac_, o.frac_);
    return *this;
  }
  Fixed& operator-=(const Fixed& o) noexcept {
    whole_ -= o.whole_ + limbs::sub(frac_, o.frac_);
    return *this;
  }
  friend Fixed operator+(Fixed a, const Fixed& b) noexcept { return a += b; }
  friend Fixed operator-(Fixed a, const Fixed& b) noexcept { return a -= b; }

  // Multiplication by a small integer, wrapping modulo 2^64.
  Fixed times(std::uint64_t k) const noexcept;
  // Floor division by two (bisection midpoints).
  Fixed half() const noexcept;

  friend bool operator==(const Fixed&, const Fixed&) = default;
  friend std::strong_ordering operator<=>(const Fixed& a, const Fixed& b) noexcept {
    if (a.whole_ != b.whole_) return a.whole_ <=> b.whole_;
    for (int i = 3; i >= 0; --i) {
      if (a.frac_[i] != b.frac_[i]) return a.frac_[i] <=> b.frac_[i];
    }
    return std::strong_ordering::equal;
  }

 private:
  Limbs frac_{0, 0, 0, 0};
  std::uint64_t whole_ = 0;
};

// Circle arithmetic on [0,1).
inline Fixed circle_add(const Fixed& a, const Fixed& b) noexcept { return (a + b).frac(); }
inline Fixed circle_sub(const Fixed& a, const Fixed& b) noexcept { return (a - b).frac(); }
inline Fixed circle_neg(const Fixed& a) noexcept { return Fixed(limbs::negate(a.frac_limbs())); }

// Signed double value of t - u taken in (-1/2, 1/2].
double circle_signed_gap(const Fixed& t, const Fixed& u) noexcept;

// Parses "0.3", "1/3" or "0x0.<hex>" style positions.
Fixed parse_position(std::string_view text);

// Exact rational value of a decimal literal such as "0.990195" or "1e-3".
mpq_class parse_decimal_exact(std::string_view text);

}  // namespace logcascade
