#include "logcascade/fixed.hpp"

#include <cmath>
#include <stdexcept>

#include "logcascade/error.hpp"

namespace logcascade {

static_assert(sizeof(mp_limb_t) == 8, "64-bit GMP limbs required");

Fixed Fixed::from_double(double x) {
  if (!std::isfinite(x) || x < 0.0 || x >= 0x1p64) {
    throw Error(ErrorKind::PreconditionViolation, "fixed point conversion out of range");
  }
  if (x == 0.0) return Fixed{};
  int exp = 0;
  const double mant = std::frexp(x, &exp);
  mpz_class m;
  mpz_set_d(m.get_mpz_t(), std::ldexp(mant, 53));
  const int shift = exp - 53 + kFracBits;
  if (shift >= 0) {
    mpz_mul_2exp(m.get_mpz_t(), m.get_mpz_t(), static_cast<mp_bitcnt_t>(shift));
  } else {
    mpz_fdiv_q_2exp(m.get_mpz_t(), m.get_mpz_t(), static_cast<mp_bitcnt_t>(-shift));
  }
  return from_scaled(m);
}

Fixed Fixed::from_scaled(const mpz_class& scaled) {
  if (sgn(scaled) < 0 || mpz_sizeinbase(scaled.get_mpz_t(), 2) > 320) {
    throw Error(ErrorKind::PreconditionViolation, "fixed point value out of range");
  }
  Limbs frac{};
  for (int i = 0; i < 4; ++i) frac[i] = mpz_getlimbn(scaled.get_mpz_t(), i);
  return Fixed(frac, mpz_getlimbn(scaled.get_mpz_t(), 4));
}

Fixed Fixed::from_ratio(const mpz_class& num, const mpz_class& den) {
  if (sgn(den) <= 0 || sgn(num) < 0) {
    throw Error(ErrorKind::PreconditionViolation, "ratio must be non-negative with positive denominator");
  }
  mpz_class scaled = num;
  mpz_mul_2exp(scaled.get_mpz_t(), scaled.get_mpz_t(), kFracBits + 1);
  scaled += den;
  mpz_class twice = den * 2;
  mpz_fdiv_q(scaled.get_mpz_t(), scaled.get_mpz_t(), twice.get_mpz_t());
  return from_scaled(scaled);
}

mpz_class Fixed::scaled() const {
  mpz_class r = static_cast<unsigned long>(whole_);
  for (int i = 3; i >= 0; --i) {
    mpz_mul_2exp(r.get_mpz_t(), r.get_mpz_t(), 64);
    r += mpz_class(static_cast<unsigned long>(frac_[i]));
  }
  return r;
}

mpq_class Fixed::to_mpq() const {
  mpz_class den = 1;
  mpz_mul_2exp(den.get_mpz_t(), den.get_mpz_t(), kFracBits);
  mpq_class r(scaled(), den);
  r.canonicalize();
  return r;
}

std::string Fixed::hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  {
    std::uint64_t w = whole_;
    std::string head;
    do {
      head.insert(head.begin(), kDigits[w & 0xf]);
      w >>= 4;
    } while (w != 0);
    out = head;
  }
  out.push_back('.');
  for (int i = 3; i >= 0; --i) {
    for (int nib = 15; nib >= 0; --nib) out.push_back(kDigits[(frac_[i] >> (4 * nib)) & 0xf]);
  }
  return out;
}

Fixed Fixed::from_hex(std::string_view text) {
  if (text.starts_with("0x") || text.starts_with("0X")) text.remove_prefix(2);
  const auto dot = text.find('.');
  const std::string_view head = text.substr(0, dot);
  const std::string_view tail = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  if (head.empty() || head.size() > 16 || tail.size() > 64) {
    throw Error(ErrorKind::PreconditionViolation, "malformed fixed point hex literal");
  }
  auto nibble = [](char c) -> std::uint64_t {
    if (c >= '0' && c <= '9') return static_cast<std::uint64_t>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<std::uint64_t>(c - 'a' + 10);
    if (c >= 'A' && c <= 'F') return static_cast<std::uint64_t>(c - 'A' + 10);
    throw Error(ErrorKind::PreconditionViolation, "malformed fixed point hex literal");
  };
  std::uint64_t whole = 0;
  for (char c : head) whole = (whole << 4) | nibble(c);
  Limbs frac{};
  for (std::size_t k = 0; k < tail.size(); ++k) {
    const int bit = 256 - 4 * static_cast<int>(k + 1);
    frac[bit / 64] |= nibble(tail[k]) << (bit % 64);
  }
  return Fixed(frac, whole);
}

Fixed Fixed::times(std::uint64_t k) const noexcept {
  Limbs r{};
  limbs::u128 carry = 0;
  for (int i = 0; i < 4; ++i) {
    carry += static_cast<limbs::u128>(frac_[i]) * k;
    r[i] = static_cast<std::uint64_t>(carry);
    carry >>= 64;
  }
  const std::uint64_t whole = whole_ * k + static_cast<std::uint64_t>(carry);
  return Fixed(r, whole);
}

Fixed Fixed::half() const noexcept {
  Limbs r{};
  for (int i = 0; i < 4; ++i) {
    const std::uint64_t hi = i < 3 ? frac_[i + 1] : whole_;
    r[i] = (frac_[i] >> 1) | (hi << 63);
  }
  return Fixed(r, whole_ >> 1);
}

double circle_signed_gap(const Fixed& t, const Fixed& u) noexcept {
  const Fixed d = circle_sub(t, u);
  const auto& l = d.frac_limbs();
  const bool half = l[3] == (1ULL << 63) && (l[2] | l[1] | l[0]) == 0;
  if ((l[3] >> 63) && !half) return -limbs::to_double(circle_neg(d).frac_limbs());
  return limbs::to_double(d.frac_limbs());
}

namespace {

mpq_class parse_decimal(std::string_view text) {
  mpz_class digits = 0;
  long frac_len = 0;
  long exponent = 0;
  bool seen_dot = false;
  bool seen_digit = false;
  std::size_t i = 0;
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (c >= '0' && c <= '9') {
      digits = digits * 10 + (c - '0');
      if (seen_dot) ++frac_len;
      seen_digit = true;
    } else if (c == '.' && !seen_dot) {
      seen_dot = true;
    } else {
      break;
    }
  }
  if (!seen_digit) throw Error(ErrorKind::PreconditionViolation, "malformed decimal '" + std::string(text) + "'");
  if (i < text.size()) {
    if (text[i] != 'e' && text[i] != 'E') {
      throw Error(ErrorKind::PreconditionViolation, "malformed decimal '" + std::string(text) + "'");
    }
    try {
      exponent = std::stol(std::string(text.substr(i + 1)));
    } catch (const std::exception&) {
      throw Error(ErrorKind::PreconditionViolation, "malformed exponent in '" + std::string(text) + "'");
    }
  }
  const long scale = exponent - frac_len;
  mpz_class ten_pow;
  mpz_ui_pow_ui(ten_pow.get_mpz_t(), 10, static_cast<unsigned long>(scale < 0 ? -scale : scale));
  mpq_class r = scale < 0 ? mpq_class(digits, ten_pow) : mpq_class(digits * ten_pow, 1);
  r.canonicalize();
  return r;
}

}  // namespace

Fixed parse_position(std::string_view text) {
  if (text.starts_with("0x") || text.starts_with("0X")) return Fixed::from_hex(text);
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    const mpz_class num(std::string(text.substr(0, slash)));
    const mpz_class den(std::string(text.substr(slash + 1)));
    return Fixed::from_ratio(num, den);
  }
  return Fixed::from_ratio(parse_decimal(text));
}

mpq_class parse_decimal_exact(std::string_view text) { return parse_decimal(text); }

}  // namespace logcascade
