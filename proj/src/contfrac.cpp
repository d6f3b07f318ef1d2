#include "logcascade/contfrac.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <omp.h>

#include "logcascade/error.hpp"
#include "logcascade/rng.hpp"

namespace logcascade::contfrac {

const char* to_string(QuotientSource source) {
  switch (source) {
    case QuotientSource::Explicit: return "explicit";
    case QuotientSource::Periodic: return "periodic";
    case QuotientSource::Expanded: return "expanded";
  }
  return "unknown";
}

PartialQuotientSeq PartialQuotientSeq::explicit_list(std::vector<std::uint64_t> quotients) {
  if (quotients.empty()) throw Error(ErrorKind::PreconditionViolation, "empty quotient list");
  for (std::size_t i = 0; i < quotients.size(); ++i) {
    if (quotients[i] == 0) {
      throw Error(ErrorKind::PreconditionViolation, "quotient a_" + std::to_string(i + 1) + " is zero");
    }
  }
  PartialQuotientSeq pq;
  pq.quotients = std::move(quotients);
  return pq;
}

PartialQuotientSeq PartialQuotientSeq::periodic(std::vector<std::uint64_t> preperiod,
                                                std::vector<std::uint64_t> period, std::size_t depth) {
  if (period.empty()) throw Error(ErrorKind::PreconditionViolation, "empty period");
  if (depth == 0) throw Error(ErrorKind::PreconditionViolation, "depth must be positive");
  for (auto a : preperiod) {
    if (a == 0) throw Error(ErrorKind::PreconditionViolation, "zero quotient in preperiod");
  }
  for (auto a : period) {
    if (a == 0) throw Error(ErrorKind::PreconditionViolation, "zero quotient in period");
  }
  PartialQuotientSeq pq;
  pq.source = QuotientSource::Periodic;
  pq.preperiod = std::move(preperiod);
  pq.period = std::move(period);
  pq.quotients.reserve(depth);
  for (std::size_t i = 1; i <= depth; ++i) pq.quotients.push_back(pq.quotient(i));
  return pq;
}

std::uint64_t PartialQuotientSeq::quotient(std::size_t i) const {
  if (i == 0) throw Error(ErrorKind::PreconditionViolation, "quotients are indexed from 1");
  if (source == QuotientSource::Periodic) {
    if (i <= preperiod.size()) return preperiod[i - 1];
    return period[(i - 1 - preperiod.size()) % period.size()];
  }
  return quotients.at(i - 1);
}

mpq_class PartialQuotientSeq::value() const {
  // Backward evaluation of [0; a_1, ..., a_N].
  mpq_class x = 0;
  for (auto it = quotients.rbegin(); it != quotients.rend(); ++it) {
    x = 1 / (mpq_class(static_cast<unsigned long>(*it)) + x);
  }
  return x;
}

PartialQuotientSeq canonicalize(PartialQuotientSeq pq) {
  if (pq.quotients.size() >= 2 && pq.quotients.back() == 1) {
    pq.quotients.pop_back();
    pq.quotients.back() += 1;
  }
  return pq;
}

namespace {

std::vector<std::uint64_t> parse_list(std::string_view text, const char* what) {
  std::vector<std::uint64_t> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto item = text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    if (item.empty()) throw Error(ErrorKind::PreconditionViolation, std::string("empty entry in ") + what);
    std::uint64_t v = 0;
    for (char c : item) {
      if (c < '0' || c > '9') {
        throw Error(ErrorKind::PreconditionViolation, std::string("non-numeric entry '") + std::string(item) + "' in " + what);
      }
      v = v * 10 + static_cast<std::uint64_t>(c - '0');
    }
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace

PartialQuotientSeq parse_quotients(std::string_view spec, std::size_t depth) {
  constexpr std::string_view kRepeat = ":repeat";
  if (spec.ends_with(kRepeat)) {
    spec.remove_suffix(kRepeat.size());
    std::vector<std::uint64_t> pre;
    if (const auto bar = spec.find('|'); bar != std::string_view::npos) {
      pre = parse_list(spec.substr(0, bar), "preperiod");
      spec = spec.substr(bar + 1);
    }
    return PartialQuotientSeq::periodic(std::move(pre), parse_list(spec, "period"), depth);
  }
  auto list = parse_list(spec, "quotient list");
  if (depth > 0 && list.size() > depth) list.resize(depth);
  return PartialQuotientSeq::explicit_list(std::move(list));
}

FractionalValue FractionalValue::exact(const mpq_class& x) { return FractionalValue{x, x}; }

FractionalValue FractionalValue::dyadic(const mpz_class& m, int bits) {
  mpz_class den = 1;
  mpz_mul_2exp(den.get_mpz_t(), den.get_mpz_t(), static_cast<mp_bitcnt_t>(bits));
  mpq_class lo(m, den);
  mpq_class hi(m + 1, den);
  lo.canonicalize();
  hi.canonicalize();
  return FractionalValue{lo, hi};
}

PartialQuotientSeq expand(const FractionalValue& x, std::size_t n_max) {
  if (sgn(x.lo) <= 0 || x.hi > 1 || x.lo >= 1 || x.lo > x.hi) {
    throw Error(ErrorKind::PreconditionViolation, "expansion input must lie in (0,1)");
  }
  PartialQuotientSeq out;
  out.source = QuotientSource::Expanded;
  // lo = a/b, hi = c/d; the Gauss map reverses the order of the endpoints.
  mpz_class a = x.lo.get_num(), b = x.lo.get_den();
  mpz_class c = x.hi.get_num(), d = x.hi.get_den();
  const bool exact = x.is_exact();
  mpz_class k_lo, r_lo, k_hi, r_hi;
  while (out.quotients.size() < n_max) {
    if (sgn(a) == 0) {
      if (exact) {
        out.terminated = true;
        break;
      }
      throw Error(ErrorKind::PrecisionExhausted,
                  "digit " + std::to_string(out.quotients.size() + 1) + " is not determined by the input interval");
    }
    mpz_fdiv_qr(k_lo.get_mpz_t(), r_lo.get_mpz_t(), b.get_mpz_t(), a.get_mpz_t());
    if (!exact) {
      mpz_fdiv_qr(k_hi.get_mpz_t(), r_hi.get_mpz_t(), d.get_mpz_t(), c.get_mpz_t());
      if (k_lo != k_hi) {
        throw Error(ErrorKind::PrecisionExhausted,
                    "digit " + std::to_string(out.quotients.size() + 1) + " is ambiguous at this precision");
      }
    }
    if (!k_lo.fits_ulong_p()) throw Error(ErrorKind::PrecisionExhausted, "partial quotient exceeds 64 bits");
    out.quotients.push_back(k_lo.get_ui());
    if (exact) {
      b = a;
      a = r_lo;
      c = a;
      d = b;
    } else {
      // New interval [T(hi), T(lo)].
      mpz_class na = r_hi, nb = c, nc = r_lo, nd = a;
      a = std::move(na);
      b = std::move(nb);
      c = std::move(nc);
      d = std::move(nd);
    }
  }
  return out;
}

double log_mpz(const mpz_class& v) {
  if (sgn(v) <= 0) return -std::numeric_limits<double>::infinity();
  long exp = 0;
  const double mant = mpz_get_d_2exp(&exp, v.get_mpz_t());
  return std::log(mant) + static_cast<double>(exp) * std::numbers::ln2;
}

namespace {

mpz_class pow2(unsigned long bits) {
  mpz_class r = 1;
  mpz_mul_2exp(r.get_mpz_t(), r.get_mpz_t(), bits);
  return r;
}

void append_row(std::vector<ConvergentRow>& rows, std::uint64_t a) {
  const mpz_class av = static_cast<unsigned long>(a);
  if (rows.size() == 1) {
    rows.push_back({mpz_class(1), av});
    return;
  }
  const auto& last = rows[rows.size() - 1];
  const auto& prev = rows[rows.size() - 2];
  rows.push_back({av * last.p + prev.p, av * last.q + prev.q});
}

}  // namespace

ConvergentTable ConvergentTable::build(const PartialQuotientSeq& pq) {
  if (pq.quotients.empty()) throw Error(ErrorKind::PreconditionViolation, "empty quotient sequence");
  ConvergentTable t;
  t.source_ = pq;
  t.depth_ = pq.quotients.size();
  t.quotients_ = pq.quotients;
  t.rows_.push_back({mpz_class(0), mpz_class(1)});
  for (auto a : t.quotients_) append_row(t.rows_, a);

  constexpr unsigned long kTargetBits = kFracBits + 8;
  if (pq.is_periodic()) {
    const mpz_class target = pow2(kTargetBits);
    while (t.rows_.size() < t.depth_ + 3 || t.rows_.back().q * t.rows_.back().q <= target) {
      const std::uint64_t a = pq.quotient(t.quotients_.size() + 1);
      t.quotients_.push_back(a);
      append_row(t.rows_, a);
    }
  }
  const auto& deepest = t.rows_.back();
  t.exact_rational_ = pq.source == QuotientSource::Explicit || pq.terminated;
  t.alpha_error_log2_ = t.exact_rational_ ? -std::numeric_limits<double>::infinity()
                                          : -2.0 * log_mpz(deepest.q) / std::numbers::ln2;
  t.alpha_ = Fixed::from_ratio(deepest.p, deepest.q);
  if (t.alpha_.whole() != 0) {
    throw Error(ErrorKind::PreconditionViolation, "alpha must lie in (0,1)");
  }
  return t;
}

ConvergentTable convergents(const PartialQuotientSeq& pq) { return ConvergentTable::build(pq); }

double ConvergentTable::log_q(std::size_t i) const { return log_mpz(q(i)); }

std::uint64_t ConvergentTable::q_small(std::size_t i) const {
  const auto& v = q(i);
  if (!v.fits_ulong_p()) throw Error(ErrorKind::OverflowGuard, "q_" + std::to_string(i) + " exceeds 64 bits");
  return v.get_ui();
}

int ConvergentTable::sign_alpha_minus_convergent(std::size_t n) const {
  const std::size_t m = rows_.size() - 1;
  if (n > m || (n == m && !exact_rational_)) {
    throw Error(ErrorKind::PreconditionViolation,
                "level " + std::to_string(n) + " needs a deeper convergent for an exact comparison");
  }
  // alpha and p_m/q_m lie on the same side of every earlier convergent.
  const mpz_class lhs = rows_[m].p * rows_[n].q;
  const mpz_class rhs = rows_[n].p * rows_[m].q;
  return cmp(lhs, rhs) < 0 ? -1 : (cmp(lhs, rhs) > 0 ? 1 : 0);
}

int ConvergentTable::displacement_sign(std::size_t n) const {
  // q_n alpha - p_n has the sign of alpha - p_n/q_n: negative at odd levels.
  const int parity_sign = (n % 2 == 1) ? -1 : 1;
  const int exact = sign_alpha_minus_convergent(n);
  if (exact != parity_sign) {
    throw std::logic_error("convergent parity disagrees with exact comparison at level " + std::to_string(n));
  }
  return parity_sign;
}

Fixed ConvergentTable::rotation(const mpz_class& k) const {
  mpz_class prod = alpha_.scaled() * k;
  mpz_fdiv_r_2exp(prod.get_mpz_t(), prod.get_mpz_t(), kFracBits);
  return Fixed::from_scaled(prod);
}

Fixed ConvergentTable::displacement_magnitude(std::size_t n) const {
  const Fixed r = rotation(q(n));
  return displacement_sign(n) < 0 ? circle_neg(r) : r;
}

TableCheck verify_table(const ConvergentTable& table) {
  TableCheck out;
  const std::size_t m = table.size() - 1;
  auto fail = [&](bool& flag, std::string msg) {
    flag = false;
    out.failures.push_back(std::move(msg));
  };

  if (table.q(0) != 1 || table.p(0) != 0) fail(out.recurrence, "row 0 must be (p,q) = (0,1)");
  if (m >= 1 && (table.q(1) != static_cast<unsigned long>(table.quotient(1)) || table.p(1) != 1)) {
    fail(out.recurrence, "row 1 must be (1, a_1)");
  }
  for (std::size_t i = 1; i + 1 <= m; ++i) {
    const mpz_class a = static_cast<unsigned long>(table.quotient(i + 1));
    if (table.q(i + 1) != a * table.q(i) + table.q(i - 1) || table.p(i + 1) != a * table.p(i) + table.p(i - 1)) {
      fail(out.recurrence, "recurrence broken at row " + std::to_string(i + 1));
    }
  }

  for (std::size_t i = 1; i <= m; ++i) {
    const mpz_class det = table.p(i) * table.q(i - 1) - table.p(i - 1) * table.q(i);
    const int expected = (i % 2 == 1) ? 1 : -1;
    if (det != expected) fail(out.determinant, "determinant identity broken at row " + std::to_string(i));
  }

  // Sandwich: for inexact alpha, alpha lies strictly between the two deepest
  // convergents and both endpoints must satisfy the bound.
  std::vector<mpq_class> candidates;
  if (table.exact_rational()) {
    candidates.emplace_back(table.p(m), table.q(m));
  } else {
    candidates.emplace_back(table.p(m), table.q(m));
    candidates.emplace_back(table.p(m - 1), table.q(m - 1));
  }
  for (auto& c : candidates) c.canonicalize();
  const std::size_t sandwich_end = table.exact_rational() ? m : m - 1;
  for (std::size_t i = 0; i < sandwich_end; ++i) {
    mpq_class conv(table.p(i), table.q(i));
    conv.canonicalize();
    const mpq_class qq = mpq_class(table.q(i) * table.q(i + 1), 1);
    const mpq_class upper = 1 / qq;
    const mpq_class lower = upper / 2;
    for (const auto& alpha : candidates) {
      const mpq_class gap = abs(alpha - conv);
      if (!(gap > lower)) fail(out.sandwich, "lower sandwich bound fails at level " + std::to_string(i));
      if (gap == upper && table.exact_rational() && i + 1 == m) {
        out.sandwich_upper_attained_at_end = true;
      } else if (gap == upper && !table.exact_rational() && i + 2 == m && &alpha == &candidates[1]) {
        // p_{m-1}/q_{m-1} is an endpoint of the enclosure, not alpha itself;
        // the strict bound at p_m/q_m carries over to the interior.
      } else if (!(gap < upper)) {
        fail(out.sandwich, "upper sandwich bound fails at level " + std::to_string(i));
      }
    }
  }

  // q_i >= 1.6^(i-2)  <=>  q_i 5^(i-2) >= 8^(i-2).
  for (std::size_t i = 2; i <= m; ++i) {
    mpz_class five, eight;
    mpz_ui_pow_ui(five.get_mpz_t(), 5, i - 2);
    mpz_ui_pow_ui(eight.get_mpz_t(), 8, i - 2);
    if (table.q(i) * five < eight) fail(out.growth, "growth bound fails at row " + std::to_string(i));
  }

  mpz_class prod = 1;
  for (std::size_t n = 1; n <= m; ++n) {
    prod *= static_cast<unsigned long>(table.quotient(n));
    mpz_class upper = prod;
    mpz_mul_2exp(upper.get_mpz_t(), upper.get_mpz_t(), n);
    if (table.q(n) < prod || table.q(n) > upper) {
      fail(out.product_bounds, "product bounds fail at level " + std::to_string(n));
    }
  }
  return out;
}

namespace {

bool hundredfold(const ConvergentTable& t, std::size_t n) { return t.q(n + 1) >= t.q(n) * 100; }

}  // namespace

std::vector<std::size_t> h_set(const ConvergentTable& table, bool mirrored) {
  std::vector<std::size_t> out;
  for (std::size_t n = 0; n < table.depth(); ++n) {
    // Odd convergents exceed alpha (p_0/q_0 = 0 < alpha).
    const bool above = n % 2 == 1;
    const int exact = table.sign_alpha_minus_convergent(n);
    if ((above && exact != -1) || (!above && exact != 1)) {
      throw std::logic_error("convergent parity disagrees with exact comparison at level " + std::to_string(n));
    }
    const bool order_ok = mirrored ? !above : above;
    if (order_ok && hundredfold(table, n)) out.push_back(n);
  }
  return out;
}

std::vector<std::size_t> h_set_exact(const ConvergentTable& table, bool mirrored) {
  std::vector<std::size_t> out;
  for (std::size_t n = 0; n < table.depth(); ++n) {
    const int s = table.sign_alpha_minus_convergent(n);
    const bool order_ok = mirrored ? s > 0 : s < 0;
    if (order_ok && hundredfold(table, n)) out.push_back(n);
  }
  return out;
}

AlphaProfile check_conditions(const ConvergentTable& table,
                              const std::optional<std::vector<std::size_t>>& subsequence, bool mirrored) {
  AlphaProfile out;
  const std::size_t depth = table.depth();
  out.mirrored = mirrored;
  out.quotients.assign(table.source().quotients.begin(), table.source().quotients.end());
  out.h_set = h_set(table, mirrored);

  SeriesTrend& s = out.series;
  s.first_level = depth + 1;
  for (std::size_t n = 1; n <= depth; ++n) {
    if (table.q(n) > 1) {
      s.first_level = n;
      break;
    }
  }
  double acc = 0.0;
  std::vector<double> xs;
  for (std::size_t n = s.first_level; n <= depth; ++n) {
    acc += 1.0 / table.log_q(n);
    if (!s.partial_sums.empty() && acc <= s.partial_sums.back()) s.monotone = false;
    s.partial_sums.push_back(acc);
    xs.push_back(std::log(static_cast<double>(n)));
  }
  if (xs.size() >= 2) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      mx += xs[i];
      my += s.partial_sums[i];
    }
    mx /= static_cast<double>(xs.size());
    my /= static_cast<double>(xs.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxy += (xs[i] - mx) * (s.partial_sums[i] - my);
      sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    s.fitted_log_slope = sxx > 0 ? sxy / sxx : 0.0;
  }
  s.unbounded_trend = s.monotone && s.fitted_log_slope > kTrendSlopeFloor;

  if (subsequence) {
    SubsequenceReport r;
    r.levels = *subsequence;
    if (r.levels.empty()) throw Error(ErrorKind::SubsequenceOutOfRange, "empty subsequence");
    double density = std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (std::size_t k = 0; k < r.levels.size(); ++k) {
      const std::size_t n = r.levels[k];
      if (n == 0 || n > depth) {
        throw Error(ErrorKind::SubsequenceOutOfRange, "level " + std::to_string(n) + " outside 1.." + std::to_string(depth));
      }
      if (k > 0 && n <= r.levels[k - 1]) {
        throw Error(ErrorKind::SubsequenceOutOfRange, "subsequence must be strictly increasing");
      }
      if (table.q(n) <= 1) {
        throw Error(ErrorKind::SubsequenceOutOfRange, "level " + std::to_string(n) + " has log q_n = 0");
      }
      density = std::min(density, static_cast<double>(k + 1) / static_cast<double>(n));
      sum += 1.0 / table.log_q(n);
      r.partial_sums.push_back(sum);
    }
    r.lower_density = density;
    r.all_in_h = std::all_of(r.levels.begin(), r.levels.end(), [&](std::size_t n) {
      return std::binary_search(out.h_set.begin(), out.h_set.end(), n);
    });
    out.subsequence = std::move(r);
  }

  for (std::size_t i = 1; i <= depth; ++i) out.max_quotient = std::max(out.max_quotient, table.quotient(i));
  out.bounded_type = out.max_quotient <= kBoundedTypeCap;

  for (std::size_t n = s.first_level; n < depth; ++n) {
    out.liouville_score = std::max(out.liouville_score, table.log_q(n + 1) / table.log_q(n));
  }
  for (std::size_t n = 1; n <= depth; ++n) out.levy_sequence.push_back(table.log_q(n) / static_cast<double>(n));
  out.product_bounds = verify_table(table).product_bounds;
  return out;
}

double gauss_prediction(std::uint64_t k) {
  const double kk = static_cast<double>(k);
  return std::log((kk + 1) * (kk + 1) / (kk * (kk + 2))) / std::numbers::ln2;
}

namespace {

mpz_class random_bits(Stream& stream, int bits) {
  mpz_class m = 0;
  for (int filled = 0; filled < bits; filled += 64) {
    mpz_mul_2exp(m.get_mpz_t(), m.get_mpz_t(), 64);
    m += mpz_class(static_cast<unsigned long>(stream.bits()));
  }
  return m;
}

}  // namespace

PartialQuotientSeq random_expansion(std::uint64_t seed, std::string_view name, std::uint64_t index,
                                    std::size_t digits, int precision_bits, std::size_t* raises) {
  if (precision_bits < 64 || precision_bits % 64 != 0) {
    throw Error(ErrorKind::PreconditionViolation, "precision must be a positive multiple of 64 bits");
  }
  Stream stream(seed, name, index);
  int bits = precision_bits;
  mpz_class m = random_bits(stream, bits);
  if (sgn(m) == 0) m = 1;
  for (;;) {
    try {
      auto pq = expand(FractionalValue::dyadic(m, bits), digits);
      pq.precision_bits = bits;
      return pq;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::PrecisionExhausted || bits >= (1 << 16)) throw;
      // Refine the same point: append fresh low-order bits.
      mpz_mul_2exp(m.get_mpz_t(), m.get_mpz_t(), static_cast<mp_bitcnt_t>(bits));
      m += random_bits(stream, bits);
      bits *= 2;
      if (raises) ++*raises;
    }
  }
}

GaussStats gauss_digit_stats(std::size_t ensemble, std::size_t digits_per_sample, std::uint64_t seed,
                             int precision_bits, std::uint64_t kmax) {
  if (ensemble == 0 || digits_per_sample == 0) {
    throw Error(ErrorKind::PreconditionViolation, "ensemble and digit counts must be positive");
  }
  GaussStats out;
  out.ensemble = ensemble;
  out.digits_per_sample = digits_per_sample;
  out.seed = seed;
  std::vector<std::vector<std::uint64_t>> counts(ensemble, std::vector<std::uint64_t>(kmax + 2, 0));
  std::vector<std::size_t> raises(ensemble, 0);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t i = 0; i < ensemble; ++i) {
    const auto pq = random_expansion(seed, "contfrac:gauss", i, digits_per_sample, precision_bits, &raises[i]);
    for (auto a : pq.quotients) ++counts[i][a <= kmax ? a : kmax + 1];
  }
  std::vector<std::uint64_t> total(kmax + 2, 0);
  for (std::size_t i = 0; i < ensemble; ++i) {
    for (std::size_t k = 0; k < total.size(); ++k) total[k] += counts[i][k];
    out.precision_raises += raises[i];
  }
  for (std::size_t k = 1; k <= kmax + 1; ++k) out.total_digits += total[k];
  for (std::uint64_t k = 1; k <= kmax; ++k) {
    out.rows.push_back({k, total[k], static_cast<double>(total[k]) / static_cast<double>(out.total_digits),
                        gauss_prediction(k)});
  }
  out.tail_count = total[kmax + 1];
  return out;
}

LevyStats levy_estimate(std::size_t ensemble, std::size_t depth, std::uint64_t seed, int precision_bits) {
  if (ensemble == 0 || depth == 0) throw Error(ErrorKind::PreconditionViolation, "ensemble and depth must be positive");
  LevyStats out;
  out.ensemble = ensemble;
  out.depth = depth;
  out.seed = seed;
  std::vector<double> values(ensemble, 0.0);
  std::vector<std::size_t> raises(ensemble, 0);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::size_t i = 0; i < ensemble; ++i) {
    const auto pq = random_expansion(seed, "contfrac:levy", i, depth, precision_bits, &raises[i]);
    mpz_class qm1 = 0, q0 = 1, q;
    for (auto a : pq.quotients) {
      q = static_cast<unsigned long>(a) * q0 + qm1;
      qm1 = std::move(q0);
      q0 = std::move(q);
    }
    values[i] = log_mpz(q0) / static_cast<double>(pq.quotients.size());
  }
  double sum = 0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(ensemble);
  double ss = 0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.sd = ensemble > 1 ? std::sqrt(ss / static_cast<double>(ensemble - 1)) : 0.0;
  out.standard_error = out.sd / std::sqrt(static_cast<double>(ensemble));
  for (auto r : raises) out.precision_raises += r;
  return out;
}

}  // namespace logcascade::contfrac
