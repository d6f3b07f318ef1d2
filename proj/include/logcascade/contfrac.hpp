#pragma once

// Exact continued-fraction engine: certified digit expansion, convergent
// tables with big-integer rows, the level set H(alpha) and almost-every-alpha
// statistics.

#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string_view>
#include <vector>

#include <gmpxx.h>

#include "logcascade/fixed.hpp"

namespace logcascade::contfrac {

enum class QuotientSource { Explicit, Periodic, Expanded };

const char* to_string(QuotientSource source);

struct PartialQuotientSeq {
  std::vector<std::uint64_t> quotients;  // a_1 .. a_N
  QuotientSource source = QuotientSource::Explicit;
  // Periodic source: a_i runs through `preperiod`, then `period` forever.
  std::vector<std::uint64_t> preperiod;
  std::vector<std::uint64_t> period;
  bool terminated = false;  // expansion of a rational ended early
  int precision_bits = 0;   // expanded source: bits of the input value

  static PartialQuotientSeq explicit_list(std::vector<std::uint64_t> quotients);
  static PartialQuotientSeq periodic(std::vector<std::uint64_t> preperiod,
                                     std::vector<std::uint64_t> period, std::size_t depth);

  bool is_periodic() const noexcept { return source == QuotientSource::Periodic; }
  // a_i for i >= 1; periodic sources continue past `quotients`.
  std::uint64_t quotient(std::size_t i) const;
  // Value of the finite expansion [0; a_1, ..., a_N].
  mpq_class value() const;
};

// Rewrites [..., a, 1] as [..., a + 1]; the result never ends in 1 unless it
// is the single quotient 1.
PartialQuotientSeq canonicalize(PartialQuotientSeq pq);

// "1,100:repeat" (periodic), "3|1,2:repeat" (preperiod | period) or
// "1,2,3" (explicit). Zero quotients are rejected.
PartialQuotientSeq parse_quotients(std::string_view spec, std::size_t depth);

// A real number known to lie in the closed interval [lo, hi], 0 < lo <= hi < 1.
struct FractionalValue {
  mpq_class lo;
  mpq_class hi;

  static FractionalValue exact(const mpq_class& x);
  // [m, m + 1] / 2^bits.
  static FractionalValue dyadic(const mpz_class& m, int bits);
  bool is_exact() const { return lo == hi; }
};

// First n_max digits of x, each certified for every point of the interval.
// Throws PrecisionExhausted when the interval no longer determines a digit.
PartialQuotientSeq expand(const FractionalValue& x, std::size_t n_max);

struct ConvergentRow {
  mpz_class p;
  mpz_class q;
};

class ConvergentTable {
 public:
  // The convergents operation. Periodic sources are extended internally until
  // the fixed-point alpha is accurate to 2^-(W+8).
  static ConvergentTable build(const PartialQuotientSeq& pq);

  std::size_t depth() const noexcept { return depth_; }
  std::size_t size() const noexcept { return rows_.size(); }
  const ConvergentRow& row(std::size_t i) const { return rows_.at(i); }
  const mpz_class& p(std::size_t i) const { return rows_.at(i).p; }
  const mpz_class& q(std::size_t i) const { return rows_.at(i).q; }
  std::uint64_t quotient(std::size_t i) const { return quotients_.at(i - 1); }
  double log_q(std::size_t i) const;
  // q_i as uint64; throws when it does not fit.
  std::uint64_t q_small(std::size_t i) const;

  const Fixed& alpha() const noexcept { return alpha_; }
  // log2 of the bound on |alpha - p_M/q_M| for the deepest row M; -inf when
  // alpha is that rational exactly.
  double alpha_error_log2() const noexcept { return alpha_error_log2_; }
  bool exact_rational() const noexcept { return exact_rational_; }
  const PartialQuotientSeq& source() const noexcept { return source_; }

  // Sign of alpha - p_n/q_n from an exact big-integer comparison against the
  // deepest available convergent (independent of parity).
  int sign_alpha_minus_convergent(std::size_t n) const;
  // Signed q_n alpha - p_n: magnitude as a fixed-point fraction, sign by parity
  // (cross-checked against the exact comparison).
  Fixed displacement_magnitude(std::size_t n) const;
  int displacement_sign(std::size_t n) const;
  // frac(k * alpha) for a big-integer k.
  Fixed rotation(const mpz_class& k) const;

 private:
  PartialQuotientSeq source_;
  std::vector<std::uint64_t> quotients_;
  std::vector<ConvergentRow> rows_;
  std::size_t depth_ = 0;
  Fixed alpha_;
  double alpha_error_log2_ = 0.0;
  bool exact_rational_ = false;
};

ConvergentTable convergents(const PartialQuotientSeq& pq);

struct TableCheck {
  bool recurrence = true;
  bool determinant = true;
  bool sandwich = true;
  bool growth = true;
  bool product_bounds = true;
  // Terminating expansions attain the upper sandwich bound at the last level.
  bool sandwich_upper_attained_at_end = false;
  std::vector<std::string> failures;
  bool ok() const {
    return recurrence && determinant && sandwich && growth && product_bounds;
  }
};

// Exact big-integer verification of every ConvergentTable invariant.
TableCheck verify_table(const ConvergentTable& table);

// Levels n < depth with q_{n+1} >= 100 q_n and alpha < p_n/q_n (alpha >
// p_n/q_n when mirrored). Parity decides the order relation; every level is
// asserted against the exact comparison.
std::vector<std::size_t> h_set(const ConvergentTable& table, bool mirrored = false);
// Same set decided only by cross-multiplication against the deepest row.
std::vector<std::size_t> h_set_exact(const ConvergentTable& table, bool mirrored = false);

struct SeriesTrend {
  std::size_t first_level = 0;        // first n with q_n > 1
  std::vector<double> partial_sums;   // S_m = sum_{first<=n<=m} 1/log q_n
  double fitted_log_slope = 0.0;      // least squares slope of S_m against log m
  bool monotone = true;
  bool unbounded_trend = false;       // monotone with slope above kTrendSlopeFloor
};

inline constexpr double kTrendSlopeFloor = 0.05;
inline constexpr std::uint64_t kBoundedTypeCap = 1000;

struct SubsequenceReport {
  std::vector<std::size_t> levels;
  double lower_density = 0.0;        // min over prefixes of k / n_k
  std::vector<double> partial_sums;  // partial sums of 1/log q_{n_k}
  bool all_in_h = false;
};

struct AlphaProfile {
  std::vector<std::uint64_t> quotients;
  std::vector<std::size_t> h_set;
  bool mirrored = false;
  SeriesTrend series;
  std::optional<SubsequenceReport> subsequence;
  std::uint64_t max_quotient = 0;
  bool bounded_type = false;  // max quotient over the window <= kBoundedTypeCap
  double liouville_score = 0.0;
  std::vector<double> levy_sequence;  // log q_n / n, n = 1..depth
  bool product_bounds = false;
};

AlphaProfile check_conditions(const ConvergentTable& table,
                              const std::optional<std::vector<std::size_t>>& subsequence = std::nullopt,
                              bool mirrored = false);

inline constexpr double kLevyConstant = std::numbers::pi * std::numbers::pi / (12.0 * std::numbers::ln2);

// Gauss measure of [1/(k+1), 1/k).
double gauss_prediction(std::uint64_t k);

struct GaussDigitRow {
  std::uint64_t digit = 0;
  std::uint64_t count = 0;
  double frequency = 0.0;
  double prediction = 0.0;
};

struct GaussStats {
  std::size_t ensemble = 0;
  std::size_t digits_per_sample = 0;
  std::uint64_t seed = 0;
  std::uint64_t total_digits = 0;
  std::vector<GaussDigitRow> rows;  // digits 1..kmax
  std::uint64_t tail_count = 0;     // digits above kmax
  std::size_t precision_raises = 0;
};

GaussStats gauss_digit_stats(std::size_t ensemble, std::size_t digits_per_sample, std::uint64_t seed,
                             int precision_bits = 512, std::uint64_t kmax = 20);

struct LevyStats {
  std::size_t ensemble = 0;
  std::size_t depth = 0;
  std::uint64_t seed = 0;
  double mean = 0.0;
  double sd = 0.0;
  double standard_error = 0.0;
  std::size_t precision_raises = 0;
};

LevyStats levy_estimate(std::size_t ensemble, std::size_t depth, std::uint64_t seed,
                        int precision_bits = 512);

// Digits of a uniformly random point at `precision_bits`, raising precision
// on ambiguity. Exposed for tests; stream naming matches the ensembles.
PartialQuotientSeq random_expansion(std::uint64_t seed, std::string_view stream, std::uint64_t index,
                                    std::size_t digits, int precision_bits, std::size_t* raises = nullptr);

double log_mpz(const mpz_class& v);

}  // namespace logcascade::contfrac
