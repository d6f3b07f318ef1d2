#include "doctest.h"

#include <algorithm>
#include <bitset>
#include <cmath>
#include <map>
#include <tuple>

#include "logcascade/error.hpp"
#include "logcascade/essval_probe.hpp"
#include "logcascade/rng.hpp"

using namespace logcascade;
using contfrac::convergents;
using contfrac::parse_quotients;

namespace {

const contfrac::ConvergentTable& alpha_star() {
  static const auto t = convergents(parse_quotients("1,100:repeat", 8));
  return t;
}

constexpr int kBits = 1024;
using Mask = std::bitset<kBits>;

Fixed grid(int k) { return k == kBits ? Fixed::one() : Fixed::from_ratio(mpz_class(k), mpz_class(kBits)); }

// Random circle arcs on the 1/1024 grid, as a set and as a cell mask.
std::pair<IntervalSet, Mask> random_set(Stream& s, int arcs) {
  IntervalSet set;
  Mask mask;
  for (int i = 0; i < arcs; ++i) {
    const int lo = static_cast<int>(s.below(kBits));
    const int len = 1 + static_cast<int>(s.below(120));
    set = set.unite(IntervalSet::circle_arc(grid(lo), grid((lo + len) % kBits)));
    for (int k = 0; k < len; ++k) mask.set((lo + k) % kBits);
  }
  return {set, mask};
}

Mask to_mask(const IntervalSet& s) {
  Mask m;
  for (int k = 0; k < kBits; ++k) {
    if (s.contains(grid(k))) m.set(k);
  }
  return m;
}

Fixed mask_measure(const Mask& m) { return Fixed::from_ratio(mpz_class(static_cast<unsigned long>(m.count())), mpz_class(kBits)); }

const LevelSetFamily& family(std::size_t n, double a, double eps, LevelSetMode mode) {
  static std::map<std::tuple<std::size_t, double, double, int>, LevelSetFamily> cache;
  const auto key = std::make_tuple(n, a, eps, static_cast<int>(mode));
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  LevelSetOptions opt;
  opt.mode = mode;
  return cache.emplace(key, locate_level_set(make_one_sided_phi(), alpha_star(), n, a, eps, opt)).first->second;
}

}  // namespace

TEST_CASE("interval set operations agree with cell masks") {
  Stream s(99, "test:intervals");
  for (int trial = 0; trial < 200; ++trial) {
    auto [a, ma] = random_set(s, 1 + static_cast<int>(s.below(6)));
    auto [b, mb] = random_set(s, 1 + static_cast<int>(s.below(6)));
    CHECK(to_mask(a) == ma);
    CHECK(a.measure() == mask_measure(ma));
    CHECK(to_mask(a.unite(b)) == (ma | mb));
    CHECK(a.unite(b).measure() == mask_measure(ma | mb));
    CHECK(a.intersect(b).measure() == mask_measure(ma & mb));
    CHECK(a.complement().measure() == mask_measure(~ma));
    CHECK(a.complement().measure() == Fixed::one() - a.measure());
    const int shift = static_cast<int>(s.below(kBits));
    Mask shifted;
    for (int k = 0; k < kBits; ++k) {
      if (ma[k]) shifted.set((k + shift) % kBits);
    }
    CHECK(to_mask(a.translate(grid(shift))) == shifted);
    for (std::size_t i = 1; i < a.size(); ++i) CHECK(a.arcs()[i - 1].hi < a.arcs()[i].lo);
  }
}

TEST_CASE("interval set edge cases") {
  CHECK(IntervalSet{}.complement() == IntervalSet::full());
  CHECK(IntervalSet::full().complement().empty());
  CHECK(IntervalSet::full().measure() == Fixed::one());
  const auto wrap = parse_interval_set("0.9:0.1");
  CHECK(wrap.size() == 2);
  CHECK(wrap.measure_double() == doctest::Approx(0.2));
  CHECK(parse_interval_set("0.1:0.35").measure_double() == doctest::Approx(0.25));
  CHECK(parse_interval_set("0:1") == IntervalSet::full());
  CHECK_THROWS_AS(parse_interval_set("0.3"), Error);
  const auto j = to_json(wrap);
  CHECK(interval_set_from_json(j) == wrap);
}

TEST_CASE("A_n measures") {
  const auto a3 = build_An(family(3, 0.0, 0.9, LevelSetMode::Exact));
  CHECK(a3.set.size() == 102);
  CHECK(a3.prediction == doctest::Approx(1.8 / std::log(102.0)));
  CHECK(a3.set.measure_double() >= 0.25);
  CHECK(a3.set.measure_double() <= 0.55);
  const auto a5 = build_An(family(5, 0.0, 0.9, LevelSetMode::Translate));
  CHECK(a5.set.size() == 10403);
  CHECK(std::abs(a5.set.measure_double() / (1.8 / std::log(10403.0)) - 1.0) <= 0.35);
  const auto outer = build_An(family(5, 0.0, 0.9, LevelSetMode::Translate), Hull::Outer);
  const auto inner = build_An(family(5, 0.0, 0.9, LevelSetMode::Translate), Hull::Inner);
  CHECK(inner.set.measure() < a5.set.measure());
  CHECK(a5.set.measure() < outer.set.measure());
  CHECK(a5.set.intersect(inner.set) == inner.set);
  CHECK(build_An(family(3, 0.0, 0.0, LevelSetMode::Exact)).set.empty());
}

TEST_CASE("push forward by q_n alpha") {
  const auto& t = alpha_star();
  const auto a5 = build_An(family(5, 0.0, 0.9, LevelSetMode::Translate));
  const auto b5 = push_forward(a5.set, t, 5);
  CHECK(b5.sign < 0);
  CHECK(b5.displacement < 0);
  CHECK(b5.displacement_ok);
  CHECK(std::abs(b5.displacement) < 1.0 / 1050601.0);
  // |q alpha - p| for the surd, from its closed form
  const double qa = 10403 * (std::sqrt(2600.0) - 50.0);
  CHECK(std::abs(b5.displacement) == doctest::Approx(std::abs(qa - std::round(qa))).epsilon(1e-5));
  CHECK(b5.set.measure() == a5.set.measure());
  CHECK(pull_back(b5.set, t, 5) == a5.set);
  CHECK(push_forward(a5.set, t, 4).sign > 0);
}

TEST_CASE("hole accounting at levels 3 and 5") {
  const auto& t = alpha_star();
  const std::vector<LevelSet> sets = {build_An(family(3, 0.0, 0.9, LevelSetMode::Exact)),
                                      build_An(family(5, 0.0, 0.9, LevelSetMode::Translate))};
  const auto ledgers = hole_accounting(sets, t);
  REQUIRE(ledgers.size() == 2);
  for (const auto& h : ledgers) {
    CHECK(h.invariant);
    CHECK(h.good >= h.bad);
    CHECK(h.good + h.bad == h.holes.size());
  }
  CHECK(ledgers[0].next_level == 5);
  CHECK(ledgers[1].next_level == 7);
  CHECK(ledgers[0].threshold == doctest::Approx(6.0 / 10403));
  CHECK(ledgers[0].literal_threshold == doctest::Approx(6.0));
  CHECK(ledgers[0].holes.size() == 103);
  CHECK(ledgers[0].bad == 0);
  const auto& tr = ledgers[0];
  CHECK(tr.has_transition);
  CHECK(tr.good_checked == tr.good);
  CHECK(tr.spawn_failures == 0);
  CHECK(tr.excess_bad == 0);
  CHECK(tr.ratio_fraction >= 0.9);
  CHECK_FALSE(ledgers[1].has_transition);

  // Hole count oracle: gaps of the merged double-precision arcs.
  std::vector<std::pair<double, double>> arcs;
  for (const auto& s : sets) {
    for (const auto& a : s.set.arcs()) arcs.emplace_back(a.lo.to_double(), a.hi.to_double());
  }
  std::sort(arcs.begin(), arcs.end());
  std::size_t gaps = 0;
  double cursor = 0.0;
  for (const auto& [lo, hi] : arcs) {
    if (lo > cursor) ++gaps;
    cursor = std::max(cursor, hi);
  }
  if (cursor < 1.0) ++gaps;
  CHECK(ledgers[1].holes.size() == gaps);
}

TEST_CASE("hole accounting edge cases") {
  const auto& t = alpha_star();
  const auto a3 = build_An(family(3, 0.0, 0.9, LevelSetMode::Exact));
  const auto single = hole_accounting({a3}, t);
  REQUIRE(single.size() == 1);
  CHECK(single[0].bad <= single[0].good);
  const auto a5 = build_An(family(5, 0.0, 0.9, LevelSetMode::Translate));
  CHECK_THROWS_AS(hole_accounting({a5, a3}, t), Error);
  try {
    hole_accounting({a3, a3}, t);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::LevelOrderViolation);
  }
  CHECK(hole_accounting({}, t).empty());
}

TEST_CASE("coverage and the conditional series") {
  const auto a3 = build_An(family(3, 0.0, 0.9, LevelSetMode::Exact));
  const auto a5 = build_An(family(5, 0.0, 0.9, LevelSetMode::Translate));
  const auto r = coverage({a3, a5}, 10);
  CHECK(r.monotone);
  CHECK(r.prefix_union[0] == doctest::Approx(a3.set.measure_double()));
  CHECK(r.prefix_union[1] >= r.prefix_union[0]);
  CHECK(r.prefix_union[1] == doctest::Approx(a3.set.unite(a5.set).measure_double()));
  CHECK(r.conditional_series >= 0.5 * r.measure_series);
  CHECK(r.bins.size() == 10);
  double mean = 0;
  for (double b : r.bins) mean += b / 10;
  CHECK(mean == doctest::Approx(r.prefix_union[1]).epsilon(1e-12));
  const auto swapped = coverage({a5, a3}, 10);
  CHECK(swapped.prefix_union.back() == r.prefix_union.back());
  CHECK(coverage({}).prefix_union.empty());
}

TEST_CASE("witness search") {
  const auto phi = make_one_sided_phi();
  const auto C = parse_interval_set("0.1:0.35");
  const std::vector<LevelSetFamily> fams = {family(3, 0.0, 0.5, LevelSetMode::Exact),
                                            family(5, 0.0, 0.5, LevelSetMode::Translate)};
  const auto w = witness_search(C, "0.1:0.35", phi, alpha_star(), fams);
  REQUIRE(w.found);
  CHECK(w.certified());
  CHECK(std::abs(w.birkhoff_value) < 0.5);
  CHECK(std::abs(rigid_sum(phi, alpha_star(), w.x, w.level).value - w.birkhoff_value) == 0.0);
  CHECK(std::abs(w.displacement) < w.displacement_bound);
  CHECK(C.contains(w.x));
  CHECK(C.contains(circle_add(w.x, alpha_star().rotation(alpha_star().q(w.level)))));
  const auto again = witness_search(C, "0.1:0.35", phi, alpha_star(), fams);
  CHECK(again.x == w.x);
  CHECK(again.l == w.l);

  const auto full = witness_search(IntervalSet::full(), "full", phi, alpha_star(), fams);
  CHECK(full.found);
  CHECK(full.level == 3);
  CHECK(full.l == 0);
  CHECK_THROWS_AS(witness_search(IntervalSet{}, "none", phi, alpha_star(), fams), Error);
}
