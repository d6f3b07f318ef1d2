#pragma once

// Finite unions of half-open arcs of [0, 1) with exact fixed-point endpoints.

#include <cstddef>
#include <vector>

#include "logcascade/fixed.hpp"

namespace logcascade {

// [lo, hi) with lo < hi <= 1.
struct Arc {
  Fixed lo;
  Fixed hi;
  Fixed length() const noexcept { return hi - lo; }
  friend bool operator==(const Arc&, const Arc&) = default;
};

class IntervalSet {
 public:
  IntervalSet() = default;

  // Normalizes: drops empty arcs, sorts, merges overlapping or touching ones.
  static IntervalSet from_arcs(std::vector<Arc> arcs);
  // Circle arc from `left` to `right`; wraps through 0 when right < left.
  static IntervalSet circle_arc(const Fixed& left, const Fixed& right);
  static IntervalSet full();

  const std::vector<Arc>& arcs() const noexcept { return arcs_; }
  std::size_t size() const noexcept { return arcs_.size(); }
  bool empty() const noexcept { return arcs_.empty(); }

  Fixed measure() const noexcept;  // exact
  double measure_double() const noexcept { return measure().to_double(); }
  bool contains(const Fixed& x) const noexcept;

  IntervalSet unite(const IntervalSet& o) const;
  IntervalSet intersect(const IntervalSet& o) const;
  IntervalSet complement() const;
  // x -> x + shift mod 1, exact.
  IntervalSet translate(const Fixed& shift) const;
  // Arcs of this set meeting [lo, hi), clipped to it.
  IntervalSet clip(const Fixed& lo, const Fixed& hi) const;

  friend bool operator==(const IntervalSet&, const IntervalSet&) = default;

 private:
  std::vector<Arc> arcs_;
};

IntervalSet unite_all(const std::vector<IntervalSet>& sets);

}  // namespace logcascade
