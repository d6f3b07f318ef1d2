#include "logcascade/intervals.hpp"

#include <algorithm>

namespace logcascade {

IntervalSet IntervalSet::from_arcs(std::vector<Arc> arcs) {
  std::erase_if(arcs, [](const Arc& a) { return !(a.lo < a.hi); });
  std::sort(arcs.begin(), arcs.end(), [](const Arc& a, const Arc& b) { return a.lo < b.lo; });
  IntervalSet out;
  for (const auto& a : arcs) {
    if (!out.arcs_.empty() && a.lo <= out.arcs_.back().hi) {
      if (a.hi > out.arcs_.back().hi) out.arcs_.back().hi = a.hi;
    } else {
      out.arcs_.push_back(a);
    }
  }
  return out;
}

IntervalSet IntervalSet::circle_arc(const Fixed& left, const Fixed& right) {
  const Fixed l = left.frac();
  const Fixed r = right.frac();
  if (l <= r) return from_arcs({{l, r}});
  return from_arcs({{Fixed{}, r}, {l, Fixed::one()}});
}

IntervalSet IntervalSet::full() {
  IntervalSet s;
  s.arcs_.push_back({Fixed{}, Fixed::one()});
  return s;
}

Fixed IntervalSet::measure() const noexcept {
  Fixed m;
  for (const auto& a : arcs_) m += a.length();
  return m;
}

bool IntervalSet::contains(const Fixed& x) const noexcept {
  auto it = std::upper_bound(arcs_.begin(), arcs_.end(), x, [](const Fixed& v, const Arc& a) { return v < a.lo; });
  if (it == arcs_.begin()) return false;
  --it;
  return x < it->hi;
}

IntervalSet IntervalSet::unite(const IntervalSet& o) const {
  std::vector<Arc> all;
  all.reserve(arcs_.size() + o.arcs_.size());
  std::merge(arcs_.begin(), arcs_.end(), o.arcs_.begin(), o.arcs_.end(), std::back_inserter(all),
             [](const Arc& a, const Arc& b) { return a.lo < b.lo; });
  return from_arcs(std::move(all));
}

IntervalSet IntervalSet::intersect(const IntervalSet& o) const {
  IntervalSet out;
  std::size_t i = 0, j = 0;
  while (i < arcs_.size() && j < o.arcs_.size()) {
    const Arc& a = arcs_[i];
    const Arc& b = o.arcs_[j];
    const Fixed lo = std::max(a.lo, b.lo);
    const Fixed hi = std::min(a.hi, b.hi);
    if (lo < hi) out.arcs_.push_back({lo, hi});
    if (a.hi < b.hi) {
      ++i;
    } else {
      ++j;
    }
  }
  return out;
}

IntervalSet IntervalSet::complement() const {
  IntervalSet out;
  Fixed cursor;
  for (const auto& a : arcs_) {
    if (cursor < a.lo) out.arcs_.push_back({cursor, a.lo});
    cursor = a.hi;
  }
  if (cursor < Fixed::one()) out.arcs_.push_back({cursor, Fixed::one()});
  return out;
}

IntervalSet IntervalSet::translate(const Fixed& shift) const {
  const Fixed s = shift.frac();
  std::vector<Arc> moved;
  moved.reserve(arcs_.size() + 1);
  for (const auto& a : arcs_) {
    const Fixed lo = a.lo + s;
    const Fixed hi = a.hi + s;
    if (hi <= Fixed::one()) {
      moved.push_back({lo, hi});
    } else if (lo >= Fixed::one()) {
      moved.push_back({lo - Fixed::one(), hi - Fixed::one()});
    } else {
      moved.push_back({lo, Fixed::one()});
      moved.push_back({Fixed{}, hi - Fixed::one()});
    }
  }
  return from_arcs(std::move(moved));
}

IntervalSet IntervalSet::clip(const Fixed& lo, const Fixed& hi) const {
  IntervalSet window;
  window.arcs_.push_back({lo, hi});
  return intersect(window);
}

IntervalSet unite_all(const std::vector<IntervalSet>& sets) {
  std::vector<Arc> all;
  for (const auto& s : sets) all.insert(all.end(), s.arcs().begin(), s.arcs().end());
  return IntervalSet::from_arcs(std::move(all));
}

}  // namespace logcascade
