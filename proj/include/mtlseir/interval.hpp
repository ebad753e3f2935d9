#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <utility>

namespace mtlseir {

// Closed interval [lo, hi] with plain round-to-nearest endpoints. Callers that
// need containment under floating point compare with a small tolerance.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  constexpr Interval() = default;
  constexpr Interval(double v) : lo(v), hi(v) {} // NOLINT(google-explicit-constructor)
  constexpr Interval(double l, double h) : lo(l), hi(h) {}

  static Interval checked(double l, double h) {
    if (!(l <= h)) throw std::invalid_argument("interval lower bound exceeds upper bound");
    return {l, h};
  }

  constexpr double mid() const { return 0.5 * (lo + hi); }
  constexpr double width() const { return hi - lo; }
  constexpr double radius() const { return 0.5 * (hi - lo); }
  constexpr bool contains(double v) const { return lo <= v && v <= hi; }
  constexpr bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
  constexpr bool is_point() const { return lo == hi; }

  friend constexpr bool operator==(const Interval&, const Interval&) = default;
};

inline Interval operator+(const Interval& a, const Interval& b) { return {a.lo + b.lo, a.hi + b.hi}; }
inline Interval operator-(const Interval& a, const Interval& b) { return {a.lo - b.hi, a.hi - b.lo}; }
inline Interval operator-(const Interval& a) { return {-a.hi, -a.lo}; }

inline Interval operator*(const Interval& a, const Interval& b) {
  if (a.is_point() && b.is_point()) return Interval(a.lo * b.lo);
  const double p1 = a.lo * b.lo, p2 = a.lo * b.hi, p3 = a.hi * b.lo, p4 = a.hi * b.hi;
  return {std::min({p1, p2, p3, p4}), std::max({p1, p2, p3, p4})};
}

// Division by an interval that is bounded away from zero. `floor` is the
// smallest admissible magnitude of the divisor; anything closer to zero is
// rejected by the caller's domain check, never silently widened.
inline Interval divide_positive(const Interval& a, const Interval& b, double floor) {
  if (!(b.lo > floor)) throw std::domain_error("interval divisor reaches the zero floor");
  if (a.is_point() && b.is_point()) return Interval(a.lo / b.lo);
  const double p1 = a.lo / b.lo, p2 = a.lo / b.hi, p3 = a.hi / b.lo, p4 = a.hi / b.hi;
  return {std::min({p1, p2, p3, p4}), std::max({p1, p2, p3, p4})};
}

inline Interval hull(const Interval& a, const Interval& b) {
  return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
}

// Intersection of two intervals known to overlap up to rounding. When rounding
// makes them disjoint by a hair the result is the gap between them, which
// touches both.
inline Interval meet(const Interval& a, const Interval& b) {
  Interval r{std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
  if (r.lo > r.hi) std::swap(r.lo, r.hi);
  return r;
}

/// Largest absolute value in the interval.
inline double magnitude(const Interval& a) { return std::max(std::abs(a.lo), std::abs(a.hi)); }

inline Interval min(const Interval& a, const Interval& b) {
  return {std::min(a.lo, b.lo), std::min(a.hi, b.hi)};
}

inline Interval max(const Interval& a, const Interval& b) {
  return {std::max(a.lo, b.lo), std::max(a.hi, b.hi)};
}

inline std::ostream& operator<<(std::ostream& os, const Interval& x) {
  return os << '[' << x.lo << ", " << x.hi << ']';
}

} // namespace mtlseir
